//! Linear canonical transforms and nonuniform multiresolution analysis.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`, with `*32` variants for `f32`.

// Negated comparisons are how NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical;
pub mod error;
pub mod filters;
pub mod io;
pub mod lct;
pub mod packets;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod wavelets;

pub use canonical::{CanonicalMatrix, MatrixPolicy, Special, Validation, Violation};
pub use error::{Error, Result};
pub use filters::{Interval, OmegaPoint, PeriodicFilterPair, TranslationSet};
pub use lct::{LctSpectrum, Method};
pub use packets::{CertifiedBasis, CoefficientTable, PacketIndex, PacketNode};
pub use sampling::{Grid, SampledSignal, SparseElement};
pub use scalar::Scalar;
pub use wavelets::{Cascade, CascadeOptions, GramReport, ProductHat, Projection, WaveletFamily};

pub use num_complex::Complex;

pub type Matrix = CanonicalMatrix<f64>;
pub type Signal = SampledSignal<f64>;
pub type TimeGrid = Grid<f64>;
pub type Spectrum = LctSpectrum<f64>;
pub type FilterPair = PeriodicFilterPair<f64>;
pub type C64 = Complex<f64>;

pub type Matrix32 = CanonicalMatrix<f32>;
pub type Signal32 = SampledSignal<f32>;
pub type TimeGrid32 = Grid<f32>;
pub type Spectrum32 = LctSpectrum<f32>;
pub type FilterPair32 = PeriodicFilterPair<f32>;
