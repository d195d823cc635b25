//! Parameter matrices of the linear canonical transform and its kernel.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, Scalar};

/// Absolute tolerance on `|ad - bc - 1|`.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// The real 2x2 matrix `M = (a, b; c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalMatrix<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

/// Which matrices are accepted by transform and filter operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixPolicy {
    /// `ad - bc = 1` and `b != 0`.
    #[default]
    Strict,
    /// Any nonzero determinant with `b != 0`; a unimodularity violation is
    /// reported as a warning instead of an error.
    Permissive,
}

/// One violated invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "invariant", rename_all = "snake_case")]
pub enum Violation {
    Unimodularity { det: f64 },
    ZeroB,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unimodularity { det } => write!(f, "ad - bc = {det} (expected 1)"),
            Violation::ZeroB => f.write_str("b = 0 branch out of scope"),
        }
    }
}

/// Outcome of [`CanonicalMatrix::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub det: f64,
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: Scalar> CanonicalMatrix<T> {
    /// Builds a matrix without checking it.
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    /// `(0, 1, -1, 0)`: the classical Fourier transform.
    pub fn fourier() -> Self {
        Self::new(T::zero(), T::one(), -T::one(), T::zero())
    }

    /// `(cos θ, sin θ, -sin θ, cos θ)`: the fractional Fourier transform.
    pub fn frft(theta: T) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        let turns = theta / T::PI();
        if (turns - turns.round()).abs() < T::lit(1e-12) {
            return Err(Error::DegenerateB);
        }
        Ok(Self::new(c, s, -s, c))
    }

    /// `(1, b, 0, 1)`: the Fresnel transform.
    pub fn fresnel(b: T) -> Result<Self> {
        if b == T::zero() {
            return Err(Error::DegenerateB);
        }
        Ok(Self::new(T::one(), b, T::zero(), T::one()))
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    /// Total check of both invariants.
    pub fn validate(&self) -> Validation {
        let det = self.det().as_f64();
        let mut violations = Vec::new();
        if !((det - 1.0).abs() <= UNIMODULAR_TOL) {
            violations.push(Violation::Unimodularity { det });
        }
        if self.b == T::zero() {
            violations.push(Violation::ZeroB);
        }
        Validation { det, violations }
    }

    /// Checks the matrix under `policy`. In permissive mode a non-unimodular
    /// matrix with nonzero determinant passes and the violation is returned
    /// as a warning.
    pub fn check(&self, policy: MatrixPolicy) -> Result<Option<Violation>> {
        let v = self.validate();
        if v.violations.contains(&Violation::ZeroB) {
            return Err(Error::DegenerateB);
        }
        match (v.violations.first(), policy) {
            (None, _) => Ok(None),
            (Some(w), MatrixPolicy::Permissive) if v.det != 0.0 && v.det.is_finite() => {
                Ok(Some(*w))
            }
            _ => Err(Error::NotUnimodular { det: v.det }),
        }
    }

    /// Fails when `b = 0`; the only requirement of the kernel and chirps.
    pub fn require_b(&self) -> Result<()> {
        if self.b == T::zero() || !self.b.is_finite() {
            Err(Error::DegenerateB)
        } else {
            Ok(())
        }
    }

    /// Matrix product `self * other`. Both factors must be unimodular; `b`
    /// may vanish here since the product is plain matrix algebra.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        for m in [self, other] {
            if let Some(Violation::Unimodularity { det }) = m.validate().violations.first() {
                return Err(Error::NotUnimodular { det: *det });
            }
        }
        Ok(self.mul(other))
    }

    fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Chirp rate `a/b` used by the translate and dilate operators.
    pub fn chirp_rate(&self) -> T {
        self.a / self.b
    }

    /// `1/√(2iπb)` with the principal square root.
    pub fn prefactor(&self) -> Complex<T> {
        let z = Complex::new(T::zero(), T::TAU() * self.b);
        z.sqrt().inv()
    }

    /// `K_M(t, ω) = (1/√(2iπb)) exp{i(a t² − 2tω + d ω²)/(2b)}`.
    pub fn kernel(&self, t: T, omega: T) -> Result<Complex<T>> {
        self.require_b()?;
        Ok(self.kernel_unchecked(t, omega))
    }

    #[inline]
    pub(crate) fn kernel_unchecked(&self, t: T, omega: T) -> Complex<T> {
        let two = T::lit(2.0);
        let phase = (self.a * t * t - two * t * omega + self.d * omega * omega) / (two * self.b);
        self.prefactor() * cis(phase)
    }

    /// Converts the entries to another scalar type.
    pub fn cast<U: Scalar>(&self) -> CanonicalMatrix<U> {
        CanonicalMatrix::new(
            U::lit(self.a.as_f64()),
            U::lit(self.b.as_f64()),
            U::lit(self.c.as_f64()),
            U::lit(self.d.as_f64()),
        )
    }
}

/// Named special cases accepted by [`special`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Special<T> {
    Fourier,
    Frft(T),
    Fresnel(T),
}

pub fn special<T: Scalar>(name: Special<T>) -> Result<CanonicalMatrix<T>> {
    match name {
        Special::Fourier => Ok(CanonicalMatrix::fourier()),
        Special::Frft(theta) => CanonicalMatrix::frft(theta),
        Special::Fresnel(b) => CanonicalMatrix::fresnel(b),
    }
}

impl<T: Scalar> fmt::Display for CanonicalMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.c, self.d)
    }
}

/// Parses `a,b,c,d`, or one of `fourier`, `frft:θ`, `fresnel:b`.
impl<T: Scalar + FromStr> FromStr for CanonicalMatrix<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |x: &str| {
            x.trim()
                .parse::<T>()
                .map_err(|_| Error::Format(format!("not a number: {x:?}")))
        };
        if s.eq_ignore_ascii_case("fourier") {
            return Ok(Self::fourier());
        }
        if let Some(rest) = s.strip_prefix("frft:") {
            return Self::frft(num(rest)?);
        }
        if let Some(rest) = s.strip_prefix("fresnel:") {
            return Self::fresnel(num(rest)?);
        }
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Format(format!(
                "expected four comma-separated entries a,b,c,d, got {s:?}"
            )));
        }
        Ok(Self::new(
            num(parts[0])?,
            num(parts[1])?,
            num(parts[2])?,
            num(parts[3])?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type M = CanonicalMatrix<f64>;

    #[test]
    fn example_matrices_validate() {
        assert!(M::fourier().validate().is_ok());
        let m = M::new(2.0, 1.0, 1.0, 1.0);
        let v = m.validate();
        assert!(v.is_ok());
        assert_eq!(v.det, 1.0);
    }

    #[test]
    fn example_two_matrix_is_flagged() {
        let m = M::new(0.0, 1.0, 2.0, -1.0);
        let v = m.validate();
        assert_eq!(v.det, -2.0);
        assert_eq!(v.violations, vec![Violation::Unimodularity { det: -2.0 }]);
        assert!(matches!(
            m.check(MatrixPolicy::Strict),
            Err(Error::NotUnimodular { det }) if det == -2.0
        ));
        assert!(matches!(
            m.check(MatrixPolicy::Permissive),
            Ok(Some(Violation::Unimodularity { .. }))
        ));
    }

    #[test]
    fn zero_b_rejected_even_when_permissive() {
        let m = M::identity();
        assert!(m.validate().violations.contains(&Violation::ZeroB));
        assert!(matches!(m.check(MatrixPolicy::Permissive), Err(Error::DegenerateB)));
        assert!(m.kernel(0.0, 0.0).is_err());
    }

    #[test]
    fn specials() {
        assert_eq!(special::<f64>(Special::Fourier).unwrap(), M::new(0.0, 1.0, -1.0, 0.0));
        let r = M::frft(std::f64::consts::FRAC_PI_2).unwrap();
        for (x, y) in [(r.a, 0.0), (r.b, 1.0), (r.c, -1.0), (r.d, 0.0)] {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
        assert_eq!(M::fresnel(2.0).unwrap(), M::new(1.0, 2.0, 0.0, 1.0));
        assert!(M::fresnel(0.0).is_err());
        assert!(M::frft(std::f64::consts::PI).is_err());
        assert!(M::frft(0.0).is_err());
    }

    #[test]
    fn compose_examples() {
        let f = M::fourier();
        assert_eq!(M::identity().compose(&f).unwrap(), f);
        assert_eq!(f.compose(&f).unwrap(), M::new(-1.0, 0.0, 0.0, -1.0));
        assert!(M::new(0.0, 1.0, 2.0, -1.0).compose(&f).is_err());
    }

    #[test]
    fn fourier_kernel_matches_substitution() {
        let m = M::fourier();
        let root_i = Complex::new(0.0, 2.0 * std::f64::consts::PI).sqrt();
        for &(t, w) in &[(0.3, -1.7), (2.0, 5.0), (-4.5, 0.25)] {
            let expect = Complex::from_polar(1.0, -t * w) / root_i;
            assert_abs_diff_eq!((m.kernel(t, w).unwrap() - expect).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn principal_branch_of_prefactor() {
        // 1/√(2πi) carries e^{-iπ/4}
        let p = M::fourier().prefactor();
        assert_abs_diff_eq!(p.arg(), -std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
        // b < 0 gives √(-2πi|b|) = √(2π|b|) e^{-iπ/4}
        let q = M::new(0.0, -1.0, 1.0, 0.0).prefactor();
        assert_abs_diff_eq!(q.arg(), std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn kernel_at_origin() {
        let m = M::new(2.0, 1.0, 1.0, 1.0);
        assert_eq!(m.kernel(0.0, 0.0).unwrap(), m.prefactor());
    }

    #[test]
    fn parse_forms() {
        assert_eq!("0,1,-1,0".parse::<M>().unwrap(), M::fourier());
        assert_eq!(" 2, 1, 1, 1 ".parse::<M>().unwrap(), M::new(2.0, 1.0, 1.0, 1.0));
        assert_eq!("fresnel:2".parse::<M>().unwrap(), M::new(1.0, 2.0, 0.0, 1.0));
        assert!("1,2,3".parse::<M>().is_err());
        assert!("a,b,c,d".parse::<M>().is_err());
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&M::new(2.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(s, r#"{"a":2.0,"b":1.0,"c":1.0,"d":1.0}"#);
        let back: M = serde_json::from_str(&s).unwrap();
        assert_eq!(back, M::new(2.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn single_precision_kernel_modulus() {
        let m = CanonicalMatrix::<f32>::new(2.0, 1.0, 1.0, 1.0);
        let k = m.kernel(0.7, -1.3).unwrap();
        let expect = 1.0 / (2.0 * std::f32::consts::PI).sqrt();
        assert!((k.norm() - expect).abs() < 1e-6);
    }
}
