//! CSV and JSON files for signals, spectra, filters and coefficient tables.
//!
//! Floats are written with 17 significant digits. Every file is written to a
//! temporary sibling and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{PeriodicFilterPair, TranslationSet};
use crate::lct::LctSpectrum;
use crate::packets::{CoefficientRow, CoefficientTable};
use crate::sampling::{Grid, SampledSignal};
use crate::scalar::Scalar;

/// `{:.16e}` formatting of a scalar.
pub fn fmt_float<T: Scalar>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn write_json<S: Serialize + ?Sized>(path: &Path, value: &S) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// `phi.csv` → `phi.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    write_atomic(path, &bytes)
}

fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let got: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if got != header {
        return Err(Error::Format(format!(
            "{}: expected header {}, found {}",
            path.display(),
            header.join(","),
            got.join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::Format(format!("{}: row {}: {e}", path.display(), line + 2))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(Error::Format(format!("{}: row {} has {} fields", path.display(), line + 2, row.len())));
        }
        out.push(row);
    }
    Ok(out)
}

/// Grid implied by an evenly spaced abscissa column.
fn infer_grid<T: Scalar>(xs: &[f64], what: &Path) -> Result<Grid<T>> {
    if xs.len() < 2 {
        return Err(Error::Format(format!("{}: need at least two rows without a sidecar", what.display())));
    }
    let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    for (i, x) in xs.iter().enumerate() {
        if (x - (xs[0] + i as f64 * step)).abs() > 1e-9 * step.abs().max(1.0) {
            return Err(Error::Format(format!("{}: abscissae are not uniform at row {}", what.display(), i + 2)));
        }
    }
    Grid::new(T::lit(xs[0]), T::lit(step), xs.len())
}

fn complex_rows<'a, T: Scalar>(
    grid: &'a Grid<T>,
    values: &'a [Complex<T>],
) -> impl Iterator<Item = Vec<String>> + 'a {
    values
        .iter()
        .enumerate()
        .map(move |(i, v)| vec![fmt_float(grid.point(i)), fmt_float(v.re), fmt_float(v.im)])
}

fn load_complex<T: Scalar>(path: &Path, header: &[&str]) -> Result<(Grid<T>, Vec<Complex<T>>)> {
    let rows = read_csv(path, header)?;
    let side = sidecar_path(path);
    let grid = if side.exists() {
        let g: Grid<T> = read_json(&side)?;
        if g.count != rows.len() {
            return Err(Error::Format(format!(
                "{}: sidecar count {} but {} rows",
                path.display(),
                g.count,
                rows.len()
            )));
        }
        g
    } else {
        infer_grid(&rows.iter().map(|r| r[0]).collect::<Vec<_>>(), path)?
    };
    let values = rows.iter().map(|r| Complex::new(T::lit(r[1]), T::lit(r[2]))).collect();
    Ok((grid, values))
}

/// `t,re,im` plus the grid sidecar.
pub fn write_signal<T: Scalar>(path: &Path, f: &SampledSignal<T>) -> Result<()> {
    write_csv(path, &["t", "re", "im"], complex_rows(f.grid(), f.values()))?;
    write_json(&sidecar_path(path), f.grid())
}

pub fn read_signal<T: Scalar>(path: &Path) -> Result<SampledSignal<T>> {
    let (grid, values) = load_complex(path, &["t", "re", "im"])?;
    SampledSignal::new(grid, values)
}

/// `omega,re,im` plus the grid sidecar.
pub fn write_spectrum<T: Scalar>(path: &Path, s: &LctSpectrum<T>) -> Result<()> {
    write_csv(path, &["omega", "re", "im"], complex_rows(&s.omega, &s.values))?;
    write_json(&sidecar_path(path), &s.omega)
}

pub fn read_spectrum<T: Scalar>(path: &Path) -> Result<LctSpectrum<T>> {
    let (grid, values) = load_complex(path, &["omega", "re", "im"])?;
    LctSpectrum::new(grid, values)
}

/// `u,re1,im1,re2,im2` plus `{"N":…,"r":…}`.
pub fn write_filter<T: Scalar>(path: &Path, p: &PeriodicFilterPair<T>) -> Result<()> {
    let g = *p.u_grid();
    let rows = p.lambda1().iter().zip(p.lambda2()).enumerate().map(move |(i, (a, b))| {
        vec![fmt_float(g.point(i)), fmt_float(a.re), fmt_float(a.im), fmt_float(b.re), fmt_float(b.im)]
    });
    write_csv(path, &["u", "re1", "im1", "re2", "im2"], rows)?;
    write_json(&sidecar_path(path), p.ts())
}

pub fn read_filter<T: Scalar>(path: &Path) -> Result<PeriodicFilterPair<T>> {
    let rows = read_csv(path, &["u", "re1", "im1", "re2", "im2"])?;
    let side = sidecar_path(path);
    if !side.exists() {
        return Err(Error::Format(format!("{}: missing metadata {}", path.display(), side.display())));
    }
    let ts: TranslationSet = read_json(&side)?;
    let step = 1.0 / (2.0 * rows.len() as f64);
    if let Some(i) = rows.iter().enumerate().position(|(i, r)| (r[0] - i as f64 * step).abs() > 1e-9) {
        return Err(Error::Format(format!("{}: row {} is off the u grid j/(2·count)", path.display(), i + 2)));
    }
    let c = |re: f64, im: f64| Complex::new(T::lit(re), T::lit(im));
    PeriodicFilterPair::from_samples(
        ts,
        rows.iter().map(|r| c(r[1], r[2])).collect(),
        rows.iter().map(|r| c(r[3], r[4])).collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankManifest {
    #[serde(rename = "N")]
    pub n: u32,
    pub r: u32,
    pub count: usize,
    pub filters: Vec<String>,
}

/// `dir/filters.json` listing `filter_k.csv`, `k = 0..2N`.
pub fn write_bank<T: Scalar>(dir: &Path, bank: &[PeriodicFilterPair<T>]) -> Result<()> {
    let p0 = bank.first().ok_or_else(|| Error::InvalidParameter("empty filter bank".into()))?;
    fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for (k, p) in bank.iter().enumerate() {
        let name = format!("filter_{k}.csv");
        write_filter(&dir.join(&name), p)?;
        names.push(name);
    }
    let manifest = BankManifest { n: p0.ts().n(), r: p0.ts().r(), count: p0.len(), filters: names };
    write_json(&dir.join("filters.json"), &manifest)
}

pub fn read_bank<T: Scalar>(dir: &Path) -> Result<Vec<PeriodicFilterPair<T>>> {
    let manifest: BankManifest = read_json(&dir.join("filters.json"))?;
    let ts = TranslationSet::new(manifest.n, manifest.r)?;
    let bank = manifest
        .filters
        .iter()
        .map(|name| read_filter::<T>(&dir.join(name)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(p) = bank.iter().find(|p| *p.ts() != ts || p.len() != manifest.count) {
        return Err(Error::Format(format!(
            "{}: filter with N={}, r={}, count={} disagrees with the manifest",
            dir.display(),
            p.ts().n(),
            p.ts().r(),
            p.len()
        )));
    }
    Ok(bank)
}

/// `n,j,lambda,re,im`.
pub fn write_coefficients<T: Scalar>(path: &Path, table: &CoefficientTable<T>) -> Result<()> {
    let rows = table.rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            r.j.to_string(),
            fmt_float(r.lambda),
            fmt_float(r.value.re),
            fmt_float(r.value.im),
        ]
    });
    write_csv(path, &["n", "j", "lambda", "re", "im"], rows)
}

pub fn read_coefficients<T: Scalar>(path: &Path) -> Result<CoefficientTable<T>> {
    let rows = read_csv(path, &["n", "j", "lambda", "re", "im"])?;
    let rows = rows
        .into_iter()
        .map(|r| {
            if r[0] < 0.0 || r[0].fract() != 0.0 || r[1].fract() != 0.0 {
                return Err(Error::Format(format!("{}: non-integer packet index or level", path.display())));
            }
            Ok(CoefficientRow {
                n: r[0] as u64,
                j: r[1] as i32,
                lambda: T::lit(r[2]),
                value: Complex::new(T::lit(r[3]), T::lit(r[4])),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::CanonicalMatrix;
    use crate::wavelets::haar_bank;

    #[test]
    fn signal_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(-1.0, 1.0 / 3.0, 7).unwrap();
        let f = SampledSignal::from_fn(g, |t: f64| Complex::new(t.sin() / 7.0, (3.0 * t).cos())).unwrap();
        let p = dir.path().join("f.csv");
        write_signal(&p, &f).unwrap();
        let back: SampledSignal<f64> = read_signal(&p).unwrap();
        assert_eq!(back, f);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("t,re,im\n"));
        // without the sidecar the grid is inferred
        fs::remove_file(sidecar_path(&p)).unwrap();
        let inferred: SampledSignal<f64> = read_signal(&p).unwrap();
        assert!(inferred.grid().same_as(f.grid()));
    }

    #[test]
    fn bank_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ts = TranslationSet::new(2, 3).unwrap();
        let bank = haar_bank(&ts, &CanonicalMatrix::new(2.0, 1.0, 1.0, 1.0), 64).unwrap();
        write_bank(dir.path(), &bank).unwrap();
        let back: Vec<PeriodicFilterPair<f64>> = read_bank(dir.path()).unwrap();
        assert_eq!(back, bank);
        let meta = fs::read_to_string(dir.path().join("filter_0.json")).unwrap();
        assert!(meta.contains("\"N\": 2") && meta.contains("\"r\": 3"));
    }

    #[test]
    fn coefficient_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let table = CoefficientTable {
            rows: vec![
                CoefficientRow { n: 3, j: -2, lambda: 0.5, value: Complex::new(0.1, -0.2) },
                CoefficientRow { n: 0, j: 1, lambda: -4.0, value: Complex::new(1.0 / 3.0, 0.0) },
            ],
        };
        let p = dir.path().join("c.csv");
        write_coefficients(&p, &table).unwrap();
        assert_eq!(read_coefficients::<f64>(&p).unwrap(), table);
    }

    #[test]
    fn bad_header_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        fs::write(&p, "time,re,im\n0,1,0\n1,1,0\n").unwrap();
        assert!(matches!(read_signal::<f64>(&p), Err(Error::Format(_))));
    }
}
