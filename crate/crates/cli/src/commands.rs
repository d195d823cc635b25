use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use lct_numra::io::{
    read_bank, read_filter, read_signal, read_spectrum, write_bank, write_coefficients, write_signal, write_spectrum,
};
use lct_numra::lct::{dual_time_grid, ilct, induced_omega_grid, lct_direct, lct_fast};
use lct_numra::packets::{packet_generate, packet_gram, recursion_residual, CoefficientRow, PacketSource};
use lct_numra::report::{printed_wavelet_report, verify_bank, ConditionResidual};
use lct_numra::wavelets::{cascade, haar_scaling, project, required_window};
use lct_numra::{
    CanonicalMatrix, CascadeOptions, CoefficientTable, Error, Grid, Interval, MatrixPolicy, Method, PeriodicFilterPair,
    TranslationSet, WaveletFamily,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::report::Report;
use crate::{Cli, Command, Direction, Family, GridArgs, MethodArg, PacketAction, PacketArgs, VerificationFailed};

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(dir) = cli.output_dir {
        cfg.output_dir = dir;
    }
    match cli.command {
        Command::Matrix { matrix, allow_nonunimodular, report } => {
            set_matrix(&mut cfg, matrix.as_deref())?;
            cfg.validate()?;
            matrix_cmd(&cfg, allow_nonunimodular, report)
        }
        Command::Lct { direction, matrix, method, input, out, like, t_min } => {
            set_matrix(&mut cfg, matrix.as_deref())?;
            cfg.validate()?;
            lct_cmd(&cfg, direction, method, &input, &out, like.as_deref(), t_min)
        }
        Command::Haar { family, grid, count, out_dir } => {
            apply_family(&mut cfg, &family)?;
            apply_grid(&mut cfg, &grid);
            cfg.validate()?;
            haar_cmd(&cfg, count, out_dir)
        }
        Command::Cascade { filters, depth, tol, grid, alias_terms, out, report } => {
            apply_grid(&mut cfg, &grid);
            if let Some(t) = tol {
                cfg.tolerances.insert("tail".into(), t);
            }
            cfg.validate()?;
            cascade_cmd(&cfg, &filters, depth, alias_terms, &out, report)
        }
        Command::Verify { filters, printed, report } => {
            cfg.validate()?;
            match filters {
                Some(path) if !printed => verify_cmd(&cfg, &path, report),
                _ => printed_cmd(&cfg, report),
            }
        }
        Command::Packets { action } => {
            let args = match &action {
                PacketAction::Gen { args, .. } | PacketAction::Gram { args, .. } => args.clone(),
            };
            set_matrix(&mut cfg, args.matrix.as_deref())?;
            apply_grid(&mut cfg, &args.grid);
            cfg.validate()?;
            match action {
                PacketAction::Gen { out_dir, report, .. } => packets_gen(&cfg, &args, out_dir, report),
                PacketAction::Gram { window, report, .. } => packets_gram(&cfg, &args, &window, report),
            }
        }
        Command::Project { family, input, j, window, out, coefficients, report } => {
            apply_family(&mut cfg, &family)?;
            cfg.validate()?;
            project_cmd(&cfg, &input, j, window.as_deref(), &out, coefficients.as_deref(), report)
        }
    }
}

fn set_matrix(cfg: &mut RunConfig, raw: Option<&str>) -> Result<()> {
    if let Some(s) = raw {
        cfg.matrix = s.parse().with_context(|| format!("--matrix {s:?}"))?;
    }
    Ok(())
}

fn apply_family(cfg: &mut RunConfig, f: &Family) -> Result<()> {
    set_matrix(cfg, f.matrix.as_deref())?;
    if f.n.is_some() || f.r.is_some() {
        let n = f.n.unwrap_or(cfg.ts.n());
        let r = match f.r {
            Some(r) => r,
            None if TranslationSet::new(n, cfg.ts.r()).is_ok() => cfg.ts.r(),
            None => 1,
        };
        cfg.ts = TranslationSet::new(n, r)?;
    }
    Ok(())
}

fn apply_grid(cfg: &mut RunConfig, g: &GridArgs) {
    let spec = &mut cfg.grid;
    spec.lo = g.lo.unwrap_or(spec.lo);
    spec.hi = g.hi.unwrap_or(spec.hi);
    spec.refine = g.refine.unwrap_or(spec.refine);
    spec.max_level = g.max_level.unwrap_or(spec.max_level);
}

fn strict_matrix(cfg: &RunConfig) -> Result<CanonicalMatrix<f64>> {
    cfg.matrix.check(MatrixPolicy::Strict)?;
    Ok(cfg.matrix)
}

fn parse_window(raw: &str) -> Result<Interval> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| anyhow!("window must be `lo,hi`, got {raw:?}"))?;
    match parts[..] {
        [lo, hi] if lo <= hi => Ok(Interval::closed(lo, hi)),
        _ => bail!("window must be `lo,hi` with lo <= hi, got {raw:?}"),
    }
}

fn load_filters(path: &Path) -> Result<Vec<PeriodicFilterPair<f64>>> {
    let bank = if path.is_dir() { read_bank(path)? } else { vec![read_filter(path)?] };
    Ok(bank)
}

fn fail_unless<D: Serialize>(report: &Report<'_, D>, path: &Path) -> Result<()> {
    report.write(path)?;
    for c in &report.conditions {
        println!(
            "{:<10} {:<4} residual {:.3e} (tol {:.1e})  {}",
            c.label,
            if c.pass { "ok" } else { "FAIL" },
            c.residual,
            c.tol,
            c.condition
        );
    }
    if report.passed {
        return Ok(());
    }
    let failed: Vec<_> = report.conditions.iter().filter(|c| !c.pass).map(|c| c.label.as_str()).collect();
    Err(VerificationFailed(format!("{} (report: {})", failed.join(", "), path.display())).into())
}

#[derive(Serialize)]
struct MatrixDetails {
    det: f64,
    violations: Vec<lct_numra::Violation>,
    allow_nonunimodular: bool,
}

fn matrix_cmd(cfg: &RunConfig, allow: bool, report: Option<PathBuf>) -> Result<()> {
    let v = cfg.matrix.validate();
    let zero_b = cfg.matrix.b == 0.0;
    let det = ConditionResidual::new("det", "ad - bc = 1", (v.det - 1.0).abs(), cfg.tol("det"));
    let det_ok = det.pass;
    let mut conditions = vec![det, ConditionResidual::new("b", "b nonzero", if zero_b { 1.0 } else { 0.0 }, 0.0)];
    if allow && !det_ok && !zero_b {
        conditions[0].pass = true;
        eprintln!("warning: matrix is not unimodular (ad - bc = {})", v.det);
    }
    let details = MatrixDetails { det: v.det, violations: v.violations, allow_nonunimodular: allow };
    let rep = Report::new("matrix", cfg, conditions, details);
    println!("det = {}", v.det);
    fail_unless(&rep, &report.unwrap_or_else(|| cfg.out("matrix.json")))
}

fn lct_cmd(
    cfg: &RunConfig,
    direction: Direction,
    method: MethodArg,
    input: &Path,
    out: &Path,
    like: Option<&Path>,
    t_min: Option<f64>,
) -> Result<()> {
    let m = strict_matrix(cfg)?;
    let method = match method {
        MethodArg::Direct => Method::Direct,
        MethodArg::Fast => Method::Fast,
    };
    match direction {
        Direction::Fwd => {
            let f = read_signal::<f64>(input)?;
            let spec = match method {
                Method::Fast => lct_fast(&f, &m)?,
                Method::Direct => lct_direct(&f, &m, &induced_omega_grid(f.grid(), &m)?)?,
            };
            write_spectrum(out, &spec)?;
        }
        Direction::Inv => {
            let spec = read_spectrum::<f64>(input)?;
            let grid = match like {
                Some(p) => *read_signal::<f64>(p)?.grid(),
                None => {
                    let g = dual_time_grid(&spec.omega, &m, 0.0)?;
                    let start = t_min.unwrap_or(-g.step * g.count as f64 / 2.0);
                    Grid::new(start, g.step, g.count)?
                }
            };
            write_signal(out, &ilct(&spec, &m, &grid, method)?)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct HaarDetails {
    grid: Grid<f64>,
    filter_count: usize,
    phi_norm_defect: f64,
    hat_dc_defect: f64,
    pair_residuals: lct_numra::filters::BankReport,
    files: Vec<String>,
}

fn haar_cmd(cfg: &RunConfig, count: Option<usize>, out_dir: Option<PathBuf>) -> Result<()> {
    let m = strict_matrix(cfg)?;
    let ts = cfg.ts;
    let grid = cfg.grid.build(ts.n())?;
    let count = count.unwrap_or_else(|| lct_numra::filters::default_resolution(ts.n()));
    let fam = WaveletFamily::haar(ts, m, &grid, count)?;
    let dir = out_dir.unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&dir)?;

    let mut files = vec!["phi.csv".to_string()];
    write_signal(&dir.join("phi.csv"), &fam.phi)?;
    for (k, psi) in fam.psi.iter().enumerate() {
        let name = format!("psi_{}.csv", k + 1);
        write_signal(&dir.join(&name), psi)?;
        files.push(name);
    }
    write_bank(&dir, &fam.filters)?;
    files.push("filters.json".into());

    let v = verify_bank(&fam.filters, &cfg.tolerances)?;
    let check = fam.check();
    let details = HaarDetails {
        grid,
        filter_count: count,
        phi_norm_defect: check.phi_norm_defect,
        hat_dc_defect: check.hat_dc_defect,
        pair_residuals: v.details,
        files,
    };
    let rep = Report::new("haar", cfg, v.conditions, details);
    fail_unless(&rep, &dir.join("verify.json"))
}

#[derive(Serialize)]
struct CascadeDetails {
    depth: usize,
    alias_terms: usize,
    grid: Grid<f64>,
    tail_deviation: Option<f64>,
    two_scale_residual: Option<f64>,
    error: Option<String>,
}

fn cascade_cmd(
    cfg: &RunConfig,
    filters: &Path,
    depth: usize,
    alias_terms: usize,
    out: &Path,
    report: Option<PathBuf>,
) -> Result<()> {
    let bank = load_filters(filters)?;
    let p0 = &bank[0];
    let grid = cfg.grid.build(p0.ts().n())?;
    let tol = cfg.tol("tail");
    let opts = CascadeOptions { depth, tol, alias_terms };
    let mut details = CascadeDetails { depth, alias_terms, grid, tail_deviation: None, two_scale_residual: None, error: None };
    let conditions = match cascade(p0, &grid, &opts) {
        Ok(c) => {
            write_signal(out, &c.phi)?;
            details.tail_deviation = Some(c.tail_deviation);
            details.two_scale_residual = Some(c.two_scale_residual);
            vec![
                ConditionResidual::new("tail", "product tail over the sampled band", c.tail_deviation, tol),
                ConditionResidual::new("two-scale", "two-scale relation over the band", c.two_scale_residual, tol),
            ]
        }
        Err(Error::NotConverged { deviation, tol }) => {
            details.error = Some(format!("product did not converge at depth {depth}"));
            vec![ConditionResidual::new("tail", "product tail over the sampled band", deviation, tol)]
        }
        Err(Error::ConditionViolated { condition, residual, tol }) => {
            let label = condition.split_whitespace().next().unwrap_or("condition").to_string();
            details.error = Some(format!("low-pass filter violates {condition}"));
            vec![ConditionResidual::new(&label, condition, residual, tol)]
        }
        Err(e) => return Err(e.into()),
    };
    let rep = Report::new("cascade", cfg, conditions, details);
    fail_unless(&rep, &report.unwrap_or_else(|| cfg.out("cascade.json")))
}

fn verify_cmd(cfg: &RunConfig, filters: &Path, report: Option<PathBuf>) -> Result<()> {
    let bank = load_filters(filters)?;
    let v = verify_bank(&bank, &cfg.tolerances)?;
    let rep = Report::new("verify", cfg, v.conditions, v.details);
    fail_unless(&rep, &report.unwrap_or_else(|| cfg.out("report.json")))
}

fn printed_cmd(cfg: &RunConfig, report: Option<PathBuf>) -> Result<()> {
    let r = printed_wavelet_report(4)?;
    let conditions = r
        .records
        .iter()
        .map(|d| ConditionResidual::new("printed", format!("{}: {}", d.item, d.quantity), d.value.abs(), d.tol))
        .collect();
    let rep = Report::new("verify --printed", cfg, conditions, &r);
    fail_unless(&rep, &report.unwrap_or_else(|| cfg.out("printed.json")))
}

fn packet_nodes(cfg: &RunConfig, args: &PacketArgs) -> Result<(Vec<lct_numra::PacketNode<f64>>, TranslationSet)> {
    let bank = read_bank::<f64>(&args.filters)?;
    let ts = *bank[0].ts();
    let grid = cfg.grid.build(ts.n())?;
    let source = match &args.phi {
        Some(p) => PacketSource::Refine(read_signal::<f64>(p)?.resample_onto(&grid)?),
        None => PacketSource::Synthesize { alias_terms: 16 },
    };
    let nodes = packet_generate(&bank, args.n_max, args.depth, cfg.tol("tail"), &grid, &source)?;
    Ok((nodes, ts))
}

#[derive(Serialize)]
struct PacketGenDetails {
    n_max: u64,
    files: Vec<String>,
    norms: Vec<f64>,
}

fn packets_gen(cfg: &RunConfig, args: &PacketArgs, out_dir: Option<PathBuf>, report: Option<PathBuf>) -> Result<()> {
    let (nodes, _) = packet_nodes(cfg, args)?;
    let dir = out_dir.unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for node in &nodes {
        let name = format!("w_{}.csv", node.index.n());
        write_signal(&dir.join(&name), &node.w)?;
        files.push(name);
    }
    let us: Vec<f64> = (0..=256).map(|k| -8.0 + k as f64 / 16.0).collect();
    let res = recursion_residual(&nodes, &us);
    let conditions = vec![ConditionResidual::new("recursion", "packet product recursion", res, cfg.tol("recursion"))];
    let details = PacketGenDetails { n_max: args.n_max, files, norms: nodes.iter().map(|n| n.w.norm()).collect() };
    let rep = Report::new("packets gen", cfg, conditions, details);
    fail_unless(&rep, &report.unwrap_or_else(|| dir.join("packets.json")))
}

#[derive(Serialize)]
struct GramDetails {
    window: [f64; 2],
    elements: usize,
    /// `(n, j, λ)` per row of the Gram matrix.
    labels: Vec<(u64, i32, f64)>,
}

fn packets_gram(cfg: &RunConfig, args: &PacketArgs, window: &str, report: Option<PathBuf>) -> Result<()> {
    let m = strict_matrix(cfg)?;
    let w = parse_window(window)?;
    let (nodes, ts) = packet_nodes(cfg, args)?;
    let (labels, g) = packet_gram(&nodes, &ts, &m, w)?;
    let conditions = vec![ConditionResidual::new("gram", "max |G - I| over packet translates", g.max_off_identity, cfg.tol("gram"))];
    let details = GramDetails { window: [w.lo, w.hi], elements: labels.len(), labels };
    let rep = Report::new("packets gram", cfg, conditions, details);
    fail_unless(&rep, &report.unwrap_or_else(|| cfg.out("gram.json")))
}

#[derive(Serialize)]
struct ProjectDetails {
    level: i32,
    window: [f64; 2],
    translates: usize,
    energy: f64,
    signal_energy: f64,
    warning: Option<String>,
}

fn project_cmd(
    cfg: &RunConfig,
    input: &Path,
    j: i32,
    window: Option<&str>,
    out: &Path,
    coefficients: Option<&Path>,
    report: Option<PathBuf>,
) -> Result<()> {
    let m = strict_matrix(cfg)?;
    let ts = cfg.ts;
    let f = read_signal::<f64>(input)?;
    let phi = haar_scaling(&ts, f.grid());
    let w = match window {
        Some(raw) => parse_window(raw)?,
        None => required_window(&f, &phi, ts.n(), j).ok_or_else(|| anyhow!("input signal is identically zero"))?,
    };
    let p = project(&f, &phi, &ts, &m, j, w)?;
    if let Some(msg) = &p.warning {
        eprintln!("warning: {msg}");
    }
    write_signal(out, &p.signal)?;
    if let Some(path) = coefficients {
        let rows = p
            .lambdas
            .iter()
            .zip(&p.coefficients)
            .map(|(&lambda, &value)| CoefficientRow { n: 0, j, lambda, value })
            .collect();
        write_coefficients(path, &CoefficientTable { rows })?;
    }
    let details = ProjectDetails {
        level: j,
        window: [w.lo, w.hi],
        translates: p.lambdas.len(),
        energy: p.energy(),
        signal_energy: f.norm_sqr(),
        warning: p.warning.clone(),
    };
    let rep = Report::new("project", cfg, Vec::new(), details);
    fail_unless(&rep, &report.unwrap_or_else(|| cfg.out("project.json")))
}
