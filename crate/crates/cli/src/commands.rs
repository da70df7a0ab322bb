//! The four subcommands. Each reads its sections from the config, writes its
//! artifacts under `--out` and a manifest alongside them.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex;
use serde::Serialize;
use weyldyn::bounds::{check_gursa, check_term_bounds, check_w_l1, check_w_window, herglotz_check, BoundReport};
use weyldyn::io::{write_kernel_csv, write_mfunc_csv, write_response_csv, write_wave_csv, write_weyl_csv, MRow};
use weyldyn::oracle::{fd_boundary_flux, fd_wave_oracle, ode_weyl_oracle};
use weyldyn::spectral::{
    a_amplitude, convergence_region, m_from_amplitude, m_from_response, m_from_weyl, weyl_solution,
    TruncationPolicy,
};
use weyldyn::validate::{run_validation, NamedPotential, ValidationConfig};
use weyldyn::wave::{apply_response_operator, response_function, solve_wave};
use weyldyn::{
    compute_norms, neumann_solve, BoundaryControl, ConvergenceRegion, KernelField, MValue, Potential, SpectralPoint,
    TriangleGrid,
};

use crate::config::Config;
use crate::manifest::{self, RegionSummary};
use crate::{CliError, Options};

const WINDOW_STEP: f64 = 0.01;
const DEFAULT_TOL: f64 = 1e-12;
const DEFAULT_MAX_TERMS: usize = 60;

/// Every section and key any command reads. A scenario file may carry the
/// sections of several commands; anything else is a typo.
const KNOWN: &[(&str, &[&str])] = &[
    ("potential", &["kind", "params", "file"]),
    ("kernel", &["eta_max", "h", "tol", "max_terms", "richardson"]),
    ("weyl", &["h", "t_trunc", "x_max", "kappas", "k", "z", "tail_tol", "tol", "max_terms", "eta_max"]),
    ("wave", &["t_end", "h", "power", "tol", "max_terms"]),
    ("validate", &["h", "tol", "max_terms", "seed", "trials"]),
];

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Usage(format!("serialising {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn write_csv<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> weyldyn::Result<()>,
{
    let io_err = |e: std::io::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    body(&mut out)?;
    out.flush().map_err(io_err)
}

fn steps(len: f64, h: f64, what: &str) -> Result<usize, CliError> {
    let ratio = len / h;
    if !(h > 0.0) || !(len >= 0.0) || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
        return Err(CliError::Usage(format!("{what} = {len} is not a multiple of h = {h}")));
    }
    Ok(ratio.round() as usize)
}

fn tolerance(cfg: &Config, section: &str, opts: &Options) -> Result<f64, CliError> {
    let tol = match opts.tol {
        Some(t) => t,
        None => cfg.f64(section, "tol")?.unwrap_or(DEFAULT_TOL),
    };
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("tol must be positive, got {tol}")));
    }
    Ok(tol)
}

fn potential_summary(p: &Potential<f64>) -> serde_json::Value {
    serde_json::json!({ "kind": p.kind().as_str(), "params": p.params() })
}

fn region_of(p: &Potential<f64>) -> Result<ConvergenceRegion<f64>, CliError> {
    Ok(convergence_region(&compute_norms(p, WINDOW_STEP)?))
}

fn single_region(region: &ConvergenceRegion<f64>) -> BTreeMap<String, RegionSummary> {
    BTreeMap::from([("potential".to_string(), RegionSummary::from(region))])
}

#[derive(Serialize)]
struct Richardson {
    steps: [f64; 3],
    diff_coarse: f64,
    diff_fine: f64,
    order: f64,
}

/// Max nodal differences between the kernels on `2h`, `h`, `h/2` at common
/// nodes, and the observed order `log₂` of their ratio.
fn richardson(p: &Potential<f64>, eta_max: f64, h: f64, tol: f64, max_terms: usize) -> Result<Richardson, CliError> {
    let coarse = neumann_solve(p, TriangleGrid::new(eta_max, 2.0 * h)?, tol, max_terms)?;
    let mid = neumann_solve(p, TriangleGrid::new(eta_max, h)?, tol, max_terms)?;
    let fine = neumann_solve(p, TriangleGrid::new(eta_max, h / 2.0)?, tol, max_terms)?;
    let mut e1: f64 = 0.0;
    let mut e2: f64 = 0.0;
    for (i, j, v) in coarse.nodes() {
        e1 = e1.max((v - mid.at(2 * i, 2 * j)).abs());
        e2 = e2.max((mid.at(2 * i, 2 * j) - fine.at(4 * i, 4 * j)).abs());
    }
    Ok(Richardson {
        steps: [2.0 * h, h, h / 2.0],
        diff_coarse: e1,
        diff_fine: e2,
        order: (e1 / e2).log2(),
    })
}

#[derive(Serialize)]
struct KernelReport {
    potential: serde_json::Value,
    eta_max: f64,
    h: f64,
    tol: f64,
    terms_used: usize,
    last_term_max: f64,
    max_abs_v: f64,
    bound_check: Vec<BoundReport>,
    bounds_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    richardson: Option<Richardson>,
}

pub fn kernel(cfg: &Config, opts: &Options) -> Result<(), CliError> {
    cfg.restrict(KNOWN)?;
    let p = cfg.potential()?;
    let eta_max = cfg.f64_required("kernel", "eta_max")?;
    let h = cfg.f64_required("kernel", "h")?;
    let tol = tolerance(cfg, "kernel", opts)?;
    let max_terms = cfg.usize("kernel", "max_terms")?.unwrap_or(DEFAULT_MAX_TERMS);
    let grid = TriangleGrid::new(eta_max, h)?;
    let norms = compute_norms(&p, WINDOW_STEP)?;
    let region = convergence_region(&norms);
    manifest::write(&opts.out, "kernel", &cfg.raw, Some(tol), &single_region(&region), opts.threads)?;

    let (field, term_report) = check_term_bounds(&p, grid, tol, max_terms, norms.windowed_scaled)?;
    write_csv(&opts.out.join("kernel.csv"), |out| write_kernel_csv(out, &field))?;

    let mut bound_check = vec![term_report, check_gursa(&p, &field)];
    if norms.l1.is_finite() {
        bound_check.push(check_w_l1(&norms, &field)?);
    }
    for kappa in [1.0, 2f64.sqrt(), 2.0] {
        bound_check.push(check_w_window(&norms, &field, kappa));
    }
    let bounds_passed = bound_check.iter().all(BoundReport::passed);
    let richardson = match cfg.bool("kernel", "richardson")? {
        Some(true) => Some(richardson(&p, eta_max, h, tol, max_terms)?),
        _ => None,
    };
    let report = KernelReport {
        potential: potential_summary(&p),
        eta_max,
        h,
        tol,
        terms_used: field.terms_used,
        last_term_max: field.last_term_max,
        max_abs_v: field.max_abs(),
        bound_check,
        bounds_passed,
        richardson,
    };
    write_json(&opts.out.join("report.json"), &report)?;
    println!(
        "kernel: {} nodes, {} terms, last term {:.3e}",
        field.grid.node_count(),
        field.terms_used,
        field.last_term_max
    );
    if let Some(r) = &report.richardson {
        println!("richardson order {:.3}", r.order);
    }
    if !bounds_passed {
        let failed: Vec<&str> = report
            .bound_check
            .iter()
            .filter(|b| !b.passed())
            .map(|b| b.check.as_str())
            .collect();
        return Err(CliError::Failed(format!("kernel bound checks failed: {}", failed.join(", "))));
    }
    Ok(())
}

#[derive(Serialize)]
struct PointReport {
    k: [f64; 2],
    z: [f64; 2],
    inside_region: bool,
    routes: BTreeMap<String, [f64; 2]>,
    /// Largest `|m_a − m_b|` over pairs of routes at this point.
    max_pairwise: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_error: Option<String>,
}

#[derive(Serialize)]
struct WeylReport {
    potential: serde_json::Value,
    h: f64,
    t_trunc: f64,
    region_threshold: f64,
    forced: bool,
    points: Vec<PointReport>,
    max_pairwise: f64,
    herglotz: BoundReport,
}

fn spectral_points(cfg: &Config) -> Result<Vec<SpectralPoint<f64>>, CliError> {
    let mut points = Vec::new();
    for kappa in cfg.f64_list("weyl", "kappas")? {
        points.push(SpectralPoint::from_kappa(kappa)?);
    }
    for k in cfg.complex_list("weyl", "k")? {
        points.push(SpectralPoint::new(k)?);
    }
    for z in cfg.complex_list("weyl", "z")? {
        points.push(SpectralPoint::from_z(z)?);
    }
    if points.is_empty() {
        return Err(CliError::Usage("[weyl] needs at least one of `kappas`, `k`, `z`".into()));
    }
    Ok(points)
}

fn pair(c: Complex<f64>) -> [f64; 2] {
    [c.re, c.im]
}

pub fn weyl(cfg: &Config, opts: &Options) -> Result<(), CliError> {
    cfg.restrict(KNOWN)?;
    let p = cfg.potential()?;
    let h = cfg.f64("weyl", "h")?.unwrap_or(0.01);
    let t_trunc = cfg.f64_required("weyl", "t_trunc")?;
    let x_max = cfg.f64("weyl", "x_max")?.unwrap_or(2.0 * h).max(2.0 * h);
    let tol = tolerance(cfg, "weyl", opts)?;
    let max_terms = cfg.usize("weyl", "max_terms")?.unwrap_or(DEFAULT_MAX_TERMS);
    let tail_tol = cfg.f64("weyl", "tail_tol")?;
    let points = spectral_points(cfg)?;
    let t_steps = steps(t_trunc, h, "t_trunc")?;
    let x_steps = steps(x_max, h, "x_max")?;
    if t_steps < 2 {
        return Err(CliError::Usage("t_trunc must be at least 2h".into()));
    }

    let region = region_of(&p)?;
    manifest::write(&opts.out, "weyl", &cfg.raw, Some(tol), &single_region(&region), opts.threads)?;
    let outside: Vec<bool> = points.iter().map(|sp| !region.contains(sp.k().im)).collect();
    if !opts.force {
        if let Some(sp) = points.iter().zip(&outside).find(|(_, &o)| o).map(|(sp, _)| sp) {
            return Err(weyldyn::Error::Region {
                im_k: sp.k().im,
                threshold: region.threshold(),
            }
            .into());
        }
    }

    // The response route needs t_trunc + 2h inside the triangle.
    let needed = t_steps + x_steps.max(2);
    let grid = match cfg.f64("weyl", "eta_max")? {
        Some(eta_max) => TriangleGrid::new(eta_max, h)?,
        None => TriangleGrid::with_steps(needed, h)?,
    };
    if grid.n() < needed {
        return Err(CliError::Usage(format!(
            "eta_max = {} too small: need t_trunc + max(x_max, 2h) = {}",
            grid.eta_max(),
            needed as f64 * h
        )));
    }
    let kernel: KernelField<f64> = neumann_solve(&p, grid, tol, max_terms)?;
    let policy = TruncationPolicy {
        tail_tol,
        enforce_region: !opts.force,
    };
    let x_grid: Vec<f64> = (0..=x_steps).map(|i| i as f64 * h).collect();
    let response = response_function(&kernel, t_trunc, h)?;
    let amplitude = a_amplitude(&response);
    let x_start = p.x_max().max(1.0);

    let mut rows: Vec<MRow<'_, f64>> = Vec::new();
    let mut reports = Vec::new();
    let mut herglotz_values: Vec<MValue<f64>> = Vec::new();
    let mut first_sample = None;
    for (sp, &out_of_region) in points.iter().zip(&outside) {
        let sample = weyl_solution(&kernel, &region, *sp, &x_grid, t_trunc, &policy)?;
        let mut values = vec![m_from_weyl(&sample, h)?];
        if first_sample.is_none() {
            first_sample = Some(sample);
        }
        let kv = sp.k();
        if kv.re == 0.0 {
            values.push(m_from_response(&response, kv.im, &region, &policy)?);
            values.push(m_from_amplitude(&amplitude, kv.im, &region, &policy)?);
        }
        let oracle_error = match ode_weyl_oracle(&p, *sp, x_start, &[]) {
            Ok((_, m)) => {
                values.push(m);
                None
            }
            Err(e) => Some(e.to_string()),
        };
        let mut max_pairwise: f64 = 0.0;
        for (a, va) in values.iter().enumerate() {
            for vb in &values[a + 1..] {
                max_pairwise = max_pairwise.max((va.m - vb.m).norm());
            }
        }
        if sp.z().im > 0.0 {
            herglotz_values.extend(values.iter().copied());
        }
        reports.push(PointReport {
            k: pair(kv),
            z: pair(sp.z()),
            inside_region: !out_of_region,
            routes: values.iter().map(|v| (v.route.to_string(), pair(v.m))).collect(),
            max_pairwise,
            oracle_error,
        });
        let flag = out_of_region.then_some("outside-region");
        rows.extend(values.into_iter().map(|value| MRow { value, flag }));
    }
    write_csv(&opts.out.join("mfunc.csv"), |out| write_mfunc_csv(out, &rows))?;
    if let Some(sample) = &first_sample {
        write_csv(&opts.out.join("weyl.csv"), |out| write_weyl_csv(out, sample))?;
    }
    let max_pairwise = reports.iter().map(|r| r.max_pairwise).fold(0.0, f64::max);
    let report = WeylReport {
        potential: potential_summary(&p),
        h,
        t_trunc,
        region_threshold: region.threshold(),
        forced: opts.force,
        points: reports,
        max_pairwise,
        herglotz: herglotz_check(&herglotz_values),
    };
    write_json(&opts.out.join("report.json"), &report)?;
    println!(
        "weyl: {} points, {} rows, max route disagreement {max_pairwise:.3e}",
        points.len(),
        rows.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct WaveReport {
    potential: serde_json::Value,
    t_end: f64,
    h: f64,
    power: f64,
    field_rel_l2: f64,
    flux_rel_l2: f64,
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let norm: f64 = b.iter().map(|y| y * y).sum();
    if norm > 0.0 {
        (diff / norm).sqrt()
    } else {
        diff.sqrt()
    }
}

pub fn wave(cfg: &Config, opts: &Options) -> Result<(), CliError> {
    cfg.restrict(KNOWN)?;
    let p = cfg.potential()?;
    let t_end = cfg.f64_required("wave", "t_end")?;
    let h = cfg.f64("wave", "h")?.unwrap_or(0.01);
    let power = cfg.f64("wave", "power")?.unwrap_or(3.0);
    if power < 2.0 {
        return Err(CliError::Usage(format!("power must be at least 2 so that f(0) = f'(0) = 0, got {power}")));
    }
    let tol = tolerance(cfg, "wave", opts)?;
    let max_terms = cfg.usize("wave", "max_terms")?.unwrap_or(DEFAULT_MAX_TERMS);
    let n = steps(t_end, h, "t_end")?;
    if n < 2 {
        return Err(CliError::Usage("t_end must be at least 2h".into()));
    }
    let region = region_of(&p)?;
    manifest::write(&opts.out, "wave", &cfg.raw, Some(tol), &single_region(&region), opts.threads)?;

    let kernel = neumann_solve(&p, TriangleGrid::with_steps(2 * n + 2, h)?, tol, max_terms)?;
    let f = BoundaryControl::from_fn(|t: f64| t.powf(power), t_end, h, true)?;
    let ts: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let field = solve_wave(&f, &kernel, &ts, &ts)?;
    let r = response_function(&kernel, t_end, h)?;
    let rf = apply_response_operator(&f, &r)?;
    let fd = fd_wave_oracle(&p, &f, t_end, h)?;
    let flux = fd_boundary_flux(&fd, h);
    write_csv(&opts.out.join("wave.csv"), |out| write_wave_csv(out, &field))?;
    write_csv(&opts.out.join("response.csv"), |out| write_response_csv(out, &r))?;

    let flat = |u: &[Vec<f64>]| u.iter().flatten().copied().collect::<Vec<f64>>();
    let report = WaveReport {
        potential: potential_summary(&p),
        t_end,
        h,
        power,
        field_rel_l2: rel_l2(&flat(&field.u), &flat(&fd.u)),
        flux_rel_l2: rel_l2(&rf, &flux[..rf.len().min(flux.len())]),
    };
    write_json(&opts.out.join("report.json"), &report)?;
    println!(
        "wave: field vs leapfrog {:.3e}, flux vs leapfrog {:.3e}",
        report.field_rel_l2, report.flux_rel_l2
    );
    Ok(())
}

pub fn validate(cfg: &Config, opts: &Options) -> Result<(), CliError> {
    cfg.restrict(KNOWN)?;
    let defaults = ValidationConfig::default();
    let mut vc = ValidationConfig {
        h: cfg.f64("validate", "h")?.unwrap_or(defaults.h),
        tol: tolerance(cfg, "validate", opts)?,
        max_terms: cfg.usize("validate", "max_terms")?.unwrap_or(defaults.max_terms),
        seed: cfg.usize("validate", "seed")?.map_or(defaults.seed, |s| s as u64),
        lemma_trials: cfg.usize("validate", "trials")?.unwrap_or(defaults.lemma_trials),
        extra: Vec::new(),
    };
    if !(vc.h > 0.0) {
        return Err(CliError::Usage(format!("[validate] h must be positive, got {}", vc.h)));
    }
    let mut regions = BTreeMap::new();
    for (name, p) in weyldyn::validate::catalog() {
        regions.insert(name.to_string(), RegionSummary::from(&region_of(&p)?));
    }
    if cfg.has_section("potential") {
        let p = cfg.potential()?;
        regions.insert("config".to_string(), RegionSummary::from(&region_of(&p)?));
        vc.extra.push(NamedPotential {
            name: "config".into(),
            potential: p,
        });
    }
    manifest::write(&opts.out, "validate", &cfg.raw, Some(vc.tol), &regions, opts.threads)?;

    let report = run_validation(&vc);
    for c in &report.criteria {
        println!("{}", c.line());
    }
    write_json(&opts.out.join("report.json"), &report)?;
    if report.all_passed {
        println!("all {} criteria passed", report.criteria.len());
        Ok(())
    } else {
        let failed: Vec<String> = report
            .criteria
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id.to_string())
            .collect();
        Err(CliError::Failed(format!("criteria failed: {}", failed.join(", "))))
    }
}
