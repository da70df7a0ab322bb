//! `manifest.json`: what produced the artifacts next to it. The timestamp
//! lives here and nowhere else, so every other output is reproducible.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use weyldyn::bounds::{BOUND_SLACK, HERGLOTZ_FLOOR};
use weyldyn::spectral::KAPPA_STAR_MARGIN;
use weyldyn::ConvergenceRegion;

use crate::CliError;

const MODULES: [&str; 6] = ["potential", "kernel", "wave", "spectral", "oracle", "bounds"];

/// Convergence thresholds of one potential.
#[derive(Serialize)]
pub struct RegionSummary {
    pub l1: f64,
    pub windowed: f64,
    pub windowed_scaled: f64,
    pub l1_threshold: Option<f64>,
    pub stirling_branch: f64,
    pub printed_sqrt_branch: f64,
    pub kappa_branch: f64,
    pub windowed_threshold: f64,
    pub threshold: f64,
    pub growth_infimum: f64,
    pub threshold_forms_agree: bool,
    /// Set when `√(‖q̃‖/2)` and `κ*‖q̃‖/2` disagree.
    pub sqrt_kappa_discrepancy: bool,
}

impl From<&ConvergenceRegion<f64>> for RegionSummary {
    fn from(r: &ConvergenceRegion<f64>) -> Self {
        let agree = r.threshold_forms_agree();
        RegionSummary {
            l1: r.norms.l1.to_f64(),
            windowed: r.norms.windowed,
            windowed_scaled: r.norms.windowed_scaled,
            l1_threshold: r.l1_threshold,
            stirling_branch: r.stirling_branch,
            printed_sqrt_branch: r.printed_sqrt_branch,
            kappa_branch: r.kappa_branch,
            windowed_threshold: r.windowed_threshold,
            threshold: r.threshold(),
            growth_infimum: r.growth_infimum,
            threshold_forms_agree: agree,
            sqrt_kappa_discrepancy: !agree,
        }
    }
}

#[derive(Serialize)]
struct Thresholds<'a> {
    tol: Option<f64>,
    bound_slack: f64,
    herglotz_floor: f64,
    kappa_star_margin: f64,
    sqrt_kappa_discrepancy: bool,
    regions: &'a BTreeMap<String, RegionSummary>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_sha256: String,
    modules: BTreeMap<&'static str, &'static str>,
    thresholds: Thresholds<'a>,
    threads: usize,
    timestamp_unix: u64,
}

pub fn write(
    out: &Path,
    command: &str,
    config_raw: &[u8],
    tol: Option<f64>,
    regions: &BTreeMap<String, RegionSummary>,
    threads: usize,
) -> Result<(), CliError> {
    let mut modules: BTreeMap<&str, &str> = MODULES.iter().map(|m| (*m, weyldyn::VERSION)).collect();
    modules.insert("cli", env!("CARGO_PKG_VERSION"));
    let manifest = Manifest {
        tool: "weyldyn",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config_sha256: format!("{:x}", Sha256::digest(config_raw)),
        modules,
        thresholds: Thresholds {
            tol,
            bound_slack: BOUND_SLACK,
            herglotz_floor: HERGLOTZ_FLOOR,
            kappa_star_margin: KAPPA_STAR_MARGIN,
            sqrt_kappa_discrepancy: regions.values().any(|r| r.sqrt_kappa_discrepancy),
            regions,
        },
        threads,
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    crate::commands::write_json(&out.join("manifest.json"), &manifest)
}
