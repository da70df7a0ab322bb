use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn weyldyn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyldyn"))
        .args(args)
        .current_dir(dir)
        .env_remove("WEYLDYN_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn scenario(dir: &TempDir, name: &str, text: &str) -> String {
    std::fs::write(dir.path().join(name), text).unwrap();
    name.to_string()
}

fn read(dir: &TempDir, path: &str) -> String {
    std::fs::read_to_string(dir.path().join(path)).unwrap()
}

fn json(dir: &TempDir, path: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, path)).unwrap()
}

const BOX: &str = "[potential]\nkind = box\nparams = 1, 1\n";

#[test]
fn zero_potential_kernel_is_all_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(&dir, "zero.ini", "[potential]\nkind = zero\n[kernel]\neta_max = 2\nh = 0.05\n");
    let out = weyldyn(&["kernel", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "o/kernel.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("xi,eta,v"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 41 * 42 / 2);
    assert!(rows.iter().all(|r| r.ends_with(",0")), "non-zero kernel value");
    let report = json(&dir, "o/report.json");
    assert_eq!(report["terms_used"], 0);
    assert_eq!(report["bounds_passed"], true);
    let manifest = json(&dir, "o/manifest.json");
    assert_eq!(manifest["command"], "kernel");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["thresholds"]["sqrt_kappa_discrepancy"].is_boolean());
}

#[test]
fn box_kernel_richardson_order() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(
        &dir,
        "box.ini",
        &format!("{BOX}[kernel]\neta_max = 4\nh = 0.01\nrichardson = yes\n"),
    );
    let out = weyldyn(&["kernel", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir, "o/report.json");
    let order = report["richardson"]["order"].as_f64().unwrap();
    assert!(order >= 1.8, "order {order}");
    assert!(report["terms_used"].as_u64().unwrap() > 0);
}

#[test]
fn kernel_usage_and_convergence_errors() {
    let dir = TempDir::new().unwrap();
    let bad = scenario(&dir, "bad.ini", &format!("{BOX}[kernel]\neta_max = 1\nh = 0.3\n"));
    let out = weyldyn(&["kernel", "--config", &bad, "--out", "o"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not divide"));

    let typo = scenario(&dir, "typo.ini", &format!("{BOX}[kernel]\neta_max = 1\nhh = 0.1\n"));
    assert_eq!(code(&weyldyn(&["kernel", "--config", &typo], dir.path())), 1);
    assert_eq!(code(&weyldyn(&["kernel"], dir.path())), 1);
    assert_eq!(code(&weyldyn(&["frobnicate"], dir.path())), 1);

    let few = scenario(&dir, "few.ini", &format!("{BOX}[kernel]\neta_max = 4\nh = 0.05\nmax_terms = 2\n"));
    assert_eq!(code(&weyldyn(&["kernel", "--config", &few, "--out", "o"], dir.path())), 2);
}

#[test]
fn free_weyl_m_equals_ik() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(
        &dir,
        "free.ini",
        "[potential]\nkind = zero\n[weyl]\nh = 0.05\nt_trunc = 2\nkappas = 1, 2\nk = 0.5:1, -1:0.5\n",
    );
    let out = weyldyn(&["weyl", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "o/mfunc.csv");
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("re_z,im_z,re_m,im_m,route"));
    let mut count = 0;
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        let z = num(f[0], f[1]);
        let m = num(f[2], f[3]);
        let mut k = csqrt(z);
        if k.1 < 0.0 {
            k = (-k.0, -k.1);
        }
        assert!((m.0 + k.1).abs() < 1e-10 && (m.1 - k.0).abs() < 1e-10, "{row}");
        count += 1;
    }
    // weyl_def and ode_oracle everywhere, plus two Laplace routes per kappa.
    assert_eq!(count, 4 * 2 + 2 * 2);
    assert!(read(&dir, "o/weyl.csv").starts_with("x,re_u,im_u\n0,1,0\n"));
}

fn num(re: &str, im: &str) -> (f64, f64) {
    (re.parse().unwrap(), im.parse().unwrap())
}

/// Principal square root of `re + i im`.
fn csqrt((re, im): (f64, f64)) -> (f64, f64) {
    let r = re.hypot(im);
    (((r + re) / 2.0).sqrt(), ((r - re) / 2.0).sqrt().copysign(im))
}

#[test]
fn box_weyl_routes_agree() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(&dir, "box.ini", &format!("{BOX}[weyl]\nt_trunc = 10\nx_max = 1\nkappas = 2, 3\nz = -1:2\n"));
    let out = weyldyn(&["weyl", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir, "o/report.json");
    let worst = report["max_pairwise"].as_f64().unwrap();
    assert!(worst < 1e-3, "route disagreement {worst}");
    assert_eq!(report["herglotz"]["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn region_violation_needs_force() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(&dir, "low.ini", &format!("{BOX}[weyl]\nh = 0.02\nt_trunc = 6\nkappas = 0.2, 2\n"));
    let out = weyldyn(&["weyl", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("threshold"));

    let out = weyldyn(&["weyl", "--config", &cfg, "--out", "o", "--force"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "o/mfunc.csv");
    let flagged: Vec<&str> = csv.lines().filter(|l| l.ends_with(":outside-region")).collect();
    assert_eq!(flagged.len(), 4);
    assert!(flagged.iter().all(|l| l.starts_with("-0.04")));
    assert_eq!(json(&dir, "o/report.json")["forced"], true);
}

#[test]
fn wave_matches_leapfrog() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(&dir, "wave.ini", &format!("{BOX}[wave]\nt_end = 2\nh = 0.02\n"));
    let out = weyldyn(&["wave", "--config", &cfg, "--out", "o", "--threads", "2"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir, "o/report.json");
    assert!(report["field_rel_l2"].as_f64().unwrap() < 5e-3);
    assert!(report["flux_rel_l2"].as_f64().unwrap() < 5e-2);
    assert!(read(&dir, "o/wave.csv").starts_with("x,t,u\n"));
    assert!(read(&dir, "o/response.csv").starts_with("t,r\n0,0\n"));
    assert_eq!(json(&dir, "o/manifest.json")["threads"], 2);
}

#[test]
fn validate_missing_potential_file() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(&dir, "miss.ini", "[potential]\nfile = nowhere.txt\n");
    let out = weyldyn(&["validate", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.txt"));
}

#[test]
fn validate_coarse_step_fails() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(&dir, "coarse.ini", "[validate]\nh = 0.1\ntrials = 50\n");
    let out = weyldyn(&["validate", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(code(&out), 4);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[FAIL]"));
    let report = json(&dir, "o/report.json");
    assert_eq!(report["all_passed"], false);
    assert_eq!(report["criteria"].as_array().unwrap().len(), 14);
}

#[test]
fn validate_report_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("tri.txt"), "0 0\n1 2\n2 0\n").unwrap();
    let cfg = scenario(
        &dir,
        "det.ini",
        "[potential]\nfile = tri.txt\n[validate]\nh = 0.1\ntrials = 50\nseed = 7\n",
    );
    weyldyn(&["validate", "--config", &cfg, "--out", "a", "--threads", "1"], dir.path());
    weyldyn(&["validate", "--config", &cfg, "--out", "b", "--threads", "3"], dir.path());
    let a = read(&dir, "a/report.json");
    assert!(!a.is_empty());
    assert_eq!(a, read(&dir, "b/report.json"));
    let manifest = json(&dir, "a/manifest.json");
    assert!(manifest["thresholds"]["regions"]["config"]["threshold"].is_number());
    assert!(manifest["timestamp_unix"].as_u64().unwrap() > 0);
}
