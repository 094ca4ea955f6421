use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn longrange(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longrange"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn longrange_threads(out: &Path, args: &[&str], threads: usize) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longrange"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .output()
        .expect("binary runs")
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn names_matching(dir: &Path, prefix: &str, suffix: &str) -> Vec<String> {
    files(dir).into_keys().filter(|n| n.starts_with(prefix) && n.ends_with(suffix)).collect()
}

const FAST: &[&str] = &["--nmax", "9", "--points", "80"];

#[test]
fn default_curves_run_writes_every_block() {
    let dir = tempfile::tempdir().unwrap();
    let o = longrange(dir.path(), &["curves"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let curves = names_matching(dir.path(), "curves_", ".csv");
    let diabatic = names_matching(dir.path(), "diabatic_", ".csv");
    assert_eq!((curves.len(), diabatic.len()), (14, 14));
    assert!(curves.contains(&"curves_sigma_minus_odd.csv".to_string()));

    let csv = fs::read_to_string(dir.path().join("curves_sigma_plus_even.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("R_au,E1_cm1"));
    assert!(header.contains("E1_hartree"));
    // Refinement can add points, never remove them.
    assert!(csv.lines().count() > 400);

    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("curves_pi_even.json")).unwrap()).unwrap();
    assert!(side["min_tracking_overlap"].as_f64().unwrap() >= 0.5);
}

#[test]
fn block_selection() {
    let dir = tempfile::tempdir().unwrap();
    let o = longrange(dir.path(), &["curves", "--blocks", "sigma+"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        names_matching(dir.path(), "curves_", ".csv"),
        vec!["curves_sigma_plus_even.csv", "curves_sigma_plus_odd.csv"]
    );
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["curves", "--species", "/nonexistent/species.json"],
        &["curves", "--rmin", "30"],
        &["curves", "--nmax", "41"],
        &["curves", "--blocks", "sigma"],
        &["converge", "--n-star", "36"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = longrange(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn overlap_region_needs_explicit_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let o = longrange(dir.path(), &["curves", "--blocks", "pi", "--rmin", "30", "--allow-overlap-region"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unconverged_quadrature_is_an_engine_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = longrange(dir.path(), &["crossings", "--quad-nodes", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("quadrature"));
}

#[test]
fn crossing_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = longrange(dir.path(), &["crossings", "--blocks", "sigma+,sigma-"]);
    assert_eq!(o.status.code(), Some(0));
    let txt = fs::read_to_string(dir.path().join("crossings.txt")).unwrap();
    let minus = txt.split("## Sigma- even").nth(1).unwrap();
    assert!(minus.trim_start().starts_with("(no crossings)"));

    let events: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("crossings.json")).unwrap()).unwrap();
    assert!(!events.is_empty());
    assert!(events.iter().all(|e| e["block"].as_str().unwrap().starts_with("sigma_plus")));
    for e in &events {
        let r0 = e["r0_au"].as_f64().unwrap();
        assert!((40.0..=500.0).contains(&r0));
        for side in ["upper", "lower"] {
            if let Some(p) = e[side]["probability"].as_f64() {
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    let zero = tempfile::tempdir().unwrap();
    let o = longrange(zero.path(), &["crossings", "--blocks", "sigma+", "--temperature", "0"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn validity_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["validity", "--blocks", "sigma+,pi"];
    args.extend_from_slice(FAST);
    let o = longrange(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("validity.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "state,label,epsilon,R_star_au,resonances,never_met");
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert_eq!(rows.len(), names_matching(dir.path(), "wbar_", ".csv").len());
    assert!(rows[0].starts_with("sigma_plus_even:1,"));
}

#[test]
fn convergence_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = longrange(dir.path(), &["converge", "--n-star", "2", "--blocks", "sigma+", "--points", "60"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("convergence_nstar2.json")).unwrap()).unwrap();
    let blocks = report.as_array().unwrap();
    assert_eq!(blocks.len(), 2);
    for b in blocks {
        assert_eq!(b["n_star"], 2);
        assert!(b["r_min_reported"].as_f64().unwrap() >= 45.0);
        let steps: Vec<(u64, u64)> = b["steps"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| (s["n_max_from"].as_u64().unwrap(), s["n_max_to"].as_u64().unwrap()))
            .collect();
        assert_eq!(steps, vec![(4, 6), (6, 8)]);
    }
    assert!(dir.path().join("convergence_nstar2.txt").exists());
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    for cmd in ["curves", "crossings", "validity"] {
        let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let mut args = vec![cmd, "--blocks", "sigma+,pi,delta"];
        args.extend_from_slice(FAST);
        assert_eq!(longrange_threads(a.path(), &args, 1).status.code(), Some(0));
        assert_eq!(longrange_threads(b.path(), &args, 4).status.code(), Some(0));
        assert_eq!(longrange_threads(c.path(), &args, 4).status.code(), Some(0));
        let reference = files(a.path());
        assert!(!reference.is_empty());
        assert!(reference == files(b.path()), "{cmd}: 1 vs 4 threads differ");
        assert!(reference == files(c.path()), "{cmd}: repeated run differs");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "blocks = [\"delta\"]\nnmax = 7\npoints = 30\n").unwrap();
    let out = dir.path().join("out");
    let o = longrange(&out, &["curves", "--config", cfg.to_str().unwrap(), "--points", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(names_matching(&out, "curves_", ".csv"), vec!["curves_delta_even.csv", "curves_delta_odd.csv"]);
    let csv = fs::read_to_string(out.join("curves_delta_even.csv")).unwrap();
    assert!(csv.lines().count() > 50);

    fs::write(&cfg, "nmax_typo = 7\n").unwrap();
    let o = longrange(&out, &["curves", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
