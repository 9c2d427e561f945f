use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmrg-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&o.stdout)
        )
    })
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn dmrg_tfim_reaches_critical_energy() {
    let o = run(&["dmrg", "--model", "tfim", "--g", "1.0", "--m-max", "20", "--iters", "60"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["schema"], "dmrg-lab/v1");
    assert_eq!(v["model"], "tfim");
    assert_eq!(v["converged"], true);
    let e = v["energy_per_site_trace"].as_array().unwrap();
    let last = e.last().unwrap().as_f64().unwrap();
    assert!((last + 4.0 / std::f64::consts::PI).abs() < 1e-3, "{last}");
    let fs = &v["final_spectrum"];
    assert!(fs["eigenvalues"].as_array().unwrap().len() <= 24);
    assert!(fs["discarded_weight"].as_f64().unwrap() >= 0.0);
    assert!(fs["entropy"].as_f64().unwrap() > 0.0);
}

#[test]
fn dmrg_zero_states_is_a_usage_error() {
    let o = run(&["dmrg", "--model", "tfim", "--g", "1.0", "--m-max", "0"]);
    assert_eq!(code(&o), 64);
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&run(&["dmrg", "--model", "tfim", "--bogus"])), 64);
    assert_eq!(code(&run(&["dmrg", "--model", "ising", "--m-max", "4"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn dmrg_is_deterministic_byte_for_byte() {
    let args = ["dmrg", "--model", "heisenberg", "--m-max", "12", "--iters", "10", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(matches!(code(&a), 0 | 2));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn non_convergence_still_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let o = run(&[
        "dmrg", "--model", "tfim", "--m-max", "8", "--iters", "2", "--tol", "1e-14", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["converged"], false);
    assert_eq!(v["iterations"], 2);
}

#[test]
fn dmrg_csv_lists_every_truncation() {
    let o = run(&["dmrg", "--model", "tfim", "--m-max", "4", "--iters", "3", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("iteration,index,eigenvalue\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.first().unwrap()[0], 0.0);
    assert!(rows.iter().all(|r| r[2] >= -1e-12 && r[2] <= 1.0 + 1e-12));
}

#[test]
fn failure_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["dmrg", "--model", "tfim", "--m-max", "0"],
        vec!["ctm", "--L", "5", "--beta-j", "0.4"],
        vec!["infogeo", "--p", "[0.5,0.6]", "--q", "[0.5,0.5]", "--alpha", "0"],
    ] {
        let out = dir.path().join("out.json");
        let mut full = args.clone();
        full.extend(["--out", out.to_str().unwrap()]);
        assert_eq!(code(&run(&full)), 64, "{args:?}");
        assert!(!out.exists());
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ctm.json");
    let args = ["ctm", "--L", "2", "--beta-j", "0.3"];
    let stdout = run(&args).stdout;
    let mut with_out = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    let o = run(&with_out);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(Path::new(&out)).unwrap(), stdout);
}

#[test]
fn spectrum_entropies_agree() {
    let o = run(&["spectrum", "--model", "heisenberg", "--n", "8", "--cut", "3"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let diff = v["entropy_left"].as_f64().unwrap() - v["entropy_right"].as_f64().unwrap();
    assert!(diff.abs() < 1e-10);
    let sum: f64 = v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .sum();
    assert!((sum - 1.0).abs() < 1e-10);
    assert_eq!(code(&run(&["spectrum", "--model", "tfim", "--n", "8", "--cut", "8"])), 64);
}

#[test]
fn infogeo_examples() {
    let v = json(&run(&["infogeo", "--p", "[0.5,0.5]", "--q", "[0.5,0.5]", "--alpha", "0"]));
    assert_eq!(v["divergence"].as_f64().unwrap(), 0.0);

    let v = json(&run(&["infogeo", "--p", "[1,0]", "--q", "[0.5,0.5]", "--alpha", "-1"]));
    assert!((v["divergence"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-12);

    let v = json(&run(&["infogeo", "--p", "[0.5,0.5]", "--q", "[1,0]", "--alpha", "-1"]));
    assert_eq!(v["divergence"], "inf");

    let v = json(&run(&["infogeo", "--fisher", "bernoulli", "--theta", "0.5"]));
    let g = v["fisher_matrix"][0][0].as_f64().unwrap();
    assert!((g - 4.0).abs() < 1e-5);
    assert_eq!(v["fisher_matrix"].as_array().unwrap().len(), 1);
}

#[test]
fn infogeo_rejects_bad_input() {
    for args in [
        vec!["infogeo", "--p", "[0.5,0.49]", "--q", "[0.5,0.5]", "--alpha", "0"],
        vec!["infogeo", "--p", "[0.5,0.5]", "--q", "[0.2,0.3,0.5]", "--alpha", "0"],
        vec!["infogeo", "--p", "not json", "--q", "[1]", "--alpha", "0"],
        vec!["infogeo", "--p", "[0.5,0.5]", "--q", "[0.5,0.5]"],
        vec!["infogeo", "--fisher", "bernoulli", "--theta", "0.2,0.3"],
        vec!["infogeo", "--fisher", "bernoulli", "--theta", "1.0"],
    ] {
        assert_eq!(code(&run(&args)), 64, "{args:?}");
    }
    let tiny = run(&["infogeo", "--p", "[0.5,0.5000000001]", "--q", "[0.5,0.5]", "--alpha", "0"]);
    assert_eq!(code(&tiny), 0);
}

#[test]
fn wave_sign_changes_stay_below_ell() {
    let o = run(&["angular", "wave", "--ell", "8", "--mass", "1", "--xmin", "0.01", "--xmax", "20", "--n", "2000"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("x,value\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 2000);
    let changes: Vec<f64> = rows
        .windows(2)
        .filter(|w| w[0][1].signum() != w[1][1].signum())
        .map(|w| w[1][0])
        .collect();
    assert!(changes.len() > 3);
    assert!(changes.iter().all(|x| *x < 8.0), "{changes:?}");
}

#[test]
fn wave_at_zero_order_is_positive() {
    let o = run(&["angular", "wave", "--ell", "0", "--xmin", "0.01", "--xmax", "20", "--n", "200"]);
    let rows = csv_rows(&String::from_utf8(o.stdout).unwrap());
    assert!(rows.iter().all(|r| r[1] > 0.0));
    assert_eq!(code(&run(&["angular", "wave", "--ell", "1", "--xmin", "0", "--xmax", "1", "--n", "5"])), 64);
}

#[test]
fn lighter_chain_is_more_entangled() {
    let entropy = |mass: &str| {
        json(&run(&["angular", "spectrum", "--n", "64", "--cut", "32", "--mass", mass]))["entropy"]
            .as_f64()
            .unwrap()
    };
    assert!(entropy("0.1") > entropy("1"));
    assert_eq!(code(&run(&["angular", "spectrum", "--n", "4", "--cut", "4"])), 64);
}

#[test]
fn ctm_examples() {
    let v = json(&run(&["ctm", "--L", "1", "--beta-j", "0"]));
    assert_eq!(v["Z"].as_f64().unwrap(), 512.0);
    assert_eq!(v["check_z_bruteforce"], "pass");

    let o = run(&["ctm", "--L", "1", "--beta-j", "0.4"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["check_z_bruteforce"], "pass");
    let spectrum: Vec<f64> = v["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((spectrum.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let v = json(&run(&["ctm", "--L", "2", "--beta-j", "0.4", "--boundary", "fixed"]));
    assert_eq!(v["check_z_bruteforce"], "skipped");
    assert_eq!(v["boundary"], "fixed");

    assert_eq!(code(&run(&["ctm", "--L", "5", "--beta-j", "0.4"])), 64);
}

#[test]
fn oracle_reports() {
    let v = json(&run(&["oracle", "tfim-energy", "--g", "1"]));
    let e = v["value"][0].as_f64().unwrap();
    assert!((e + 4.0 / std::f64::consts::PI).abs() < 1e-12);

    let v = json(&run(&["oracle", "ising-z", "--L", "1", "--beta-j", "0"]));
    assert_eq!(v["value"][0].as_f64().unwrap(), 512.0);

    let v = json(&run(&["oracle", "two-oscillator", "--mass", "1"]));
    assert!(v["value"][0].as_f64().unwrap() > 0.9);
}
