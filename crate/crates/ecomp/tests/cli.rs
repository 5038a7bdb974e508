//! End-to-end tests of the `ecomp` binary: exit codes, table output, and
//! the machine-readable rendering.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ecomp"))
}

fn corbet_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/corbet.csv")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn machine_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("machine output parses as JSON")
}

#[test]
fn fixture_reproduces_observed_column() {
    let text = std::fs::read_to_string(corbet_path()).unwrap();
    let table = ecomp::fit::FrequencyTable::parse(&text).unwrap();
    assert_eq!(table.cells().len(), 25);
    assert_eq!(table.tail(), Some((25, 119)));
    assert_eq!(table.n(), 924);
    let expected_counts: Vec<u64> = vec![
        304, 118, 74, 44, 24, 29, 22, 20, 19, 20, 15, 12, 14, 6, 12, 6, 9, 9, 6, 10, 10, 11, 5,
        3, 3,
    ];
    let observed: Vec<u64> = table.cells().iter().map(|c| c.1).collect();
    assert_eq!(observed, expected_counts);
}

#[test]
fn fit_corbet_machine_output() {
    let out = run(&[
        "fit",
        corbet_path().to_str().unwrap(),
        "--model",
        "ecomp",
        "--format",
        "machine",
    ]);
    let doc = machine_json(&out);
    assert!(doc["command"].as_str().unwrap().contains("fit"));
    assert!(doc["input_digest"].as_str().unwrap().starts_with("fnv1a:"));
    let results = &doc["results"];
    assert_eq!(results["model"], "ecomp");
    let aic = results["aic"].as_f64().unwrap();
    assert!((aic - 4510.02).abs() < 1.0, "aic = {aic}");
    let chisq = results["chisq"].as_f64().unwrap();
    assert!((chisq - 18.57).abs() < 1.5);
    assert_eq!(results["df"], 21);
    assert_eq!(results["n"], 924);
    assert_eq!(results["cells"].as_array().unwrap().len(), 26);
    let lr = &results["lr_test_vs_nb"];
    assert_eq!(lr["df"], 2);
    let stat = lr["statistic"].as_f64().unwrap();
    assert!(stat > 9.0 && stat < 11.5, "lr statistic = {stat}");
}

#[test]
fn fit_rejects_empty_and_missing_input() {
    let empty = std::env::temp_dir().join("ecomp_cli_empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = run(&["fit", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["fit", "/nonexistent/nowhere.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_params_exit_2_with_clause() {
    let out = run(&[
        "pmf", "-v", "2", "-p", "1.5", "-a", "1", "-b", "1", "--kmax", "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("alpha = beta requires 0 < p < 1"),
        "stderr: {err}"
    );
}

#[test]
fn nonconvergent_exit_3() {
    let out = bin()
        .env("ECOMP_MAX_TERMS", "50")
        .args(["pmf", "-v", "1", "-p", "5", "-a", "0.3", "-b", "0", "--kmax", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn pmf_table_peaks_at_mode() {
    let out = run(&[
        "pmf", "-v", "2", "-p", "2", "-a", "3", "-b", "2", "--kmax", "10", "--format", "machine",
    ]);
    let doc = machine_json(&out);
    let rows = doc["results"]["table"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    let argmax = rows
        .iter()
        .enumerate()
        .max_by(|a, b| {
            a.1["pmf"]
                .as_f64()
                .unwrap()
                .total_cmp(&b.1["pmf"].as_f64().unwrap())
        })
        .map(|(i, _)| i)
        .unwrap();
    assert_eq!(argmax, 3);
    // cdf column is monotone and ends near 1
    let last_cdf = rows.last().unwrap()["cdf"].as_f64().unwrap();
    assert!(last_cdf > 0.98 && last_cdf <= 1.0);
}

#[test]
fn moments_negative_binomial_mean() {
    let out = run(&[
        "moments", "-v", "2", "-p", "0.5", "-a", "1", "-b", "1", "-r", "1", "--format", "machine",
    ]);
    let doc = machine_json(&out);
    let results = &doc["results"];
    let fm = results["factorial_moments"][0]["value"].as_f64().unwrap();
    assert!((fm - 2.0).abs() < 1e-9, "first factorial moment = {fm}");
    assert!((results["mean"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(results["approximate"], false);
}

#[test]
fn sample_deterministic_given_seed() {
    let args = [
        "sample", "-v", "2", "-p", "2", "-a", "3", "-b", "2", "-n", "200", "--seed", "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let c = run(&[
        "sample", "-v", "2", "-p", "2", "-a", "3", "-b", "2", "-n", "200", "--seed", "8",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn queue_simulation_close_to_analytic() {
    let out = run(&[
        "queue", "--lambda", "2", "--mu", "1", "-v", "2", "-a", "3", "-b", "2", "--horizon",
        "1e5", "--seed", "7", "--format", "machine",
    ]);
    let doc = machine_json(&out);
    let results = &doc["results"];
    let tv_sim = results["tv_sim_analytic"].as_f64().unwrap();
    assert!(tv_sim < 0.02, "tv = {tv_sim}");
    let tv_exact = results["tv_exact_analytic"].as_f64().unwrap();
    assert!(tv_exact < 1e-10);
}

#[test]
fn human_and_machine_values_agree() {
    let out_h = run(&[
        "moments", "-v", "1", "-p", "0.5", "-a", "1", "-b", "0", "-r", "2",
    ]);
    let human = String::from_utf8_lossy(&out_h.stdout).to_string();
    let out_m = run(&[
        "moments", "-v", "1", "-p", "0.5", "-a", "1", "-b", "0", "-r", "2", "--format", "machine",
    ]);
    let doc = machine_json(&out_m);
    let mean = doc["results"]["mean"].as_f64().unwrap();
    // The human table renders the same value to 10 decimal places.
    assert!(human.contains(&format!("mean = {mean:.10}")), "human: {human}");
}
