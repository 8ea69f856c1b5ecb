use std::fs;
use std::process::{Command, Output};

const MECSIM: &str = env!("CARGO_BIN_EXE_mecsim");

fn mecsim(args: &[&str]) -> Output {
    Command::new(MECSIM)
        .args(args)
        .env("MECSIM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn one_term_ruin_prints_e_to_the_minus_one() {
    let out = mecsim(&[
        "ruin",
        "--initial",
        "0",
        "--premium",
        "1",
        "--mu",
        "1",
        "--analytic-terms",
        "1",
    ]);
    assert!(out.status.success());
    let first = stdout(&out).lines().next().unwrap().to_string();
    assert!(first.starts_with("0.367879"), "{first}");
}

#[test]
fn ruin_accepts_sizes_with_units() {
    // u = 1 KB = 8000 bits, premium 0, μ = 1/8000 → e^{-1}.
    let out = mecsim(&[
        "ruin",
        "--initial",
        "1KB",
        "--premium",
        "0",
        "--mu",
        "0.000125",
        "--analytic-terms",
        "1",
    ]);
    assert!(out.status.success());
    let p: f64 = stdout(&out).lines().next().unwrap().parse().unwrap();
    assert!((p - (-1f64).exp()).abs() < 1e-15);
}

#[test]
fn monte_carlo_ruin_reports_standard_error() {
    let out = mecsim(&[
        "ruin",
        "--initial",
        "2",
        "--premium",
        "0.5",
        "--mu",
        "1",
        "--horizon",
        "20",
        "--paths",
        "2000",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let p: f64 = text.lines().next().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert!(text.contains("method=MonteCarlo"));
}

#[test]
fn ruin_rejects_both_methods_and_too_few_paths() {
    let both = mecsim(&[
        "ruin",
        "--initial",
        "0",
        "--premium",
        "1",
        "--mu",
        "1",
        "--paths",
        "100",
        "--analytic-terms",
        "1",
    ]);
    assert_eq!(both.status.code(), Some(1));
    let few = mecsim(&["ruin", "--initial", "0", "--premium", "1", "--mu", "1", "--paths", "10"]);
    assert_eq!(few.status.code(), Some(1));
    let bad_size = mecsim(&["ruin", "--initial", "lots", "--premium", "1", "--mu", "1"]);
    assert_eq!(bad_size.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_or_flag_prints_usage_and_exits_one() {
    for args in [
        &["frobnicate"][..],
        &["run", "--preset", "ruin_vs_mu", "--turbo"][..],
        &[][..],
    ] {
        let out = mecsim(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(stderr(&out).contains("Usage"), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let out = mecsim(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("validate"));
}

#[test]
fn validate_reports_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[servers]\nbuffer_total_mb = 1.0\nepsilon_mb = 2.0\n").unwrap();
    let out = mecsim(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("servers.epsilon_mb"));
    assert!(stderr(&out).contains("epsilon exceeds free buffer"));

    let good = dir.path().join("good.toml");
    fs::write(&good, "[servers]\nbuffer_total_mb = 8.0\nepsilon_mb = 2.0\n").unwrap();
    let out = mecsim(&["validate", "--config", good.to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn validate_rejects_unknown_keys_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let typo = dir.path().join("typo.toml");
    fs::write(&typo, "[servers]\nbufer_total_mb = 1.0\n").unwrap();
    assert_eq!(
        mecsim(&["validate", "--config", typo.to_str().unwrap()]).status.code(),
        Some(1)
    );
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        mecsim(&["validate", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn run_writes_one_block_of_rows_per_replication() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.csv");
    let out = mecsim(&[
        "run",
        "--preset",
        "admitted_vs_buffer",
        "--reps",
        "7",
        "--seed",
        "42",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("preset,swept_param,swept_value,replication,metric,value")
    );
    let admitted: Vec<&str> = lines.filter(|l| l.contains(",admitted_fraction_proposed,")).collect();
    // 5 buffer sizes × 7 replications.
    assert_eq!(admitted.len(), 35);
    assert!(admitted.iter().all(|l| l.starts_with("admitted_vs_buffer,buffer_mb,")));
}

#[test]
fn run_without_out_streams_csv_to_stdout() {
    let out = mecsim(&["run", "--preset", "ruin_vs_epsilon", "--reps", "1"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("preset,swept_param"));
}

#[test]
fn run_with_config_overrides_preset_base() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[servers]\ncount = 2\nbuffer_total_mb = 1.0\n\n[users]\ncount = 10\n",
    )
    .unwrap();
    let out = mecsim(&[
        "run",
        "--preset",
        "admitted_vs_buffer",
        "--config",
        cfg.to_str().unwrap(),
        "--reps",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("admitted_vs_buffer,buffer_mb,"));
}

#[test]
fn run_errors_map_to_exit_codes() {
    assert_eq!(mecsim(&["run", "--preset", "no_such_preset"]).status.code(), Some(1));
    assert_eq!(mecsim(&["run"]).status.code(), Some(1));
    let out = mecsim(&[
        "run",
        "--preset",
        "ruin_vs_mu",
        "--reps",
        "1",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/nonexistent-dir/x.csv"));
}

#[test]
fn solve_dumps_every_user() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[users]\ncount = 25\n\n[experiment]\nseed = 3\n").unwrap();
    let out_path = dir.path().join("s.csv");
    let out = mecsim(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&out_path).unwrap();
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "user");
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 25);
    for r in &records {
        if !r[1].is_empty() {
            let d: f64 = r[2].parse().unwrap();
            let a: f64 = r[3].parse().unwrap();
            let b: f64 = r[4].parse().unwrap();
            assert_eq!(a + b, d);
        }
    }
}

#[test]
fn calibrate_reports_fitted_knobs() {
    let out = mecsim(&[
        "calibrate",
        "--preset",
        "ruin_vs_epsilon",
        "--target",
        "2:0.12",
        "--target",
        "6:0.21",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("premium_kb_per_slot"));
    assert!(text.contains("claim_unit_kb"));
}
