use std::fs;
use std::path::Path;
use std::process::Command;

use adds_cli::commands::{cmd_attack_check, cmd_certify, cmd_sweep, AttackOptions, CertifyOptions};
use adds_cli::experiment::read_rows;
use adds_cli::summary::certified_accuracy;
use adds_cli::{CliError, ExperimentConfig};
use adds_core::exec::Parallelism;

fn small_config(dir: &Path, extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"
        seed = 3
        output = "{}"
        n0 = 20
        n = 200
        num_test_points = 6
        record_timing = false
        [task]
        separation = 1.5
        [grid]
        methods = ["rs", "dds", "densepure", "adds", "adds_oneshot"]
        votes = [1, 3]
        sigmas = [1.0]
        {extra}
        "#,
        dir.join("out.csv").display()
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

fn opts(parallelism: Parallelism) -> CertifyOptions {
    CertifyOptions {
        parallelism,
        ..Default::default()
    }
}

#[test]
fn certify_is_byte_reproducible_across_backends() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let first = cmd_certify(&cfg, &opts(Parallelism::Sequential)).unwrap();
    let a = fs::read(&first.csv_path).unwrap();
    cmd_certify(&cfg, &opts(Parallelism::Rayon)).unwrap();
    let b = fs::read(&first.csv_path).unwrap();
    assert_eq!(a, b);
    assert_eq!(first.rows.len(), 6 * 7);
    // rows ordered by point, then pipeline
    assert!(first
        .rows
        .windows(2)
        .all(|w| w[0].sample_id <= w[1].sample_id));
    assert_eq!(read_rows(&first.csv_path).unwrap(), first.rows);
}

#[test]
fn summary_matches_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = cmd_certify(&cfg, &opts(Parallelism::default())).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out.summary_path).unwrap()).unwrap();
    assert_eq!(json["cells"].as_array().unwrap().len(), 7);
    for cell in &out.summary.cells {
        let rows: Vec<_> = out
            .rows
            .iter()
            .filter(|r| r.method == cell.method && r.votes == cell.votes)
            .collect();
        let at_zero = rows
            .iter()
            .filter(|r| r.correct && !r.abstained && r.radius >= 0.0)
            .count();
        assert_eq!(
            cell.certified_accuracy_r0,
            at_zero as f64 / rows.len() as f64
        );
        assert_eq!(cell.certified_accuracy_r0, certified_accuracy(&rows, 0.0));
        assert_eq!(cell.curve.radius.len(), 9);
        assert!((cell.curve.radius[8] - 2.0 * cell.sigma).abs() < 1e-12);
        assert!(cell
            .curve
            .certified_accuracy
            .windows(2)
            .all(|w| w[1] <= w[0]));
    }
    let table = &out.summary.certified_accuracy_r0;
    assert_eq!(table.rows.len(), 7);
    assert!(table
        .rows
        .iter()
        .all(|r| r.values.len() == 1 && r.values[0].is_some()));
}

#[test]
fn single_cell_sweep_reproduces_certify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "guidance_scale = 0.8\nrespaced_steps = 20\n[sweep]\nguidance_scales = [0.8]\nrespaced_steps = [20]");
    let certified = cmd_certify(&cfg, &opts(Parallelism::default())).unwrap();
    let a = fs::read(&certified.csv_path).unwrap();
    let swept = cmd_sweep(&cfg, &opts(Parallelism::default())).unwrap();
    assert_eq!(a, fs::read(&swept.csv_path).unwrap());
}

#[test]
fn attack_check_skips_unknown_rows_and_validates_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = cmd_certify(&cfg, &opts(Parallelism::default())).unwrap();
    let text = fs::read_to_string(&out.csv_path).unwrap();
    let certified = out.rows.iter().filter(|r| !r.abstained).count();
    // relabel one certified dds row to a sigma that was never run
    let target = out
        .rows
        .iter()
        .find(|r| r.method == "dds" && !r.abstained)
        .unwrap();
    let needle = format!("{},dds,1.0,", target.sample_id);
    let edited = text.replacen(&needle, &format!("{},dds,7.0,", target.sample_id), 1);
    let csv = dir.path().join("edited.csv");
    fs::write(&csv, edited).unwrap();
    let attack = AttackOptions {
        trials: 3,
        fraction: 0.5,
        n0: Some(20),
        parallelism: Parallelism::default(),
    };
    let rep = cmd_attack_check(&cfg, &csv, &attack).unwrap();
    assert_eq!(rep.skipped_rows, 1);
    assert_eq!(rep.total.rows_checked, certified - 1);
    assert_eq!(rep.total.trials, 3 * (certified - 1));
    for bad in [0.0, 1.0, 1.5] {
        let e = cmd_attack_check(
            &cfg,
            &csv,
            &AttackOptions {
                fraction: bad,
                ..attack.clone()
            },
        );
        assert!(matches!(e, Err(CliError::Config(_))));
    }
}

fn adds(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_adds"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(adds(&["certify", "--config", missing.to_str().unwrap()]), 2);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "output = \"x.csv\"\nnum_test_points = 0\n").unwrap();
    assert_eq!(adds(&["certify", "--config", bad.to_str().unwrap()]), 1);
    assert_eq!(adds(&["oracle-check", "--checks", ""]), 1);
    assert_eq!(adds(&["oracle-check", "--checks", "nope"]), 1);
    assert_eq!(
        adds(&[
            "oracle-check",
            "--checks",
            "filter_ledger",
            "--inject-fault"
        ]),
        3
    );
    assert_eq!(
        adds(&["oracle-check", "--checks", "clopper_pearson,step_identity"]),
        0
    );
}

#[test]
fn certify_binary_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.toml");
    fs::write(
        &cfg_path,
        "output = \"res/o.csv\"\nn0 = 10\nn = 50\nnum_test_points = 2\n[[pipelines]]\nmethod = \"adds\"\nsigma = 1.0\n",
    )
    .unwrap();
    let traj = dir.path().join("traj");
    let code = adds(&[
        "certify",
        "--config",
        cfg_path.to_str().unwrap(),
        "--dump-trajectory",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(dir.path().join("res/o.csv").exists());
    assert!(dir.path().join("res/o.summary.json").exists());
    let dumped: Vec<_> = fs::read_dir(&traj).unwrap().collect();
    assert_eq!(dumped.len(), 1);
}
