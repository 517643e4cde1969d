//! Acceptance suite. Each test prints one `ACCEPTANCE PASS|FAIL` line; run
//! with `cargo test -p adds-cli --test acceptance -- --nocapture` to see
//! them.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use adds_cli::commands::{cmd_attack_check, cmd_certify, AttackOptions, CertifyOptions};
use adds_cli::ExperimentConfig;
use adds_core::exec::Parallelism;
use adds_core::oracle::{
    check_ars_consistency, check_clopper_pearson, check_filter_ledger, check_gmm_denoiser,
    check_phi_inv, check_sensitivity, check_step_identity, check_zero_scale, CheckReport,
};
use adds_core::rng::StreamKey;
use adds_core::stats::clopper_pearson_lower;

const SEED: u64 = 20_240_601;

fn verdict(name: &str, pass: bool, detail: impl std::fmt::Display) {
    println!(
        "ACCEPTANCE {} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name} failed: {detail}");
}

fn check_with_budget(
    name: &str,
    report: &CheckReport,
    elapsed: Duration,
    budget: Option<Duration>,
) {
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let detail = format!(
        "{} cases, {} failures (allowed {}), max delta {:.3e} (tol {:.1e}), {:.1}s{}{}",
        report.cases,
        report.failures,
        report.allowed_failures,
        report.max_delta,
        report.tolerance,
        elapsed.as_secs_f64(),
        budget.map_or(String::new(), |b| format!(" (limit {}s)", b.as_secs())),
        report
            .details
            .first()
            .map_or(String::new(), |d| format!("; first failure: {d}"))
    );
    verdict(name, report.passed() && in_time, detail);
}

fn key(i: u64) -> StreamKey {
    StreamKey::path(SEED, &[i])
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn filter_soundness() {
    let start = Instant::now();
    let report = check_filter_ledger(key(1), 10_000, false);
    check_with_budget(
        "filter soundness",
        &report,
        start.elapsed(),
        Some(Duration::from_secs(30)),
    );
}

#[test]
fn one_step_sensitivity_exact() {
    let report = check_sensitivity(key(2), 1000).unwrap();
    check_with_budget("one-step sensitivity", &report, Duration::ZERO, None);
}

#[test]
fn step_forms_agree() {
    let report = check_step_identity(key(3), 1000);
    check_with_budget("noise vs clean step forms", &report, Duration::ZERO, None);
}

#[test]
fn composition_radius_consistent() {
    let report = check_ars_consistency(key(4), 1000).unwrap();
    check_with_budget(
        "fixed-variance composition radius",
        &report,
        Duration::ZERO,
        None,
    );
}

#[test]
fn zero_scale_ignores_input() {
    let report = check_zero_scale(key(5), 100).unwrap();
    check_with_budget("s=0 degeneracy", &report, Duration::ZERO, None);
}

#[test]
fn denoiser_matches_monte_carlo() {
    let start = Instant::now();
    let report = check_gmm_denoiser(key(6), 50, 100_000, Parallelism::default()).unwrap();
    check_with_budget(
        "GMM denoiser oracle",
        &report,
        start.elapsed(),
        Some(Duration::from_secs(120)),
    );
}

#[test]
fn statistics_match_oracles() {
    let cp = check_clopper_pearson();
    let quantiles = check_phi_inv(key(7), 1000);
    let closed = clopper_pearson_lower(1000, 1000, 0.001).unwrap();
    let closed_ok =
        (closed - 0.001f64.powf(1e-3)).abs() <= 1e-9 && (closed - 0.993_116).abs() < 5e-7;
    let detail = format!(
        "clopper-pearson {} cases max delta {:.2e}; phi_inv {} probes max delta {:.2e}; k=n=1000 bound {closed:.9}",
        cp.cases, cp.max_delta, quantiles.cases, quantiles.max_delta
    );
    verdict(
        "statistics",
        cp.passed() && quantiles.passed() && closed_ok,
        detail,
    );
}

#[test]
fn empirical_certificate_soundness() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(&configs().join("soundness.toml")).unwrap();
    cfg.output = dir.path().join("soundness.csv");
    let start = Instant::now();
    let out = cmd_certify(&cfg, &CertifyOptions::default()).unwrap();
    let attack = AttackOptions {
        trials: 200,
        fraction: 0.99,
        n0: None,
        parallelism: Parallelism::default(),
    };
    let report = cmd_attack_check(&cfg, &out.csv_path, &attack).unwrap();
    let elapsed = start.elapsed();
    let t = &report.total;
    let pass = t.trials > 0 && t.flip_rate <= 0.01 && elapsed <= Duration::from_secs(600);
    verdict(
        "empirical certificate soundness",
        pass,
        format!(
            "{} certified points x {} trials: {} flips, rate {:.5} ± {:.5} (95% upper {:.5}), {} abstentions, {} skipped, {:.0}s (limit 600s)",
            t.rows_checked,
            report.trials_per_point,
            t.flips,
            t.flip_rate,
            t.flip_rate_stderr,
            t.flip_rate_upper_95,
            t.abstentions,
            report.skipped_rows,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn structural_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(&configs().join("quick.toml")).unwrap();
    cfg.output = dir.path().join("quick.csv");
    let out = cmd_certify(&cfg, &CertifyOptions::default()).unwrap();
    let s = &out.summary;
    let methods = ["rs", "dds", "densepure", "adds", "adds_oneshot"];
    let sigmas = [1.0, 1.5, 2.0];
    let mut problems = Vec::new();
    for table in [&s.certified_accuracy_r0, &s.clean_accuracy] {
        if table.sigmas != sigmas {
            problems.push(format!("{}: sigmas {:?}", table.title, table.sigmas));
        }
        for m in methods {
            let votes: &[usize] = if m == "densepure" || m == "adds" {
                &[1, 5]
            } else {
                &[1]
            };
            for &k in votes {
                match table.rows.iter().find(|r| r.method == m && r.votes == k) {
                    Some(r) if r.values.iter().all(|v| v.is_some()) => {}
                    _ => problems.push(format!("{}: missing {m} ({k} votes)", table.title)),
                }
            }
        }
    }
    for c in &s.cells {
        if c.curve.radius.len() != 9 || c.curve.certified_accuracy.windows(2).any(|w| w[1] > w[0]) {
            problems.push(format!("bad curve for {} sigma={}", c.method, c.sigma));
        }
    }
    if out.rows.iter().any(|r| r.wall_time_ms.is_nan() || r.wall_time_ms <= 0.0) {
        problems.push("missing per-row timings".into());
    }
    if !out.summary_path.exists() {
        problems.push("summary JSON not written".into());
    }
    verdict(
        "structural reproduction",
        problems.is_empty(),
        format!(
            "{} rows, {} cells, both tables and curves present{}",
            out.rows.len(),
            s.cells.len(),
            if problems.is_empty() {
                String::new()
            } else {
                format!("; problems: {problems:?}")
            }
        ),
    );
    print!("{}", s.to_markdown());
}
