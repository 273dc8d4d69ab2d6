//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use pottslab::bounds::suite::{run_suite, Suite, SuiteConfig, SuiteResult};
use pottslab::bounds::{bound_k, k_threshold_a, ContractionMode};
use pottslab::cli::oracle::{oracle_sweep, OracleConfig};
use pottslab::experiments::{
    run_experiment, sqrt_ratio_contraction_trace, BoundaryStrategy, ExperimentConfig, Threshold,
};
use pottslab::tree::random::instance_rng;
use pottslab::{apply_f, jacobian_f, PottsParams};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

/// Worst slack per check label across every case of the given suites.
fn worst_by_label(results: &[&SuiteResult]) -> BTreeMap<String, f64> {
    let mut worst = BTreeMap::new();
    for r in results {
        for c in &r.cases {
            for check in &c.report.checks {
                let e = worst.entry(check.label.clone()).or_insert(f64::INFINITY);
                let s = check.slack();
                if s.is_nan() || s < *e {
                    *e = s;
                }
            }
        }
    }
    worst
}

fn slack_floor_holds(worst: &BTreeMap<String, f64>, floor: f64) -> bool {
    worst.values().all(|&s| s >= -floor)
}

fn fmt_worst(worst: &BTreeMap<String, f64>) -> String {
    worst.iter().map(|(k, v)| format!("{k}={v:.2e}")).collect::<Vec<_>>().join(" ")
}

fn oracle() -> Outcome {
    let start = Instant::now();
    let r = match oracle_sweep(&OracleConfig::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("error: {e}")),
    };
    let t = start.elapsed();
    let cover = r.cases.len() == 500 * 10 * 5;
    outcome(
        r.pass && r.max_rel_err <= 1e-9 && cover && within(t, 60),
        format!(
            "{} cases, {} infeasible on both sides, max rel err {:.3e} (tol 1e-9), {:.2?}",
            r.cases.len(),
            r.infeasible,
            r.max_rel_err,
            t
        ),
    )
}

fn jacobian() -> Outcome {
    let start = Instant::now();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let mut rng = instance_rng(2024, i);
        let q = [3, 4, 5][(i % 3) as usize];
        let w = rng.gen_range(0.05..0.95);
        let params = PottsParams::new(q, w, 4).unwrap();
        let x: Vec<f64> = (0..q).map(|_| rng.gen_range(0.2..1.0)).collect();
        let dense = jacobian_f(&x, &params).unwrap().to_dense();
        for j in 0..q {
            let (mut up, mut down) = (x.clone(), x.clone());
            up[j] += h;
            down[j] -= h;
            let fu = apply_f(&up, &params).unwrap().into_vec();
            let fd = apply_f(&down, &params).unwrap().into_vec();
            for r in 0..q {
                worst = worst.max((dense[r][j] - (fu[r] - fd[r]) / (2.0 * h)).abs());
            }
        }
    }
    let t = start.elapsed();
    outcome(worst <= 1e-6 && within(t, 10), format!("1000 points, max abs err {worst:.3e} (tol 1e-6), {t:.2?}"))
}

fn suite(s: Suite, cfg: &SuiteConfig) -> SuiteResult {
    run_suite(s, cfg).expect("suite arguments are valid")
}

fn norm_bound() -> Outcome {
    let start = Instant::now();
    let cfg = SuiteConfig { q: Some(3), seed: 1, instances: Some(10_000), ..SuiteConfig::default() };
    let r = suite(Suite::NormBound, &cfg);
    let t = start.elapsed();
    let worst = worst_by_label(&[&r]);
    let every_case = r.cases.iter().all(|c| c.report.checks.iter().any(|k| k.label == "theorem"));
    let links = ["recursion", "reduce_to_free", "integral", "diag_norm", "beta", "combined", "theorem"];
    let all_links = links.iter().all(|l| worst.contains_key(*l));
    let d_ok = r.cases.iter().all(|c| c.q == Some(3) && c.d.is_some_and(|d| d <= 6));
    outcome(
        r.cases.len() == 10_000
            && r.violation_count() == 0
            && slack_floor_holds(&worst, 1e-10)
            && every_case
            && all_links
            && d_ok
            && within(t, 600),
        format!(
            "{} instances, {} violations, worst {}, {t:.2?}",
            r.cases.len(),
            r.violation_count(),
            fmt_worst(&worst)
        ),
    )
}

fn prob_basic() -> Outcome {
    let cfg = SuiteConfig { seed: 2, instances: Some(500), ..SuiteConfig::default() };
    let r = suite(Suite::ProbBasic, &cfg);
    let worst = worst_by_label(&[&r]);
    let ranges = r.cases.iter().all(|c| {
        matches!(c.q, Some(3 | 4)) && c.d.is_some_and(|d| d <= 7) && c.w.is_some_and(|w| [0.3, 0.6, 0.9].contains(&w))
    });
    outcome(
        r.cases.len() == 1000 && r.violation_count() == 0 && ranges,
        format!("500 + 500 instances, {} violations, worst {}", r.violation_count(), fmt_worst(&worst)),
    )
}

fn scalar_lemmas() -> Outcome {
    let power = suite(Suite::PowerBound, &SuiteConfig { points: Some(100_000), ..SuiteConfig::default() });
    let useful = suite(Suite::UsefulBound, &SuiteConfig::default());
    let corollary = suite(Suite::CorollaryB, &SuiteConfig::default());
    // q ∈ {3..8}, d ∈ {q+1..40}, α ∈ {0.1..1.0}
    let sweep: usize = (3..=8).map(|q| (40 - q) * 10).sum();
    let k = bound_k(k_threshold_a()).unwrap();
    let e2 = std::f64::consts::E.powi(2);
    let k_err = (k - e2).abs();
    let violations = power.violation_count() + useful.violation_count() + corollary.violation_count();
    outcome(
        violations == 0 && useful.cases.len() == sweep && corollary.cases.len() == sweep && k_err <= 1e-12,
        format!(
            "power 1e5 points, useful {} + corollary {} sweep points, {} violations, |K(a*) - e^2| = {k_err:.2e}",
            useful.cases.len(),
            corollary.cases.len(),
            violations
        ),
    )
}

fn lambda() -> Outcome {
    let cfg = SuiteConfig { q: Some(3), d: Some(7), seed: 3, instances: Some(200), ..SuiteConfig::default() };
    let r = suite(Suite::Lambda, &cfg);
    let worst = worst_by_label(&[&r]);
    let lower_everywhere = r.cases.iter().all(|c| c.report.checks.iter().any(|k| k.label == "lower" && k.holds()));
    let fully_free = r.cases.iter().filter(|c| c.report.checks.iter().any(|k| k.label == "fully_free")).count();
    outcome(
        r.cases.len() == 200
            && r.violation_count() == 0
            && slack_floor_holds(&worst, 1e-10)
            && lower_everywhere
            && fully_free > 0,
        format!(
            "200 instances ({fully_free} fully free), {} violations, worst {}",
            r.violation_count(),
            fmt_worst(&worst)
        ),
    )
}

fn decay() -> Outcome {
    let start = Instant::now();
    let probe = PottsParams::new(3, 0.5, 29).unwrap();
    let t_wsm = Threshold::for_mode(&probe, ContractionMode::Wsm);
    let params = PottsParams::new(3, t_wsm.w.unwrap(), 29).unwrap();
    let wsm = run_experiment(&ExperimentConfig::new(params, ContractionMode::Wsm, (1..=40).collect())).unwrap();
    let t1 = start.elapsed();
    let wsm_ok = wsm.fitted_rate <= 30.0 / 31.0 + 0.01 && wsm.pass && within(t1, 5);

    let start = Instant::now();
    let probe = PottsParams::new(3, 0.5, 7).unwrap();
    let t_ssm = Threshold::for_mode(&probe, ContractionMode::Ssm);
    let params = PottsParams::new(3, t_ssm.w.unwrap(), 7).unwrap();
    let mut cfg = ExperimentConfig::new(params, ContractionMode::Ssm, (1..=7).collect());
    cfg.strategy = BoundaryStrategy::RandomPair;
    cfg.instances_per_depth = 100;
    let ssm = run_experiment(&cfg).unwrap();
    let trace = sqrt_ratio_contraction_trace(&cfg).unwrap();
    let t2 = start.elapsed();
    let ssm_ok = ssm.strictly_decreasing && trace.pass && within(t2, 600);
    outcome(
        wsm_ok && ssm_ok,
        format!(
            "WSM rate {:.4} (≤ {:.4}) {t1:.2?}; SSM at w = {:.6} strictly decreasing {} ({:.2e} → {:.2e}) {t2:.2?}",
            wsm.fitted_rate,
            30.0 / 31.0 + 0.01,
            params.w(),
            ssm.strictly_decreasing,
            ssm.per_depth.first().map_or(f64::NAN, |p| p.max_discrepancy),
            ssm.per_depth.last().map_or(f64::NAN, |p| p.max_discrepancy),
        ),
    )
}

fn cli_outputs(args: &[&str], dir: &Path) -> (i32, BTreeMap<String, Vec<u8>>) {
    let mut full = vec!["pottslab".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.extend(["--out-dir".to_string(), dir.display().to_string()]);
    let code = pottslab::cli::run(full);
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        files.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
    }
    (code, files)
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 7] = [
        &["oracle", "--seed", "0"],
        &["verify", "--suite", "prob-basic", "--seed", "2", "--instances", "100"],
        &["verify", "--suite", "norm-bound", "--q", "3", "--seed", "1", "--instances", "300"],
        &["verify", "--suite", "lambda", "--q", "3", "--dplus1", "8", "--seed", "3"],
        &["verify", "--suite", "power-bound", "--points", "100000"],
        &["decay", "--mode", "wsm", "--q", "3", "--dplus1", "30", "--depths", "1:40"],
        &["decay", "--mode", "ssm", "--q", "3", "--dplus1", "8", "--seed", "7", "--trace"],
    ];
    let mut failures = Vec::new();
    let mut files = 0;
    for args in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (ca, fa) = cli_outputs(args, a.path());
        let (cb, fb) = cli_outputs(args, b.path());
        files += fa.len();
        if ca != 0 || cb != 0 || fa != fb || fa.len() < 2 {
            failures.push(args.join(" "));
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} runs, {files} files byte-identical", runs.len())
        } else {
            format!("differing or failing: {}", failures.join("; "))
        },
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", oracle),
        ("jacobian vs finite differences", jacobian),
        ("norm bound and chain links", norm_bound),
        ("marginal bounds", prob_basic),
        ("scalar lemmas", scalar_lemmas),
        ("local weight bounds", lambda),
        ("decay", decay),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
