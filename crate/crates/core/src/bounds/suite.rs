//! Seeded sweeps over the checks. Each case draws its randomness from
//! `instance_rng(seed, case)`, so results do not depend on how cases are
//! scheduled across threads.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::instance::PairSpec;
use super::*;
use crate::error::{PottsError, Result};
use crate::params::PottsParams;
use crate::tree::random::{instance_rng, random_boundary, random_tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    ProbBasic,
    PowerBound,
    UsefulBound,
    CorollaryB,
    BernoulliOpt,
    BetaBound,
    DiagNorm,
    SLower,
    Lambda,
    NormBound,
    InductionStep,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::ProbBasic,
        Suite::PowerBound,
        Suite::UsefulBound,
        Suite::CorollaryB,
        Suite::BernoulliOpt,
        Suite::BetaBound,
        Suite::DiagNorm,
        Suite::SLower,
        Suite::Lambda,
        Suite::NormBound,
        Suite::InductionStep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ProbBasic => "prob-basic",
            Suite::PowerBound => "power-bound",
            Suite::UsefulBound => "useful-bound",
            Suite::CorollaryB => "corollary-B",
            Suite::BernoulliOpt => "bernoulli-opt",
            Suite::BetaBound => "beta-bound",
            Suite::DiagNorm => "diag-norm",
            Suite::SLower => "S-lower",
            Suite::Lambda => "lambda",
            Suite::NormBound => "norm-bound",
            Suite::InductionStep => "induction-step",
        }
    }

    fn default_instances(self) -> usize {
        match self {
            Suite::ProbBasic => 500,
            Suite::BernoulliOpt => 200,
            Suite::BetaBound | Suite::DiagNorm | Suite::NormBound => 10_000,
            Suite::SLower | Suite::Lambda => 200,
            _ => 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Suite {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = PottsError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| PottsError::Parse(format!("unknown suite '{s}'")))
    }
}

/// Sweep parameters. `None` fields fall back to each suite's documented
/// default sweep; set fields pin that parameter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteConfig {
    pub q: Option<usize>,
    pub d: Option<usize>,
    pub w: Option<f64>,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub instances: Option<usize>,
    pub points: Option<usize>,
}

/// One evaluated case of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub case: usize,
    pub q: Option<usize>,
    pub d: Option<usize>,
    pub w: Option<f64>,
    pub report: CheckReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum SuiteStatus {
    Passed,
    Failed,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub status: SuiteStatus,
    pub cases: Vec<CaseResult>,
}

impl SuiteResult {
    fn from_cases(suite: Suite, cases: Vec<CaseResult>) -> Self {
        let status = if cases.iter().all(|c| c.report.passed()) { SuiteStatus::Passed } else { SuiteStatus::Failed };
        Self { suite, status, cases }
    }

    fn skipped(suite: Suite, reason: impl Into<String>) -> Self {
        Self { suite, status: SuiteStatus::Skipped(reason.into()), cases: Vec::new() }
    }

    pub fn violation_count(&self) -> usize {
        self.cases.iter().map(|c| c.report.violation_count()).sum()
    }

    pub fn check_count(&self) -> usize {
        self.cases.iter().map(|c| c.report.checks.len()).sum()
    }

    /// Smallest slack across every case.
    pub fn worst_slack(&self) -> f64 {
        self.cases.iter().map(|c| c.report.worst_slack()).fold(f64::INFINITY, f64::min)
    }
}

fn case(index: usize, params: Option<&PottsParams>, report: CheckReport) -> CaseResult {
    CaseResult {
        case: index,
        q: params.map(PottsParams::q),
        d: params.map(PottsParams::d),
        w: params.map(PottsParams::w),
        report,
    }
}

/// Runs `f` on every case index in parallel, keeping index order. A case
/// whose preconditions fail is recorded as a failing check so that nothing
/// is silently dropped.
fn run_cases<F>(count: usize, f: F) -> Vec<CaseResult>
where
    F: Fn(usize) -> Result<CaseResult> + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            f(i).unwrap_or_else(|err| {
                let mut report = CheckReport::new("error");
                report.check(format!("error: {err}"), f64::NAN, f64::NAN, 0.0);
                case(i, None, report)
            })
        })
        .collect()
}

const WEIGHTS: [f64; 3] = [0.3, 0.6, 0.9];

fn pick<T: Copy, R: Rng>(rng: &mut R, pinned: Option<T>, choices: &[T]) -> T {
    pinned.unwrap_or_else(|| choices[rng.gen_range(0..choices.len())])
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteResult> {
    if let Some(q) = cfg.q {
        if q < 2 {
            return Err(PottsError::InvalidParams(format!("q must be at least 2, got {q}")));
        }
    }
    if let Some(d) = cfg.d {
        if d < 2 {
            return Err(PottsError::InvalidParams(format!("d must be at least 2, got {d}")));
        }
    }
    if let Some(w) = cfg.w {
        if !(0.0..=1.0).contains(&w) {
            return Err(PottsError::InvalidParams(format!("w must lie in [0, 1], got {w}")));
        }
    }
    if let Some(alpha) = cfg.alpha {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(PottsError::InvalidParams(format!("α must lie in [0, 1], got {alpha}")));
        }
    }
    let n = cfg.instances.unwrap_or(suite.default_instances());
    Ok(match suite {
        Suite::ProbBasic => prob_basic(cfg, n),
        Suite::PowerBound => power_bound(cfg),
        Suite::UsefulBound => alpha_sweep(suite, cfg, 1, useful_bound_check),
        Suite::CorollaryB => alpha_sweep(suite, cfg, 1, corollary_b_check),
        Suite::BernoulliOpt => bernoulli(cfg, n),
        Suite::BetaBound => beta(cfg, n),
        Suite::DiagNorm => diag_norm(cfg, n),
        Suite::SLower => s_lower(cfg, n),
        Suite::Lambda => lambda(cfg, n),
        Suite::NormBound => norm_bound(cfg, n),
        Suite::InductionStep => induction(cfg),
    })
}

/// `instances` one-step cases followed by `instances` two-step cases, on
/// random trees with `q ∈ {3, 4}`, `d ≤ 7`, `w ∈ {0.3, 0.6, 0.9}` unless
/// pinned. Every fourth case fixes all boundary vertices to one color.
fn prob_basic(cfg: &SuiteConfig, n: usize) -> SuiteResult {
    if cfg.w == Some(0.0) {
        return SuiteResult::skipped(Suite::ProbBasic, "the bounds need w > 0");
    }
    let cases = run_cases(2 * n, |i| {
        let mut rng = instance_rng(cfg.seed, i as u64);
        let q = pick(&mut rng, cfg.q, &[3, 4]);
        let d = cfg.d.unwrap_or_else(|| rng.gen_range(2..=7));
        let w = pick(&mut rng, cfg.w, &WEIGHTS);
        let params = PottsParams::new(q, w, d)?;
        let size = rng.gen_range(1..=30);
        let tree = random_tree(&mut rng, size, d);
        let p_fixed = rng.gen_range(0.0..0.8);
        let mut bc = random_boundary(&mut rng, &tree, q, p_fixed);
        if i % 4 == 0 {
            let fixed: Vec<usize> = bc.assigned().map(|(v, _)| v).collect();
            for v in fixed {
                bc.fix(v, 0)?;
            }
        }
        let report = if i < n {
            marginal_bound_check_one_step(&tree, &bc, &params)?
        } else {
            let ell = tree.children(tree.root()).iter().filter(|&&c| !bc.is_free(c)).count();
            marginal_bound_check_two_step(&tree, &bc, &params, ell)?
        };
        Ok(case(i, Some(&params), report))
    });
    SuiteResult::from_cases(Suite::ProbBasic, cases)
}

/// `points` (default 10⁵) evenly spaced points in `[1e-4, 0.999]`.
fn power_bound(cfg: &SuiteConfig) -> SuiteResult {
    let points = cfg.points.unwrap_or(100_000).max(2);
    let (lo, hi) = (1e-4, 0.999);
    let xs: Vec<f64> = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
    let cases = run_cases(1, |i| Ok(case(i, None, power_bound_check(&xs)?)));
    SuiteResult::from_cases(Suite::PowerBound, cases)
}

/// `q ∈ {3..8}`, `d ∈ {q + offset, …, 40}`, `α ∈ {0.1, …, 1.0}` unless pinned.
fn alpha_sweep(
    suite: Suite,
    cfg: &SuiteConfig,
    offset: usize,
    check: fn(&PottsParams, f64) -> Result<CheckReport>,
) -> SuiteResult {
    let qs: Vec<usize> = cfg.q.map_or((3..=8).collect(), |q| vec![q]);
    let alphas: Vec<f64> = cfg.alpha.map_or((1..=10).map(|k| k as f64 / 10.0).collect(), |a| vec![a]);
    let mut points = Vec::new();
    for &q in &qs {
        let ds: Vec<usize> = cfg.d.map_or((q + offset..=40).collect(), |d| vec![d]);
        for &d in &ds {
            if q < 3 || d < q + offset {
                continue;
            }
            for &a in &alphas {
                points.push((q, d, a));
            }
        }
    }
    if points.is_empty() {
        return SuiteResult::skipped(suite, "needs q ≥ 3 and d ≥ q + 1");
    }
    let cases = run_cases(points.len(), |i| {
        let (q, d, a) = points[i];
        let params = PottsParams::from_alpha(q, d, a)?;
        let mut report = check(&params, a)?;
        report.metric("alpha", a);
        Ok(case(i, Some(&params), report))
    });
    SuiteResult::from_cases(suite, cases)
}

fn bernoulli(cfg: &SuiteConfig, n: usize) -> SuiteResult {
    let cases = run_cases(n, |i| {
        let mut rng = instance_rng(cfg.seed, i as u64);
        let q = cfg.q.unwrap_or_else(|| rng.gen_range(2..=5));
        let grid: usize = match q {
            2 | 3 => 60,
            4 => 30,
            5 => 20,
            _ => 10,
        };
        let alpha = cfg.alpha.unwrap_or_else(|| rng.gen_range(0.0..=1.0));
        let b = if i % 2 == 0 {
            let lowest = grid.div_ceil(q);
            rng.gen_range(lowest..=grid) as f64 / grid as f64
        } else {
            rng.gen_range(1.0 / q as f64..=1.0)
        };
        let mut report = bernoulli_product_min_check(q, b, alpha, grid)?;
        report.metric("b", b);
        report.metric("alpha", alpha);
        Ok(CaseResult { case: i, q: Some(q), d: None, w: None, report })
    });
    SuiteResult::from_cases(Suite::BernoulliOpt, cases)
}

fn beta(cfg: &SuiteConfig, n: usize) -> SuiteResult {
    let cases = run_cases(n, |i| {
        let mut rng = instance_rng(cfg.seed, i as u64);
        let len = rng.gen_range(0..=10usize);
        let betas: Vec<f64> = if i % 10 == 0 {
            vec![1.0 / (len as f64 + 1.0); len]
        } else {
            (0..len).map(|_| rng.gen_range(0.0..=1.0)).collect()
        };
        Ok(case(i, None, check_beta_bound(&betas)?))
    });
    SuiteResult::from_cases(Suite::BetaBound, cases)
}

fn diag_norm(cfg: &SuiteConfig, n: usize) -> SuiteResult {
    let cases = run_cases(n, |i| {
        let mut rng = instance_rng(cfg.seed, i as u64);
        let q = cfg.q.unwrap_or_else(|| rng.gen_range(1..=5));
        let count = cfg.d.unwrap_or_else(|| rng.gen_range(1..=6));
        let mut draw =
            || -> Vec<Vec<f64>> { (0..count).map(|_| (0..q).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect() };
        let diagonals = draw();
        let vectors = draw();
        let report = diag_norm_lemma_check(&diagonals, &vectors)?;
        Ok(CaseResult { case: i, q: Some(q), d: Some(count), w: None, report })
    });
    SuiteResult::from_cases(Suite::DiagNorm, cases)
}

fn pair_spec(q: usize, d: usize, free_depth: usize, max_vertices: usize) -> PairSpec {
    PairSpec { q, d, min_vertices: 2, max_vertices, free_depth, min_disagreement: 2, fix_probability: 0.35 }
}

/// Random pair instances with disagreements at distance ≥ 2; `q = 3`,
/// `d ≤ 6`, `w ∈ {0.3, 0.6, 0.9}` unless pinned.
fn s_lower(cfg: &SuiteConfig, n: usize) -> SuiteResult {
    if cfg.w == Some(0.0) {
        return SuiteResult::skipped(Suite::SLower, "the bound needs w > 0");
    }
    let cases = run_cases(n, |i| {
        let mut rng = instance_rng(cfg.seed, i as u64);
        let q = cfg.q.unwrap_or(3);
        let d = cfg.d.unwrap_or_else(|| rng.gen_range(2..=6));
        let w = pick(&mut rng, cfg.w, &WEIGHTS);
        let params = PottsParams::new(q, w, d)?;
        let inst = PairInstance::random(&mut rng, &pair_spec(q, d, 0, 30));
        Ok(case(i, Some(&params), lower_bound_s_check(&inst, &params)?))
    });
    SuiteResult::from_cases(Suite::SLower, cases)
}

/// `q = 3`, `d = 7` unless pinned; `w = 1 - α q/(d+1)` with `α` from `--alpha`,
/// from `--w`, or uniform in `[0.05, 1]`. Odd cases keep the root's first
/// two levels free.
fn lambda(cfg: &SuiteConfig, n: usize) -> SuiteResult {
    let q = cfg.q.unwrap_or(3);
    let d = cfg.d.unwrap_or(7);
    if q < 3 || d < q + 2 {
        return SuiteResult::skipped(Suite::Lambda, format!("needs q ≥ 3 and d ≥ q + 2, got q = {q}, d = {d}"));
    }
    let pinned_alpha = match (cfg.alpha, cfg.w) {
        (Some(a), _) => Some(a),
        (None, Some(w)) => Some((1.0 - w) * (d as f64 + 1.0) / q as f64),
        _ => None,
    };
    if let Some(a) = pinned_alpha {
        if !(a > 0.0 && a <= 1.0) {
            return SuiteResult::skipped(Suite::Lambda, format!("needs w ≥ 1 - q/(d+1) and w < 1 (α = {a})"));
        }
    }
    let cases = run_cases(n, |i| {
        let mut rng = instance_rng(cfg.seed, i as u64);
        let alpha = pinned_alpha.unwrap_or_else(|| rng.gen_range(0.05..=1.0));
        let params = PottsParams::from_alpha(q, d, alpha)?;
        let free_depth = if i % 2 == 1 { 2 } else { 0 };
        let inst = PairInstance::random(&mut rng, &pair_spec(q, d, free_depth, 40));
        let mut report = lambda_bound_check(&inst, &params)?;
        report.metric("alpha", alpha);
        Ok(case(i, Some(&params), report))
    });
    SuiteResult::from_cases(Suite::Lambda, cases)
}

/// `q = 3`, `d ∈ {2..6}`, `w ∈ {0.3, 0.6, 0.9}` unless pinned.
fn norm_bound(cfg: &SuiteConfig, n: usize) -> SuiteResult {
    if cfg.w == Some(0.0) {
        return SuiteResult::skipped(Suite::NormBound, "the local weight needs w > 0");
    }
    let cases = run_cases(n, |i| {
        let mut rng = instance_rng(cfg.seed, i as u64);
        let q = cfg.q.unwrap_or(3);
        let d = cfg.d.unwrap_or_else(|| rng.gen_range(2..=6));
        let w = pick(&mut rng, cfg.w, &WEIGHTS);
        let params = PottsParams::new(q, w, d)?;
        let inst = PairInstance::random(&mut rng, &pair_spec(q, d, 0, 30));
        Ok(case(i, Some(&params), verify_norm_bound(&inst, &params)?))
    });
    SuiteResult::from_cases(Suite::NormBound, cases)
}

/// WSM at `alpha_wsm` and SSM at `alpha_ssm`, for `q ∈ {3..8}` and
/// `d ∈ {q + 2, …, 60}` unless pinned. `--w` and `--alpha` are ignored:
/// the check is about the module's own parameters.
fn induction(cfg: &SuiteConfig) -> SuiteResult {
    let qs: Vec<usize> = cfg.q.map_or((3..=8).collect(), |q| vec![q]);
    let mut points = Vec::new();
    for &q in &qs {
        let ds: Vec<usize> = cfg.d.map_or((q + 2..=60).collect(), |d| vec![d]);
        for &d in &ds {
            if q < 3 || d < q + 2 {
                continue;
            }
            points.push((q, d, ContractionMode::Wsm));
            let probe = PottsParams::new(q, 0.5, d).expect("valid");
            if alpha_ssm(&probe).is_ok() {
                points.push((q, d, ContractionMode::Ssm));
            }
        }
    }
    if points.is_empty() {
        return SuiteResult::skipped(Suite::InductionStep, "needs q ≥ 3 and d ≥ q + 2");
    }
    let cases = run_cases(points.len(), |i| {
        let (q, d, mode) = points[i];
        let probe = PottsParams::new(q, 0.5, d)?;
        let alpha = match mode {
            ContractionMode::Wsm => alpha_wsm(&probe)?.alpha,
            ContractionMode::Ssm => alpha_ssm(&probe)?,
        };
        let params = PottsParams::from_alpha(q, d, alpha)?;
        let mut report = induction_step_check(&params, alpha, mode, d)?;
        report.name = format!("induction-step-{}", if mode == ContractionMode::Wsm { "wsm" } else { "ssm" });
        report.metric("alpha", alpha);
        Ok(case(i, Some(&params), report))
    });
    SuiteResult::from_cases(Suite::InductionStep, cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(instances: usize) -> SuiteConfig {
        SuiteConfig { seed: 42, instances: Some(instances), points: Some(1000), ..SuiteConfig::default() }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn every_suite_passes_small_sweeps() {
        for s in Suite::ALL {
            let r = run_suite(s, &small(20)).unwrap();
            assert_eq!(r.status, SuiteStatus::Passed, "{s}: {:?}", r.cases.iter().find(|c| !c.report.passed()));
        }
    }

    #[test]
    fn sweeps_are_deterministic() {
        let a = run_suite(Suite::NormBound, &small(8)).unwrap();
        let b = run_suite(Suite::NormBound, &small(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lambda_skips_outside_regime() {
        let cfg = SuiteConfig { q: Some(3), d: Some(7), w: Some(0.5), ..small(5) };
        let r = run_suite(Suite::Lambda, &cfg).unwrap();
        assert!(matches!(r.status, SuiteStatus::Skipped(_)));
        let cfg = SuiteConfig { q: Some(1), ..small(5) };
        assert!(run_suite(Suite::ProbBasic, &cfg).is_err());
    }
}
