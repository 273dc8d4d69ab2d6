//! Spatial-mixing experiments: root-marginal discrepancies between two
//! boundary conditions as the boundary recedes, with a geometric decay fit.

mod incremental;
mod ssm;
mod wsm;

use serde::{Deserialize, Serialize};

use crate::bounds::{alpha_ssm, alpha_ssm_extrapolated, alpha_wsm, ContractionMode};
use crate::error::{PottsError, Result};
use crate::params::PottsParams;
use crate::tree::{root_marginals_dp, BoundaryCondition, RootedTree};

pub use ssm::{
    run_ssm_experiment, spine_instance, spine_trace, sqrt_ratio_contraction_trace, ContractionTrace, SpineInstance,
    TraceLevel,
};
pub use wsm::{run_wsm_experiment, wsm_symmetric_discrepancy};

/// Default cap on the vertex count of explicitly built trees.
pub const DEFAULT_MAX_VERTICES: usize = 1 << 20;
/// Sweep cap of the adversarial coordinate ascent.
pub const ADVERSARIAL_SWEEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryStrategy {
    AllOneColorPair,
    RandomPair,
    AdversarialSearch,
}

impl std::str::FromStr for BoundaryStrategy {
    type Err = PottsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_one_color_pair" => Ok(Self::AllOneColorPair),
            "random_pair" => Ok(Self::RandomPair),
            "adversarial_search" => Ok(Self::AdversarialSearch),
            other => Err(PottsError::Parse(format!("unknown boundary strategy {other:?}"))),
        }
    }
}

impl std::fmt::Display for BoundaryStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::AllOneColorPair => "all_one_color_pair",
            Self::RandomPair => "random_pair",
            Self::AdversarialSearch => "adversarial_search",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: PottsParams,
    pub mode: ContractionMode,
    pub depths: Vec<usize>,
    pub strategy: BoundaryStrategy,
    pub instances_per_depth: usize,
    pub seed: u64,
    /// Largest explicit tree the run may build.
    #[serde(default = "default_max_vertices")]
    pub max_vertices: usize,
    /// SSM only: grow random side branches off the root-to-disagreement path.
    /// Without them every tree is a bare path.
    #[serde(default = "default_true")]
    pub side_branches: bool,
}

fn default_max_vertices() -> usize {
    DEFAULT_MAX_VERTICES
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(params: PottsParams, mode: ContractionMode, depths: Vec<usize>) -> Self {
        Self {
            params,
            mode,
            depths,
            strategy: BoundaryStrategy::AllOneColorPair,
            instances_per_depth: 1,
            seed: 0,
            max_vertices: DEFAULT_MAX_VERTICES,
            side_branches: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depths.is_empty() {
            return Err(PottsError::InvalidParams("depth range is empty".into()));
        }
        if self.depths[0] == 0 {
            return Err(PottsError::InvalidParams("depths start at 1".into()));
        }
        if self.depths.windows(2).any(|p| p[0] >= p[1]) {
            return Err(PottsError::InvalidParams("depths must be strictly ascending".into()));
        }
        if self.instances_per_depth == 0 {
            return Err(PottsError::InvalidParams("instances per depth must be at least 1".into()));
        }
        Ok(())
    }

    fn require_mode(&self, mode: ContractionMode) -> Result<()> {
        if self.mode != mode {
            return Err(PottsError::InvalidParams(format!("config mode is {:?}, expected {mode:?}", self.mode)));
        }
        self.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepthResult {
    pub depth: usize,
    pub max_discrepancy: f64,
    pub n_instances: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSource {
    /// Self-consistent WSM parameter.
    Wsm,
    /// Numeric solve of the SSM per-step induction, an extrapolation of the
    /// closed form.
    Extrapolated,
    /// No threshold is available at these `q`, `d`.
    Unavailable,
}

/// Smallest `w` covered by the contraction bound for the given mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub alpha: Option<f64>,
    pub w: Option<f64>,
    pub source: ThresholdSource,
    /// SSM only: the closed-form parameter where it applies.
    pub alpha_closed_form: Option<f64>,
}

impl Threshold {
    pub fn for_mode(params: &PottsParams, mode: ContractionMode) -> Self {
        let (alpha, source, alpha_closed_form) = match mode {
            ContractionMode::Wsm => match alpha_wsm(params) {
                Ok(a) => (Some(a.alpha), ThresholdSource::Wsm, None),
                Err(_) => (None, ThresholdSource::Unavailable, None),
            },
            ContractionMode::Ssm => {
                let closed = alpha_ssm(params).ok();
                match alpha_ssm_extrapolated(params) {
                    Ok(a) => (Some(a), ThresholdSource::Extrapolated, closed),
                    Err(_) => (None, ThresholdSource::Unavailable, closed),
                }
            }
        };
        let scale = params.q() as f64 / (params.d() as f64 + 1.0);
        Self { alpha, w: alpha.map(|a| 1.0 - a * scale), source, alpha_closed_form }
    }

    /// `w` at or above the threshold, with a small allowance for rounding.
    pub fn covers(&self, w: f64) -> bool {
        self.w.is_some_and(|t| w >= t - 1e-12)
    }
}

/// Least-squares fit `discrepancy ≈ C · rate^depth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub c: f64,
    /// Set when a tail discrepancy is zero or fewer than two tail points exist;
    /// rate and `C` are then reported as 0.
    pub degenerate: bool,
}

/// Fits on the deepest half of the points (at least two).
pub fn fit_decay(per_depth: &[DepthResult]) -> DecayFit {
    let degenerate = DecayFit { rate: 0.0, c: 0.0, degenerate: true };
    let n = per_depth.len();
    if n < 2 {
        return degenerate;
    }
    let tail = &per_depth[n - (n / 2).max(2)..];
    if tail.iter().any(|p| !(p.max_discrepancy > 0.0)) {
        return degenerate;
    }
    let m = tail.len() as f64;
    let xs: Vec<f64> = tail.iter().map(|p| p.depth as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.max_discrepancy.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    DecayFit { rate: slope.exp(), c: (my - slope * mx).exp(), degenerate: false }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub mode: ContractionMode,
    pub params: PottsParams,
    pub strategy: BoundaryStrategy,
    pub seed: u64,
    pub per_depth: Vec<DepthResult>,
    pub fitted_rate: f64,
    #[serde(rename = "fitted_C")]
    pub fitted_c: f64,
    pub degenerate_fit: bool,
    /// `d / (d + 1)`.
    pub target_rate: f64,
    /// `fitted_rate ≤ target_rate + 0.01`.
    pub pass: bool,
    pub strictly_decreasing: bool,
    pub threshold: Threshold,
    /// `w` lies below the threshold (or none is available): the run is a probe.
    pub probe: bool,
    pub anomalies: Vec<String>,
}

impl DecayReport {
    fn assemble(cfg: &ExperimentConfig, per_depth: Vec<DepthResult>, anomalies: Vec<String>) -> Self {
        let fit = fit_decay(&per_depth);
        let d = cfg.params.d() as f64;
        let target_rate = d / (d + 1.0);
        let threshold = Threshold::for_mode(&cfg.params, cfg.mode);
        Self {
            mode: cfg.mode,
            params: cfg.params,
            strategy: cfg.strategy,
            seed: cfg.seed,
            strictly_decreasing: per_depth.windows(2).all(|p| p[1].max_discrepancy < p[0].max_discrepancy),
            per_depth,
            fitted_rate: fit.rate,
            fitted_c: fit.c,
            degenerate_fit: fit.degenerate,
            target_rate,
            pass: fit.rate <= target_rate + 0.01,
            probe: !threshold.covers(cfg.params.w()),
            threshold,
            anomalies,
        }
    }
}

/// Runs the experiment selected by `cfg.mode`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<DecayReport> {
    match cfg.mode {
        ContractionMode::Wsm => run_wsm_experiment(cfg),
        ContractionMode::Ssm => run_ssm_experiment(cfg),
    }
}

/// `max_i |P[root = i | τ] - P[root = i | τ']|`.
pub fn root_discrepancy(
    tree: &RootedTree,
    tau: &BoundaryCondition,
    tau_prime: &BoundaryCondition,
    params: &PottsParams,
) -> Result<f64> {
    let a = root_marginals_dp(tree, tau, params)?;
    let b = root_marginals_dp(tree, tau_prime, params)?;
    Ok(max_abs_diff(&a, &b))
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Per-instance stream index: depth in the high half, instance in the low.
pub(crate) fn stream(depth: usize, instance: usize) -> u64 {
    ((depth as u64) << 32) | instance as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(values: &[(usize, f64)]) -> Vec<DepthResult> {
        values.iter().map(|&(depth, max_discrepancy)| DepthResult { depth, max_discrepancy, n_instances: 1 }).collect()
    }

    #[test]
    fn fit_recovers_geometric_tail() {
        let data: Vec<(usize, f64)> = (1..=10).map(|t| (t, 3.0 * 0.7f64.powi(t as i32))).collect();
        let fit = fit_decay(&pts(&data));
        assert!(!fit.degenerate);
        assert!((fit.rate - 0.7).abs() < 1e-12);
        assert!((fit.c - 3.0).abs() < 1e-10);
    }

    #[test]
    fn fit_ignores_shallow_half() {
        let mut data: Vec<(usize, f64)> = (1..=8).map(|t| (t, 0.5f64.powi(t as i32))).collect();
        data[0].1 = 0.9;
        data[1].1 = 0.8;
        let fit = fit_decay(&pts(&data));
        assert!((fit.rate - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_or_short_data_is_degenerate() {
        assert!(fit_decay(&pts(&[(1, 0.5)])).degenerate);
        let fit = fit_decay(&pts(&[(1, 0.5), (2, 0.0), (3, 0.0)]));
        assert!(fit.degenerate);
        assert_eq!(fit.rate, 0.0);
    }

    #[test]
    fn config_validation() {
        let params = PottsParams::new(3, 0.5, 3).unwrap();
        let mut cfg = ExperimentConfig::new(params, ContractionMode::Wsm, vec![1, 2, 3]);
        assert!(cfg.validate().is_ok());
        cfg.depths = vec![2, 1];
        assert!(cfg.validate().is_err());
        cfg.depths = vec![];
        assert!(cfg.validate().is_err());
        cfg.depths = vec![0, 1];
        assert!(cfg.validate().is_err());
        cfg.depths = vec![1];
        cfg.instances_per_depth = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [BoundaryStrategy::AllOneColorPair, BoundaryStrategy::RandomPair, BoundaryStrategy::AdversarialSearch]
        {
            assert_eq!(s.to_string().parse::<BoundaryStrategy>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), serde_json::Value::String(s.to_string()));
        }
        assert!("both".parse::<BoundaryStrategy>().is_err());
    }

    #[test]
    fn thresholds() {
        let wsm = Threshold::for_mode(&PottsParams::new(3, 0.5, 29).unwrap(), ContractionMode::Wsm);
        assert_eq!(wsm.source, ThresholdSource::Wsm);
        let ssm = Threshold::for_mode(&PottsParams::new(3, 0.5, 7).unwrap(), ContractionMode::Ssm);
        assert_eq!(ssm.source, ThresholdSource::Extrapolated);
        assert!((ssm.alpha.unwrap() - 0.2233).abs() < 1e-4);
        assert!(ssm.alpha_closed_form.unwrap() < ssm.alpha.unwrap());
        for d in 5..60 {
            let t = Threshold::for_mode(&PottsParams::new(3, 0.5, d).unwrap(), ContractionMode::Ssm);
            if let Some(closed) = t.alpha_closed_form {
                assert!(closed <= t.alpha.unwrap() + 1e-12, "d = {d}");
            }
        }
        let none = Threshold::for_mode(&PottsParams::new(3, 0.9, 3).unwrap(), ContractionMode::Wsm);
        assert_eq!(none.source, ThresholdSource::Unavailable);
        assert!(!none.covers(1.0));
    }
}
