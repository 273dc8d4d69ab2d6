//! Closed-form bounds, scalar lemmas, the local weight, and per-instance
//! checks of the contraction inequalities.
//!
//! Every check produces a [`CheckReport`]: a list of inequalities `lhs ≤ rhs`
//! with their slack `rhs - lhs`. A check holds when its slack is at least
//! `-tolerance`. Slack is always reported as computed, never clamped.

mod instance;
mod scalar;
pub mod suite;
mod weight;

use std::collections::BTreeMap;

use serde::Serialize;

pub use instance::{
    lambda_bound_check, lower_bound_s_check, marginal_bound_check_one_step, marginal_bound_check_two_step,
    verify_norm_bound, PairInstance,
};
pub use scalar::{
    alpha_ssm, alpha_ssm_extrapolated, alpha_wsm, alpha_wsm_with_k, bernoulli_product_min_check, bound_b, bound_k,
    bound_m, check_beta_bound, corollary_b_check, diag_norm_lemma_check, induction_step_check, k_threshold_a,
    power_bound_check, ssm_step_factor, useful_bound_check, wsm_k_at, AlphaWsm, BoundSet, ContractionMode,
};
pub use weight::{local_weight, local_weight_ratio, LocalWeight, SearchConfig};

/// Slack floor for inequalities between closed-form or exactly computed values.
pub const ANALYTIC_TOL: f64 = 1e-12;
/// Slack floor for inequalities involving a numerically maximized local weight.
pub const LAMBDA_TOL: f64 = 1e-10;
/// Slack floor for the quadrature link of the norm-bound chain.
pub const QUADRATURE_TOL: f64 = 1e-8;

/// One inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self { label: label.into(), lhs, rhs, tolerance }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// NaN slack counts as a violation.
    pub fn holds(&self) -> bool {
        self.slack() >= -self.tolerance
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Self::default() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn check(&mut self, label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) {
        self.push(Check::new(label, lhs, rhs, tolerance));
    }

    pub fn metric(&mut self, key: impl Into<String>, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds())
    }

    pub fn violation_count(&self) -> usize {
        self.violations().count()
    }

    /// The check with the smallest slack.
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().min_by(|a, b| a.slack().total_cmp(&b.slack()))
    }

    pub fn worst_slack(&self) -> f64 {
        self.worst().map_or(f64::INFINITY, Check::slack)
    }

    /// Keeps, per label, only the check with the smallest slack.
    pub fn keep_worst_per_label(&mut self) {
        let mut best: BTreeMap<String, Check> = BTreeMap::new();
        let mut order = Vec::new();
        for c in self.checks.drain(..) {
            match best.get(&c.label) {
                Some(prev) if prev.slack() <= c.slack() => {}
                Some(_) => {
                    best.insert(c.label.clone(), c);
                }
                None => {
                    order.push(c.label.clone());
                    best.insert(c.label.clone(), c);
                }
            }
        }
        self.checks = order.into_iter().map(|l| best.remove(&l).unwrap()).collect();
    }
}
