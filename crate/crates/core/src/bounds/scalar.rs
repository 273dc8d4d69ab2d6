use std::f64::consts::E;

use serde::Serialize;

use super::{CheckReport, ANALYTIC_TOL};
use crate::error::{PottsError, Result};
use crate::params::PottsParams;

fn precondition(msg: impl Into<String>) -> PottsError {
    PottsError::Precondition(msg.into())
}

/// `a* = (e - 1/2) / (e - 1)`, where `K(a*) = e²`.
pub fn k_threshold_a() -> f64 {
    (E - 0.5) / (E - 1.0)
}

/// `c - 1 = (q-1) w^{d/(q-1)}`.
fn one_step_excess(params: &PottsParams) -> f64 {
    let q1 = (params.q() - 1) as f64;
    q1 * params.w().powf(params.d() as f64 / q1)
}

/// `M(w) = (1 - (1-w)/c)^c` with `c = 1 + (q-1) w^{d/(q-1)}`.
pub fn bound_m(params: &PottsParams) -> Result<f64> {
    params.require_positive_w()?;
    let excess = one_step_excess(params);
    let c = 1.0 + excess;
    // 1 - (1-w)/c written without cancellation
    Ok(((params.w() + excess) / c).powf(c))
}

/// `B(ℓ) = 1 / (1 + (q-1) w^{ℓ/(q-1)} M(w)^{(d-ℓ)/(q-1)})`.
pub fn bound_b(ell: usize, params: &PottsParams) -> Result<f64> {
    if ell > params.d() {
        return Err(precondition(format!("ℓ = {ell} exceeds d = {}", params.d())));
    }
    let m = bound_m(params)?;
    let q1 = (params.q() - 1) as f64;
    let fixed = params.w().powf(ell as f64 / q1);
    let free = m.powf((params.d() - ell) as f64 / q1);
    Ok(1.0 / (1.0 + q1 * fixed * free))
}

/// `K(a) = e (a - 1/2) / (a - 1)` for `a > 1`.
pub fn bound_k(a: f64) -> Result<f64> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(precondition(format!("K(a) needs a > 1, got {a}")));
    }
    Ok(E * (a - 0.5) / (a - 1.0))
}

/// Every closed-form bound at one parameter point. Entries whose
/// preconditions fail are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSet {
    pub b: Vec<f64>,
    pub m: f64,
    pub k_of_a: Option<f64>,
    pub alpha_wsm: Option<f64>,
    pub alpha_ssm: Option<f64>,
}

impl BoundSet {
    pub fn new(params: &PottsParams) -> Result<Self> {
        let b = (0..=params.d()).map(|l| bound_b(l, params)).collect::<Result<_>>()?;
        Ok(Self {
            b,
            m: bound_m(params)?,
            k_of_a: bound_k(params.a()).ok(),
            alpha_wsm: alpha_wsm(params).ok().map(|a| a.alpha),
            alpha_ssm: alpha_ssm(params).ok(),
        })
    }
}

/// Closed-form SSM parameter:
/// `α⁻¹ = (1 - e²/(d+1))⁻² · (d+1 - e²/2) / (d+1 - e²)`.
///
/// Only `q` and `d` are read from `params`.
pub fn alpha_ssm(params: &PottsParams) -> Result<f64> {
    let n = params.d() as f64 + 1.0;
    let e2 = E * E;
    if n <= e2 {
        return Err(precondition(format!("d + 1 = {n} must exceed e²")));
    }
    if params.a() < k_threshold_a() {
        return Err(precondition(format!("a = (d+1)/q = {} is below (e - 1/2)/(e - 1)", params.a())));
    }
    let inv = (1.0 - e2 / n).powi(-2) * (n - e2 / 2.0) / (n - e2);
    Ok(1.0 / inv)
}

fn require_local_weight_regime(q: usize, d: usize) -> Result<()> {
    if q < 3 || d < q + 2 {
        return Err(precondition(format!("needs q ≥ 3 and d ≥ q + 2, got q = {q}, d = {d}")));
    }
    Ok(())
}

/// Per-step SSM factor for a neighbor with `f` free children:
/// `α f / (e (d+1)) · (1 - K/(d+1))⁻² · K^{(d-f)/d} · (e (d+1 - K/2)/(d+1 - K))^{f/d}`
/// with `K = K(a)`. The induction closes when it is at most `d/(d+1)`.
pub fn ssm_step_factor(params: &PottsParams, alpha: f64, f: usize) -> Result<f64> {
    let (q, d) = (params.q(), params.d());
    require_local_weight_regime(q, d)?;
    if f > d {
        return Err(precondition(format!("f = {f} exceeds d = {d}")));
    }
    let n = d as f64 + 1.0;
    let k = bound_k(params.a())?;
    if n <= k {
        return Err(precondition(format!("d + 1 = {n} must exceed K(a) = {k}")));
    }
    let share = f as f64 / d as f64;
    let free = E * (n - k / 2.0) / (n - k);
    Ok(alpha * f as f64 / (E * n) * (1.0 - k / n).powi(-2) * k.powf(1.0 - share) * free.powf(share))
}

/// SSM parameter from a numeric solve: the largest `α ≤ 1` with
/// `max_f ssm_step_factor(α, f) ≤ d/(d+1)`. Needs only `q ≥ 3`, `d ≥ q + 2`,
/// so it also covers `d + 1 ≤ e²` or `a < (e - 1/2)/(e - 1)` where the
/// closed form does not apply. This is an extrapolation of the induction,
/// not a proven threshold.
pub fn alpha_ssm_extrapolated(params: &PottsParams) -> Result<f64> {
    let d = params.d();
    let mut worst: f64 = 0.0;
    for f in 0..=d {
        worst = worst.max(ssm_step_factor(params, 1.0, f)?);
    }
    let target = d as f64 / (d as f64 + 1.0);
    Ok((target / worst).min(1.0))
}

/// `K = q·B(0)` at `w = 1 - α q/(d+1)`, capped at `min{q, 13}`.
pub fn wsm_k_at(params: &PottsParams, alpha: f64) -> Result<f64> {
    let p = PottsParams::from_alpha(params.q(), params.d(), alpha)?;
    let k = params.q() as f64 * bound_b(0, &p)?;
    Ok(k.min(params.q().min(13) as f64))
}

/// `α⁻¹ = (1 + (K/2)/(d+1-K)) · (1 - min{9, q+2}/(d+1))⁻²`.
pub fn alpha_wsm_with_k(params: &PottsParams, k: f64) -> Result<f64> {
    let (q, d) = (params.q(), params.d());
    require_local_weight_regime(q, d)?;
    let n = d as f64 + 1.0;
    if !(k > 0.0) || n <= k {
        return Err(precondition(format!("K = {k} must lie in (0, d + 1 = {n})")));
    }
    let m = (q + 2).min(9) as f64;
    let inv = (1.0 + (k / 2.0) / (n - k)) * (1.0 - m / n).powi(-2);
    Ok(1.0 / inv)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaWsm {
    /// Self-consistent value: `K = q·B(0)` evaluated at the resulting threshold.
    pub alpha: f64,
    pub k: f64,
    /// `K = q·B(0)` at the smallest admissible `w = 1 - q/(d+1)`.
    pub alpha_worst_w: f64,
    pub k_worst_w: f64,
    /// `K = min{q, 13}`; `None` when `d + 1 ≤ K`.
    pub alpha_conservative: Option<f64>,
    pub k_conservative: f64,
    /// `K'_q = d (1 - α)` for the self-consistent `α`.
    pub k_prime: f64,
}

/// WSM parameter. Only `q` and `d` are read from `params`.
pub fn alpha_wsm(params: &PottsParams) -> Result<AlphaWsm> {
    require_local_weight_regime(params.q(), params.d())?;
    let k_worst = wsm_k_at(params, 1.0)?;
    let alpha_worst = alpha_wsm_with_k(params, k_worst)?;

    // α ↦ α(K(α)) - α is strictly decreasing, positive at 0 and negative at 1
    let gap = |a: f64| -> Result<f64> { Ok(alpha_wsm_with_k(params, wsm_k_at(params, a)?)? - a) };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = lo;
    let k = wsm_k_at(params, alpha)?;
    let k_conservative = params.q().min(13) as f64;
    Ok(AlphaWsm {
        alpha,
        k,
        alpha_worst_w: alpha_worst,
        k_worst_w: k_worst,
        alpha_conservative: alpha_wsm_with_k(params, k_conservative).ok(),
        k_conservative,
        k_prime: params.d() as f64 * (1.0 - alpha),
    })
}

/// Adds one aggregated check holding the worst case of a family of
/// inequalities, plus count metrics.
fn fold_worst(report: &mut CheckReport, label: &str, cases: impl Iterator<Item = (f64, f64, f64)>, tolerance: f64) {
    let mut worst: Option<(f64, f64, f64)> = None;
    let mut count = 0usize;
    let mut violations = 0usize;
    for (x, lhs, rhs) in cases {
        count += 1;
        let slack = rhs - lhs;
        if !(slack >= -tolerance) {
            violations += 1;
        }
        if worst.map_or(true, |(_, l, r)| slack < r - l || slack.is_nan()) {
            worst = Some((x, lhs, rhs));
        }
    }
    if let Some((x, lhs, rhs)) = worst {
        report.check(label, lhs, rhs, tolerance);
        report.metric(format!("{label}.worst_at"), x);
    }
    report.metric(format!("{label}.cases"), count as f64);
    report.metric(format!("{label}.violations"), violations as f64);
}

/// `(1-x)^{-1/x} ≤ e (1 - x/2) / (1 - x)` on every grid point.
pub fn power_bound_check(xs: &[f64]) -> Result<CheckReport> {
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(precondition(format!("grid point {x} outside (0, 1)")));
    }
    let mut report = CheckReport::new("power-bound");
    let cases = xs.iter().map(|&x| {
        let lhs = (-(-x).ln_1p() / x).exp();
        let rhs = E * (1.0 - x / 2.0) / (1.0 - x);
        (x, lhs, rhs)
    });
    fold_worst(&mut report, "power", cases, ANALYTIC_TOL);
    Ok(report)
}

fn threshold_params(params: &PottsParams, alpha: f64) -> Result<PottsParams> {
    PottsParams::from_alpha(params.q(), params.d(), alpha)
}

/// Both parts of the bound on `w^{-(d+1)/q}` and `M(w)^{-(d+1)/q}` at
/// `w = 1 - α q/(d+1)`.
pub fn useful_bound_check(params: &PottsParams, alpha: f64) -> Result<CheckReport> {
    let (q, d) = (params.q(), params.d());
    if q < 3 || d < q + 1 {
        return Err(precondition(format!("needs q ≥ 3 and d ≥ q + 1, got q = {q}, d = {d}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(precondition(format!("α = {alpha} outside (0, 1]")));
    }
    let p = threshold_params(params, alpha)?;
    let (n, a) = (d as f64 + 1.0, p.a());
    let exponent = -n / q as f64;
    let mut report = CheckReport::new("useful-bound");
    report.check("w_power", p.w().powf(exponent), bound_k(a)?, ANALYTIC_TOL);
    let denom = (a - 1.0) / (a - 0.5) - E / n;
    if denom <= 0.0 {
        return Err(precondition("the bound on M(w) has a non-positive denominator"));
    }
    let rhs = E * (1.0 + (E / 2.0) / n / denom);
    report.check("m_power", bound_m(&p)?.powf(exponent), rhs, ANALYTIC_TOL);
    report.metric("w", p.w());
    Ok(report)
}

/// `q·B(d) ≤ K(a)` and, for `d ≥ q + 2`, `q·B(0) ≤ min{q, 13}` together with
/// the explicit bound on `q·B(0)` that yields the constant 13.
/// `α = 0` (so `w = 1`) is allowed.
pub fn corollary_b_check(params: &PottsParams, alpha: f64) -> Result<CheckReport> {
    let (q, d) = (params.q(), params.d());
    if q < 3 || d < q + 1 {
        return Err(precondition(format!("needs q ≥ 3 and d ≥ q + 1, got q = {q}, d = {d}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(precondition(format!("α = {alpha} outside [0, 1]")));
    }
    let p = threshold_params(params, alpha)?;
    let (qf, n, a) = (q as f64, d as f64 + 1.0, p.a());
    let mut report = CheckReport::new("corollary-B");
    let q_bd = qf * bound_b(d, &p)?;
    let k_a = bound_k(a)?;
    report.check("q_b_d", q_bd, k_a, ANALYTIC_TOL);
    report.metric("q_b_d", q_bd);
    report.metric("k_of_a", k_a);
    if d >= q + 2 {
        let q_b0 = qf * bound_b(0, &p)?;
        report.check("q_b_0", q_b0, q.min(13) as f64, ANALYTIC_TOL);
        let k_upper = E * (1.0 + (E / 2.0) / n / ((a - 1.0) / (a - 0.5) - E / n));
        report.check("q_b_0_explicit", q_b0, k_upper, ANALYTIC_TOL);
        let k_simple = E * (1.0 + (E / 2.0) / n * (n - qf / 2.0) / (n - qf - E));
        report.check("explicit_constant", k_simple, 13.0, ANALYTIC_TOL);
        report.metric("q_b_0", q_b0);
        report.metric("k_upper", k_upper);
    }
    Ok(report)
}

/// Grid minimum of `Π(1 - α x_i)` over `{x : Σx = 1, 0 ≤ x_i ≤ b}` with
/// `x_i ∈ {0, 1/grid, …, 1}`, compared with `(1 - αb)^{1/b}` and with the
/// vertex `x = (b, …, b, 1 - kb, 0, …, 0)`, `k = ⌊1/b⌋`, where the concave
/// objective attains its minimum.
pub fn bernoulli_product_min_check(q: usize, b: f64, alpha: f64, grid: usize) -> Result<CheckReport> {
    if q < 2 || grid == 0 {
        return Err(precondition("needs q ≥ 2 and a positive grid resolution"));
    }
    if !(b > 0.0 && b <= 1.0) || !(0.0..=1.0).contains(&alpha) {
        return Err(precondition(format!("needs b ∈ (0, 1] and α ∈ [0, 1], got b = {b}, α = {alpha}")));
    }
    if (q as f64) * b < 1.0 {
        return Err(precondition(format!("infeasible: q·b = {} < 1", q as f64 * b)));
    }
    let cap = ((b * grid as f64) + 1e-9).floor() as usize;
    let step = 1.0 / grid as f64;

    let mut best = f64::INFINITY;
    let mut best_point = vec![0usize; q];
    let mut current = vec![0usize; q];
    // depth-first over compositions of `grid` into q parts, each ≤ cap
    fn walk(
        i: usize,
        remaining: usize,
        cap: usize,
        step: f64,
        alpha: f64,
        product: f64,
        current: &mut [usize],
        best: &mut f64,
        best_point: &mut [usize],
    ) {
        let q = current.len();
        if i == q - 1 {
            if remaining > cap {
                return;
            }
            current[i] = remaining;
            let value = product * (1.0 - alpha * remaining as f64 * step);
            if value < *best {
                *best = value;
                best_point.copy_from_slice(current);
            }
            return;
        }
        let rest_cap = cap * (q - 1 - i);
        let lo = remaining.saturating_sub(rest_cap);
        for k in lo..=remaining.min(cap) {
            current[i] = k;
            let factor = 1.0 - alpha * k as f64 * step;
            walk(i + 1, remaining - k, cap, step, alpha, product * factor, current, best, best_point);
        }
    }
    walk(0, grid, cap, step, alpha, 1.0, &mut current, &mut best, &mut best_point);
    if !best.is_finite() {
        return Err(precondition("grid too coarse: no grid point satisfies x_i ≤ b"));
    }

    let whole = (1.0 / b + 1e-12).floor();
    let remainder = (1.0 - whole * b).max(0.0);
    let structured = (1.0 - alpha * b).powf(whole) * (1.0 - alpha * remainder);
    let rhs = (1.0 - alpha * b).powf(1.0 / b);

    let mut report = CheckReport::new("bernoulli-opt");
    report.check("grid_min", rhs, best, 1e-10);
    report.check("vertex_min", rhs, structured, ANALYTIC_TOL);
    report.check("vertex_is_minimum", structured, best, ANALYTIC_TOL);
    let b_on_grid = ((b * grid as f64) - (b * grid as f64).round()).abs() < 1e-9;
    if b_on_grid {
        report.check("vertex_attained", best, structured, ANALYTIC_TOL);
        let fractional = best_point.iter().filter(|&&k| k != 0 && k != cap).count();
        report.check("fractional_coordinates", fractional as f64, 1.0, 0.0);
    }
    report.metric("grid_min", best);
    report.metric("vertex_value", structured);
    report.metric("rhs", rhs);
    for (i, k) in best_point.iter().enumerate() {
        report.metric(format!("argmin.{i}"), *k as f64 * step);
    }
    Ok(report)
}

/// `Π(1 - β_j) · Σ β_k ≤ (n/(n+1))^{n+1} ≤ 1/e`.
pub fn check_beta_bound(betas: &[f64]) -> Result<CheckReport> {
    if let Some(b) = betas.iter().find(|b| !(0.0..=1.0).contains(*b)) {
        return Err(precondition(format!("β = {b} outside [0, 1]")));
    }
    let n = betas.len() as f64;
    let value = betas.iter().map(|b| 1.0 - b).product::<f64>() * betas.iter().sum::<f64>();
    let am_gm = (n / (n + 1.0)).powf(n + 1.0);
    let mut report = CheckReport::new("beta-bound");
    report.check("am_gm", value, am_gm, ANALYTIC_TOL);
    report.check("inverse_e", value, (-1.0f64).exp(), ANALYTIC_TOL);
    report.metric("value", value);
    Ok(report)
}

/// `‖Σ_j D_j x_j‖² ≤ max_i Σ_j D_j(i,i)² · Σ_j ‖x_j‖²` for diagonal `D_j`
/// given by their diagonals.
pub fn diag_norm_lemma_check(diagonals: &[Vec<f64>], vectors: &[Vec<f64>]) -> Result<CheckReport> {
    if diagonals.len() != vectors.len() {
        return Err(PottsError::InvalidVector(format!("{} diagonals but {} vectors", diagonals.len(), vectors.len())));
    }
    let q = diagonals.first().map_or(0, Vec::len);
    if diagonals.iter().chain(vectors).any(|v| v.len() != q) {
        return Err(PottsError::InvalidVector("all diagonals and vectors need one length".into()));
    }
    let (lhs, rhs) = diag_norm_sides(diagonals.iter().map(Vec::as_slice), vectors.iter().map(Vec::as_slice), q);
    let mut report = CheckReport::new("diag-norm");
    report.check("diag_norm", lhs, rhs, ANALYTIC_TOL);
    Ok(report)
}

pub(crate) fn diag_norm_sides<'a>(
    diagonals: impl Iterator<Item = &'a [f64]> + Clone,
    vectors: impl Iterator<Item = &'a [f64]> + Clone,
    q: usize,
) -> (f64, f64) {
    let mut sum = vec![0.0; q];
    let mut weight = vec![0.0; q];
    let mut norms = 0.0;
    for (dj, xj) in diagonals.zip(vectors) {
        for i in 0..q {
            sum[i] += dj[i] * xj[i];
            weight[i] += dj[i] * dj[i];
        }
        norms += xj.iter().map(|v| v * v).sum::<f64>();
    }
    let lhs = sum.iter().map(|v| v * v).sum();
    let max_weight = weight.iter().copied().fold(0.0, f64::max);
    (lhs, max_weight * norms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContractionMode {
    Wsm,
    Ssm,
}

/// The closed-form per-step contraction condition at parameter `α`.
///
/// WSM: `(α q / e) · λ²-bound ≤ 1`, with the fully free bound on `λ²` and
/// `K = q·B(0)` at `w = 1 - α q/(d+1)`.
///
/// SSM: the per-step factor for a neighbor with `f_k` free children is at
/// most `d/(d+1)`, evaluated both with `K(a)` and with `K(a)` replaced by its
/// upper bound `e²`; a sweep over `f ∈ 0..=d` confirms the factor peaks at
/// `f = d`.
pub fn induction_step_check(
    params: &PottsParams,
    alpha: f64,
    mode: ContractionMode,
    f_k: usize,
) -> Result<CheckReport> {
    let (q, d) = (params.q(), params.d());
    require_local_weight_regime(q, d)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(precondition(format!("α = {alpha} outside (0, 1]")));
    }
    let (qf, n) = (q as f64, d as f64 + 1.0);
    let mut report = CheckReport::new("induction-step");
    match mode {
        ContractionMode::Wsm => {
            let k = wsm_k_at(params, alpha)?;
            let m = (q + 2).min(9) as f64;
            let e_factor = E * (1.0 + (k / 2.0) / (n - k));
            let lambda_sq = e_factor / qf * (1.0 - m / n).powi(-2);
            report.check("wsm_step", alpha * qf / E * lambda_sq, 1.0, ANALYTIC_TOL);
            report.check("wsm_constant", e_factor, m, ANALYTIC_TOL);
            report.metric("k", k);
        }
        ContractionMode::Ssm => {
            if n <= E * E || params.a() < k_threshold_a() {
                return Err(precondition("SSM step needs d + 1 > e² and a ≥ (e - 1/2)/(e - 1)"));
            }
            let target = d as f64 / n;
            let at_f = ssm_step_factor(params, alpha, f_k)?;
            report.check("ssm_step", at_f, target, ANALYTIC_TOL);
            let e2 = E * E;
            let plugged = alpha * (1.0 - e2 / n).powi(-2) * (n - e2 / 2.0) / (n - e2) * target;
            report.check("ssm_step_e2", plugged, target, ANALYTIC_TOL);
            let factors: Vec<f64> = (0..=d).map(|f| ssm_step_factor(params, alpha, f)).collect::<Result<_>>()?;
            let (argmax, max) =
                factors
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (f, v)| if v > acc.1 { (f, v) } else { acc });
            report.check("ssm_peak_at_d", max, factors[d], ANALYTIC_TOL * max.max(1.0));
            let k = bound_k(params.a())?;
            let base = E * (n / k - 0.5) / (n - k);
            report.check("ssm_base", (-1.0f64).exp(), base, ANALYTIC_TOL);
            report.metric("argmax_f", argmax as f64);
            report.metric("k_of_a", k);
        }
    }
    Ok(report)
}
