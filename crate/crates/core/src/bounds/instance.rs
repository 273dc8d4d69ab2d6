use std::f64::consts::E;

use rand::Rng;

use super::scalar::{bound_b, bound_k, diag_norm_sides};
use super::weight::{local_weight, LocalWeight, SearchConfig};
use super::{CheckReport, ANALYTIC_TOL, LAMBDA_TOL, QUADRATURE_TOL};
use crate::error::{PottsError, Result};
use crate::params::PottsParams;
use crate::recursion::{f_into, jacobian_unchecked, s_total, Segment};
use crate::tree::random::random_tree;
use crate::tree::{root_marginals_dp, subtree_sqrt_ratios, BoundaryCondition, RootedTree, SqrtRatioVector};

fn precondition(msg: impl Into<String>) -> PottsError {
    PottsError::Precondition(msg.into())
}

/// A tree with two boundary conditions on the same set of vertices, viewed
/// from the tree's root.
#[derive(Debug, Clone, PartialEq)]
pub struct PairInstance {
    pub tree: RootedTree,
    pub tau: BoundaryCondition,
    pub tau_prime: BoundaryCondition,
}

impl PairInstance {
    pub fn new(tree: RootedTree, tau: BoundaryCondition, tau_prime: BoundaryCondition) -> Result<Self> {
        if tau.q() != tau_prime.q() {
            return Err(PottsError::InvalidParams("boundary conditions use different q".into()));
        }
        if tau.vertex_count() != tree.vertex_count() || tau_prime.vertex_count() != tree.vertex_count() {
            return Err(PottsError::InvalidParams("boundary condition and tree sizes differ".into()));
        }
        if !tau.same_domain(&tau_prime) {
            return Err(PottsError::InvalidParams("boundary conditions must fix the same vertices".into()));
        }
        Ok(Self { tree, tau, tau_prime })
    }

    pub fn root(&self) -> usize {
        self.tree.root()
    }

    /// Vertices fixed to different colors.
    pub fn disagreement(&self) -> Vec<usize> {
        self.tau.disagreement(&self.tau_prime)
    }

    /// Distance from the root to the nearest disagreement; `None` when the
    /// boundary conditions agree.
    pub fn disagreement_distance(&self) -> Option<usize> {
        let depths = self.tree.depths();
        self.disagreement().into_iter().map(|v| depths[v]).min()
    }

    pub fn free_children(&self) -> Vec<usize> {
        let root = self.root();
        self.tree.children(root).iter().copied().filter(|&c| self.tau.is_free(c)).collect()
    }

    /// True when the root's children and grandchildren are all free.
    pub fn two_level_free(&self) -> bool {
        let root = self.root();
        self.tree
            .children(root)
            .iter()
            .all(|&c| self.tau.is_free(c) && self.tree.children(c).iter().all(|&g| self.tau.is_free(g)))
    }

    /// Random instance: a uniform random tree with at most `d` children per
    /// vertex, vertices deeper than `free_depth` fixed with probability
    /// `fix_probability`, and fixed vertices at depth `≥ min_disagreement`
    /// recolored independently in `tau_prime` with probability 1/2.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, spec: &PairSpec) -> Self {
        let n = rng.gen_range(spec.min_vertices..=spec.max_vertices.max(spec.min_vertices));
        let tree = random_tree(rng, n, spec.d);
        let depths = tree.depths();
        let mut tau = BoundaryCondition::free(n, spec.q);
        for v in 0..n {
            if depths[v] > spec.free_depth && rng.gen_bool(spec.fix_probability) {
                let c = rng.gen_range(0..spec.q);
                tau.fix(v, c).expect("valid color");
            }
        }
        let mut tau_prime = tau.clone();
        for v in 0..n {
            if tau.color(v).is_some() && depths[v] >= spec.min_disagreement && rng.gen_bool(0.5) {
                let c = rng.gen_range(0..spec.q);
                tau_prime.fix(v, c).expect("valid color");
            }
        }
        Self { tree, tau, tau_prime }
    }
}

/// Shape of [`PairInstance::random`] instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSpec {
    pub q: usize,
    pub d: usize,
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub free_depth: usize,
    pub min_disagreement: usize,
    pub fix_probability: f64,
}

fn require_free_root(tree: &RootedTree, bc: &BoundaryCondition) -> Result<()> {
    if !bc.is_free(tree.root()) {
        return Err(PottsError::FixedVertex(tree.root()));
    }
    Ok(())
}

fn marginal_report(name: &str, marginals: &[f64], bound: f64) -> CheckReport {
    let mut report = CheckReport::new(name);
    let worst = marginals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report.check("max_marginal", worst, bound, ANALYTIC_TOL);
    report.metric("bound", bound);
    report
}

/// Every root marginal is at most `1 / (1 + (q-1) w^{d'/(q-1)})`, `d'` the
/// root's number of neighbors.
pub fn marginal_bound_check_one_step(
    tree: &RootedTree,
    bc: &BoundaryCondition,
    params: &PottsParams,
) -> Result<CheckReport> {
    params.require_positive_w()?;
    require_free_root(tree, bc)?;
    let marginals = root_marginals_dp(tree, bc, params)?;
    let deg = tree.children(tree.root()).len();
    let q1 = (params.q() - 1) as f64;
    let bound = 1.0 / (1.0 + q1 * params.w().powf(deg as f64 / q1));
    let mut report = marginal_report("one-step", &marginals, bound);
    report.metric("root_degree", deg as f64);
    Ok(report)
}

/// Every root marginal is at most `B(ℓ)` when exactly `ℓ` of the root's
/// neighbors are fixed.
pub fn marginal_bound_check_two_step(
    tree: &RootedTree,
    bc: &BoundaryCondition,
    params: &PottsParams,
    ell: usize,
) -> Result<CheckReport> {
    params.require_positive_w()?;
    require_free_root(tree, bc)?;
    let root = tree.root();
    let fixed = tree.children(root).iter().filter(|&&c| !bc.is_free(c)).count();
    if fixed != ell {
        return Err(precondition(format!("declared ℓ = {ell}, but the root has {fixed} fixed neighbors")));
    }
    let marginals = root_marginals_dp(tree, bc, params)?;
    let bound = bound_b(ell, params)?;
    let mut report = marginal_report("two-step", &marginals, bound);
    report.metric("ell", ell as f64);
    Ok(report)
}

struct RootSides {
    x: Vec<SqrtRatioVector>,
    y: Vec<SqrtRatioVector>,
}

fn root_sides(inst: &PairInstance, params: &PottsParams) -> Result<RootSides> {
    require_free_root(&inst.tree, &inst.tau)?;
    Ok(RootSides {
        x: subtree_sqrt_ratios(&inst.tree, &inst.tau, params)?,
        y: subtree_sqrt_ratios(&inst.tree, &inst.tau_prime, params)?,
    })
}

fn require_far_disagreement(inst: &PairInstance) -> Result<()> {
    if let Some(dist) = inst.disagreement_distance() {
        if dist < 2 {
            return Err(precondition(format!("disagreement at distance {dist}; needs at least 2")));
        }
    }
    Ok(())
}

fn root_weight(inst: &PairInstance, sides: &RootSides, params: &PottsParams) -> Result<LocalWeight> {
    let root = inst.root();
    let seg = Segment::new(sides.x[root].clone(), sides.y[root].clone())?;
    local_weight(&seg, params, SearchConfig::default())
}

/// Lower bound on `S(Z_v(t))` in terms of `B(ℓ_j)`, and its two weaker
/// forms, at the local-weight maximizer and on a grid of `t`.
pub fn lower_bound_s_check(inst: &PairInstance, params: &PottsParams) -> Result<CheckReport> {
    params.require_positive_w()?;
    require_far_disagreement(inst)?;
    let sides = root_sides(inst, params)?;
    let lw = root_weight(inst, &sides, params)?;
    let root = inst.root();
    let (q, d, w) = (params.q() as f64, params.d(), params.w());
    let free = inst.free_children();
    let f = free.len() as f64;

    let mut lemma = q * w.powf((d as f64 - f) / q);
    for &j in &free {
        let ell = inst.tree.children(j).iter().filter(|&&g| !inst.tau.is_free(g)).count();
        let b = bound_b(ell, params)?;
        lemma *= (1.0 - (1.0 - w) * b).powf(1.0 / (q * b));
    }
    let uniform = w.powf(-(d as f64) / q) / q;
    let b_d = bound_b(d, params)?;
    let by_count = w.powf(-(d as f64 - f) / q) / q * (1.0 - (1.0 - w) * b_d).powf(-f / (q * b_d));

    let seg = Segment::new(sides.x[root].clone(), sides.y[root].clone())?;
    let mut report = CheckReport::new("S-lower");
    let grid = 64;
    let ts = std::iter::once(lw.argmax_t).chain((0..=grid).map(|k| k as f64 / grid as f64));
    for t in ts {
        let s = s_total(&seg.at(t));
        report.check("lemma", lemma, s, ANALYTIC_TOL);
        report.check("uniform", 1.0 / s, uniform, ANALYTIC_TOL);
        report.check("free_count", 1.0 / s, by_count, ANALYTIC_TOL);
    }
    report.keep_worst_per_label();
    report.metric("argmax_t", lw.argmax_t);
    report.metric("lemma_bound", lemma);
    Ok(report)
}

/// `λ_v²` against both closed-form bounds, and `λ_v² ≥ 1/q`.
///
/// The general bound needs `q ≥ 3`, `d ≥ q + 2` and `w ≥ 1 - q/(d+1)`; the
/// fully free bound is added when the root's children and grandchildren are
/// all free, with `K = q·B(0)`.
pub fn lambda_bound_check(inst: &PairInstance, params: &PottsParams) -> Result<CheckReport> {
    let (q, d) = (params.q(), params.d());
    if q < 3 || d < q + 2 {
        return Err(precondition(format!("needs q ≥ 3 and d ≥ q + 2, got q = {q}, d = {d}")));
    }
    let alpha = params.alpha();
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(precondition(format!("w = {} gives α = {alpha} outside (0, 1]", params.w())));
    }
    require_far_disagreement(inst)?;
    let sides = root_sides(inst, params)?;
    let lw = root_weight(inst, &sides, params)?;
    let lambda_sq = lw.value * lw.value;
    let (qf, n) = (q as f64, d as f64 + 1.0);
    let f = inst.free_children().len() as f64;
    let k_a = bound_k(params.a())?;
    if n <= k_a {
        return Err(precondition("d + 1 must exceed K(a)"));
    }

    let share = f / d as f64;
    let general = (1.0 - k_a / n).powi(-2) / qf * k_a.powf(1.0 - share) * (E * (n - k_a / 2.0) / (n - k_a)).powf(share);
    let mut report = CheckReport::new("lambda");
    report.check("general", lambda_sq, general, LAMBDA_TOL);
    report.check("lower", 1.0 / qf, lambda_sq, LAMBDA_TOL);
    report.metric("lambda_sq", lambda_sq);
    report.metric("free_neighbors", f);
    if inst.two_level_free() {
        let k = (qf * bound_b(0, params)?).min(q.min(13) as f64);
        let m = (q + 2).min(9) as f64;
        let fully_free = E / qf * (1.0 + (k / 2.0) / (n - k)) * (1.0 - m / n).powi(-2);
        report.check("fully_free", lambda_sq, fully_free, LAMBDA_TOL);
        report.metric("k", k);
    }
    Ok(report)
}

/// Worst case of one inequality across the quadrature nodes.
struct Worst {
    label: &'static str,
    tolerance: f64,
    lhs: f64,
    rhs: f64,
}

impl Worst {
    fn new(label: &'static str, tolerance: f64) -> Self {
        Self { label, tolerance, lhs: f64::NEG_INFINITY, rhs: f64::INFINITY }
    }

    fn update(&mut self, lhs: f64, rhs: f64) {
        let (slack, current) = (rhs - lhs, self.rhs - self.lhs);
        if current.is_nan() {
            return;
        }
        if !(slack >= current) {
            self.lhs = lhs;
            self.rhs = rhs;
        }
    }

    fn push(self, report: &mut CheckReport) {
        if self.lhs.is_finite() || self.rhs.is_finite() {
            report.check(self.label, self.lhs, self.rhs, self.tolerance);
        }
    }
}

/// Number of Simpson panels for the integral representation.
pub const SIMPSON_PANELS: usize = 4096;

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `‖X_v - Y_v‖² ≤ ((1-w)/e) Σ_{k free} λ_k² ‖X_k - Y_k‖²` together with each
/// intermediate step of its derivation:
///
/// * `recursion`: `X_v` is the entrywise product of `F(X_k)` over all children;
/// * `reduce_to_free`: dropping the common fixed-neighbor factors;
/// * `integral`, `integral_root`: the squared increment of
///   `P(t) = Π_{k free} F(Z_k(t))` is at most `∫ ‖P'(t)‖² dt` (Simpson);
/// * `fundamental_theorem`: `∫ P'(t) dt = P(1) - P(0)` for the quadrature;
/// * per node `t`: the diagonal factorization of `P'(t)` (`factorization`),
///   the diagonal-norm lemma (`diag_norm`), `‖α_k‖ ≤ ‖X_k - Y_k‖`
///   (`projection`), the local-weight step (`weight`), the bound on the
///   integrand (`integrand`), the β bound (`beta`, `beta_inverse_e`) and
///   their combination (`combined`).
pub fn verify_norm_bound(inst: &PairInstance, params: &PottsParams) -> Result<CheckReport> {
    params.require_positive_w()?;
    let tree = &inst.tree;
    let root = tree.root();
    for &c in tree.children(root) {
        if inst.tau.color(c) != inst.tau_prime.color(c) {
            return Err(precondition(format!("boundary conditions differ on neighbor {c} of the root")));
        }
    }
    let sides = root_sides(inst, params)?;
    let (q, w) = (params.q(), params.w());
    let (xv, yv) = (&sides.x[root], &sides.y[root]);
    let lhs = norm_sq(&diff(xv, yv));

    let mut report = CheckReport::new("norm-bound");
    let mut f_buf = vec![0.0; q];

    // X_v = Π_k F(X_k) over all children
    let mut product = vec![1.0; q];
    for &c in tree.children(root) {
        f_into(&sides.x[c], w, &mut f_buf);
        product.iter_mut().zip(&f_buf).for_each(|(p, f)| *p *= f);
    }
    let recursion_err = product.iter().zip(xv.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report.check("recursion", recursion_err, 0.0, ANALYTIC_TOL);

    let free = inst.free_children();
    let segs: Vec<Segment> =
        free.iter().map(|&k| Segment::new(sides.x[k].clone(), sides.y[k].clone())).collect::<Result<_>>()?;
    let deltas: Vec<Vec<f64>> = segs.iter().map(Segment::direction).collect();
    let lambdas: Vec<f64> = segs
        .iter()
        .map(|s| local_weight(s, params, SearchConfig::default()).map(|l| l.value))
        .collect::<Result<_>>()?;
    let weighted: f64 = lambdas.iter().zip(&deltas).map(|(l, dk)| l * l * norm_sq(dk)).sum();
    let rhs = (1.0 - w) / E * weighted;
    report.check("theorem", lhs, rhs, LAMBDA_TOL);
    report.metric("lhs", lhs);
    report.metric("rhs", rhs);
    report.metric("free_neighbors", free.len() as f64);

    let n_free = free.len();
    let mut z = vec![vec![0.0; q]; n_free];
    let mut fz = vec![vec![0.0; q]; n_free];
    let mut s = vec![0.0; n_free];
    let p_at = |t: f64, z: &mut Vec<Vec<f64>>, fz: &mut Vec<Vec<f64>>, s: &mut Vec<f64>| -> Vec<f64> {
        let mut p = vec![1.0; q];
        for k in 0..n_free {
            segs[k].at_into(t, &mut z[k]);
            s[k] = f_into(&z[k], w, &mut fz[k]);
            p.iter_mut().zip(&fz[k]).for_each(|(pi, f)| *pi *= f);
        }
        p
    };
    let p1 = p_at(1.0, &mut z, &mut fz, &mut s);
    let p0 = p_at(0.0, &mut z, &mut fz, &mut s);
    let increment = diff(&p1, &p0);
    let increment_sq = norm_sq(&increment);
    report.check("reduce_to_free", lhs, increment_sq, ANALYTIC_TOL);

    let am_gm = {
        let n = n_free as f64;
        (n / (n + 1.0)).powf(n + 1.0)
    };
    let inv_e = (-1.0f64).exp();
    let mut factorization = Worst::new("factorization", ANALYTIC_TOL);
    let mut diag_norm = Worst::new("diag_norm", ANALYTIC_TOL);
    let mut projection = Worst::new("projection", ANALYTIC_TOL);
    let mut weight = Worst::new("weight", LAMBDA_TOL);
    let mut integrand_bound = Worst::new("integrand", LAMBDA_TOL);
    let mut beta = Worst::new("beta", ANALYTIC_TOL);
    let mut beta_e = Worst::new("beta_inverse_e", ANALYTIC_TOL);
    let mut combined = Worst::new("combined", LAMBDA_TOL);

    let h = 1.0 / SIMPSON_PANELS as f64;
    let mut integral = 0.0;
    let mut integral_deriv = vec![0.0; q];
    let mut deriv = vec![0.0; q];
    let mut others = vec![0.0; q];
    let mut d_diag = vec![vec![0.0; q]; n_free];
    let mut x_vec = vec![vec![0.0; q]; n_free];

    for node in 0..=SIMPSON_PANELS {
        let t = node as f64 * h;
        let p = p_at(t, &mut z, &mut fz, &mut s);
        deriv.iter_mut().for_each(|v| *v = 0.0);
        let mut max_term: f64 = 0.0;
        let mut beta_terms = vec![(1.0f64, 0.0f64); q];
        for k in 0..n_free {
            let jac = jacobian_unchecked(&z[k], w, &fz[k], s[k]);
            let image = jac.apply(&deltas[k]);
            // Π_{j ≠ k} F(Z_j)_i
            for (i, o) in others.iter_mut().enumerate() {
                *o = (0..n_free).filter(|&j| j != k).map(|j| fz[j][i]).product();
            }
            for i in 0..q {
                deriv[i] += image[i] * others[i];
            }
            let alpha_k = jac.project(&deltas[k]);
            let root_s = s[k].sqrt();
            for i in 0..q {
                let s_i = s[k] + (w - 1.0) * z[k][i] * z[k][i];
                d_diag[k][i] = p[i] * (w - 1.0) * z[k][i] / root_s;
                x_vec[k][i] = root_s / s_i * alpha_k[i];
                let b = (1.0 - w) * z[k][i] * z[k][i] / s[k];
                beta_terms[i].0 *= 1.0 - b;
                beta_terms[i].1 += b;
            }
            let alpha_norm = norm_sq(&alpha_k).sqrt();
            projection.update(alpha_norm, norm_sq(&deltas[k]).sqrt());
            weight.update(norm_sq(&x_vec[k]).sqrt(), lambdas[k] * alpha_norm);
        }
        for i in 0..q {
            let term: f64 = (0..n_free).map(|k| p[i] * p[i] * (1.0 - w).powi(2) * z[k][i] * z[k][i] / s[k]).sum();
            max_term = max_term.max(term);
        }
        let integrand = norm_sq(&deriv);

        let (dn_lhs, dn_rhs) = diag_norm_sides(d_diag.iter().map(Vec::as_slice), x_vec.iter().map(Vec::as_slice), q);
        factorization.update((dn_lhs - integrand).abs() / integrand.max(1.0), 0.0);
        diag_norm.update(dn_lhs, dn_rhs);
        integrand_bound.update(integrand, max_term * weighted);
        let beta_max = beta_terms.iter().map(|(prod, sum)| prod * sum).fold(0.0, f64::max);
        beta.update(beta_max, am_gm);
        beta_e.update(beta_max, inv_e);
        combined.update(integrand, (1.0 - w) / E * weighted);

        let coeff = if node == 0 || node == SIMPSON_PANELS {
            1.0
        } else if node % 2 == 1 {
            4.0
        } else {
            2.0
        };
        integral += coeff * integrand;
        for i in 0..q {
            integral_deriv[i] += coeff * deriv[i];
        }
    }
    integral *= h / 3.0;
    integral_deriv.iter_mut().for_each(|v| *v *= h / 3.0);

    report.check("integral", increment_sq, integral, QUADRATURE_TOL);
    report.check("integral_root", lhs, integral, QUADRATURE_TOL);
    let ftc = integral_deriv.iter().zip(&increment).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report.check("fundamental_theorem", ftc, 0.0, QUADRATURE_TOL);
    for worst in [factorization, diag_norm, projection, weight, integrand_bound, beta, beta_e, combined] {
        worst.push(&mut report);
    }
    report.metric("integral", integral);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::random::instance_rng;

    fn p(q: usize, w: f64, d: usize) -> PottsParams {
        PottsParams::new(q, w, d).unwrap()
    }

    #[test]
    fn one_step_star_example() {
        let t = RootedTree::star(5);
        let pairs: Vec<_> = (1..=5).map(|v| (v, 0)).collect();
        let bc = BoundaryCondition::from_pairs(6, 3, &pairs).unwrap();
        let params = p(3, 0.5, 5);
        let r = marginal_bound_check_one_step(&t, &bc, &params).unwrap();
        let w5 = 0.5f64.powi(5);
        let m = root_marginals_dp(&t, &bc, &params).unwrap();
        assert!((m[0] - w5 / (w5 + 2.0)).abs() < 1e-15);
        assert!((r.checks[0].lhs - 1.0 / (w5 + 2.0)).abs() < 1e-15);
        assert!((r.checks[0].rhs - 1.0 / (1.0 + 2.0 * 0.5f64.powf(2.5))).abs() < 1e-15);
        assert!(r.checks[0].slack() > 0.0);
    }

    #[test]
    fn one_step_unit_weight_is_tight() {
        let t = RootedTree::star(3);
        let bc = BoundaryCondition::from_pairs(4, 3, &[(1, 2)]).unwrap();
        let r = marginal_bound_check_one_step(&t, &bc, &p(3, 1.0, 3)).unwrap();
        assert!(r.checks[0].slack().abs() < 1e-15);
    }

    #[test]
    fn two_step_declared_ell_must_match() {
        let t = RootedTree::star(3);
        let bc = BoundaryCondition::from_pairs(4, 3, &[(1, 2)]).unwrap();
        assert!(marginal_bound_check_two_step(&t, &bc, &p(3, 0.5, 3), 0).is_err());
        let r = marginal_bound_check_two_step(&t, &bc, &p(3, 0.5, 3), 1).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn two_step_adversarial_same_color() {
        let params = p(4, 0.8, 6);
        for index in 0..50 {
            let mut rng = instance_rng(5, index);
            let tree = random_tree(&mut rng, 25, 6);
            let mut bc = BoundaryCondition::free(25, 4);
            let children: Vec<usize> = tree.children(0).to_vec();
            for &c in children.iter().take(3) {
                bc.fix(c, 0).unwrap();
            }
            for v in 1..25 {
                if !children.contains(&v) && rng.gen_bool(0.3) {
                    bc.fix(v, 0).unwrap();
                }
            }
            let ell = children.len().min(3);
            let r = marginal_bound_check_two_step(&tree, &bc, &params, ell).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    fn spec(q: usize, d: usize) -> PairSpec {
        PairSpec { q, d, min_vertices: 2, max_vertices: 30, free_depth: 0, min_disagreement: 2, fix_probability: 0.4 }
    }

    #[test]
    fn random_instances_respect_spec() {
        for index in 0..30 {
            let mut rng = instance_rng(1, index);
            let inst = PairInstance::random(&mut rng, &spec(3, 4));
            assert!(inst.tree.check_degree_bound(4).is_ok());
            assert!(inst.tau.same_domain(&inst.tau_prime));
            assert!(inst.tau.is_free(0));
            assert!(inst.disagreement_distance().map_or(true, |d| d >= 2));
        }
    }

    #[test]
    fn s_lower_unit_weight_and_stars() {
        let t = RootedTree::star(4);
        let bc = BoundaryCondition::from_pairs(5, 3, &[(1, 0), (2, 1), (3, 2), (4, 0)]).unwrap();
        let inst = PairInstance::new(t, bc.clone(), bc).unwrap();
        let unit = lower_bound_s_check(&inst, &p(3, 1.0, 4)).unwrap();
        let lemma = unit.checks.iter().find(|c| c.label == "lemma").unwrap();
        assert!((lemma.lhs - 3.0).abs() < 1e-15 && (lemma.rhs - 3.0).abs() < 1e-15);
        let r = lower_bound_s_check(&inst, &p(3, 0.4, 4)).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.metrics["lemma_bound"] - 3.0 * 0.4f64.powf(4.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn s_lower_rejects_near_disagreement() {
        let t = RootedTree::path(1);
        let a = BoundaryCondition::from_pairs(2, 3, &[(1, 0)]).unwrap();
        let b = BoundaryCondition::from_pairs(2, 3, &[(1, 1)]).unwrap();
        let inst = PairInstance::new(t, a, b).unwrap();
        assert!(lower_bound_s_check(&inst, &p(3, 0.5, 2)).is_err());
        assert!(verify_norm_bound(&inst, &p(3, 0.5, 2)).is_err());
    }

    #[test]
    fn lambda_on_fixed_star() {
        // f = 0: general bound is (1/q)(1 - K/(d+1))⁻² K
        let t = RootedTree::star(7);
        let pairs: Vec<_> = (1..=7).map(|v| (v, v % 3)).collect();
        let bc = BoundaryCondition::from_pairs(8, 3, &pairs).unwrap();
        let inst = PairInstance::new(t, bc.clone(), bc).unwrap();
        let params = PottsParams::from_alpha(3, 7, 0.8).unwrap();
        let r = lambda_bound_check(&inst, &params).unwrap();
        assert!(r.passed(), "{r:?}");
        let k = bound_k(8.0 / 3.0).unwrap();
        let general = r.checks.iter().find(|c| c.label == "general").unwrap();
        assert!((general.rhs - (1.0 - k / 8.0).powi(-2) * k / 3.0).abs() < 1e-13);
        assert!(lambda_bound_check(&inst, &p(3, 0.5, 7)).is_err());
    }

    #[test]
    fn norm_bound_equal_boundaries() {
        let mut rng = instance_rng(3, 0);
        let inst = PairInstance::random(&mut rng, &spec(3, 4));
        let same = PairInstance::new(inst.tree.clone(), inst.tau.clone(), inst.tau.clone()).unwrap();
        let r = verify_norm_bound(&same, &p(3, 0.5, 4)).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.metrics["lhs"], 0.0);
        assert_eq!(r.metrics["rhs"], 0.0);
    }

    #[test]
    fn norm_bound_single_free_child() {
        // root - child - grandchild with two leaves fixed differently at depth 3
        let t = RootedTree::from_parents(&[None, Some(0), Some(1), Some(2), Some(2)]).unwrap();
        let a = BoundaryCondition::from_pairs(5, 3, &[(3, 0), (4, 1)]).unwrap();
        let b = BoundaryCondition::from_pairs(5, 3, &[(3, 2), (4, 2)]).unwrap();
        let inst = PairInstance::new(t, a, b).unwrap();
        let r = verify_norm_bound(&inst, &p(3, 0.5, 2)).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.metrics["lhs"] > 0.0);
        assert!(r.metrics["rhs"] > r.metrics["lhs"]);
    }

    #[test]
    fn norm_bound_random_instances() {
        for index in 0..40 {
            let mut rng = instance_rng(9, index);
            let inst = PairInstance::random(&mut rng, &spec(3, 5));
            let w = [0.3, 0.6, 0.9][index as usize % 3];
            let r = verify_norm_bound(&inst, &p(3, w, 5)).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }
}
