//! The square-root-ratio map `F(x)_i = sqrt(S_i(x) / S(x))`, its factored
//! Jacobian, and linear segments between two square-root ratio vectors.
//!
//! With `S(x) = Σ_k x_k²` and `S_i(x) = S(x) + (w - 1) x_i²`, the square-root
//! ratio at a vertex is the entrywise product of `F` over its children.

use crate::error::{PottsError, Result};
use crate::params::PottsParams;
use crate::tree::SqrtRatioVector;

/// `S(x) = Σ_k x_k²`.
pub fn s_total(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `S_i(x) = S(x) + (w - 1) x_i²`.
pub fn s_color(x: &[f64], w: f64, i: usize) -> f64 {
    s_total(x) + (w - 1.0) * x[i] * x[i]
}

fn check_len(x: &[f64], params: &PottsParams) -> Result<()> {
    if x.len() != params.q() {
        return Err(PottsError::InvalidVector(format!("vector has {} entries, q = {}", x.len(), params.q())));
    }
    Ok(())
}

fn check_closed_domain(x: &[f64], params: &PottsParams) -> Result<()> {
    check_len(x, params)?;
    if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(PottsError::InvalidVector("entries must be finite and non-negative".into()));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(PottsError::InvalidVector("F is undefined at the zero vector".into()));
    }
    Ok(())
}

/// Unchecked evaluation of `F` into `out`. Returns `S(x)`.
pub(crate) fn f_into(x: &[f64], w: f64, out: &mut [f64]) -> f64 {
    let s = s_total(x);
    for (o, xi) in out.iter_mut().zip(x) {
        *o = (1.0 + (w - 1.0) * xi * xi / s).max(0.0).sqrt();
    }
    s
}

/// `F(x)`; defined for non-negative, non-zero `x` and invariant under
/// positive rescaling of `x`.
pub fn apply_f(x: &[f64], params: &PottsParams) -> Result<SqrtRatioVector> {
    check_closed_domain(x, params)?;
    let mut out = vec![0.0; x.len()];
    f_into(x, params.w(), &mut out);
    Ok(SqrtRatioVector::from_vec_unchecked(out))
}

/// `DF(x) = diag(diag_part) · (I - π πᵀ)` with
/// `diag_part_i = (w - 1) / F(x)_i · x_i / S(x)` and `π = x / sqrt(S(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianFactors {
    pub diag_part: Vec<f64>,
    pub projector: Vec<f64>,
}

impl JacobianFactors {
    /// `(I - π πᵀ) v`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let dot: f64 = self.projector.iter().zip(v).map(|(p, x)| p * x).sum();
        v.iter().zip(&self.projector).map(|(x, p)| x - dot * p).collect()
    }

    /// `DF(x) v` in `O(q)`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.project(v);
        out.iter_mut().zip(&self.diag_part).for_each(|(o, d)| *o *= d);
        out
    }

    /// Dense row-major `q × q` matrix.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let q = self.diag_part.len();
        (0..q)
            .map(|i| {
                (0..q)
                    .map(|j| {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        self.diag_part[i] * (delta - self.projector[i] * self.projector[j])
                    })
                    .collect()
            })
            .collect()
    }
}

pub(crate) fn jacobian_unchecked(x: &[f64], w: f64, f_of_x: &[f64], s: f64) -> JacobianFactors {
    let root_s = s.sqrt();
    JacobianFactors {
        diag_part: x.iter().zip(f_of_x).map(|(xi, fi)| (w - 1.0) / fi * xi / s).collect(),
        projector: x.iter().map(|xi| xi / root_s).collect(),
    }
}

/// Factored Jacobian of `F`; only defined on the open positive orthant.
pub fn jacobian_f(x: &[f64], params: &PottsParams) -> Result<JacobianFactors> {
    check_len(x, params)?;
    if x.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(PottsError::InvalidVector("the Jacobian needs strictly positive entries".into()));
    }
    let mut f = vec![0.0; x.len()];
    let s = f_into(x, params.w(), &mut f);
    Ok(jacobian_unchecked(x, params.w(), &f, s))
}

/// `Z(t) = t·x + (1 - t)·y` for `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    x: SqrtRatioVector,
    y: SqrtRatioVector,
}

impl Segment {
    pub fn new(x: SqrtRatioVector, y: SqrtRatioVector) -> Result<Self> {
        if x.q() != y.q() {
            return Err(PottsError::InvalidVector(format!("segment endpoints have {} and {} entries", x.q(), y.q())));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &SqrtRatioVector {
        &self.x
    }

    pub fn y(&self) -> &SqrtRatioVector {
        &self.y
    }

    pub fn q(&self) -> usize {
        self.x.q()
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.q()];
        self.at_into(t, &mut out);
        out
    }

    pub(crate) fn at_into(&self, t: f64, out: &mut [f64]) {
        for ((o, a), b) in out.iter_mut().zip(self.x.iter()).zip(self.y.iter()) {
            *o = t * a + (1.0 - t) * b;
        }
    }

    /// `x - y`, the constant velocity of the segment.
    pub fn direction(&self) -> Vec<f64> {
        self.x.iter().zip(self.y.iter()).map(|(a, b)| a - b).collect()
    }
}

/// `S`, every `S_i` and `F` evaluated at one point of a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentStats {
    pub s: f64,
    pub s_colors: Vec<f64>,
    pub f_of_z: SqrtRatioVector,
}

pub fn segment_s_stats(seg: &Segment, params: &PottsParams, t: f64) -> Result<SegmentStats> {
    if !(0.0..=1.0).contains(&t) {
        return Err(PottsError::Precondition(format!("t = {t} outside [0, 1]")));
    }
    check_len(seg.x(), params)?;
    let z = seg.at(t);
    let w = params.w();
    let s = s_total(&z);
    let s_colors = z.iter().map(|zi| s + (w - 1.0) * zi * zi).collect();
    let f_of_z = apply_f(&z, params)?;
    Ok(SegmentStats { s, s_colors, f_of_z })
}
