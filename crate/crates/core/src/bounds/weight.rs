use serde::Serialize;

use crate::error::{PottsError, Result};
use crate::params::PottsParams;
use crate::recursion::{s_total, Segment};

/// Grid size and refinement tolerance for the local-weight maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub grid: usize,
    pub tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { grid: 1024, tolerance: 1e-10 }
    }
}

/// `λ = max_{i, t} sqrt(S(Z(t))) / S_i(Z(t))` and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalWeight {
    pub value: f64,
    pub argmax_t: f64,
    pub argmax_i: usize,
}

/// `sqrt(S(z)) / S_i(z)`.
pub fn local_weight_ratio(z: &[f64], w: f64, i: usize) -> f64 {
    let s = s_total(z);
    s.sqrt() / (s + (w - 1.0) * z[i] * z[i])
}

struct Objective<'a> {
    seg: &'a Segment,
    w: f64,
    buf: Vec<f64>,
}

impl Objective<'_> {
    fn eval(&mut self, t: f64, i: usize) -> f64 {
        self.seg.at_into(t, &mut self.buf);
        local_weight_ratio(&self.buf, self.w, i)
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of `f` on `[lo, hi]`.
fn golden_max(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximizes over a uniform grid of `search.grid` points in `[0, 1]`, then
/// refines around the best grid point of every color by golden-section
/// search down to `search.tolerance`.
pub fn local_weight(seg: &Segment, params: &PottsParams, search: SearchConfig) -> Result<LocalWeight> {
    let q = params.q();
    if seg.q() != q {
        return Err(PottsError::InvalidVector(format!("segment has {} colors, q = {q}", seg.q())));
    }
    params.require_positive_w()?;
    for v in seg.x().iter().chain(seg.y().iter()) {
        if !(*v > 0.0 && *v <= 1.0) {
            return Err(PottsError::InvalidVector(format!("local weight needs endpoint entries in (0, 1], got {v}")));
        }
    }
    if search.grid < 2 || !(search.tolerance > 0.0) {
        return Err(PottsError::InvalidParams("search needs at least 2 grid points and a positive tolerance".into()));
    }
    let mut obj = Objective { seg, w: params.w(), buf: vec![0.0; q] };

    if seg.x() == seg.y() {
        let (argmax_i, value) =
            (0..q)
                .map(|i| (i, obj.eval(0.0, i)))
                .fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
        return Ok(LocalWeight { value, argmax_t: 0.0, argmax_i });
    }

    let last = (search.grid - 1) as f64;
    let mut best = LocalWeight { value: f64::NEG_INFINITY, argmax_t: 0.0, argmax_i: 0 };
    for i in 0..q {
        let (mut k_best, mut v_best) = (0usize, f64::NEG_INFINITY);
        for k in 0..search.grid {
            let v = obj.eval(k as f64 / last, i);
            if v > v_best {
                k_best = k;
                v_best = v;
            }
        }
        let lo = k_best.saturating_sub(1) as f64 / last;
        let hi = (k_best + 1).min(search.grid - 1) as f64 / last;
        let (t_ref, v_ref) = golden_max(lo, hi, search.tolerance, |t| obj.eval(t, i));
        let (t, v) = if v_ref > v_best { (t_ref, v_ref) } else { (k_best as f64 / last, v_best) };
        if v > best.value {
            best = LocalWeight { value: v, argmax_t: t, argmax_i: i };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::random::instance_rng;
    use crate::tree::SqrtRatioVector;
    use proptest::prelude::*;
    use rand::Rng;

    fn seg(x: Vec<f64>, y: Vec<f64>) -> Segment {
        Segment::new(SqrtRatioVector::new(x).unwrap(), SqrtRatioVector::new(y).unwrap()).unwrap()
    }

    #[test]
    fn constant_segment() {
        let params = PottsParams::new(3, 0.5, 2).unwrap();
        let lw = local_weight(&seg(vec![1.0; 3], vec![1.0; 3]), &params, SearchConfig::default()).unwrap();
        assert!((lw.value - 3f64.sqrt() / 2.5).abs() < 1e-15);
        assert!((lw.value - 0.6928).abs() < 1e-4);
        assert_eq!(lw.argmax_t, 0.0);
    }

    #[test]
    fn rejects_bad_endpoints() {
        let params = PottsParams::new(3, 0.5, 2).unwrap();
        let s = seg(vec![1.0, 0.0, 1.0], vec![1.0; 3]);
        assert!(local_weight(&s, &params, SearchConfig::default()).is_err());
        let zero_w = PottsParams::new(3, 0.0, 2).unwrap();
        let s = seg(vec![1.0; 3], vec![0.5, 1.0, 1.0]);
        assert!(local_weight(&s, &zero_w, SearchConfig::default()).is_err());
    }

    #[test]
    fn matches_dense_grid() {
        let params = PottsParams::new(3, 0.5, 2).unwrap();
        for index in 0..20 {
            let mut rng = instance_rng(11, index);
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..=1.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..=1.0)).collect();
            let s = seg(x, y);
            let lw = local_weight(&s, &params, SearchConfig::default()).unwrap();
            let n = 1_000_000;
            let mut dense = f64::NEG_INFINITY;
            let mut z = vec![0.0; 3];
            for k in 0..=n {
                s.at_into(k as f64 / n as f64, &mut z);
                for i in 0..3 {
                    dense = dense.max(local_weight_ratio(&z, 0.5, i));
                }
            }
            assert!((lw.value - dense).abs() < 1e-8, "{} vs {dense}", lw.value);
            s.at_into(lw.argmax_t, &mut z);
            assert!((local_weight_ratio(&z, 0.5, lw.argmax_i) - lw.value).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn squared_weight_at_least_inverse_q(
            q in 2usize..6,
            w in 0.01f64..=1.0,
            x in proptest::collection::vec(0.01f64..=1.0, 6),
            y in proptest::collection::vec(0.01f64..=1.0, 6),
        ) {
            let params = PottsParams::new(q, w, 2).unwrap();
            let s = seg(x[..q].to_vec(), y[..q].to_vec());
            let lw = local_weight(&s, &params, SearchConfig { grid: 64, tolerance: 1e-8 }).unwrap();
            prop_assert!(lw.value * lw.value >= 1.0 / q as f64 - 1e-12);
        }
    }
}
