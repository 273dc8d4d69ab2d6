use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::incremental::IncrementalRatios;
use super::{
    max_abs_diff, root_discrepancy, stream, BoundaryStrategy, DecayReport, DepthResult, ExperimentConfig, Threshold,
    ADVERSARIAL_SWEEPS,
};
use crate::bounds::ContractionMode;
use crate::error::Result;
use crate::params::PottsParams;
use crate::tree::random::{instance_rng, random_tree};
use crate::tree::{subtree_sqrt_ratios, BoundaryCondition, RootedTree};

const SIDE_BRANCHES_MAX: usize = 3;
const SIDE_SUBTREE_MAX: usize = 4;
const FIX_ROOT_NEIGHBOR: f64 = 0.5;
const FIX_OTHER: f64 = 0.3;
const EXTRA_DISAGREEMENT: f64 = 0.25;

/// A tree with a free path `spine[0] = root, …, spine[depth]` ending at a
/// disagreement vertex. Side vertices carry a common partial coloring, and
/// side vertices at depth exactly `depth` may join the disagreement set.
#[derive(Debug, Clone, PartialEq)]
pub struct SpineInstance {
    pub tree: RootedTree,
    pub spine: Vec<usize>,
    pub disagreement: Vec<usize>,
    pub tau: BoundaryCondition,
    pub tau_prime: BoundaryCondition,
}

fn other_color<R: Rng + ?Sized>(rng: &mut R, q: usize, c: usize) -> usize {
    (c + 1 + rng.gen_range(0..q - 1)) % q
}

/// Random spine instance; all disagreements get independent random color
/// pairs (`τ(v) ≠ τ'(v)`).
pub fn spine_instance<R: Rng + ?Sized>(
    rng: &mut R,
    params: &PottsParams,
    depth: usize,
    side_branches: bool,
) -> SpineInstance {
    let (q, d) = (params.q(), params.d());
    let mut parents: Vec<Option<usize>> = vec![None];
    let mut depths = vec![0usize];
    for k in 1..=depth {
        parents.push(Some(k - 1));
        depths.push(k);
    }
    let spine: Vec<usize> = (0..=depth).collect();
    if side_branches {
        for k in 0..depth {
            let extra = rng.gen_range(0..=(d - 1).min(SIDE_BRANCHES_MAX));
            for _ in 0..extra {
                let size = rng.gen_range(1..=SIDE_SUBTREE_MAX);
                let shape = random_tree(rng, size, d);
                let offset = parents.len();
                let shape_depths = shape.depths();
                for u in 0..size {
                    parents.push(Some(shape.parent(u).map_or(k, |p| p + offset)));
                    depths.push(k + 1 + shape_depths[u]);
                }
            }
        }
    }
    let tree = RootedTree::from_parents(&parents).expect("spine generator builds a tree");
    let n = tree.vertex_count();

    let mut common = BoundaryCondition::free(n, q);
    for v in depth + 1..n {
        let p = if depths[v] == 1 { FIX_ROOT_NEIGHBOR } else { FIX_OTHER };
        if rng.gen_bool(p) {
            common.fix(v, rng.gen_range(0..q)).expect("color in range");
        }
    }
    let mut disagreement = vec![depth];
    for v in depth + 1..n {
        if depths[v] == depth && rng.gen_bool(EXTRA_DISAGREEMENT) {
            disagreement.push(v);
        }
    }
    let (mut tau, mut tau_prime) = (common.clone(), common);
    for &v in &disagreement {
        let c = rng.gen_range(0..q);
        tau.fix(v, c).expect("color in range");
        tau_prime.fix(v, other_color(rng, q, c)).expect("color in range");
    }
    SpineInstance { tree, spine, disagreement, tau, tau_prime }
}

impl SpineInstance {
    /// Sets every disagreement vertex to color 0 under `τ` and 1 under `τ'`.
    fn make_uniform_pair(&mut self) {
        for &v in &self.disagreement {
            self.tau.fix(v, 0).expect("color in range");
            self.tau_prime.fix(v, 1).expect("color in range");
        }
    }

    fn discrepancy(&self, params: &PottsParams) -> Result<f64> {
        root_discrepancy(&self.tree, &self.tau, &self.tau_prime, params)
    }

    /// Coordinate ascent over the colors of disagreement vertices, keeping
    /// `τ(v) ≠ τ'(v)`.
    fn adversarial(&self, params: &PottsParams) -> Result<f64> {
        let q = params.q();
        let mut sides = [
            IncrementalRatios::new(&self.tree, self.tau.clone(), params)?,
            IncrementalRatios::new(&self.tree, self.tau_prime.clone(), params)?,
        ];
        let mut best = max_abs_diff(&sides[0].root_marginals(), &sides[1].root_marginals());
        for _ in 0..ADVERSARIAL_SWEEPS {
            let mut improved = false;
            for s in 0..2 {
                for &v in &self.disagreement {
                    for c in 0..q {
                        let old = sides[s].boundary().color(v).expect("disagreement vertex");
                        let partner = sides[1 - s].boundary().color(v).expect("disagreement vertex");
                        if c == old || c == partner || !sides[s].recolor(v, c) {
                            continue;
                        }
                        let value = max_abs_diff(&sides[0].root_marginals(), &sides[1].root_marginals());
                        if value > best {
                            best = value;
                            improved = true;
                        } else {
                            sides[s].recolor(v, old);
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
        Ok(best)
    }
}

fn instance_for(cfg: &ExperimentConfig, depth: usize, index: usize) -> SpineInstance {
    let mut rng = instance_rng(cfg.seed, stream(depth, index));
    let mut inst = spine_instance(&mut rng, &cfg.params, depth, cfg.side_branches);
    if cfg.strategy == BoundaryStrategy::AllOneColorPair {
        inst.make_uniform_pair();
    }
    inst
}

pub fn run_ssm_experiment(cfg: &ExperimentConfig) -> Result<DecayReport> {
    cfg.require_mode(ContractionMode::Ssm)?;
    cfg.params.require_positive_w()?;
    let mut per_depth = Vec::with_capacity(cfg.depths.len());
    for &depth in &cfg.depths {
        let values = (0..cfg.instances_per_depth)
            .into_par_iter()
            .map(|i| {
                let inst = instance_for(cfg, depth, i);
                match cfg.strategy {
                    BoundaryStrategy::AdversarialSearch => inst.adversarial(&cfg.params),
                    _ => inst.discrepancy(&cfg.params),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        per_depth.push(DepthResult {
            depth,
            max_discrepancy: values.iter().copied().fold(0.0, f64::max),
            n_instances: values.len(),
        });
    }
    Ok(DecayReport::assemble(cfg, per_depth, Vec::new()))
}

/// `‖X_u - Y_u‖²` along the spine, indexed by distance from the
/// disagreement vertex at its end. `X`, `Y` are subtree square-root ratios
/// under `τ` and `τ'`.
pub fn spine_trace(inst: &SpineInstance, params: &PottsParams) -> Result<Vec<f64>> {
    let x = subtree_sqrt_ratios(&inst.tree, &inst.tau, params)?;
    let y = subtree_sqrt_ratios(&inst.tree, &inst.tau_prime, params)?;
    Ok(inst.spine.iter().rev().map(|&u| x[u].iter().zip(y[u].iter()).map(|(a, b)| (a - b) * (a - b)).sum()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceLevel {
    pub distance: usize,
    pub mean_sq_diff: f64,
    pub max_sq_diff: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionTrace {
    pub params: PottsParams,
    pub levels: Vec<TraceLevel>,
    /// `mean[j + 1] / mean[j]` wherever both means are positive.
    pub step_ratios: Vec<f64>,
    pub max_step_ratio: f64,
    pub target_rate: f64,
    pub threshold: Threshold,
    pub at_threshold: bool,
    /// `max_step_ratio ≤ target_rate + 0.02`, required only at or above the
    /// threshold.
    pub pass: bool,
}

/// Spine traces of every instance of an SSM configuration, averaged per
/// distance from the disagreement.
pub fn sqrt_ratio_contraction_trace(cfg: &ExperimentConfig) -> Result<ContractionTrace> {
    cfg.require_mode(ContractionMode::Ssm)?;
    cfg.params.require_positive_w()?;
    let mut traces = Vec::new();
    for &depth in &cfg.depths {
        let batch = (0..cfg.instances_per_depth)
            .into_par_iter()
            .map(|i| spine_trace(&instance_for(cfg, depth, i), &cfg.params))
            .collect::<Result<Vec<_>>>()?;
        traces.extend(batch);
    }
    let longest = traces.iter().map(Vec::len).max().unwrap_or(0);
    let levels: Vec<TraceLevel> = (0..longest)
        .map(|j| {
            let column: Vec<f64> = traces.iter().filter_map(|t| t.get(j).copied()).collect();
            TraceLevel {
                distance: j,
                mean_sq_diff: column.iter().sum::<f64>() / column.len() as f64,
                max_sq_diff: column.iter().copied().fold(0.0, f64::max),
                samples: column.len(),
            }
        })
        .collect();
    let step_ratios: Vec<f64> = levels
        .windows(2)
        .filter(|p| p[0].mean_sq_diff > 0.0 && p[1].mean_sq_diff > 0.0)
        .map(|p| p[1].mean_sq_diff / p[0].mean_sq_diff)
        .collect();
    let max_step_ratio = step_ratios.iter().copied().fold(0.0, f64::max);
    let d = cfg.params.d() as f64;
    let target_rate = d / (d + 1.0);
    let threshold = Threshold::for_mode(&cfg.params, ContractionMode::Ssm);
    let at_threshold = threshold.covers(cfg.params.w());
    Ok(ContractionTrace {
        params: cfg.params,
        levels,
        step_ratios,
        max_step_ratio,
        target_rate,
        threshold,
        at_threshold,
        pass: !at_threshold || max_step_ratio <= target_rate + 0.02,
    })
}
