use rand::Rng;
use rayon::prelude::*;

use super::incremental::IncrementalRatios;
use super::{max_abs_diff, stream, BoundaryStrategy, DecayReport, DepthResult, ExperimentConfig, ADVERSARIAL_SWEEPS};
use crate::bounds::ContractionMode;
use crate::error::{PottsError, Result};
use crate::params::PottsParams;
use crate::tree::random::instance_rng;
use crate::tree::{complete_tree_iterate, BoundaryCondition, RatioVector, RootedTree};

/// Discrepancy between the all-color-0 and all-color-1 boundaries on the
/// level at distance `depth` of the complete `d`-ary tree, by level iteration.
pub fn wsm_symmetric_discrepancy(params: &PottsParams, depth: usize) -> Result<f64> {
    let q = params.q();
    let a = complete_tree_iterate(params, &RatioVector::basis(q, 0), depth)?;
    let b = complete_tree_iterate(params, &RatioVector::basis(q, 1), depth)?;
    Ok(max_abs_diff(&a.marginals(), &b.marginals()))
}

fn complete_size(d: usize, depth: usize) -> Option<u128> {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..=depth {
        total = total.checked_add(level)?;
        level = level.checked_mul(d as u128)?;
    }
    Some(total)
}

pub(crate) fn complete_tree_capped(d: usize, depth: usize, cap: usize) -> Result<RootedTree> {
    let needed = complete_size(d, depth).unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(PottsError::TreeTooLarge { needed, cap });
    }
    Ok(RootedTree::complete(d, depth))
}

struct LevelPair<'a> {
    tree: &'a RootedTree,
    level: &'a [usize],
    params: &'a PottsParams,
}

impl LevelPair<'_> {
    fn boundary(&self, colors: &[usize]) -> BoundaryCondition {
        let mut bc = BoundaryCondition::free(self.tree.vertex_count(), self.params.q());
        for (&v, &c) in self.level.iter().zip(colors) {
            bc.fix(v, c).expect("color in range");
        }
        bc
    }

    /// `None` when either boundary admits no coloring of positive weight.
    fn random_pair(&self, index: u64, seed: u64) -> Result<Option<(IncrementalRatios<'_>, IncrementalRatios<'_>)>> {
        let mut rng = instance_rng(seed, index);
        let q = self.params.q();
        let mut side = || -> Result<Option<IncrementalRatios<'_>>> {
            let colors: Vec<usize> = self.level.iter().map(|_| rng.gen_range(0..q)).collect();
            match IncrementalRatios::new(self.tree, self.boundary(&colors), self.params) {
                Ok(r) => Ok(Some(r)),
                Err(PottsError::Precondition(_)) => Ok(None),
                Err(e) => Err(e),
            }
        };
        let a = side()?;
        let b = side()?;
        Ok(a.zip(b))
    }

    /// Coordinate ascent over single boundary-vertex recolorings of either
    /// side, keeping a move only when it strictly increases the discrepancy.
    fn adversarial(&self, a: IncrementalRatios<'_>, b: IncrementalRatios<'_>) -> f64 {
        let q = self.params.q();
        let mut sides = [a, b];
        let mut best = max_abs_diff(&sides[0].root_marginals(), &sides[1].root_marginals());
        for _ in 0..ADVERSARIAL_SWEEPS {
            let mut improved = false;
            for s in 0..2 {
                for &v in self.level {
                    for c in 0..q {
                        let old = sides[s].boundary().color(v).expect("boundary vertex");
                        if c == old || !sides[s].recolor(v, c) {
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
        best
    }
}

pub fn run_wsm_experiment(cfg: &ExperimentConfig) -> Result<DecayReport> {
    cfg.require_mode(ContractionMode::Wsm)?;
    let params = &cfg.params;
    let mut per_depth = Vec::with_capacity(cfg.depths.len());
    let mut anomalies = Vec::new();
    for &depth in &cfg.depths {
        let result = match cfg.strategy {
            BoundaryStrategy::AllOneColorPair => {
                DepthResult { depth, max_discrepancy: wsm_symmetric_discrepancy(params, depth)?, n_instances: 1 }
            }
            strategy => {
                let tree = complete_tree_capped(params.d(), depth, cfg.max_vertices)?;
                let level_size = params.d().pow(depth as u32);
                let first = tree.vertex_count() - level_size;
                let level: Vec<usize> = (first..tree.vertex_count()).collect();
                let pair = LevelPair { tree: &tree, level: &level, params };
                let values = (0..cfg.instances_per_depth)
                    .into_par_iter()
                    .map(|i| -> Result<Option<f64>> {
                        let Some((a, b)) = pair.random_pair(stream(depth, i), cfg.seed)? else {
                            return Ok(None);
                        };
                        Ok(Some(match strategy {
                            BoundaryStrategy::AdversarialSearch => pair.adversarial(a, b),
                            _ => max_abs_diff(&a.root_marginals(), &b.root_marginals()),
                        }))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let feasible: Vec<f64> = values.iter().flatten().copied().collect();
                let skipped = values.len() - feasible.len();
                if skipped > 0 {
                    anomalies
                        .push(format!("depth {depth}: {skipped} boundary pairs admit no coloring of positive weight"));
                }
                DepthResult {
                    depth,
                    max_discrepancy: feasible.iter().copied().fold(0.0, f64::max),
                    n_instances: feasible.len(),
                }
            }
        };
        per_depth.push(result);
    }
    if cfg.strategy == BoundaryStrategy::AllOneColorPair {
        for p in per_depth.windows(2) {
            if p[0].depth >= 2 && p[1].max_discrepancy > p[0].max_discrepancy + 1e-12 {
                anomalies.push(format!(
                    "discrepancy grows from depth {} to {}: {:e} -> {:e}",
                    p[0].depth, p[1].depth, p[0].max_discrepancy, p[1].max_discrepancy
                ));
            }
        }
    }
    Ok(DecayReport::assemble(cfg, per_depth, anomalies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::alpha_wsm;
    use crate::experiments::root_discrepancy;

    fn cfg(params: PottsParams, depths: Vec<usize>) -> ExperimentConfig {
        ExperimentConfig::new(params, ContractionMode::Wsm, depths)
    }

    #[test]
    fn unit_weight_is_degenerate() {
        let r = run_wsm_experiment(&cfg(PottsParams::new(3, 1.0, 4).unwrap(), (1..=6).collect())).unwrap();
        assert!(r.per_depth.iter().all(|p| p.max_discrepancy == 0.0));
        assert!(r.degenerate_fit);
        assert_eq!(r.fitted_rate, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn iteration_matches_explicit_trees() {
        for q in [2, 3, 4] {
            for d in [2, 3] {
                for w in [0.0, 0.3, 0.8] {
                    let params = PottsParams::new(q, w, d).unwrap();
                    for depth in 1..=4 {
                        let tree = RootedTree::complete(d, depth);
                        let n = tree.vertex_count();
                        let level: Vec<usize> = (n - d.pow(depth as u32)..n).collect();
                        let pair = LevelPair { tree: &tree, level: &level, params: &params };
                        let tau = pair.boundary(&vec![0; level.len()]);
                        let tau_prime = pair.boundary(&vec![1; level.len()]);
                        let explicit = root_discrepancy(&tree, &tau, &tau_prime, &params).unwrap();
                        let iterated = wsm_symmetric_discrepancy(&params, depth).unwrap();
                        assert!((explicit - iterated).abs() < 1e-10, "q={q} d={d} w={w} t={depth}");
                    }
                }
            }
        }
    }

    #[test]
    fn threshold_run_decays_below_target() {
        let base = PottsParams::new(3, 0.5, 29).unwrap();
        let params = PottsParams::from_alpha(3, 29, alpha_wsm(&base).unwrap().alpha).unwrap();
        let r = run_wsm_experiment(&cfg(params, (1..=40).collect())).unwrap();
        assert!(r.strictly_decreasing);
        assert!(r.fitted_rate > 0.0 && r.fitted_rate <= 30.0 / 31.0 + 0.01);
        assert!(r.pass && !r.probe && !r.degenerate_fit);
        assert!(r.anomalies.is_empty());
    }

    #[test]
    fn small_degree_above_conjectured_threshold() {
        let r = run_wsm_experiment(&cfg(PottsParams::new(3, 0.9, 3).unwrap(), (1..=10).collect())).unwrap();
        assert!(r.strictly_decreasing);
        assert!(r.probe);
        assert!(r.fitted_rate < 1.0);
    }

    #[test]
    fn adversarial_dominates_random_pairs() {
        let params = PottsParams::new(3, 0.6, 2).unwrap();
        let mut c = cfg(params, (1..=5).collect());
        c.instances_per_depth = 6;
        c.seed = 5;
        c.strategy = BoundaryStrategy::RandomPair;
        let random = run_wsm_experiment(&c).unwrap();
        c.strategy = BoundaryStrategy::AdversarialSearch;
        let adversarial = run_wsm_experiment(&c).unwrap();
        for (r, a) in random.per_depth.iter().zip(&adversarial.per_depth) {
            assert!(a.max_discrepancy >= r.max_discrepancy);
            assert_eq!(r.n_instances, 6);
        }
    }

    #[test]
    fn mixed_pair_beats_one_color_pair() {
        // depth 1, d = 2: (0,0) vs (1,2) separates the root marginals more than (0,0) vs (1,1)
        let params = PottsParams::new(3, 0.6, 2).unwrap();
        let tree = RootedTree::star(2);
        let level = [1, 2];
        let pair = LevelPair { tree: &tree, level: &level, params: &params };
        let mono = root_discrepancy(&tree, &pair.boundary(&[0, 0]), &pair.boundary(&[1, 1]), &params).unwrap();
        let mixed = root_discrepancy(&tree, &pair.boundary(&[0, 0]), &pair.boundary(&[1, 2]), &params).unwrap();
        assert!((mono - 0.64 / 2.36).abs() < 1e-15);
        assert!((mixed - (1.0 / 2.2 - 0.36 / 2.36)).abs() < 1e-15);
        assert!(mixed > mono);
    }

    #[test]
    fn deterministic() {
        let mut c = cfg(PottsParams::new(4, 0.5, 3).unwrap(), (1..=4).collect());
        c.strategy = BoundaryStrategy::RandomPair;
        c.instances_per_depth = 20;
        c.seed = 99;
        let a = serde_json::to_string(&run_wsm_experiment(&c).unwrap()).unwrap();
        let b = serde_json::to_string(&run_wsm_experiment(&c).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn explicit_trees_are_capped() {
        let mut c = cfg(PottsParams::new(3, 0.9, 29).unwrap(), vec![1, 8]);
        c.strategy = BoundaryStrategy::RandomPair;
        assert!(matches!(run_wsm_experiment(&c), Err(PottsError::TreeTooLarge { .. })));
        c.strategy = BoundaryStrategy::AllOneColorPair;
        c.depths = vec![1, 400];
        assert!(run_wsm_experiment(&c).is_ok());
    }

    #[test]
    fn wrong_mode_is_rejected() {
        let c = ExperimentConfig::new(PottsParams::new(3, 0.9, 3).unwrap(), ContractionMode::Ssm, vec![1]);
        assert!(run_wsm_experiment(&c).is_err());
    }
}
