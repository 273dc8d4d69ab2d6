use crate::error::Result;
use crate::params::PottsParams;
use crate::tree::{subtree_ratios, BoundaryCondition, RootedTree};

/// Subtree ratio vectors that follow single-vertex recolorings in
/// `O(depth · d · q)`: only the path from the recolored vertex to the root
/// is recomputed.
pub(crate) struct IncrementalRatios<'a> {
    tree: &'a RootedTree,
    bc: BoundaryCondition,
    damp: f64,
    ratio: Vec<Vec<f64>>,
}

impl<'a> IncrementalRatios<'a> {
    pub(crate) fn new(tree: &'a RootedTree, bc: BoundaryCondition, params: &PottsParams) -> Result<Self> {
        let ratio = subtree_ratios(tree, &bc, params)?.into_iter().map(|r| r.into_vec()).collect();
        Ok(Self { tree, bc, damp: 1.0 - params.w(), ratio })
    }

    pub(crate) fn boundary(&self) -> &BoundaryCondition {
        &self.bc
    }

    /// Fixes `v` to `color` and updates its ancestors. Returns `false` and
    /// leaves the state untouched when some ancestor would get a zero ratio
    /// vector (no coloring of positive weight).
    pub(crate) fn recolor(&mut self, v: usize, color: usize) -> bool {
        let q = self.bc.q();
        let mut updates: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut basis = vec![0.0; q];
        basis[color] = 1.0;
        updates.push((v, basis));
        let mut child = v;
        while let Some(p) = self.tree.parent(child) {
            if !self.bc.is_free(p) {
                break;
            }
            let mut next = vec![1.0; q];
            for &c in self.tree.children(p) {
                let r = if c == child { &updates.last().unwrap().1 } else { &self.ratio[c] };
                let total: f64 = r.iter().sum();
                if total <= 0.0 {
                    return false;
                }
                for (n, x) in next.iter_mut().zip(r) {
                    *n *= 1.0 - self.damp * x / total;
                }
            }
            updates.push((p, next));
            child = p;
        }
        if updates.last().unwrap().1.iter().sum::<f64>() <= 0.0 {
            return false;
        }
        self.bc.fix(v, color).expect("color in range");
        for (u, r) in updates {
            self.ratio[u] = r;
        }
        true
    }

    pub(crate) fn root_marginals(&self) -> Vec<f64> {
        let r = &self.ratio[self.tree.root()];
        let total: f64 = r.iter().sum();
        r.iter().map(|x| x / total).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::random::{instance_rng, random_boundary, random_tree};
    use crate::tree::root_marginals_dp;
    use rand::Rng;

    #[test]
    fn tracks_full_recomputation() {
        for index in 0..50 {
            let mut rng = instance_rng(3, index);
            let q = rng.gen_range(2..=4);
            let params = PottsParams::new(q, rng.gen_range(0.05..=1.0), 3).unwrap();
            let n = rng.gen_range(2..=20);
            let tree = random_tree(&mut rng, n, 3);
            let bc = random_boundary(&mut rng, &tree, q, 0.3);
            let mut inc = IncrementalRatios::new(&tree, bc, &params).unwrap();
            for _ in 0..10 {
                let v = rng.gen_range(1..tree.vertex_count());
                if inc.recolor(v, rng.gen_range(0..q)) {
                    let full = root_marginals_dp(&tree, inc.boundary(), &params).unwrap();
                    for (a, b) in inc.root_marginals().iter().zip(&full) {
                        assert!((a - b).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn refuses_infeasible_recoloring() {
        // q = 2, w = 0: root between leaves of both colors has no proper coloring
        let tree = RootedTree::star(2);
        let bc = BoundaryCondition::from_pairs(3, 2, &[(1, 0), (2, 0)]).unwrap();
        let params = PottsParams::new(2, 0.0, 2).unwrap();
        let mut inc = IncrementalRatios::new(&tree, bc, &params).unwrap();
        assert!(!inc.recolor(2, 1));
        assert_eq!(inc.boundary().color(2), Some(0));
        assert_eq!(inc.root_marginals(), vec![0.0, 1.0]);
    }
}
