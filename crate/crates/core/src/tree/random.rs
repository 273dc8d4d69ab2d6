//! Seeded generators for trees and boundary conditions.
//!
//! Trees are grown by random parent attachment: vertex `k` picks its parent
//! uniformly among `0..k` restricted to vertices that still have fewer than
//! `d` children. Vertex `0` is the root. The same seed always yields the same
//! instance sequence.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundaryCondition, RootedTree};

/// Deterministic per-instance generator: one ChaCha stream per index.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random rooted tree on `n` vertices where every vertex has at most
/// `max_children` children.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize, max_children: usize) -> RootedTree {
    assert!(n >= 1, "tree needs a vertex");
    assert!(max_children >= 1 || n == 1, "cannot attach vertices");
    let mut parents = vec![None];
    let mut child_count = vec![0usize];
    let mut open: Vec<usize> = vec![0];
    for k in 1..n {
        let slot = rng.gen_range(0..open.len());
        let p = open[slot];
        parents.push(Some(p));
        child_count[p] += 1;
        if child_count[p] == max_children {
            open.swap_remove(slot);
        }
        child_count.push(0);
        open.push(k);
    }
    RootedTree::from_parents(&parents).expect("generator builds a tree")
}

/// Fixes each non-root vertex independently with probability `p_fixed` to a
/// uniform color. The root is always left free.
pub fn random_boundary<R: Rng + ?Sized>(rng: &mut R, tree: &RootedTree, q: usize, p_fixed: f64) -> BoundaryCondition {
    let mut bc = BoundaryCondition::free(tree.vertex_count(), q);
    for v in 0..tree.vertex_count() {
        if v != tree.root() && rng.gen_bool(p_fixed) {
            bc.fix(v, rng.gen_range(0..q)).expect("color in range");
        }
    }
    bc
}

/// Uniform random permutation of `0..q`.
pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, q: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..q).collect();
    perm.shuffle(rng);
    perm
}
