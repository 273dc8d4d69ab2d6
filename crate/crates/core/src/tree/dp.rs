use super::{BoundaryCondition, RatioVector, RootedTree, SqrtRatioVector};
use crate::error::{PottsError, Result};
use crate::params::PottsParams;

fn validate(tree: &RootedTree, bc: &BoundaryCondition, params: &PottsParams) -> Result<()> {
    bc.check_against(tree, params.q())?;
    tree.check_degree_bound(params.d())
}

/// Ratio vectors of every vertex in the orientation rooted at `top`; entry
/// `u` is the ratio vector of `u` in the subtree hanging below it.
fn oriented_ratios(
    tree: &RootedTree,
    bc: &BoundaryCondition,
    params: &PottsParams,
    top: usize,
) -> Result<Vec<Vec<f64>>> {
    let q = params.q();
    let damp = 1.0 - params.w();
    let (order, up) = tree.bfs_from(top);
    let mut ratio = vec![vec![1.0; q]; tree.vertex_count()];

    // reverse BFS visits every child before its parent
    for &u in order.iter().rev() {
        if let Some(c) = bc.color(u) {
            ratio[u].iter_mut().for_each(|x| *x = 0.0);
            ratio[u][c] = 1.0;
        }
        let Some(p) = up[u] else { continue };
        let total: f64 = ratio[u].iter().sum();
        if total <= 0.0 {
            return Err(PottsError::Precondition(format!(
                "boundary condition admits no coloring of positive weight below vertex {u}"
            )));
        }
        if let Some(c) = bc.color(p) {
            // the edge only scales Z, unless it forces Z = 0
            if 1.0 - damp * ratio[u][c] / total <= 0.0 {
                return Err(PottsError::Precondition(format!(
                    "boundary condition admits no coloring of positive weight across edge {p}-{u}"
                )));
            }
            continue;
        }
        for i in 0..q {
            let marginal = ratio[u][i] / total;
            ratio[p][i] *= 1.0 - damp * marginal;
        }
    }
    Ok(ratio)
}

/// Ratio vector of every vertex within its own subtree (the component of
/// `T - parent(u)` containing `u`), oriented from the tree's root.
pub fn subtree_ratios(tree: &RootedTree, bc: &BoundaryCondition, params: &PottsParams) -> Result<Vec<RatioVector>> {
    validate(tree, bc, params)?;
    oriented_ratios(tree, bc, params, tree.root())?.into_iter().map(RatioVector::new).collect()
}

pub fn subtree_sqrt_ratios(
    tree: &RootedTree,
    bc: &BoundaryCondition,
    params: &PottsParams,
) -> Result<Vec<SqrtRatioVector>> {
    Ok(subtree_ratios(tree, bc, params)?.iter().map(RatioVector::sqrt).collect())
}

/// `R̃_{T,v}`, computed bottom-up from the tree re-rooted at `v`.
///
/// A vertex fixed to color `c` yields the basis vector `e_c`.
pub fn ratio_vector_dp(
    tree: &RootedTree,
    bc: &BoundaryCondition,
    params: &PottsParams,
    v: usize,
) -> Result<RatioVector> {
    validate(tree, bc, params)?;
    tree.check_vertex(v)?;
    if let Some(c) = bc.color(v) {
        return Ok(RatioVector::basis(params.q(), c));
    }
    let mut all = oriented_ratios(tree, bc, params, v)?;
    RatioVector::new(std::mem::take(&mut all[v])).map_err(|_| {
        PottsError::Precondition(format!("boundary condition admits no coloring of positive weight at vertex {v}"))
    })
}

/// Marginal distribution of a free vertex.
pub fn marginals_dp(tree: &RootedTree, bc: &BoundaryCondition, params: &PottsParams, v: usize) -> Result<Vec<f64>> {
    tree.check_vertex(v)?;
    if !bc.is_free(v) {
        return Err(PottsError::FixedVertex(v));
    }
    Ok(ratio_vector_dp(tree, bc, params, v)?.marginals())
}

pub fn root_marginals_dp(tree: &RootedTree, bc: &BoundaryCondition, params: &PottsParams) -> Result<Vec<f64>> {
    marginals_dp(tree, bc, params, tree.root())
}

/// Root ratio vector of the complete `d`-ary tree of the given height whose
/// leaves all carry `leaf_ratio`. Every vertex on a level shares one ratio
/// vector, so each level costs `O(q)`.
pub fn complete_tree_iterate(params: &PottsParams, leaf_ratio: &RatioVector, height: usize) -> Result<RatioVector> {
    if leaf_ratio.q() != params.q() {
        return Err(PottsError::InvalidVector(format!(
            "leaf ratio has {} entries, q = {}",
            leaf_ratio.q(),
            params.q()
        )));
    }
    let damp = 1.0 - params.w();
    let d = params.d() as i32;
    let mut current = leaf_ratio.as_slice().to_vec();
    for _ in 0..height {
        let total: f64 = current.iter().sum();
        if total <= 0.0 {
            return Err(PottsError::Precondition("level ratio vanished".into()));
        }
        for x in current.iter_mut() {
            *x = (1.0 - damp * (*x / total)).powi(d);
        }
    }
    RatioVector::new(current)
}
