//! Exhaustive enumeration of colorings. Used as the independent oracle for
//! the dynamic program, so it shares no code with it beyond the data model.

use super::{BoundaryCondition, RootedTree};
use crate::error::{PottsError, Result};
use crate::params::PottsParams;

/// Maximum number of free vertices the enumerator accepts.
pub const FREE_VERTEX_CAP: usize = 16;

/// Number of colorings extending a boundary condition, bucketed by the color
/// of a target vertex and by the number of monochromatic edges.
///
/// Counts are exact integers, so the partition function can be evaluated for
/// any `w` afterwards without re-enumerating.
#[derive(Debug, Clone)]
pub struct MonochromeHistogram {
    counts: Vec<Vec<u64>>,
}

impl MonochromeHistogram {
    pub fn enumerate(tree: &RootedTree, bc: &BoundaryCondition, target: usize) -> Result<Self> {
        tree.check_vertex(target)?;
        if bc.vertex_count() != tree.vertex_count() {
            return Err(PottsError::InvalidParams("boundary condition and tree sizes differ".into()));
        }
        let q = bc.q();
        let free = bc.free_vertices();
        if free.len() > FREE_VERTEX_CAP {
            return Err(PottsError::TooManyFreeVertices { free: free.len(), cap: FREE_VERTEX_CAP });
        }
        let edges = tree.edges();
        let mut coloring: Vec<usize> = (0..tree.vertex_count()).map(|v| bc.color(v).unwrap_or(0)).collect();
        let mut counts = vec![vec![0u64; edges.len() + 1]; q];

        loop {
            let mono = edges.iter().filter(|&&(a, b)| coloring[a] == coloring[b]).count();
            counts[coloring[target]][mono] += 1;

            // odometer over the free vertices
            let mut k = 0;
            loop {
                if k == free.len() {
                    return Ok(Self { counts });
                }
                let v = free[k];
                coloring[v] += 1;
                if coloring[v] < q {
                    break;
                }
                coloring[v] = 0;
                k += 1;
            }
        }
    }

    /// Weighted count of colorings giving the target `color`.
    pub fn restricted(&self, color: usize, w: f64) -> f64 {
        neumaier_sum(self.counts[color].iter().enumerate().map(|(m, &c)| c as f64 * w.powi(m as i32)))
    }

    pub fn partition(&self, w: f64) -> f64 {
        neumaier_sum((0..self.counts.len()).map(|c| self.restricted(c, w)))
    }

    pub fn marginals(&self, w: f64) -> Vec<f64> {
        let per_color: Vec<f64> = (0..self.counts.len()).map(|c| self.restricted(c, w)).collect();
        let z = neumaier_sum(per_color.iter().copied());
        per_color.into_iter().map(|x| x / z).collect()
    }

    /// Total number of colorings enumerated.
    pub fn colorings(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_inputs(tree: &RootedTree, bc: &BoundaryCondition, params: &PottsParams) -> Result<()> {
    bc.check_against(tree, params.q())
}

/// `Z_T(w)`: sum over colorings extending `bc` of `w^(monochromatic edges)`.
pub fn brute_force_partition(tree: &RootedTree, bc: &BoundaryCondition, params: &PottsParams) -> Result<f64> {
    check_inputs(tree, bc, params)?;
    Ok(MonochromeHistogram::enumerate(tree, bc, tree.root())?.partition(params.w()))
}

/// Probability that free vertex `v` receives `color`.
pub fn brute_force_marginal(
    tree: &RootedTree,
    bc: &BoundaryCondition,
    params: &PottsParams,
    v: usize,
    color: usize,
) -> Result<f64> {
    if color >= params.q() {
        return Err(PottsError::ColorOutOfRange { color, q: params.q() });
    }
    Ok(brute_force_marginals(tree, bc, params, v)?[color])
}

/// Full marginal distribution of free vertex `v`.
pub fn brute_force_marginals(
    tree: &RootedTree,
    bc: &BoundaryCondition,
    params: &PottsParams,
    v: usize,
) -> Result<Vec<f64>> {
    check_inputs(tree, bc, params)?;
    tree.check_vertex(v)?;
    if !bc.is_free(v) {
        return Err(PottsError::FixedVertex(v));
    }
    Ok(MonochromeHistogram::enumerate(tree, bc, v)?.marginals(params.w()))
}
