//! Tree and boundary-condition data model, the brute-force oracle and the
//! exact dynamic program for ratio vectors and marginals.

mod brute;
mod dp;
pub mod io;
pub mod random;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};

pub use brute::{
    brute_force_marginal, brute_force_marginals, brute_force_partition, MonochromeHistogram, FREE_VERTEX_CAP,
};
pub use dp::{
    complete_tree_iterate, marginals_dp, ratio_vector_dp, root_marginals_dp, subtree_ratios, subtree_sqrt_ratios,
};

/// A finite rooted tree on vertices `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl RootedTree {
    /// Builds a tree from `(parent, child)` edges. The edges must form a
    /// single tree on `0..vertex_count` with every non-root vertex having
    /// exactly one parent.
    pub fn from_edges(vertex_count: usize, root: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(PottsError::InvalidTree("tree must have at least one vertex".into()));
        }
        if root >= vertex_count {
            return Err(PottsError::VertexOutOfRange { vertex: root, count: vertex_count });
        }
        if edges.len() != vertex_count - 1 {
            return Err(PottsError::InvalidTree(format!(
                "{} edges given, a tree on {vertex_count} vertices has {}",
                edges.len(),
                vertex_count - 1
            )));
        }
        let mut parent = vec![None; vertex_count];
        let mut children = vec![Vec::new(); vertex_count];
        for &(p, c) in edges {
            for v in [p, c] {
                if v >= vertex_count {
                    return Err(PottsError::VertexOutOfRange { vertex: v, count: vertex_count });
                }
            }
            if p == c {
                return Err(PottsError::InvalidTree(format!("self-loop at vertex {p}")));
            }
            if c == root {
                return Err(PottsError::InvalidTree(format!("root {root} cannot be a child")));
            }
            if parent[c].is_some() {
                return Err(PottsError::InvalidTree(format!("vertex {c} has two parents")));
            }
            parent[c] = Some(p);
            children[p].push(c);
        }
        let tree = Self { root, parent, children };
        let reached = tree.bfs_order().len();
        if reached != vertex_count {
            return Err(PottsError::InvalidTree(format!(
                "only {reached} of {vertex_count} vertices are reachable from the root"
            )));
        }
        Ok(tree)
    }

    /// Builds a tree from a parent array; exactly one entry must be `None`.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self> {
        let roots: Vec<usize> = (0..parents.len()).filter(|&v| parents[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(PottsError::InvalidTree(format!("expected exactly one root, found {}", roots.len())));
        }
        let edges: Vec<(usize, usize)> = parents.iter().enumerate().filter_map(|(c, p)| p.map(|p| (p, c))).collect();
        Self::from_edges(parents.len(), roots[0], &edges)
    }

    pub fn single_vertex() -> Self {
        Self { root: 0, parent: vec![None], children: vec![Vec::new()] }
    }

    /// Root `0` with `leaves` children `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|c| (0, c)).collect();
        Self::from_edges(leaves + 1, 0, &edges).expect("star is a tree")
    }

    /// Path `0 - 1 - ... - len` rooted at `0`.
    pub fn path(len: usize) -> Self {
        let edges: Vec<_> = (1..=len).map(|c| (c - 1, c)).collect();
        Self::from_edges(len + 1, 0, &edges).expect("path is a tree")
    }

    /// Complete `branching`-ary tree of the given height in BFS numbering.
    pub fn complete(branching: usize, height: usize) -> Self {
        let mut parents = vec![None];
        let mut level: Vec<usize> = vec![0];
        for _ in 0..height {
            let mut next = Vec::with_capacity(level.len() * branching);
            for &p in &level {
                for _ in 0..branching {
                    next.push(parents.len());
                    parents.push(Some(p));
                }
            }
            level = next;
        }
        Self::from_parents(&parents).expect("complete tree is a tree")
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.children[v].len() + usize::from(self.parent[v].is_some())
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.parent[v].into_iter().chain(self.children[v].iter().copied())
    }

    /// `(parent, child)` edge list.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.vertex_count()).filter_map(|c| self.parent[c].map(|p| (p, c))).collect()
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.vertex_count() {
            return Err(PottsError::VertexOutOfRange { vertex: v, count: self.vertex_count() });
        }
        Ok(())
    }

    /// Vertices in breadth-first order from the root.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.vertex_count());
        let mut queue = VecDeque::from([self.root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            queue.extend(self.children[v].iter().copied());
        }
        order
    }

    /// Breadth-first order and parent map of the tree re-rooted at `v`.
    pub fn bfs_from(&self, v: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let n = self.vertex_count();
        let mut order = Vec::with_capacity(n);
        let mut up = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([v]);
        seen[v] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for x in self.neighbors(u) {
                if !seen[x] {
                    seen[x] = true;
                    up[x] = Some(u);
                    queue.push_back(x);
                }
            }
        }
        (order, up)
    }

    /// Distance from the root for every vertex.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.vertex_count()];
        for v in self.bfs_order() {
            if let Some(p) = self.parent[v] {
                depth[v] = depth[p] + 1;
            }
        }
        depth
    }

    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Root has at most `d` children, every other vertex at most `d` children
    /// (so degree at most `d + 1`).
    pub fn check_degree_bound(&self, d: usize) -> Result<()> {
        for v in 0..self.vertex_count() {
            let children = self.children[v].len();
            if children > d {
                return Err(PottsError::DegreeBound { vertex: v, children, max: d });
            }
        }
        Ok(())
    }

    pub fn max_children(&self) -> usize {
        self.children.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// A partial coloring of a tree's vertices with colors `0..q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    q: usize,
    colors: Vec<Option<usize>>,
}

impl BoundaryCondition {
    /// All vertices free.
    pub fn free(vertex_count: usize, q: usize) -> Self {
        Self { q, colors: vec![None; vertex_count] }
    }

    pub fn from_pairs(vertex_count: usize, q: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut bc = Self::free(vertex_count, q);
        for &(v, c) in pairs {
            bc.fix(v, c)?;
        }
        Ok(bc)
    }

    pub fn fix(&mut self, v: usize, color: usize) -> Result<()> {
        if v >= self.colors.len() {
            return Err(PottsError::VertexOutOfRange { vertex: v, count: self.colors.len() });
        }
        if color >= self.q {
            return Err(PottsError::ColorOutOfRange { color, q: self.q });
        }
        self.colors[v] = Some(color);
        Ok(())
    }

    pub fn unfix(&mut self, v: usize) {
        self.colors[v] = None;
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn vertex_count(&self) -> usize {
        self.colors.len()
    }

    pub fn color(&self, v: usize) -> Option<usize> {
        self.colors[v]
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.colors[v].is_none()
    }

    /// Assigned `(vertex, color)` pairs in vertex order.
    pub fn assigned(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.colors.iter().enumerate().filter_map(|(v, c)| c.map(|c| (v, c)))
    }

    pub fn free_vertices(&self) -> Vec<usize> {
        (0..self.colors.len()).filter(|&v| self.colors[v].is_none()).collect()
    }

    pub fn fixed_count(&self) -> usize {
        self.colors.iter().filter(|c| c.is_some()).count()
    }

    /// Relabels every assigned color `c` as `perm[c]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self { q: self.q, colors: self.colors.iter().map(|c| c.map(|c| perm[c])).collect() }
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        self.colors.len() == other.colors.len()
            && self.colors.iter().zip(&other.colors).all(|(a, b)| a.is_some() == b.is_some())
    }

    /// Vertices where both conditions assign a color and the colors differ.
    pub fn disagreement(&self, other: &Self) -> Vec<usize> {
        self.colors
            .iter()
            .zip(&other.colors)
            .enumerate()
            .filter_map(|(v, (a, b))| match (a, b) {
                (Some(a), Some(b)) if a != b => Some(v),
                _ => None,
            })
            .collect()
    }

    pub(crate) fn check_against(&self, tree: &RootedTree, q: usize) -> Result<()> {
        if self.colors.len() != tree.vertex_count() {
            return Err(PottsError::InvalidParams(format!(
                "boundary condition covers {} vertices, tree has {}",
                self.colors.len(),
                tree.vertex_count()
            )));
        }
        if self.q != q {
            return Err(PottsError::InvalidParams(format!(
                "boundary condition uses q = {}, parameters use q = {q}",
                self.q
            )));
        }
        Ok(())
    }
}

fn validate_unit_entries(entries: &[f64], what: &str) -> Result<()> {
    if entries.is_empty() {
        return Err(PottsError::InvalidVector(format!("{what} must be non-empty")));
    }
    if entries.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > 1.0) {
        return Err(PottsError::InvalidVector(format!("{what} entries must lie in [0, 1]")));
    }
    if entries.iter().all(|&x| x == 0.0) {
        return Err(PottsError::InvalidVector(format!("{what} must be non-zero")));
    }
    Ok(())
}

/// Per-color ratios `Z^i_{T,v} / Z_{T-v}` at a vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioVector(Vec<f64>);

impl RatioVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        validate_unit_entries(&entries, "ratio vector")?;
        Ok(Self(entries))
    }

    pub fn ones(q: usize) -> Self {
        Self(vec![1.0; q])
    }

    /// Ratio vector of a vertex fixed to `color`.
    pub fn basis(q: usize, color: usize) -> Self {
        let mut e = vec![0.0; q];
        e[color] = 1.0;
        Self(e)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn q(&self) -> usize {
        self.0.len()
    }

    /// Normalized ratios: the marginal distribution of the vertex.
    pub fn marginals(&self) -> Vec<f64> {
        let total: f64 = self.0.iter().sum();
        self.0.iter().map(|r| r / total).collect()
    }

    pub fn sqrt(&self) -> SqrtRatioVector {
        SqrtRatioVector(self.0.iter().map(|r| r.sqrt()).collect())
    }
}

/// Entrywise square root of a [`RatioVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtRatioVector(Vec<f64>);

impl SqrtRatioVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        validate_unit_entries(&entries, "square-root ratio vector")?;
        Ok(Self(entries))
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn q(&self) -> usize {
        self.0.len()
    }

    pub fn square(&self) -> RatioVector {
        RatioVector(self.0.iter().map(|x| x * x).collect())
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }
}

impl std::ops::Deref for SqrtRatioVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}
