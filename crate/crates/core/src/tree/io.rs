//! JSON tree + boundary documents.
//!
//! ```json
//! {"q": 3, "w": 0.5, "root": 0, "edges": [[0, 1], [0, 2]], "boundary": {"1": 2}}
//! ```
//!
//! Edges are `[parent, child]` pairs over vertex ids `0..n`; boundary colors
//! are 1-based. An optional `"d"` sets the branching bound, otherwise it is
//! the largest child count in the tree (at least 2).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoundaryCondition, RootedTree};
use crate::error::{PottsError, Result};
use crate::params::PottsParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    pub q: usize,
    pub w: f64,
    pub root: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub boundary: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeInstance {
    pub tree: RootedTree,
    pub boundary: BoundaryCondition,
    pub params: PottsParams,
}

impl TreeDocument {
    pub fn into_instance(self) -> Result<TreeInstance> {
        let n = self.edges.len() + 1;
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let tree = RootedTree::from_edges(n, self.root, &edges)?;
        let d = self.d.unwrap_or_else(|| tree.max_children().max(2));
        let params = PottsParams::new(self.q, self.w, d)?;
        let mut boundary = BoundaryCondition::free(n, self.q);
        for (key, &color) in &self.boundary {
            let v: usize = key
                .trim()
                .parse()
                .map_err(|_| PottsError::Parse(format!("boundary key {key:?} is not a vertex id")))?;
            if color == 0 || color > self.q {
                return Err(PottsError::ColorOutOfRange { color, q: self.q });
            }
            boundary.fix(v, color - 1)?;
        }
        Ok(TreeInstance { tree, boundary, params })
    }

    pub fn from_instance(tree: &RootedTree, bc: &BoundaryCondition, params: &PottsParams) -> Self {
        Self {
            q: params.q(),
            w: params.w(),
            root: tree.root(),
            edges: tree.edges().into_iter().map(|(p, c)| [p, c]).collect(),
            boundary: bc.assigned().map(|(v, c)| (v.to_string(), c + 1)).collect(),
            d: Some(params.d()),
        }
    }
}

pub fn parse_tree_document(text: &str) -> Result<TreeInstance> {
    let doc: TreeDocument = serde_json::from_str(text).map_err(|e| PottsError::Parse(e.to_string()))?;
    doc.into_instance()
}

pub fn load_tree_file(path: impl AsRef<Path>) -> Result<TreeInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| PottsError::Parse(format!("{}: {e}", path.display())))?;
    parse_tree_document(&text)
}
