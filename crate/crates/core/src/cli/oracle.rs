use std::path::PathBuf;

use clap::Args;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::{fmt_f64, to_csv, to_json, OutputSet};
use super::{read_config, CliError, CommonArgs, EXIT_PASS, EXIT_VIOLATION};
use crate::error::{PottsError, Result};
use crate::params::PottsParams;
use crate::tree::io::load_tree_file;
use crate::tree::random::{instance_rng, random_boundary, random_tree};
use crate::tree::{root_marginals_dp, BoundaryCondition, MonochromeHistogram, RootedTree, FREE_VERTEX_CAP};

pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Number of random trees.
    #[arg(long)]
    pub trees: Option<usize>,
    /// Largest random tree; at most 16.
    #[arg(long)]
    pub max_vertices: Option<usize>,
    /// Color counts, cycled over trees.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<usize>>,
    /// Edge weights evaluated on every boundary condition.
    #[arg(long, value_delimiter = ',')]
    pub w: Option<Vec<f64>>,
    /// Boundary conditions per tree.
    #[arg(long)]
    pub boundaries: Option<usize>,
    /// Check a single tree document instead of the random sweep.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub trees: usize,
    pub max_vertices: usize,
    pub q: Vec<usize>,
    pub w: Vec<f64>,
    pub boundaries: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            trees: 500,
            max_vertices: 9,
            q: vec![2, 3, 4],
            w: vec![0.0, 0.1, 0.5, 0.9, 1.0],
            boundaries: 10,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_vertices == 0 || self.max_vertices > FREE_VERTEX_CAP {
            return Err(PottsError::InvalidParams(format!(
                "max vertices must lie in 1..={FREE_VERTEX_CAP}, got {}",
                self.max_vertices
            )));
        }
        if self.q.is_empty() || self.w.is_empty() {
            return Err(PottsError::InvalidParams("need at least one q and one w".into()));
        }
        for &q in &self.q {
            PottsParams::new(q, 0.5, 2)?;
        }
        for &w in &self.w {
            PottsParams::new(2, w, 2)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCase {
    pub tree: usize,
    pub boundary: usize,
    pub q: usize,
    pub w: f64,
    pub vertices: usize,
    pub free: usize,
    /// Both methods agree that no coloring has positive weight.
    pub infeasible: bool,
    pub max_rel_err: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub cases: Vec<OracleCase>,
    pub max_rel_err: f64,
    pub exact_matches: usize,
    pub infeasible: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    fn from_cases(cases: Vec<OracleCase>) -> Self {
        let max_rel_err = cases.iter().map(|c| c.max_rel_err).fold(0.0, f64::max);
        let nan = cases.iter().any(|c| c.max_rel_err.is_nan());
        Self {
            exact_matches: cases.iter().filter(|c| c.exact).count(),
            infeasible: cases.iter().filter(|c| c.infeasible).count(),
            max_rel_err: if nan { f64::NAN } else { max_rel_err },
            tolerance: ORACLE_TOLERANCE,
            pass: !nan && max_rel_err <= ORACLE_TOLERANCE,
            cases,
        }
    }
}

/// Largest per-color relative error; `0` where both are exactly equal.
fn relative_error(dp: &[f64], brute: &[f64]) -> f64 {
    dp.iter().zip(brute).map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() / b.abs() }).fold(0.0, f64::max)
}

/// Compares root marginals at every `w` from one enumeration.
fn compare(
    tree: &RootedTree,
    bc: &BoundaryCondition,
    q: usize,
    ws: &[f64],
    ids: (usize, usize),
) -> Result<Vec<OracleCase>> {
    let hist = MonochromeHistogram::enumerate(tree, bc, tree.root())?;
    let d = tree.max_children().max(2);
    ws.iter()
        .map(|&w| {
            let params = PottsParams::new(q, w, d)?;
            let brute_z = hist.partition(w);
            let (infeasible, err, exact) = match root_marginals_dp(tree, bc, &params) {
                Ok(_) if brute_z == 0.0 => (false, f64::INFINITY, false),
                Err(_) if brute_z == 0.0 => (true, 0.0, true),
                Err(_) => (false, f64::INFINITY, false),
                Ok(dp) => {
                    let brute = hist.marginals(w);
                    (false, relative_error(&dp, &brute), dp == brute)
                }
            };
            Ok(OracleCase {
                tree: ids.0,
                boundary: ids.1,
                q,
                w,
                vertices: tree.vertex_count(),
                free: bc.free_vertices().len(),
                infeasible,
                max_rel_err: err,
                exact,
            })
        })
        .collect()
}

/// Random trees with up to `max_vertices` vertices and at most 3 children
/// per vertex; `q` cycles through the configured list.
pub fn oracle_sweep(cfg: &OracleConfig) -> Result<OracleReport> {
    cfg.validate()?;
    let per_tree = (0..cfg.trees)
        .into_par_iter()
        .map(|t| -> Result<Vec<OracleCase>> {
            let mut rng = instance_rng(cfg.seed, t as u64);
            let q = cfg.q[t % cfg.q.len()];
            let n = rng.gen_range(1..=cfg.max_vertices);
            let tree = random_tree(&mut rng, n, 3);
            let mut cases = Vec::new();
            for b in 0..cfg.boundaries {
                let p_fixed = rng.gen_range(0.0..0.7);
                let bc = random_boundary(&mut rng, &tree, q, p_fixed);
                cases.extend(compare(&tree, &bc, q, &cfg.w, (t, b))?);
            }
            Ok(cases)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport::from_cases(per_tree.into_iter().flatten().collect()))
}

/// Checks one tree document at its own `q` and `w`.
pub fn oracle_single(path: &std::path::Path) -> Result<OracleReport> {
    let inst = load_tree_file(path)?;
    if !inst.boundary.is_free(inst.tree.root()) {
        return Err(PottsError::FixedVertex(inst.tree.root()));
    }
    let cases = compare(&inst.tree, &inst.boundary, inst.params.q(), &[inst.params.w()], (0, 0))?;
    Ok(OracleReport::from_cases(cases))
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum ResolvedConfig {
    Sweep(OracleConfig),
    Input { input: String },
}

#[derive(Debug, Serialize)]
struct OracleSummary<'a> {
    command: &'static str,
    config: &'a ResolvedConfig,
    cases: usize,
    exact_matches: usize,
    infeasible: usize,
    max_rel_err: f64,
    tolerance: f64,
    pass: bool,
}

const CSV_HEADER: [&str; 9] = ["tree", "boundary", "q", "w", "vertices", "free", "infeasible", "max_rel_err", "exact"];

pub fn run(args: &OracleArgs) -> std::result::Result<i32, CliError> {
    let (config, report, seed) = if let Some(input) = &args.input {
        let report = oracle_single(input)?;
        let name = input.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        (ResolvedConfig::Input { input: name }, report, args.common.seed.unwrap_or(0))
    } else {
        let file: OracleConfig = read_config(&args.common.config)?;
        let cfg = OracleConfig {
            trees: args.trees.unwrap_or(file.trees),
            max_vertices: args.max_vertices.unwrap_or(file.max_vertices),
            q: args.q.clone().unwrap_or(file.q),
            w: args.w.clone().unwrap_or(file.w),
            boundaries: args.boundaries.unwrap_or(file.boundaries),
            seed: args.common.seed.unwrap_or(file.seed),
        };
        let report = oracle_sweep(&cfg)?;
        let seed = cfg.seed;
        (ResolvedConfig::Sweep(cfg), report, seed)
    };
    eprintln!(
        "oracle: {} cases, {} exact, {} infeasible, max relative error {}",
        report.cases.len(),
        report.exact_matches,
        report.infeasible,
        fmt_f64(report.max_rel_err)
    );
    let mut out = OutputSet::new(&args.common.out_dir);
    if args.common.format.csv() {
        let rows: Vec<Vec<String>> = report
            .cases
            .iter()
            .map(|c| {
                vec![
                    c.tree.to_string(),
                    c.boundary.to_string(),
                    c.q.to_string(),
                    fmt_f64(c.w),
                    c.vertices.to_string(),
                    c.free.to_string(),
                    c.infeasible.to_string(),
                    fmt_f64(c.max_rel_err),
                    c.exact.to_string(),
                ]
            })
            .collect();
        out.add("oracle_cases.csv", to_csv(&CSV_HEADER, &rows)?);
    }
    if args.common.format.json() {
        let summary = OracleSummary {
            command: "oracle",
            config: &config,
            cases: report.cases.len(),
            exact_matches: report.exact_matches,
            infeasible: report.infeasible,
            max_rel_err: report.max_rel_err,
            tolerance: report.tolerance,
            pass: report.pass,
        };
        out.add("oracle_summary.json", to_json(&summary)?);
    }
    out.write("oracle", &config, seed)?;
    Ok(if report.pass { EXIT_PASS } else { EXIT_VIOLATION })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_passes() {
        let cfg = OracleConfig { trees: 60, ..OracleConfig::default() };
        let r = oracle_sweep(&cfg).unwrap();
        assert_eq!(r.cases.len(), 60 * 10 * 5);
        assert!(r.pass, "max rel err {}", r.max_rel_err);
    }

    #[test]
    fn unit_weight_is_exact() {
        let cfg = OracleConfig { trees: 30, w: vec![1.0], ..OracleConfig::default() };
        let r = oracle_sweep(&cfg).unwrap();
        assert_eq!(r.exact_matches, r.cases.len());
        assert_eq!(r.max_rel_err, 0.0);
    }

    #[test]
    fn vertex_cap() {
        let cfg = OracleConfig { max_vertices: 20, ..OracleConfig::default() };
        assert!(oracle_sweep(&cfg).is_err());
        let cfg = OracleConfig { max_vertices: 16, trees: 2, boundaries: 1, ..OracleConfig::default() };
        assert!(oracle_sweep(&cfg).is_ok());
    }

    #[test]
    fn relative_error_of_zero_entries() {
        assert_eq!(relative_error(&[0.0, 1.0], &[0.0, 1.0]), 0.0);
        assert!(relative_error(&[1e-20, 1.0], &[0.0, 1.0]).is_infinite());
    }
}
