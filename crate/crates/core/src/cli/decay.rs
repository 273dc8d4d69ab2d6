use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use super::output::{fmt_f64, to_csv, to_json, OutputSet};
use super::{read_config, CliError, CommonArgs, ParamArgs, EXIT_PASS, EXIT_VIOLATION};
use crate::bounds::ContractionMode;
use crate::experiments::{
    run_experiment, sqrt_ratio_contraction_trace, BoundaryStrategy, ContractionTrace, DecayReport, ExperimentConfig,
    Threshold, DEFAULT_MAX_VERTICES,
};
use crate::params::PottsParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Wsm,
    Ssm,
}

impl From<ModeArg> for ContractionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Wsm => ContractionMode::Wsm,
            ModeArg::Ssm => ContractionMode::Ssm,
        }
    }
}

/// Inclusive depth range parsed from `A:B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthRange(pub Vec<usize>);

fn parse_depths(s: &str) -> Result<DepthRange, String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad depth {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad depth {b:?}"))?;
    if a == 0 || b < a {
        return Err(format!("depth range {s:?} must satisfy 1 ≤ A ≤ B"));
    }
    Ok(DepthRange((a..=b).collect()))
}

#[derive(Debug, Clone, Args)]
pub struct DecayArgs {
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Inclusive depth range `A:B`.
    #[arg(long, value_parser = parse_depths)]
    pub depths: Option<DepthRange>,
    /// Instances per depth.
    #[arg(long)]
    pub instances: Option<usize>,
    /// all_one_color_pair, random_pair or adversarial_search.
    #[arg(long)]
    pub strategy: Option<BoundaryStrategy>,
    /// Largest explicit tree.
    #[arg(long)]
    pub max_vertices: Option<usize>,
    /// SSM: also record the square-root-ratio contraction trace.
    #[arg(long)]
    pub trace: bool,
    /// SSM: use bare paths without side branches.
    #[arg(long)]
    pub no_side_branches: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Config file schema: the experiment config with every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayFileConfig {
    pub params: Option<PottsParams>,
    pub mode: Option<ContractionMode>,
    pub depths: Option<Vec<usize>>,
    pub strategy: Option<BoundaryStrategy>,
    pub instances_per_depth: Option<usize>,
    pub seed: Option<u64>,
    pub max_vertices: Option<usize>,
    pub side_branches: Option<bool>,
}

pub fn resolve(args: &DecayArgs) -> Result<ExperimentConfig, CliError> {
    let file: DecayFileConfig = read_config(&args.common.config)?;
    let mode = args.mode.map(ContractionMode::from).or(file.mode).unwrap_or(ContractionMode::Wsm);
    let p = &args.params;
    let q = p.q.or(file.params.map(|f| f.q())).unwrap_or(3);
    let d = p.d()?.or(file.params.map(|f| f.d())).unwrap_or(match mode {
        ContractionMode::Wsm => 29,
        ContractionMode::Ssm => 7,
    });
    let params = match (p.w, p.alpha, file.params) {
        (Some(w), _, _) => PottsParams::new(q, w, d)?,
        (None, Some(alpha), _) => PottsParams::from_alpha(q, d, alpha)?,
        (None, None, Some(f)) if p.q.is_none() && p.d()?.is_none() => f,
        _ => {
            let t = Threshold::for_mode(&PottsParams::new(q, 0.5, d)?, mode);
            let w = t.w.ok_or_else(|| {
                CliError::Usage(format!("no {mode:?} threshold for q = {q}, d = {d}; pass --w or --alpha"))
            })?;
            PottsParams::new(q, w, d)?
        }
    };
    let strategy = args.strategy.or(file.strategy).unwrap_or(match mode {
        ContractionMode::Wsm => BoundaryStrategy::AllOneColorPair,
        ContractionMode::Ssm => BoundaryStrategy::RandomPair,
    });
    let default_instances = match (mode, strategy) {
        (_, BoundaryStrategy::AllOneColorPair) => 1,
        (ContractionMode::Wsm, _) => 20,
        (ContractionMode::Ssm, _) => 100,
    };
    let cfg = ExperimentConfig {
        params,
        mode,
        depths: args.depths.clone().map(|r| r.0).or(file.depths).unwrap_or(match mode {
            ContractionMode::Wsm => (1..=40).collect(),
            ContractionMode::Ssm => (1..=7).collect(),
        }),
        strategy,
        instances_per_depth: args.instances.or(file.instances_per_depth).unwrap_or(default_instances),
        seed: args.common.seed.or(file.seed).unwrap_or(0),
        max_vertices: args.max_vertices.or(file.max_vertices).unwrap_or(DEFAULT_MAX_VERTICES),
        side_branches: !args.no_side_branches && file.side_branches.unwrap_or(true),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Serialize)]
struct DecaySummary<'a> {
    command: &'static str,
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    report: &'a DecayReport,
    trace: Option<&'a ContractionTrace>,
}

pub fn run(args: &DecayArgs) -> Result<i32, CliError> {
    let cfg = resolve(args)?;
    if args.trace && cfg.mode != ContractionMode::Ssm {
        return Err(CliError::Usage("--trace needs --mode ssm".into()));
    }
    let report = run_experiment(&cfg)?;
    let trace = if args.trace { Some(sqrt_ratio_contraction_trace(&cfg)?) } else { None };
    eprintln!(
        "decay {:?}: q = {}, d = {}, w = {}, fitted rate {} vs target {}{}",
        cfg.mode,
        cfg.params.q(),
        cfg.params.d(),
        fmt_f64(cfg.params.w()),
        fmt_f64(report.fitted_rate),
        fmt_f64(report.target_rate),
        if report.probe { " (probe: below threshold)" } else { "" }
    );
    let mut out = OutputSet::new(&args.common.out_dir);
    if args.common.format.csv() {
        let rows: Vec<Vec<String>> = report
            .per_depth
            .iter()
            .map(|p| vec![p.depth.to_string(), fmt_f64(p.max_discrepancy), p.n_instances.to_string()])
            .collect();
        out.add("decay.csv", to_csv(&["depth", "max_discrepancy", "n_instances"], &rows)?);
    }
    if args.common.format.json() {
        let summary = DecaySummary { command: "decay", config: &cfg, report: &report, trace: trace.as_ref() };
        out.add("decay_summary.json", to_json(&summary)?);
    }
    out.write("decay", &cfg, cfg.seed)?;
    let trace_ok = trace.as_ref().map_or(true, |t| t.pass);
    Ok(if report.probe || (report.pass && trace_ok) { EXIT_PASS } else { EXIT_VIOLATION })
}
