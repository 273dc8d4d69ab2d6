use clap::Args;
use serde::{Deserialize, Serialize};

use super::output::{fmt_f64, to_csv, to_json, OutputSet};
use super::{read_config, CliError, CommonArgs, ParamArgs, EXIT_PASS, EXIT_VIOLATION};
use crate::bounds::suite::{run_suite, Suite, SuiteConfig, SuiteResult, SuiteStatus};

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Suite name or `all`.
    #[arg(long)]
    pub suite: Option<String>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Cases per randomized suite.
    #[arg(long)]
    pub instances: Option<usize>,
    /// Grid size of the power-bound sweep.
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Config file schema; every field optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Option<String>,
    pub q: Option<usize>,
    pub d: Option<usize>,
    pub w: Option<f64>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub instances: Option<usize>,
    pub points: Option<usize>,
}

impl VerifyConfig {
    fn resolve(args: &VerifyArgs) -> Result<Self, CliError> {
        let file: VerifyConfig = read_config(&args.common.config)?;
        let p = &args.params;
        let (w, alpha) = match (p.w, p.alpha) {
            (None, None) => (file.w, file.alpha),
            flags => flags,
        };
        Ok(Self {
            suite: Some(args.suite.clone().or(file.suite).unwrap_or_else(|| "all".into())),
            q: p.q.or(file.q),
            d: p.d()?.or(file.d),
            w,
            alpha,
            seed: Some(args.common.seed.or(file.seed).unwrap_or(0)),
            instances: args.instances.or(file.instances),
            points: args.points.or(file.points),
        })
    }

    fn suites(&self) -> Result<Vec<Suite>, CliError> {
        match self.suite.as_deref().unwrap_or("all") {
            s if s.eq_ignore_ascii_case("all") => Ok(Suite::ALL.to_vec()),
            s => Ok(vec![s.parse()?]),
        }
    }

    fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            q: self.q,
            d: self.d,
            w: self.w,
            alpha: self.alpha,
            seed: self.seed.unwrap_or(0),
            instances: self.instances,
            points: self.points,
        }
    }
}

#[derive(Debug, Serialize)]
struct WorstCheck {
    case: usize,
    label: String,
    lhs: f64,
    rhs: f64,
    slack: f64,
    tolerance: f64,
}

#[derive(Debug, Serialize)]
struct SuiteSummary {
    suite: Suite,
    status: String,
    reason: Option<String>,
    cases: usize,
    checks: usize,
    violations: usize,
    worst_slack: Option<f64>,
    worst_check: Option<WorstCheck>,
}

#[derive(Debug, Serialize)]
struct VerifySummary<'a> {
    command: &'static str,
    config: &'a VerifyConfig,
    suites: Vec<SuiteSummary>,
    total_checks: usize,
    total_violations: usize,
    pass: bool,
}

fn summarize(r: &SuiteResult) -> SuiteSummary {
    let (status, reason) = match &r.status {
        SuiteStatus::Passed => ("passed".to_string(), None),
        SuiteStatus::Failed => ("failed".to_string(), None),
        SuiteStatus::Skipped(why) => ("skipped".to_string(), Some(why.clone())),
    };
    let worst_check = r
        .cases
        .iter()
        .filter_map(|c| c.report.worst().map(|w| (c.case, w)))
        .min_by(|a, b| a.1.slack().total_cmp(&b.1.slack()))
        .map(|(case, w)| WorstCheck {
            case,
            label: w.label.clone(),
            lhs: w.lhs,
            rhs: w.rhs,
            slack: w.slack(),
            tolerance: w.tolerance,
        });
    SuiteSummary {
        suite: r.suite,
        status,
        reason,
        cases: r.cases.len(),
        checks: r.check_count(),
        violations: r.violation_count(),
        worst_slack: worst_check.as_ref().map(|w| w.slack),
        worst_check,
    }
}

const CSV_HEADER: [&str; 11] = ["suite", "case", "q", "d", "w", "check", "lhs", "rhs", "slack", "tolerance", "holds"];

fn csv_rows(results: &[SuiteResult]) -> Vec<Vec<String>> {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let mut rows = Vec::new();
    for r in results {
        for c in &r.cases {
            for check in &c.report.checks {
                rows.push(vec![
                    r.suite.to_string(),
                    c.case.to_string(),
                    opt(c.q.map(|q| q.to_string())),
                    opt(c.d.map(|d| d.to_string())),
                    opt(c.w.map(fmt_f64)),
                    check.label.clone(),
                    fmt_f64(check.lhs),
                    fmt_f64(check.rhs),
                    fmt_f64(check.slack()),
                    fmt_f64(check.tolerance),
                    check.holds().to_string(),
                ]);
            }
        }
    }
    rows
}

/// Runs the selected suites in order.
pub fn run_verify(config: &VerifyConfig) -> Result<Vec<SuiteResult>, CliError> {
    let cfg = config.suite_config();
    config.suites()?.into_iter().map(|s| run_suite(s, &cfg).map_err(CliError::from)).collect()
}

pub fn run(args: &VerifyArgs) -> Result<i32, CliError> {
    let config = VerifyConfig::resolve(args)?;
    let results = run_verify(&config)?;
    let suites: Vec<SuiteSummary> = results.iter().map(summarize).collect();
    let total_violations: usize = suites.iter().map(|s| s.violations).sum();
    let summary = VerifySummary {
        command: "verify",
        config: &config,
        total_checks: suites.iter().map(|s| s.checks).sum(),
        total_violations,
        pass: total_violations == 0,
        suites,
    };
    for s in &summary.suites {
        eprintln!(
            "{:<15} {:<8} cases {:>6}  violations {:>4}  worst slack {}",
            s.suite.name(),
            s.status,
            s.cases,
            s.violations,
            s.worst_slack.map_or("-".into(), fmt_f64)
        );
    }
    let mut out = OutputSet::new(&args.common.out_dir);
    if args.common.format.csv() {
        out.add("verify_cases.csv", to_csv(&CSV_HEADER, &csv_rows(&results))?);
    }
    if args.common.format.json() {
        out.add("verify_summary.json", to_json(&summary)?);
    }
    out.write("verify", &config, config.seed.unwrap_or(0))?;
    Ok(if summary.pass { EXIT_PASS } else { EXIT_VIOLATION })
}
