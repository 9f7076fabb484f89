//! CSV and JSON rendering. Floats use Rust's shortest round-trip form, so
//! values re-read from either format equal the in-memory ones exactly.

use std::fmt::Write as _;

use clap::ValueEnum;
use dtqw_rank::rank::{self, ComparisonReport, PageRankResult, QuantumRankResult};
use serde::Serialize;

use crate::{ClassicalArgs, CliError};

const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Serialize)]
struct RankRow {
    node: usize,
    quantum_mean: f64,
    quantum_variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    classical: Option<f64>,
}

#[derive(Serialize)]
struct RankDocument<'a> {
    schema: u32,
    command: &'static str,
    steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pagerank: Option<PageRankMeta>,
    rows: &'a [RankRow],
}

#[derive(Serialize)]
struct PageRankMeta {
    p: f64,
    convention: rank::GoogleConvention,
}

impl From<&ClassicalArgs> for PageRankMeta {
    fn from(args: &ClassicalArgs) -> Self {
        Self {
            p: args.p,
            convention: args.convention,
        }
    }
}

fn json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    Ok(text)
}

/// Rows sorted by quantum mean, highest first.
pub fn rank_table(
    quantum: &QuantumRankResult,
    classical: Option<&PageRankResult>,
    pagerank: &ClassicalArgs,
    format: Format,
) -> Result<String, CliError> {
    let rows: Vec<RankRow> = rank::rank_order(&quantum.mean)
        .into_iter()
        .map(|node| RankRow {
            node,
            quantum_mean: quantum.mean[node],
            quantum_variance: quantum.variance[node],
            classical: classical.map(|c| c.ranks[node]),
        })
        .collect();
    match format {
        Format::Json => json(&RankDocument {
            schema: SCHEMA,
            command: "rank",
            steps: quantum.steps,
            pagerank: classical.map(|_| pagerank.into()),
            rows: &rows,
        }),
        Format::Csv => {
            let mut out = String::from("node,quantum_mean,quantum_variance");
            if classical.is_some() {
                out.push_str(",classical");
            }
            out.push('\n');
            for row in &rows {
                write!(
                    out,
                    "{},{:?},{:?}",
                    row.node, row.quantum_mean, row.quantum_variance
                )
                .unwrap();
                if let Some(c) = row.classical {
                    write!(out, ",{c:?}").unwrap();
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct CompareDocument<'a> {
    schema: u32,
    command: &'static str,
    unit: &'static str,
    steps: usize,
    pagerank: PageRankMeta,
    #[serde(flatten)]
    report: &'a ComparisonReport,
}

pub fn comparison(
    report: &ComparisonReport,
    by_depth: bool,
    steps: usize,
    pagerank: &ClassicalArgs,
    format: Format,
) -> Result<String, CliError> {
    let unit = if by_depth { "depth" } else { "node" };
    match format {
        Format::Json => json(&CompareDocument {
            schema: SCHEMA,
            command: "compare",
            unit,
            steps,
            pagerank: pagerank.into(),
            report,
        }),
        Format::Csv => {
            let mut out = String::new();
            writeln!(out, "# top_classical,{}", report.top_classical).unwrap();
            writeln!(out, "# top_quantum,{}", report.top_quantum).unwrap();
            writeln!(out, "# top_node_match,{}", report.top_node_match).unwrap();
            writeln!(out, "# kendall_tau,{:?}", report.kendall_tau).unwrap();
            writeln!(
                out,
                "# hierarchy_violations,{}",
                report.hierarchy_violations.len()
            )
            .unwrap();
            writeln!(out, "{unit},classical,quantum_mean,quantum_variance").unwrap();
            for row in &report.rows {
                writeln!(
                    out,
                    "{},{:?},{:?},{:?}",
                    row.node, row.classical, row.quantum_mean, row.quantum_variance
                )
                .unwrap();
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct ConvergenceDocument<'a> {
    schema: u32,
    command: &'static str,
    unit: &'static str,
    window: usize,
    stabilization_step: Option<usize>,
    tracked: &'a [usize],
    /// `running_mean[t][k]` is tracked item `k` after step `t + 1`.
    running_mean: Vec<Vec<f64>>,
}

pub fn convergence(
    series: &[Vec<f64>],
    tracked: &[usize],
    by_depth: bool,
    window: usize,
    stabilization_step: Option<usize>,
    format: Format,
) -> Result<String, CliError> {
    let unit = if by_depth { "depth" } else { "node" };
    let pick = |row: &Vec<f64>| tracked.iter().map(|&k| row[k]).collect::<Vec<_>>();
    match format {
        Format::Json => json(&ConvergenceDocument {
            schema: SCHEMA,
            command: "convergence",
            unit,
            window,
            stabilization_step,
            tracked,
            running_mean: series.iter().map(pick).collect(),
        }),
        Format::Csv => {
            let mut out = String::new();
            match stabilization_step {
                Some(s) => writeln!(out, "# stabilization_step,{s}").unwrap(),
                None => writeln!(out, "# stabilization_step,none").unwrap(),
            }
            writeln!(out, "# window,{window}").unwrap();
            out.push_str("step");
            for k in tracked {
                write!(out, ",{unit}{k}").unwrap();
            }
            out.push('\n');
            for (t, row) in series.iter().enumerate() {
                write!(out, "{}", t + 1).unwrap();
                for v in pick(row) {
                    write!(out, ",{v:?}").unwrap();
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}
