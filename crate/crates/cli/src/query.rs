//! `net-query`: read off one law of a network under evidence, an
//! intervention or a pin.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use shapcredit::prelude::*;

use crate::config::parse_pairs;
use crate::explain::load_network;
use crate::output::write_lines;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Condition,
    Do,
    Pin,
}

impl From<ModeArg> for QueryMode {
    fn from(m: ModeArg) -> QueryMode {
        match m {
            ModeArg::Condition => QueryMode::Condition,
            ModeArg::Do => QueryMode::Do,
            ModeArg::Pin => QueryMode::Pin,
        }
    }
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Network file, or a bundled name (`fig4`, `fig5`).
    #[arg(long)]
    network: String,
    /// Variable whose law is printed.
    #[arg(long)]
    query: String,
    #[arg(long, value_enum, default_value = "condition")]
    mode: ModeArg,
    /// Fixed coordinates, `Var=state,...`.
    #[arg(long, default_value = "")]
    given: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct QueryResult {
    query: String,
    mode: QueryMode,
    given: BTreeMap<String, String>,
    law: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
}

pub fn run(args: QueryArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let pairs = parse_pairs(&args.given)?;
    let refs: Vec<(&str, &str)> = pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    let given = net.assignment(&refs)?;
    let var = net.id(&args.query)?;
    let mode = QueryMode::from(args.mode);
    let law = net.query(mode, &given, var)?;
    let states = net.variable(var).states();
    let result = QueryResult {
        query: args.query,
        mode,
        given: pairs.into_iter().collect(),
        law: states.iter().cloned().zip(law.weights().iter().copied()).collect(),
        mean: Measure::expected_value().apply(&law).ok(),
    };
    write_lines(args.out.as_deref(), &[result])
}
