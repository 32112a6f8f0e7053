//! `eval cluster` and `eval sensitivity`.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;
use shapcredit::harness::{
    cluster_sweep, read_matrix, sensitivity_sweep_with, supervised_clustering, write_matrix, ClusteringResult,
    SensitivityCurve, DEFAULT_RESAMPLES,
};
use shapcredit::model::OutputType;
use shapcredit::prelude::*;

use crate::config::RunConfig;
use crate::explain::{local_reports, DataPoint, DataSource};
use crate::output::{write_lines, RunMeta};

#[derive(Debug, Subcommand)]
pub enum Protocol {
    /// Supervised clustering of attribution vectors, scored by R².
    Cluster(ClusterArgs),
    /// Model sensitivity to masking its top-attributed inputs.
    Sensitivity(SensitivityArgs),
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    run: RunConfig,
    /// CSV of attribution vectors with a header row; computed from the run
    /// options when absent.
    #[arg(long)]
    attributions: Option<PathBuf>,
    /// CSV holding the response. Defaults to the explained target (model
    /// output or loss) in dataset mode.
    #[arg(long)]
    response: Option<PathBuf>,
    /// Response column, in `--response` or else in `--dataset`.
    #[arg(long)]
    response_column: Option<String>,
    /// Fit this k only instead of sweeping 1..=max-k.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 10)]
    max_k: usize,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Summary table (k, r_squared, sse).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    run: RunConfig,
    /// CSV of attribution vectors, one row per dataset row; computed from
    /// the run options when absent.
    #[arg(long)]
    attributions: Option<PathBuf>,
    /// Number of features to mask (default: all).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    /// Curve table (step, mean_abs_delta).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct EvalMeta {
    tool: &'static str,
    version: &'static str,
    protocol: &'static str,
    seed: u64,
    /// Present when the attributions were computed by this run.
    #[serde(skip_serializing_if = "Option::is_none")]
    attributions: Option<RunMeta>,
}

impl EvalMeta {
    fn new(protocol: &'static str, seed: u64, attributions: Option<RunMeta>) -> Self {
        EvalMeta {
            tool: "shapcredit",
            version: env!("CARGO_PKG_VERSION"),
            protocol,
            seed,
            attributions,
        }
    }
}

#[derive(Serialize)]
struct ClusterLine<'a> {
    #[serde(flatten)]
    result: &'a ClusteringResult,
    run: &'a EvalMeta,
}

#[derive(Serialize)]
struct SensitivityLine<'a> {
    #[serde(flatten)]
    curve: &'a SensitivityCurve,
    run: &'a EvalMeta,
}

pub fn run(protocol: Protocol) -> Result<()> {
    match protocol {
        Protocol::Cluster(args) => cluster(args),
        Protocol::Sensitivity(args) => sensitivity(args),
    }
}

/// Attribution rows from a CSV, or computed with `explain`.
fn attributions(cfg: &RunConfig, csv: Option<&PathBuf>) -> Result<(Vec<Vec<f64>>, Option<RunMeta>)> {
    match csv {
        Some(path) => Ok((read_matrix(path)?.1, None)),
        None => {
            let (reports, meta) = local_reports(cfg)?;
            Ok((reports.into_iter().map(|r| r.phi).collect(), Some(meta)))
        }
    }
}

fn pick_column(header: &[String], rows: Vec<Vec<f64>>, name: Option<&str>) -> Result<Vec<f64>> {
    let col = match name {
        Some(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("response file has no column `{name}`")))?,
        None if header.len() == 1 => 0,
        None => {
            return Err(Error::InvalidArgument(
                "response file has several columns; pick one with --response-column".into(),
            ))
        }
    };
    Ok(rows.into_iter().map(|r| r[col]).collect())
}

/// Model output or loss at each explained point.
fn target_values(src: &DataSource, cfg: &RunConfig, points: &[DataPoint]) -> Result<Vec<f64>> {
    let xs: Vec<Vec<f64>> = points.iter().map(|p| p.x.clone()).collect();
    match cfg.target() {
        TargetKind::ModelOutput => src.model.evaluate_batch(&xs),
        TargetKind::Loss => {
            let loss: LossKind = cfg
                .loss
                .ok_or_else(|| Error::InvalidArgument("target `loss` needs --loss".into()))?
                .into();
            points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let y = p.y.ok_or_else(|| Error::InvalidArgument(format!("point {i} has no label")))?;
                    match src.model.output_type() {
                        OutputType::Probabilities(classes) if loss == LossKind::CrossEntropy => {
                            loss.of_probabilities(y, &src.model.probabilities(&p.x)?, classes)
                        }
                        _ => loss.of_prediction(y, src.model.evaluate(&p.x)?),
                    }
                })
                .collect()
        }
        TargetKind::TargetY => Ok(points
            .iter()
            .map(|p| p.y.ok_or_else(|| Error::InvalidArgument("dataset has no label column".into())))
            .collect::<Result<_>>()?),
    }
}

fn response(args: &ClusterArgs, cfg: &RunConfig) -> Result<Vec<f64>> {
    if let Some(path) = &args.response {
        let (header, rows) = read_matrix(path)?;
        return pick_column(&header, rows, args.response_column.as_deref());
    }
    if cfg.network.is_some() {
        return Err(Error::InvalidArgument("network mode needs --response".into()));
    }
    let src = DataSource::load(cfg)?;
    let points = src.points(cfg)?;
    match &args.response_column {
        Some(name) => {
            let mut values: Vec<f64> = src.data.select(std::slice::from_ref(name))?.into_iter().map(|r| r[0]).collect();
            if let Some(n) = cfg.rows {
                values.truncate(n);
            }
            Ok(values)
        }
        None => target_values(&src, cfg, &points),
    }
}

fn cluster(args: ClusterArgs) -> Result<()> {
    let cfg = args.run.clone().resolve()?;
    let (attrs, meta) = attributions(&cfg, args.attributions.as_ref())?;
    let response = response(&args, &cfg)?;
    if response.len() != attrs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} attribution rows but {} response values",
            attrs.len(),
            response.len()
        )));
    }
    let seed = cfg.seed();
    let results = match args.k {
        Some(k) => vec![supervised_clustering(&attrs, &response, k, args.restarts, seed)?],
        None => cluster_sweep(&attrs, &response, args.max_k.min(attrs.len()), args.restarts, seed)?,
    };
    let run = EvalMeta::new("cluster", seed, meta);
    let lines: Vec<ClusterLine> = results.iter().map(|result| ClusterLine { result, run: &run }).collect();
    write_lines(cfg.out.as_deref(), &lines)?;
    if let Some(path) = &args.csv {
        let rows: Vec<Vec<f64>> = results.iter().map(|r| vec![r.k as f64, r.r_squared, r.sse]).collect();
        write_matrix(path, &["k".into(), "r_squared".into(), "sse".into()], &rows)?;
    }
    Ok(())
}

fn sensitivity(args: SensitivityArgs) -> Result<()> {
    let cfg = args.run.clone().resolve()?;
    if cfg.network.is_some() {
        return Err(Error::InvalidArgument("sensitivity needs --dataset and --model".into()));
    }
    if !cfg.points.is_empty() || cfg.points_file.is_some() {
        return Err(Error::InvalidArgument(
            "sensitivity runs over dataset rows; select them with --rows".into(),
        ));
    }
    let src = DataSource::load(&cfg)?;
    let (attrs, meta) = attributions(&cfg, args.attributions.as_ref())?;
    let n = cfg.rows.unwrap_or(src.data.n_rows()).min(src.data.n_rows());
    let target = src.data.target().map(|t| src.data.columns()[t].name.clone());
    let data = Dataset::new(src.data.columns().to_vec(), src.data.rows()[..n].to_vec(), target.as_deref())?;
    let steps = args.steps.unwrap_or(src.model.inputs().len());
    let seed = cfg.seed();
    let mut curve = sensitivity_sweep_with(&src.model, &data, &attrs, &src.background, steps, args.resamples, seed)?;
    curve.method = match &meta {
        Some(m) => m.method.to_string(),
        None => "file".to_string(),
    };
    let run = EvalMeta::new("sensitivity", seed, meta);
    write_lines(cfg.out.as_deref(), &[SensitivityLine { curve: &curve, run: &run }])?;
    if let Some(path) = &args.csv {
        let rows: Vec<Vec<f64>> = curve.points.iter().map(|p| vec![p.step as f64, p.mean_abs_delta]).collect();
        write_matrix(path, &["step".into(), "mean_abs_delta".into()], &rows)?;
    }
    Ok(())
}
