//! `explain` and `global`: build games from a network or a dataset and
//! attribute them.

use std::path::Path;

use rayon::prelude::*;
use shapcredit::model::{attach_loss_node, attach_model_node, load_dataset, parse_csv, ColumnKind};
use shapcredit::prelude::*;

use crate::config::{parse_pairs, NatureArg, RunConfig};
use crate::output::{write_lines, ReportLine, RunMeta};

/// A network file, or the name of a bundled network.
pub fn load_network(spec: &str) -> Result<Network> {
    if Path::new(spec).exists() {
        Network::from_path(spec)
    } else {
        bundled::by_name(spec)
            .map_err(|_| Error::InvalidArgument(format!("`{spec}` is neither a network file nor a bundled network")))
    }
}

/// The network from the config, with the model and loss nodes attached
/// when they are given.
pub fn prepare_network(cfg: &RunConfig, spec: &str) -> Result<Network> {
    let mut net = load_network(spec)?;
    if let Some(path) = &cfg.model {
        net = attach_model_node(&net, &ModelHandle::from_path(path)?)?;
    }
    if let Some(loss) = cfg.loss {
        net = attach_loss_node(&net, &LossSpec::new(loss.into()))?;
    }
    Ok(net)
}

pub fn attribute<G: CoalitionGame + ?Sized>(game: &G, plan: Option<RegressionPlan>) -> Result<AttributionReport> {
    match plan {
        None => shapley_exact(game),
        Some(plan) => shapley_regression(game, plan),
    }
}

/// A data point in dataset mode: model inputs plus the label when known.
#[derive(Debug, Clone)]
pub struct DataPoint {
    pub x: Vec<f64>,
    pub y: Option<f64>,
}

/// Everything dataset mode needs.
pub struct DataSource {
    pub data: Dataset,
    pub background: Dataset,
    pub model: ModelHandle,
}

impl DataSource {
    pub fn load(cfg: &RunConfig) -> Result<DataSource> {
        let path = cfg
            .dataset
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("dataset mode needs --dataset".into()))?;
        let data = load_dataset(path)?;
        let background = match &cfg.background {
            Some(b) => load_dataset(b)?,
            None => data.clone(),
        };
        let model = ModelHandle::from_path(
            cfg.model
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("dataset mode needs --model".into()))?,
        )?;
        Ok(DataSource { data, background, model })
    }

    /// Points from `--point`, `--points-file`, or every dataset row.
    pub fn points(&self, cfg: &RunConfig) -> Result<Vec<DataPoint>> {
        let mut points = if !cfg.points.is_empty() {
            cfg.points.iter().map(|p| self.parse_point(p)).collect::<Result<Vec<_>>>()?
        } else {
            let rows = match &cfg.points_file {
                Some(path) => parse_csv(&std::fs::read_to_string(path)?, Some(self.data.schema()))?,
                None => self.data.clone(),
            };
            let xs = rows.select(self.model.inputs())?;
            let ys = rows.target_values();
            xs.into_iter()
                .enumerate()
                .map(|(i, x)| DataPoint {
                    x,
                    y: ys.as_ref().map(|y| y[i]),
                })
                .collect()
        };
        if let Some(n) = cfg.rows {
            points.truncate(n);
        }
        Ok(points)
    }

    fn parse_point(&self, spec: &str) -> Result<DataPoint> {
        let pairs = parse_pairs(spec)?;
        let value = |name: &str| -> Result<Option<f64>> {
            let Some((_, raw)) = pairs.iter().find(|(k, _)| k == name) else {
                return Ok(None);
            };
            let col = &self.data.columns()[self.data.column_index(name)?];
            let parsed = match &col.kind {
                ColumnKind::Categorical(levels) => levels.iter().position(|l| l == raw).map(|i| i as f64),
                ColumnKind::Numeric => raw.parse::<f64>().ok(),
            };
            parsed.map(Some).ok_or_else(|| Error::Parse {
                row: 0,
                column: name.to_string(),
                message: format!("bad value `{raw}`"),
            })
        };
        for (k, _) in &pairs {
            self.data.column_index(k)?;
        }
        let x = self
            .model
            .inputs()
            .iter()
            .map(|name| value(name)?.ok_or_else(|| Error::MissingInput(name.clone())))
            .collect::<Result<Vec<_>>>()?;
        let y = match self.data.target() {
            Some(t) => value(&self.data.columns()[t].name)?,
            None => None,
        };
        Ok(DataPoint { x, y })
    }
}

/// Network assignments from `--point` or `--points-file`.
fn network_points(net: &Network, cfg: &RunConfig) -> Result<Vec<Assignment>> {
    let mut points = if !cfg.points.is_empty() {
        cfg.points
            .iter()
            .map(|p| {
                let pairs = parse_pairs(p)?;
                let refs: Vec<(&str, &str)> = pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
                net.assignment(&refs)
            })
            .collect::<Result<Vec<_>>>()?
    } else if let Some(path) = &cfg.points_file {
        let bad = |row: usize, e: csv::Error| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        };
        let mut reader = csv::Reader::from_path(path).map_err(|e| bad(0, e))?;
        let header: Vec<String> = reader.headers().map_err(|e| bad(0, e))?.iter().map(|h| h.trim().to_string()).collect();
        let mut out = Vec::new();
        for (r, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| bad(r + 1, e))?;
            let refs: Vec<(&str, &str)> = header.iter().map(String::as_str).zip(rec.iter().map(str::trim)).collect();
            out.push(net.assignment(&refs)?);
        }
        out
    } else {
        return Err(Error::InvalidArgument("network mode needs --point or --points-file".into()));
    };
    if let Some(n) = cfg.rows {
        points.truncate(n);
    }
    Ok(points)
}

/// Nature for dataset mode: only model-specific games have an empirical
/// counterpart.
fn dataset_nature(cfg: &RunConfig) -> Result<Nature> {
    match cfg.nature.unwrap_or(NatureArg::Spec) {
        NatureArg::Spec => Ok(Nature::ModelSpecific),
        other => Err(Error::InvalidArgument(format!(
            "nature `{}` needs a causal network (--network)",
            Nature::from(other)
        ))),
    }
}

/// Local attributions, one per point, in input order. Points run in
/// parallel; the first failing point (in input order) is reported.
pub fn local_reports(cfg: &RunConfig) -> Result<(Vec<AttributionReport>, RunMeta)> {
    let measure = cfg.measure()?;
    let plan = cfg.plan();
    let target = cfg.target();
    match &cfg.network {
        Some(spec) => {
            if cfg.dataset.is_some() {
                return Err(Error::InvalidArgument("give either --network or --dataset, not both".into()));
            }
            let nature: Nature = cfg.nature.unwrap_or(NatureArg::Obs).into();
            let net = prepare_network(cfg, spec)?;
            let points = network_points(&net, cfg)?;
            log::info!("explaining {} points", points.len());
            let reports = points
                .par_iter()
                .map(|p| attribute(&NetworkGame::local(&net, target, p, nature, measure)?, plan))
                .collect::<Vec<Result<_>>>()
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            Ok((reports, RunMeta::new("explain", cfg, nature, &measure)))
        }
        None => {
            let nature = dataset_nature(cfg)?;
            let src = DataSource::load(cfg)?;
            let loss = match target {
                TargetKind::ModelOutput => None,
                TargetKind::Loss => Some(LossKind::from(
                    cfg.loss
                        .ok_or_else(|| Error::InvalidArgument("target `loss` needs --loss".into()))?,
                )),
                TargetKind::TargetY => {
                    return Err(Error::InvalidArgument("target `y` needs a network (--network)".into()))
                }
            };
            let points = src.points(cfg)?;
            log::info!("explaining {} points", points.len());
            let reports = points
                .par_iter()
                .enumerate()
                .map(|(i, p)| {
                    let game = match loss {
                        None => EmpiricalGame::model_output(&src.model, &src.background, &p.x, measure)?,
                        Some(loss) => {
                            let y = p
                                .y
                                .ok_or_else(|| Error::InvalidArgument(format!("point {i} has no label")))?;
                            EmpiricalGame::loss_game(&src.model, &src.background, &p.x, y, loss, measure)?
                        }
                    };
                    attribute(&game, plan)
                })
                .collect::<Vec<Result<_>>>()
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            Ok((reports, RunMeta::new("explain", cfg, nature, &measure)))
        }
    }
}

pub fn explain(cfg: RunConfig) -> Result<()> {
    let (reports, run) = local_reports(&cfg)?;
    let lines: Vec<ReportLine> = reports
        .iter()
        .enumerate()
        .map(|(index, report)| ReportLine {
            index,
            report,
            run: &run,
        })
        .collect();
    write_lines(cfg.out.as_deref(), &lines)
}

pub fn global(cfg: RunConfig) -> Result<()> {
    let spec = cfg
        .network
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("global games need --network".into()))?;
    let measure = cfg.measure()?;
    let nature: Nature = cfg.nature.unwrap_or(NatureArg::Obs).into();
    let net = prepare_network(&cfg, spec)?;
    let game = NetworkGame::global(&net, cfg.target(), nature, measure)?;
    let report = attribute(&game, cfg.plan())?;
    let run = RunMeta::new("global", &cfg, nature, &measure);
    write_lines(
        cfg.out.as_deref(),
        &[ReportLine {
            index: 0,
            report: &report,
            run: &run,
        }],
    )
}
