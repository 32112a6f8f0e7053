//! Run configuration: command-line flags, optionally layered over a JSON
//! config file with the same keys (flags win).

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use shapcredit::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NatureArg {
    Obs,
    Spec,
    Causal,
}

impl From<NatureArg> for Nature {
    fn from(n: NatureArg) -> Nature {
        match n {
            NatureArg::Obs => Nature::Observational,
            NatureArg::Spec => Nature::ModelSpecific,
            NatureArg::Causal => Nature::Causal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureArg {
    Ev,
    Var,
    Entropy,
    Cpe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetArg {
    Model,
    Loss,
    Y,
}

impl From<TargetArg> for TargetKind {
    fn from(t: TargetArg) -> TargetKind {
        match t {
            TargetArg::Model => TargetKind::ModelOutput,
            TargetArg::Loss => TargetKind::Loss,
            TargetArg::Y => TargetKind::TargetY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Exact,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossArg {
    ZeroOne,
    SquaredError,
    CrossEntropy,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> LossKind {
        match l {
            LossArg::ZeroOne => LossKind::ZeroOne,
            LossArg::SquaredError => LossKind::SquaredError,
            LossArg::CrossEntropy => LossKind::CrossEntropy,
        }
    }
}

pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "snake_case")]
pub struct RunConfig {
    /// JSON file with any of these options; command-line flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Network file, or a bundled name (`fig4`, `fig5`).
    #[arg(long)]
    pub network: Option<String>,
    /// CSV dataset (background and default points in dataset mode).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Background CSV; defaults to `--dataset`.
    #[arg(long)]
    pub background: Option<PathBuf>,
    /// Model document (JSON).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    #[arg(long, value_enum)]
    pub nature: Option<NatureArg>,
    #[arg(long, value_enum)]
    pub measure: Option<MeasureArg>,
    #[arg(long, value_enum)]
    pub target: Option<TargetArg>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Coalition samples for the regression method.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Logarithm base for the entropy measures (default e).
    #[arg(long)]
    pub log_base: Option<f64>,
    /// Riemann grid for empirical cumulative paired entropy.
    #[arg(long)]
    pub riemann_steps: Option<usize>,
    /// A point to explain, `Var=state,...` (network) or `x1=0.5,...`
    /// (dataset). Repeatable.
    #[arg(long = "point")]
    #[serde(rename = "point")]
    pub points: Vec<String>,
    /// CSV of points to explain.
    #[arg(long)]
    pub points_file: Option<PathBuf>,
    /// Only explain the first N points.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! prefer {
    ($flags:expr, $file:expr, $($field:ident),+) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field.take(); } )+
    };
}

impl RunConfig {
    /// Merge in the config file, if one was named.
    pub fn resolve(mut self) -> Result<RunConfig> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let mut file = load(&path)?;
        prefer!(
            self,
            file,
            network,
            dataset,
            background,
            model,
            loss,
            nature,
            measure,
            target,
            method,
            samples,
            seed,
            log_base,
            riemann_steps,
            points_file,
            rows,
            out
        );
        if self.points.is_empty() {
            self.points = file.points;
        }
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut self.dataset, &mut self.background, &mut self.model, &mut self.points_file]
            .into_iter()
            .flatten()
        {
            if p.is_relative() && !p.exists() {
                *p = base.join(&*p);
            }
        }
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn measure(&self) -> Result<Measure> {
        let measure = match self.measure.unwrap_or(MeasureArg::Ev) {
            MeasureArg::Ev => Measure::expected_value(),
            MeasureArg::Var => Measure::variance(),
            MeasureArg::Entropy => Measure::shannon_entropy(),
            MeasureArg::Cpe => Measure::cumulative_paired_entropy(),
        };
        let measure = match self.log_base {
            Some(b) => measure.with_base(b)?,
            None => measure,
        };
        match self.riemann_steps {
            Some(s) => measure.with_riemann_steps(s),
            None => Ok(measure),
        }
    }

    pub fn target(&self) -> TargetKind {
        self.target.unwrap_or(TargetArg::Model).into()
    }

    pub fn plan(&self) -> Option<RegressionPlan> {
        match self.method.unwrap_or(MethodArg::Exact) {
            MethodArg::Exact => None,
            MethodArg::Regression => Some(RegressionPlan::Sampled {
                n_samples: self.samples.unwrap_or(DEFAULT_SAMPLES),
                seed: self.seed(),
            }),
        }
    }

    pub fn method_name(&self) -> &'static str {
        match self.method.unwrap_or(MethodArg::Exact) {
            MethodArg::Exact => "exact",
            MethodArg::Regression => "regression",
        }
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Split `A=1,B=0` into pairs.
pub fn parse_pairs(spec: &str) -> Result<Vec<(String, String)>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected `name=value`, got `{pair}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}
