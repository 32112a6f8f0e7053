//! Evaluatable models and losses.
//!
//! Every model reads a point as a slice of `f64`, one entry per declared
//! input. Categorical inputs are encoded by state index, numeric ones by
//! value (see [`Variable::encoded_value`]).

mod dataset;
mod external;
mod loss;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{mixed_radix_tuples, Assignment, Network, Role, VarId, Variable};

pub use dataset::{load_dataset, parse_csv, schema_path, Column, ColumnKind, Dataset, Schema};
pub use external::{serve, ExternalClient, ExternalPool, ExternalSpec, DEFAULT_TIMEOUT};
pub use loss::{attach_loss_node, LossKind, LossSpec};

/// What a model returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputType {
    Numeric,
    /// One of the listed class values.
    Discrete(Vec<f64>),
    /// A probability vector over the listed class values.
    Probabilities(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    #[default]
    Discrete,
    Continuous,
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    /// Lookup over the product of per-input levels (mixed-radix order, first
    /// input most significant). Each entry is a single output, or a
    /// probability vector for probability models.
    Table {
        levels: Vec<Vec<f64>>,
        outputs: Vec<Vec<f64>>,
    },
    Linear {
        weights: Vec<f64>,
        bias: f64,
    },
    Knn {
        k: usize,
        background: Arc<Vec<Vec<f64>>>,
        response: Arc<Vec<f64>>,
        /// Standard deviation per numeric input, `None` for categorical.
        scale: Vec<Option<f64>>,
    },
    External(Arc<ExternalPool>),
}

#[derive(Debug, Clone)]
pub struct ModelHandle {
    inputs: Vec<String>,
    input_kinds: Vec<InputKind>,
    kind: ModelKind,
    output: OutputType,
}

impl ModelHandle {
    pub fn table(inputs: Vec<String>, levels: Vec<Vec<f64>>, outputs: Vec<f64>, output: OutputType) -> Result<Self> {
        let outputs = outputs.into_iter().map(|o| vec![o]).collect();
        Self::table_rows(inputs, levels, outputs, output)
    }

    /// Table model whose entries are probability vectors over `classes`.
    pub fn probability_table(inputs: Vec<String>, levels: Vec<Vec<f64>>, rows: Vec<Vec<f64>>, classes: Vec<f64>) -> Result<Self> {
        Self::table_rows(inputs, levels, rows, OutputType::Probabilities(classes))
    }

    fn table_rows(inputs: Vec<String>, levels: Vec<Vec<f64>>, outputs: Vec<Vec<f64>>, output: OutputType) -> Result<Self> {
        if levels.len() != inputs.len() {
            return Err(Error::InvalidModel(format!(
                "{} inputs but {} level lists",
                inputs.len(),
                levels.len()
            )));
        }
        let expected: usize = levels.iter().map(Vec::len).product();
        if outputs.len() != expected {
            return Err(Error::InvalidModel(format!(
                "table has {} rows, expected {expected}",
                outputs.len()
            )));
        }
        let width = match &output {
            OutputType::Probabilities(classes) => classes.len(),
            _ => 1,
        };
        for row in &outputs {
            if row.len() != width || row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!("table row {row:?} does not fit the output type")));
            }
            if let OutputType::Discrete(classes) = &output {
                if !classes.contains(&row[0]) {
                    return Err(Error::InvalidModel(format!("output {} is not a declared class", row[0])));
                }
            }
        }
        let model = ModelHandle {
            input_kinds: vec![InputKind::Discrete; inputs.len()],
            inputs,
            kind: ModelKind::Table { levels, outputs },
            output,
        };
        Ok(model)
    }

    pub fn constant(value: f64) -> Self {
        ModelHandle {
            inputs: Vec::new(),
            input_kinds: Vec::new(),
            kind: ModelKind::Table {
                levels: Vec::new(),
                outputs: vec![vec![value]],
            },
            output: OutputType::Numeric,
        }
    }

    pub fn linear(inputs: Vec<String>, weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.len() != inputs.len() {
            return Err(Error::InvalidModel(format!(
                "{} inputs but {} weights",
                inputs.len(),
                weights.len()
            )));
        }
        Ok(ModelHandle {
            input_kinds: vec![InputKind::Discrete; inputs.len()],
            inputs,
            kind: ModelKind::Linear { weights, bias },
            output: OutputType::Numeric,
        })
    }

    /// k-nearest-neighbour model over the features of `background`, answering
    /// with the mean response (numeric output), the majority class
    /// (discrete) or the class frequencies (probabilities).
    pub fn knn(background: &Dataset, inputs: &[String], response: &[f64], k: usize, output: OutputType) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidModel("k must be at least 1".into()));
        }
        if background.n_rows() == 0 {
            return Err(Error::EmptyBackground);
        }
        if response.len() != background.n_rows() {
            return Err(Error::InvalidModel(format!(
                "{} responses for {} background rows",
                response.len(),
                background.n_rows()
            )));
        }
        let columns = inputs
            .iter()
            .map(|name| background.column_index(name))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Vec<f64>> = background
            .rows()
            .iter()
            .map(|r| columns.iter().map(|&c| r[c]).collect())
            .collect();
        let mut scale = Vec::with_capacity(columns.len());
        let mut input_kinds = Vec::with_capacity(columns.len());
        for (j, &c) in columns.iter().enumerate() {
            match background.columns()[c].kind {
                ColumnKind::Numeric => {
                    let n = rows.len() as f64;
                    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                    let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                    let sd = var.sqrt();
                    scale.push(Some(if sd > 0.0 { sd } else { 1.0 }));
                    input_kinds.push(InputKind::Continuous);
                }
                ColumnKind::Categorical(_) => {
                    scale.push(None);
                    input_kinds.push(InputKind::Discrete);
                }
            }
        }
        if let OutputType::Discrete(classes) | OutputType::Probabilities(classes) = &output {
            if let Some(y) = response.iter().find(|y| !classes.contains(y)) {
                return Err(Error::InvalidModel(format!("response {y} is not a declared class")));
            }
        }
        Ok(ModelHandle {
            inputs: inputs.to_vec(),
            input_kinds,
            kind: ModelKind::Knn {
                k: k.min(rows.len()),
                background: Arc::new(rows),
                response: Arc::new(response.to_vec()),
                scale,
            },
            output,
        })
    }

    /// Wrap a running external endpoint; inputs and output type come from
    /// its handshake.
    pub fn external(pool: ExternalPool) -> Self {
        let spec = pool.spec().clone();
        ModelHandle {
            input_kinds: vec![InputKind::Discrete; spec.features.len()],
            inputs: spec.features,
            kind: ModelKind::External(Arc::new(pool)),
            output: spec.output_type,
        }
    }

    /// Read the deterministic model node of a network back as a table model.
    pub fn from_network(net: &Network) -> Result<Self> {
        let g = net.model_node()?;
        let var = net.variable(g);
        let parents = net.parents(g);
        let classes: Vec<f64> = (0..var.cardinality()).map(|s| var.encoded_value(s)).collect();
        let mut outputs = Vec::with_capacity(net.cpt(g).rows().len());
        for row in net.cpt(g).rows() {
            let hot = row.iter().position(|p| *p == 1.0).ok_or_else(|| {
                Error::InvalidModel(format!("model node `{}` has a non-deterministic row", var.name()))
            })?;
            outputs.push(classes[hot]);
        }
        let levels = parents
            .iter()
            .map(|p| {
                let v = net.variable(*p);
                (0..v.cardinality()).map(|s| v.encoded_value(s)).collect()
            })
            .collect();
        let inputs = parents.iter().map(|p| net.name(*p).to_string()).collect();
        Self::table(inputs, levels, outputs, OutputType::Discrete(classes))
    }

    /// Load a model document (`{"kind": "table" | "linear" | "knn" | "external", ...}`).
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let doc: ModelDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        doc.build(path.parent().unwrap_or(Path::new(".")))
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn input_kinds(&self) -> &[InputKind] {
        &self.input_kinds
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn output_type(&self) -> &OutputType {
        &self.output
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if let Some(j) = (0..self.inputs.len()).find(|&j| x.get(j).is_none_or(|v| v.is_nan())) {
            return Err(Error::MissingInput(self.inputs[j].clone()));
        }
        Ok(())
    }

    /// Model output at one point. Probability models answer with the most
    /// probable class (lowest class value on ties).
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        match &self.kind {
            ModelKind::Table { levels, outputs } => {
                let row = &outputs[table_index(&self.inputs, levels, x)?];
                Ok(match &self.output {
                    OutputType::Probabilities(classes) => classes[argmax(row)],
                    _ => row[0],
                })
            }
            ModelKind::Linear { weights, bias } => Ok(bias + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()),
            ModelKind::Knn { .. } => {
                let votes = self.knn_votes(x);
                Ok(match &self.output {
                    OutputType::Numeric => votes.iter().sum::<f64>() / votes.len() as f64,
                    OutputType::Discrete(classes) | OutputType::Probabilities(classes) => {
                        classes[argmax(&class_frequencies(&votes, classes))]
                    }
                })
            }
            ModelKind::External(pool) => Ok(pool.predict(&[x.to_vec()])?[0]),
        }
    }

    /// Outputs for many points; external models get a single request.
    pub fn evaluate_batch(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        match &self.kind {
            ModelKind::External(pool) => {
                for p in points {
                    self.check_point(p)?;
                }
                pool.predict(points)
            }
            _ => points.iter().map(|p| self.evaluate(p)).collect(),
        }
    }

    /// Probability vector over the classes of a probability model.
    pub fn probabilities(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let OutputType::Probabilities(classes) = &self.output else {
            return Err(Error::IncompatibleLossKind(
                "cross-entropy needs a model that outputs class probabilities".into(),
            ));
        };
        match &self.kind {
            ModelKind::Table { levels, outputs } => Ok(outputs[table_index(&self.inputs, levels, x)?].clone()),
            ModelKind::Knn { .. } => Ok(class_frequencies(&self.knn_votes(x), classes)),
            _ => Err(Error::InvalidModel("this model kind cannot output probabilities".into())),
        }
    }

    /// Evaluate at the point encoded by an assignment over `net`.
    pub fn evaluate_assignment(&self, net: &Network, point: &Assignment) -> Result<f64> {
        let x = self
            .inputs
            .iter()
            .map(|name| {
                let id = net.id(name).map_err(|_| Error::MissingInput(name.clone()))?;
                let state = point.get(id).ok_or_else(|| Error::MissingInput(name.clone()))?;
                Ok(net.variable(id).encoded_value(state))
            })
            .collect::<Result<Vec<_>>>()?;
        self.evaluate(&x)
    }

    fn knn_votes(&self, x: &[f64]) -> Vec<f64> {
        let ModelKind::Knn {
            k,
            background,
            response,
            scale,
        } = &self.kind
        else {
            unreachable!("knn_votes on a non-knn model")
        };
        let mut dist: Vec<(f64, usize)> = background
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d: f64 = row
                    .iter()
                    .zip(x)
                    .zip(scale)
                    .map(|((a, b), s)| match s {
                        Some(sd) => ((a - b) / sd).powi(2),
                        None => f64::from(u8::from(a != b)),
                    })
                    .sum();
                (d, i)
            })
            .collect();
        // ties go to the lowest row index
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        dist[..*k].iter().map(|(_, i)| response[*i]).collect()
    }
}

fn table_index(inputs: &[String], levels: &[Vec<f64>], x: &[f64]) -> Result<usize> {
    let mut index = 0;
    for ((name, lv), v) in inputs.iter().zip(levels).zip(x) {
        let digit = lv.iter().position(|l| l == v).ok_or_else(|| {
            Error::InvalidArgument(format!("value {v} is not a level of model input `{name}`"))
        })?;
        index = index * lv.len() + digit;
    }
    Ok(index)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn class_frequencies(votes: &[f64], classes: &[f64]) -> Vec<f64> {
    let n = votes.len() as f64;
    classes
        .iter()
        .map(|c| votes.iter().filter(|v| *v == c).count() as f64 / n)
        .collect()
}

/// Render a numeric output as a state label.
pub(crate) fn value_label(v: f64) -> String {
    if v == 0.0 {
        "0".into() // avoid "-0"
    } else {
        format!("{v}")
    }
}

/// Variable for a set of numeric outcomes; explicit values are only kept
/// when the labels do not parse back to them.
pub(crate) fn numeric_variable(name: &str, values: &[f64], role: Role) -> Variable {
    let labels: Vec<String> = values.iter().map(|v| value_label(*v)).collect();
    let roundtrips = labels.iter().zip(values).all(|(l, v)| l.parse::<f64>().ok() == Some(*v));
    let var = Variable::from_states(name, labels).with_role(role);
    if roundtrips {
        var
    } else {
        var.with_values(values.to_vec())
    }
}

/// Append the model as a deterministic node `Model` with the model inputs
/// as parents and 0/1 rows read off [`ModelHandle::evaluate`].
pub fn attach_model_node(net: &Network, model: &ModelHandle) -> Result<Network> {
    if !net.with_role(Role::Model).is_empty() {
        return Err(Error::InvalidNetwork("network already has a model node".into()));
    }
    if let Some(j) = model.input_kinds.iter().position(|k| *k == InputKind::Continuous) {
        return Err(Error::ContinuousInputUnsupported(model.inputs[j].clone()));
    }
    let parents = model
        .inputs
        .iter()
        .map(|name| net.id(name).map_err(|_| Error::MissingInput(name.clone())))
        .collect::<Result<Vec<VarId>>>()?;
    let combos = mixed_radix_tuples(&net.radix(&parents));
    let points: Vec<Vec<f64>> = combos
        .iter()
        .map(|t| t.iter().zip(&parents).map(|(s, p)| net.variable(*p).encoded_value(*s)).collect())
        .collect();
    let outputs = model.evaluate_batch(&points)?;
    let classes = match &model.output {
        OutputType::Discrete(c) | OutputType::Probabilities(c) => c.clone(),
        OutputType::Numeric => {
            let mut distinct = outputs.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            distinct
        }
    };
    let rows = outputs
        .iter()
        .map(|y| {
            let hot = classes
                .iter()
                .position(|c| c == y)
                .ok_or_else(|| Error::InvalidModel(format!("output {y} is not a declared class")))?;
            let mut row = vec![0.0; classes.len()];
            row[hot] = 1.0;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    net.with_node(numeric_variable("Model", &classes, Role::Model), parents, rows)
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ModelDoc {
    Table {
        inputs: Vec<String>,
        levels: Vec<Vec<f64>>,
        outputs: Vec<f64>,
        #[serde(default = "numeric_output")]
        output_type: OutputType,
    },
    Linear {
        inputs: Vec<String>,
        weights: Vec<f64>,
        #[serde(default)]
        bias: f64,
    },
    Knn {
        inputs: Vec<String>,
        k: usize,
        background: String,
        response: String,
        #[serde(default = "numeric_output")]
        output_type: OutputType,
    },
    External {
        command: Vec<String>,
        #[serde(default)]
        timeout_secs: Option<f64>,
        #[serde(default)]
        pool: Option<usize>,
    },
}

fn numeric_output() -> OutputType {
    OutputType::Numeric
}

impl ModelDoc {
    fn build(self, base: &Path) -> Result<ModelHandle> {
        match self {
            ModelDoc::Table {
                inputs,
                levels,
                outputs,
                output_type,
            } => ModelHandle::table(inputs, levels, outputs, output_type),
            ModelDoc::Linear { inputs, weights, bias } => ModelHandle::linear(inputs, weights, bias),
            ModelDoc::Knn {
                inputs,
                k,
                background,
                response,
                output_type,
            } => {
                let data = load_dataset(base.join(background))?;
                let col = data.column_index(&response)?;
                let y: Vec<f64> = data.rows().iter().map(|r| r[col]).collect();
                ModelHandle::knn(&data, &inputs, &y, k, output_type)
            }
            ModelDoc::External {
                command,
                timeout_secs,
                pool,
            } => {
                let timeout = match timeout_secs {
                    Some(s) if s.is_finite() && s > 0.0 => std::time::Duration::from_secs_f64(s),
                    Some(s) => return Err(Error::InvalidModel(format!("invalid timeout {s}"))),
                    None => DEFAULT_TIMEOUT,
                };
                let pool = ExternalPool::spawn(&command, pool.unwrap_or(1), timeout)?;
                Ok(ModelHandle::external(pool))
            }
        }
    }
}
