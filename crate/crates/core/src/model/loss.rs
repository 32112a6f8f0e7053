use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::numeric_variable;
use crate::error::{Error, Result};
use crate::network::{mixed_radix_tuples, Network, Role, Variable};

/// Probabilities are clamped away from 0 before taking logs.
const PROB_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    ZeroOne,
    SquaredError,
    CrossEntropy,
}

impl LossKind {
    /// Loss of a point prediction.
    pub fn of_prediction(self, y: f64, prediction: f64) -> Result<f64> {
        match self {
            LossKind::ZeroOne => Ok(f64::from(u8::from(y != prediction))),
            LossKind::SquaredError => Ok((prediction - y).powi(2)),
            LossKind::CrossEntropy => Err(Error::IncompatibleLossKind(
                "cross-entropy needs class probabilities, not a point prediction".into(),
            )),
        }
    }

    /// `-ln p(y)` for a probability vector over `classes`.
    pub fn of_probabilities(self, y: f64, probs: &[f64], classes: &[f64]) -> Result<f64> {
        if self != LossKind::CrossEntropy {
            return self.of_prediction(y, classes[argmax(probs)]);
        }
        let c = classes
            .iter()
            .position(|c| *c == y)
            .ok_or_else(|| Error::IncompatibleLossKind(format!("label {y} is not one of the model classes")))?;
        Ok(-probs[c].max(PROB_FLOOR).ln())
    }

    /// Binary cross-entropy of a predicted probability `q = P(y = 1)`.
    pub fn binary_cross_entropy(y: f64, q: f64) -> Result<f64> {
        let q = q.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
        match y {
            1.0 => Ok(-q.ln()),
            0.0 => Ok(-(1.0 - q).ln()),
            _ => Err(Error::IncompatibleLossKind(format!(
                "binary cross-entropy needs a 0/1 label, got {y}"
            ))),
        }
    }
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i] > v[best] { i } else { best })
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::ZeroOne => "zero_one",
            LossKind::SquaredError => "squared_error",
            LossKind::CrossEntropy => "cross_entropy",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "zero_one" | "01" => Ok(LossKind::ZeroOne),
            "squared_error" | "se" | "mse" => Ok(LossKind::SquaredError),
            "cross_entropy" | "ce" => Ok(LossKind::CrossEntropy),
            _ => Err(Error::InvalidArgument(format!("unknown loss `{s}`"))),
        }
    }
}

/// A loss applied to the model node and the target node of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        LossSpec { kind }
    }
}

/// Append a deterministic loss node `Loss` with parents `[target, model]`.
pub fn attach_loss_node(net: &Network, spec: &LossSpec) -> Result<Network> {
    if !net.with_role(Role::Loss).is_empty() {
        return Err(Error::InvalidNetwork("network already has a loss node".into()));
    }
    let g = net.model_node()?;
    let y = net.target_node()?;
    let (gv, yv) = (net.variable(g), net.variable(y));
    let parents = vec![y, g];
    let combos = mixed_radix_tuples(&net.radix(&parents));
    match spec.kind {
        LossKind::ZeroOne => {
            // compare values when both sides are numeric, labels otherwise
            let same = |ys: usize, gs: usize| match (yv.numeric_value(ys), gv.numeric_value(gs)) {
                (Some(a), Some(b)) => a == b,
                _ => yv.states()[ys] == gv.states()[gs],
            };
            let rows = combos
                .iter()
                .map(|t| if same(t[0], t[1]) { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
                .collect();
            net.with_node(Variable::new("Loss", &["0", "1"]).with_role(Role::Loss), parents, rows)
        }
        LossKind::SquaredError => {
            let (Some(yvals), Some(gvals)) = (yv.numeric_values(), gv.numeric_values()) else {
                return Err(Error::IncompatibleLossKind(
                    "squared error needs numeric model output and target".into(),
                ));
            };
            let losses: Vec<f64> = combos.iter().map(|t| (gvals[t[1]] - yvals[t[0]]).powi(2)).collect();
            let mut states = losses.clone();
            states.sort_by(f64::total_cmp);
            states.dedup();
            let rows = losses
                .iter()
                .map(|l| {
                    let mut row = vec![0.0; states.len()];
                    row[states.iter().position(|s| s == l).expect("loss is a state")] = 1.0;
                    row
                })
                .collect();
            net.with_node(numeric_variable("Loss", &states, Role::Loss), parents, rows)
        }
        LossKind::CrossEntropy => Err(Error::IncompatibleLossKind(
            "a network model node is a point prediction; cross-entropy needs class probabilities".into(),
        )),
    }
}
