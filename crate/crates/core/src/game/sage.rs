use std::collections::BTreeMap;

use super::{Coalition, CoalitionGame, Convention, GameInfo, Nature, Scope, TargetKind, ValueCache};
use crate::error::{Error, Result};
use crate::measures::expectation;
use crate::model::LossKind;
use crate::network::{Assignment, Network, VarId};

/// Local SAGE-style game: the loss of the mean prediction,
/// `v(S) = l(y, E[g | x_S]) - l(y, E[g])`, with the inner expectation taken
/// under the chosen nature. Players are the features.
#[derive(Debug)]
pub struct SageLocalGame {
    net: Network,
    players: Vec<VarId>,
    model: VarId,
    y: f64,
    loss: LossKind,
    nature: Nature,
    point: Assignment,
    baseline_loss: f64,
    cache: ValueCache,
}

impl SageLocalGame {
    pub fn new(net: &Network, point: &Assignment, nature: Nature, loss: LossKind) -> Result<Self> {
        net.check_assignment(point)?;
        let model = net.model_node()?;
        let target = net.target_node()?;
        let gvar = net.variable(model);
        let gvals = gvar
            .numeric_values()
            .ok_or_else(|| Error::NonNumericSupport(gvar.name().to_string()))?;
        match loss {
            LossKind::ZeroOne => {
                return Err(Error::IncompatibleLossKind(
                    "zero-one loss of a mean prediction is not meaningful".into(),
                ))
            }
            LossKind::CrossEntropy if gvals.iter().any(|v| *v != 0.0 && *v != 1.0) => {
                return Err(Error::IncompatibleLossKind(
                    "cross-entropy reads E[g] as P(y = 1) and needs a 0/1 model".into(),
                ))
            }
            _ => {}
        }
        let players = net.features();
        for v in players.iter().chain([&target]) {
            if !point.contains(*v) {
                return Err(Error::UnboundVariable(net.name(*v).to_string()));
            }
        }
        let yvar = net.variable(target);
        let y = yvar
            .numeric_value(point.get(target).expect("checked above"))
            .ok_or_else(|| Error::NonNumericSupport(yvar.name().to_string()))?;
        let mut game = SageLocalGame {
            net: net.clone(),
            players,
            model,
            y,
            loss,
            nature,
            point: point.clone(),
            baseline_loss: 0.0,
            cache: ValueCache::default(),
        };
        game.baseline_loss = game.loss_of_mean(&Assignment::new())?;
        Ok(game)
    }

    fn loss_of_mean(&self, given: &Assignment) -> Result<f64> {
        let mean = expectation(&self.net.query(self.nature.mode(), given, self.model)?)?;
        match self.loss {
            LossKind::CrossEntropy => LossKind::binary_cross_entropy(self.y, mean),
            kind => kind.of_prediction(self.y, mean),
        }
    }
}

impl CoalitionGame for SageLocalGame {
    fn n_players(&self) -> usize {
        self.players.len()
    }

    fn value(&self, s: Coalition) -> Result<f64> {
        if s.is_empty() {
            return Ok(0.0);
        }
        self.cache.get_or_compute(s, || {
            let given: Assignment = s
                .members()
                .map(|i| (self.players[i], self.point.get(self.players[i]).expect("bound")))
                .collect();
            Ok(self.loss_of_mean(&given)? - self.baseline_loss)
        })
    }

    fn player_names(&self) -> Vec<String> {
        self.players.iter().map(|p| self.net.name(*p).to_string()).collect()
    }

    fn info(&self) -> GameInfo {
        GameInfo {
            scope: Scope::Local,
            nature: Some(self.nature),
            measure: None,
            target: Some(TargetKind::ModelOutput),
            entropy_base: None,
            convention: Convention::LossOfMean,
            baseline: self.baseline_loss,
            instance: Some(
                self.point
                    .iter()
                    .map(|(v, s)| (self.net.name(v).to_string(), self.net.variable(v).states()[s].clone()))
                    .collect::<BTreeMap<_, _>>(),
            ),
        }
    }
}
