use std::collections::BTreeMap;

use super::{Coalition, CoalitionGame, Convention, GameInfo, Nature, Scope, TargetKind, ValueCache};
use crate::error::{Error, Result};
use crate::measures::{conditional_slices, Measure, MeasureKind};
use crate::network::{Assignment, Network, VarId};

/// Game over the nodes of a causal Bayesian network.
///
/// Local games at a point `x` use
/// `m(x_S) = μ(T | x_S) - E[T]` for the expected value and
/// `m(x_S) = ξ(T) - ξ(T | x_S)` for the uncertainty measures, where `| x_S`
/// is conditioning, marginal pinning or intervention depending on the
/// nature. Global games average the local reduction over the observational
/// law of `X_S`: `M(S) = ξ(T) - E_{x_S}[ξ(T | x_S)]`, which is the mutual
/// information, the variance of the conditional mean, or the cumulative
/// paired mutual information under observational conditioning.
#[derive(Debug)]
pub struct NetworkGame {
    net: Network,
    players: Vec<VarId>,
    target: VarId,
    target_kind: TargetKind,
    nature: Nature,
    measure: Measure,
    instance: Option<Assignment>,
    baseline: f64,
    cache: ValueCache,
}

impl NetworkGame {
    pub fn local(
        net: &Network,
        target_kind: TargetKind,
        point: &Assignment,
        nature: Nature,
        measure: Measure,
    ) -> Result<Self> {
        net.check_assignment(point)?;
        let game = Self::build(net, target_kind, Some(point.clone()), nature, measure)?;
        for p in &game.players {
            if !point.contains(*p) {
                return Err(Error::UnboundVariable(net.name(*p).to_string()));
            }
        }
        Ok(game)
    }

    pub fn global(net: &Network, target_kind: TargetKind, nature: Nature, measure: Measure) -> Result<Self> {
        if measure.kind == MeasureKind::ExpectedValue {
            return Err(Error::ExpectedValueGlobalRejected);
        }
        Self::build(net, target_kind, None, nature, measure)
    }

    /// Local game on the model output; players are the features.
    pub fn model_output(net: &Network, point: &Assignment, nature: Nature, measure: Measure) -> Result<Self> {
        Self::local(net, TargetKind::ModelOutput, point, nature, measure)
    }

    /// Local game on the loss; players are the features followed by the
    /// label.
    pub fn loss_game(net: &Network, point: &Assignment, nature: Nature, measure: Measure) -> Result<Self> {
        Self::local(net, TargetKind::Loss, point, nature, measure)
    }

    fn build(
        net: &Network,
        target_kind: TargetKind,
        instance: Option<Assignment>,
        nature: Nature,
        measure: Measure,
    ) -> Result<Self> {
        measure.validate()?;
        let mut players = net.features();
        let target = match target_kind {
            TargetKind::ModelOutput => net.model_node()?,
            TargetKind::TargetY => net.target_node()?,
            TargetKind::Loss => {
                let l = net.loss_node()?;
                players.push(net.target_node()?);
                l
            }
        };
        let var = net.variable(target);
        if measure.kind != MeasureKind::ShannonEntropy && !var.is_numeric() {
            return Err(Error::NonNumericSupport(var.name().to_string()));
        }
        let baseline = measure.apply(&net.condition(&Assignment::new(), target)?)?;
        Ok(NetworkGame {
            net: net.clone(),
            players,
            target,
            target_kind,
            nature,
            measure,
            instance,
            baseline,
            cache: ValueCache::default(),
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn players(&self) -> &[VarId] {
        &self.players
    }

    pub fn target(&self) -> VarId {
        self.target
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    fn local_value(&self, point: &Assignment, s: Coalition) -> Result<f64> {
        let given: Assignment = s
            .members()
            .map(|i| {
                let v = self.players[i];
                (v, point.get(v).expect("players are bound"))
            })
            .collect();
        let xi = self.measure.apply(&self.net.query(self.nature.mode(), &given, self.target)?)?;
        Ok(match self.measure.kind {
            MeasureKind::ExpectedValue => xi - self.baseline,
            _ => self.baseline - xi,
        })
    }

    fn global_value(&self, s: Coalition) -> Result<f64> {
        let vars: Vec<VarId> = s.members().map(|i| self.players[i]).collect();
        let target_var = self.net.variable(self.target);
        let mut expected = 0.0;
        if self.nature == Nature::Observational {
            let mut with_target = vars.clone();
            with_target.push(self.target);
            let table = self.net.joint_table(&Assignment::new(), &with_target)?;
            for (mass, cells) in conditional_slices(table) {
                let mut weights = vec![0.0; target_var.cardinality()];
                for (state, p) in cells {
                    weights[state] += p;
                }
                expected += mass * self.measure.apply(&target_var.law(weights)?)?;
            }
        } else {
            // coalition values are weighted by their observational probability
            for (tuple, p) in self.net.joint_table(&Assignment::new(), &vars)? {
                let given: Assignment = vars.iter().copied().zip(tuple).collect();
                let law = self.net.query(self.nature.mode(), &given, self.target)?;
                expected += p * self.measure.apply(&law)?;
            }
        }
        Ok(self.baseline - expected)
    }
}

impl CoalitionGame for NetworkGame {
    fn n_players(&self) -> usize {
        self.players.len()
    }

    fn value(&self, s: Coalition) -> Result<f64> {
        if s.is_empty() {
            return Ok(0.0);
        }
        if s.0 >> self.players.len() != 0 {
            return Err(Error::InvalidArgument(format!("coalition {:#b} outside the player set", s.0)));
        }
        self.cache.get_or_compute(s, || match &self.instance {
            Some(point) => self.local_value(point, s),
            None => self.global_value(s),
        })
    }

    fn player_names(&self) -> Vec<String> {
        self.players.iter().map(|p| self.net.name(*p).to_string()).collect()
    }

    fn info(&self) -> GameInfo {
        let entropy = matches!(
            self.measure.kind,
            MeasureKind::ShannonEntropy | MeasureKind::CumulativePairedEntropy
        );
        GameInfo {
            scope: if self.instance.is_some() { Scope::Local } else { Scope::Global },
            nature: Some(self.nature),
            measure: Some(self.measure.kind),
            target: Some(self.target_kind),
            entropy_base: entropy.then_some(self.measure.entropy_base),
            convention: Convention::for_measure(self.measure.kind),
            baseline: self.baseline,
            instance: self.instance.as_ref().map(|a| {
                a.iter()
                    .map(|(v, s)| (self.net.name(v).to_string(), self.net.variable(v).states()[s].clone()))
                    .collect::<BTreeMap<_, _>>()
            }),
        }
    }
}
