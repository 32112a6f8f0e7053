//! Coalition games: a player set and a characteristic function with
//! `v(∅) = 0`.

mod empirical;
mod network;
mod sage;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::MeasureKind;
use crate::network::QueryMode;

pub use empirical::EmpiricalGame;
pub use network::NetworkGame;
pub use sage::SageLocalGame;

/// Set of player indices as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Coalition(pub u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn full(n: usize) -> Coalition {
        assert!(n <= 64, "coalitions hold at most 64 players");
        Coalition(if n == 64 { u64::MAX } else { (1u64 << n) - 1 })
    }

    pub fn from_players(players: &[usize]) -> Coalition {
        Coalition(players.iter().fold(0, |m, &i| m | (1u64 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Coalition {
        Coalition(self.0 | (1u64 << i))
    }

    pub fn without(self, i: usize) -> Coalition {
        Coalition(self.0 & !(1u64 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }
}

/// How coalitions fix the values of their members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nature {
    Observational,
    ModelSpecific,
    Causal,
}

impl Nature {
    pub fn mode(self) -> QueryMode {
        match self {
            Nature::Observational => QueryMode::Condition,
            Nature::ModelSpecific => QueryMode::Pin,
            Nature::Causal => QueryMode::Do,
        }
    }
}

impl fmt::Display for Nature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Nature::Observational => "observational",
            Nature::ModelSpecific => "model_specific",
            Nature::Causal => "causal",
        })
    }
}

impl FromStr for Nature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "obs" | "observational" => Ok(Nature::Observational),
            "spec" | "model_specific" => Ok(Nature::ModelSpecific),
            "causal" => Ok(Nature::Causal),
            _ => Err(Error::InvalidArgument(format!("unknown nature `{s}`"))),
        }
    }
}

/// The random variable whose law the game summarizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    ModelOutput,
    Loss,
    TargetY,
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" | "model_output" => Ok(TargetKind::ModelOutput),
            "loss" => Ok(TargetKind::Loss),
            "y" | "target" => Ok(TargetKind::TargetY),
            _ => Err(Error::InvalidArgument(format!("unknown target `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Local,
    Global,
}

/// Sign convention of the characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `μ(target | S) - E[target]`
    ValueMinusBaseline,
    /// `ξ(target) - ξ(target | S)`
    BaselineMinusValue,
    /// `l(y, E[g | S]) - l(y, E[g])`
    LossOfMean,
    /// Values given explicitly.
    Explicit,
}

impl Convention {
    pub fn for_measure(kind: MeasureKind) -> Self {
        if kind.is_uncertainty() {
            Convention::BaselineMinusValue
        } else {
            Convention::ValueMinusBaseline
        }
    }
}

/// Provenance carried into attribution reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameInfo {
    pub scope: Scope,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nature: Option<Nature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_base: Option<f64>,
    pub convention: Convention,
    /// `E[target]` or `ξ(target)`; 0 for explicit tables.
    pub baseline: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<BTreeMap<String, String>>,
}

impl GameInfo {
    pub fn explicit() -> Self {
        GameInfo {
            scope: Scope::Local,
            nature: None,
            measure: None,
            target: None,
            entropy_base: None,
            convention: Convention::Explicit,
            baseline: 0.0,
            instance: None,
        }
    }
}

pub trait CoalitionGame: Sync {
    fn n_players(&self) -> usize;

    /// Characteristic function; `value(∅)` is 0.
    fn value(&self, s: Coalition) -> Result<f64>;

    fn player_names(&self) -> Vec<String> {
        (0..self.n_players()).map(|i| format!("p{i}")).collect()
    }

    fn info(&self) -> GameInfo {
        GameInfo::explicit()
    }
}

/// Memo of coalition values. Concurrent writers of one key compute the same
/// value, so a lost race is harmless.
#[derive(Debug, Default)]
pub(crate) struct ValueCache(RwLock<HashMap<u64, f64>>);

impl ValueCache {
    pub(crate) fn get_or_compute(&self, s: Coalition, compute: impl FnOnce() -> Result<f64>) -> Result<f64> {
        if let Some(v) = self.0.read().expect("cache lock").get(&s.0) {
            return Ok(*v);
        }
        let v = compute()?;
        self.0.write().expect("cache lock").insert(s.0, v);
        Ok(v)
    }
}

/// Game given by an explicit table of `2^n` values indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGame {
    n: usize,
    values: Vec<f64>,
    names: Option<Vec<String>>,
}

impl TableGame {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_power_of_two() || values.len() > 1 << 30 {
            return Err(Error::InvalidGame(format!("{} values is not 2^n", values.len())));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidGame(format!("v(∅) = {} but must be 0", values[0])));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGame("non-finite coalition value".into()));
        }
        Ok(TableGame {
            n: values.len().trailing_zeros() as usize,
            values,
            names: None,
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(Coalition) -> f64) -> Result<Self> {
        if n > 30 {
            return Err(Error::InvalidGame(format!("{n} players is too many for a table")));
        }
        Self::new((0..1u64 << n).map(|m| f(Coalition(m))).collect())
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n {
            return Err(Error::InvalidGame(format!("{} names for {} players", names.len(), self.n)));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl CoalitionGame for TableGame {
    fn n_players(&self) -> usize {
        self.n
    }

    fn value(&self, s: Coalition) -> Result<f64> {
        self.values
            .get(s.0 as usize)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("coalition {:#b} outside the player set", s.0)))
    }

    fn player_names(&self) -> Vec<String> {
        self.names
            .clone()
            .unwrap_or_else(|| (0..self.n).map(|i| format!("p{i}")).collect())
    }
}
