//! Shapley values of coalition games: exact enumeration and constrained
//! Shapley-kernel regression.

mod regression;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Coalition, CoalitionGame, GameInfo};

pub use regression::{kernel_weight, shapley_regression, RegressionPlan};

/// Exact mode refuses games with more players than this.
pub const EXACT_PLAYER_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Method {
    Exact,
    Regression {
        #[serde(skip_serializing_if = "Option::is_none")]
        n_samples: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        distinct_coalitions: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub players: Vec<String>,
    pub phi: Vec<f64>,
    pub baseline: f64,
    pub grand_value: f64,
    /// `Σφ - v(N)`.
    pub efficiency_residual: f64,
    pub method: Method,
    pub metadata: GameInfo,
}

impl AttributionReport {
    pub(crate) fn new<G: CoalitionGame + ?Sized>(game: &G, phi: Vec<f64>, grand_value: f64, method: Method) -> Self {
        let info = game.info();
        AttributionReport {
            players: game.player_names(),
            efficiency_residual: phi.iter().sum::<f64>() - grand_value,
            phi,
            baseline: info.baseline,
            grand_value,
            method,
            metadata: info,
        }
    }

    /// Player indices by decreasing |φ| (stable on ties).
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.phi.len()).collect();
        idx.sort_by(|a, b| self.phi[*b].abs().total_cmp(&self.phi[*a].abs()));
        idx
    }
}

/// `s!(n-s-1)!/n!`, computed as `1 / (n · C(n-1, s))`.
pub fn shapley_weight(n: usize, s: usize) -> f64 {
    let mut binom = 1.0;
    for k in 0..s {
        binom = binom * (n - 1 - k) as f64 / (k + 1) as f64;
    }
    1.0 / (n as f64 * binom)
}

/// All `2^n` coalition values, evaluated in parallel.
pub(crate) fn all_values<G: CoalitionGame + ?Sized>(game: &G) -> Result<Vec<f64>> {
    let n = game.n_players();
    (0..1u64 << n)
        .into_par_iter()
        .map(|m| game.value(Coalition(m)))
        .collect()
}

pub fn shapley_exact<G: CoalitionGame + ?Sized>(game: &G) -> Result<AttributionReport> {
    let n = game.n_players();
    if n > EXACT_PLAYER_CAP {
        return Err(Error::TooManyPlayers {
            players: n,
            cap: EXACT_PLAYER_CAP,
        });
    }
    if n == 0 {
        return Ok(AttributionReport::new(game, Vec::new(), 0.0, Method::Exact));
    }
    let v = all_values(game)?;
    let weights: Vec<f64> = (0..n).map(|s| shapley_weight(n, s)).collect();
    let phi: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let bit = 1usize << i;
            (0..v.len())
                .filter(|m| m & bit == 0)
                .map(|m| weights[m.count_ones() as usize] * (v[m | bit] - v[m]))
                .sum()
        })
        .collect();
    Ok(AttributionReport::new(game, phi, v[v.len() - 1], Method::Exact))
}

/// `v(S ∪ {i}) - v(S)`.
pub fn marginal_contribution<G: CoalitionGame + ?Sized>(game: &G, i: usize, s: Coalition) -> Result<f64> {
    if i >= game.n_players() {
        return Err(Error::InvalidArgument(format!(
            "player {i} outside a {}-player game",
            game.n_players()
        )));
    }
    if s.contains(i) {
        return Err(Error::PlayerInCoalition(i));
    }
    Ok(game.value(s.with(i))? - game.value(s)?)
}
