//! Shapley values as the solution of a weighted least-squares problem over
//! coalition indicators, with the empty and grand coalitions imposed as
//! hard constraints (intercept `v(∅) = 0` and `Σφ = v(N)`).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution as _, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AttributionReport, Method, EXACT_PLAYER_CAP};
use crate::error::{Error, Result};
use crate::game::{Coalition, CoalitionGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionPlan {
    /// Draw `n_samples` coalitions from the Shapley kernel, in complementary
    /// pairs.
    Sampled { n_samples: usize, seed: u64 },
    /// Use every proper, non-empty coalition with its kernel weight.
    FullSupport,
}

/// Shapley kernel `(p-1) / (C(p,s) · s · (p-s))` for `0 < s < p`.
pub fn kernel_weight(p: usize, s: usize) -> f64 {
    assert!(0 < s && s < p, "kernel weight is defined for 0 < s < p");
    let mut binom = 1.0;
    for k in 0..s {
        binom = binom * (p - k) as f64 / (k + 1) as f64;
    }
    (p - 1) as f64 / (binom * s as f64 * (p - s) as f64)
}

/// Coalitions with their regression weights.
fn design(p: usize, plan: RegressionPlan) -> Result<BTreeMap<u64, f64>> {
    let mut rows = BTreeMap::new();
    match plan {
        RegressionPlan::FullSupport => {
            if p > EXACT_PLAYER_CAP {
                return Err(Error::TooManyPlayers {
                    players: p,
                    cap: EXACT_PLAYER_CAP,
                });
            }
            for m in 1..(1u64 << p) - 1 {
                rows.insert(m, kernel_weight(p, m.count_ones() as usize));
            }
        }
        RegressionPlan::Sampled { n_samples, seed } => {
            if n_samples < 2 * p {
                return Err(Error::InvalidPlan(format!(
                    "{n_samples} samples for {p} players; need at least {}",
                    2 * p
                )));
            }
            // total kernel mass of size s is (p-1) / (s (p-s))
            let size_mass: Vec<f64> = (1..p).map(|s| (p - 1) as f64 / (s * (p - s)) as f64).collect();
            let sizes = WeightedIndex::new(&size_mass).expect("kernel mass is positive");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // antithetic pairs: each draw also contributes its complement,
            // which has the same kernel weight; an odd budget ends with a
            // single unpaired draw
            let full = (1u64 << p) - 1;
            let mut remaining = n_samples;
            while remaining > 0 {
                let s = sizes.sample(&mut rng) + 1;
                let members = rand::seq::index::sample(&mut rng, p, s);
                let mask = members.iter().fold(0u64, |m, i| m | (1 << i));
                // duplicates are merged; their multiplicity is the weight
                *rows.entry(mask).or_insert(0.0) += 1.0;
                remaining -= 1;
                if remaining > 0 {
                    *rows.entry(full & !mask).or_insert(0.0) += 1.0;
                    remaining -= 1;
                }
            }
        }
    }
    Ok(rows)
}

pub fn shapley_regression<G: CoalitionGame + ?Sized>(game: &G, plan: RegressionPlan) -> Result<AttributionReport> {
    let p = game.n_players();
    if p > 63 {
        return Err(Error::TooManyPlayers { players: p, cap: 63 });
    }
    let grand = if p == 0 { 0.0 } else { game.value(Coalition::full(p))? };
    let method = |distinct| match plan {
        RegressionPlan::Sampled { n_samples, seed } => Method::Regression {
            n_samples: Some(n_samples),
            seed: Some(seed),
            distinct_coalitions: distinct,
        },
        RegressionPlan::FullSupport => Method::Regression {
            n_samples: None,
            seed: None,
            distinct_coalitions: distinct,
        },
    };
    if p <= 1 {
        let phi = if p == 1 { vec![grand] } else { Vec::new() };
        return Ok(AttributionReport::new(game, phi, grand, method(0)));
    }

    let rows = design(p, plan)?;
    if rows.len() < p {
        return Err(Error::SingularSystem {
            distinct: rows.len(),
            players: p,
        });
    }
    let masks: Vec<u64> = rows.keys().copied().collect();
    let values: Vec<f64> = masks
        .par_iter()
        .map(|m| game.value(Coalition(*m)))
        .collect::<Result<_>>()?;

    // eliminate φ_p = v(N) - Σ_{i<p} φ_i, leaving p-1 free coefficients
    let last = p - 1;
    let k = p - 1;
    let mut ata = DMatrix::<f64>::zeros(k, k);
    let mut atb = DVector::<f64>::zeros(k);
    for ((mask, w), v) in rows.iter().zip(&values) {
        let z_last = f64::from(u8::from(mask >> last & 1 == 1));
        let a: Vec<f64> = (0..k)
            .map(|i| f64::from(u8::from(mask >> i & 1 == 1)) - z_last)
            .collect();
        let b = v - z_last * grand;
        for i in 0..k {
            if a[i] == 0.0 {
                continue;
            }
            atb[i] += w * a[i] * b;
            for j in 0..k {
                ata[(i, j)] += w * a[i] * a[j];
            }
        }
    }
    let singular = || Error::SingularSystem {
        distinct: rows.len(),
        players: p,
    };
    let solution = ata.cholesky().ok_or_else(singular)?.solve(&atb);
    if solution.iter().any(|x| !x.is_finite()) {
        return Err(singular());
    }
    let mut phi: Vec<f64> = solution.iter().copied().collect();
    phi.push(grand - phi.iter().sum::<f64>());
    Ok(AttributionReport::new(game, phi, grand, method(rows.len())))
}
