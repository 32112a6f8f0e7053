//! Model sensitivity to masking its most important inputs.
//!
//! A masked input is replaced by the value from a random background row
//! (resampling from the marginal), never by a constant. Each row draws its
//! background rows once and reuses them at every step, so step `j` differs
//! from step `j - 1` only by the extra masked feature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, ModelHandle};

pub const DEFAULT_RESAMPLES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub step: usize,
    /// Mean `|g(masked) - g(original)|` over rows and resamples.
    pub mean_abs_delta: f64,
    /// How many rows masked each feature by this step.
    pub masked_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub method: String,
    pub features: Vec<String>,
    /// Features by decreasing mean |φ| over rows.
    pub global_ranking: Vec<usize>,
    pub points: Vec<SensitivityPoint>,
    pub resamples: usize,
    pub seed: u64,
}

/// Stream seed for one row.
fn row_seed(seed: u64, row: usize) -> u64 {
    seed ^ (row as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Feature order for one row: decreasing |φ|, ties by index.
pub fn row_ranking(phi: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..phi.len()).collect();
    idx.sort_by(|a, b| phi[*b].abs().total_cmp(&phi[*a].abs()));
    idx
}

pub fn sensitivity_sweep(
    model: &ModelHandle,
    data: &Dataset,
    attributions: &[Vec<f64>],
    background: &Dataset,
    steps: usize,
    seed: u64,
) -> Result<SensitivityCurve> {
    sensitivity_sweep_with(model, data, attributions, background, steps, DEFAULT_RESAMPLES, seed)
}

pub fn sensitivity_sweep_with(
    model: &ModelHandle,
    data: &Dataset,
    attributions: &[Vec<f64>],
    background: &Dataset,
    steps: usize,
    resamples: usize,
    seed: u64,
) -> Result<SensitivityCurve> {
    let p = model.inputs().len();
    if background.n_rows() == 0 {
        return Err(Error::EmptyBackground);
    }
    if steps > p {
        return Err(Error::InvalidArgument(format!("{steps} steps for {p} features")));
    }
    if resamples == 0 {
        return Err(Error::InvalidArgument("at least one resample is needed".into()));
    }
    let rows = data.select(model.inputs())?;
    let back = background.select(model.inputs())?;
    if attributions.len() != rows.len() || attributions.iter().any(|a| a.len() < p) {
        return Err(Error::InvalidArgument(format!(
            "attributions must have {} rows of at least {p} columns",
            rows.len()
        )));
    }

    // per row: |Δ| summed over resamples at each step, and its masking order
    let per_row: Vec<(Vec<f64>, Vec<usize>)> = rows
        .par_iter()
        .enumerate()
        .map(|(r, x)| {
            let mut rng = ChaCha8Rng::seed_from_u64(row_seed(seed, r));
            let draws: Vec<usize> = (0..resamples).map(|_| rng.gen_range(0..back.len())).collect();
            let order = row_ranking(&attributions[r][..p]);
            let base = model.evaluate(x)?;
            let mut deltas = vec![0.0; steps + 1];
            for j in 1..=steps {
                let masked = &order[..j];
                let points: Vec<Vec<f64>> = draws
                    .iter()
                    .map(|&b| {
                        let mut z = x.clone();
                        for &f in masked {
                            z[f] = back[b][f];
                        }
                        z
                    })
                    .collect();
                let outs = model.evaluate_batch(&points)?;
                deltas[j] = outs.iter().map(|o| (o - base).abs()).sum::<f64>();
            }
            Ok((deltas, order))
        })
        .collect::<Result<_>>()?;

    let n = rows.len().max(1) as f64;
    let points = (0..=steps)
        .map(|j| {
            let mut masked_counts = vec![0; p];
            for (_, order) in &per_row {
                for &f in &order[..j] {
                    masked_counts[f] += 1;
                }
            }
            SensitivityPoint {
                step: j,
                mean_abs_delta: per_row.iter().map(|(d, _)| d[j]).sum::<f64>() / (n * resamples as f64),
                masked_counts,
            }
        })
        .collect();
    let mean_abs: Vec<f64> = (0..p)
        .map(|f| attributions.iter().map(|a| a[f].abs()).sum::<f64>() / n)
        .collect();
    Ok(SensitivityCurve {
        method: String::new(),
        features: model.inputs().to_vec(),
        global_ranking: row_ranking(&mean_abs),
        points,
        resamples,
        seed,
    })
}
