//! Seeded synthetic datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{Column, ColumnKind, Dataset};

/// Weights of the numeric features `x1..x5` in [`six_feature`].
pub const SIX_FEATURE_WEIGHTS: [f64; 5] = [3.0, 1.5, -1.0, 0.5, 0.0];
/// Additive effect of each level of the categorical `x6`.
pub const SIX_FEATURE_LEVELS: [(&str, f64); 3] = [("a", -1.0), ("b", 0.0), ("c", 2.0)];

/// Five independent uniform(-1, 1) numerics, one categorical and a noisy
/// additive target `y`.
pub fn six_feature(rows: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Column> = (1..=5)
        .map(|i| Column {
            name: format!("x{i}"),
            kind: ColumnKind::Numeric,
        })
        .collect();
    columns.push(Column {
        name: "x6".into(),
        kind: ColumnKind::Categorical(SIX_FEATURE_LEVELS.iter().map(|(l, _)| l.to_string()).collect()),
    });
    columns.push(Column {
        name: "y".into(),
        kind: ColumnKind::Numeric,
    });
    let data = (0..rows)
        .map(|_| {
            let mut row: Vec<f64> = (0..5).map(|_| round3(rng.gen_range(-1.0..1.0))).collect();
            let level = rng.gen_range(0..SIX_FEATURE_LEVELS.len());
            let noise = rng.gen_range(-0.1..0.1);
            let y = row.iter().zip(SIX_FEATURE_WEIGHTS).map(|(x, w)| x * w).sum::<f64>()
                + SIX_FEATURE_LEVELS[level].1
                + noise;
            row.push(level as f64);
            row.push(round3(y));
            row
        })
        .collect();
    Dataset::new(columns, data, Some("y"))
}

/// Independent uniform(-1, 1) features `x1..xp` with `y = Σ w_i x_i`.
pub fn linear(weights: &[f64], rows: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Column> = (1..=weights.len())
        .map(|i| Column {
            name: format!("x{i}"),
            kind: ColumnKind::Numeric,
        })
        .collect();
    columns.push(Column {
        name: "y".into(),
        kind: ColumnKind::Numeric,
    });
    let data = (0..rows)
        .map(|_| {
            let mut row: Vec<f64> = weights.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            row.push(row.iter().zip(weights).map(|(x, w)| x * w).sum());
            row
        })
        .collect();
    Dataset::new(columns, data, Some("y"))
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}
