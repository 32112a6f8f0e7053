//! Supervised clustering: k-means on attribution vectors, scored by how
//! much of a response's variance the cluster means explain.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
pub const RELATIVE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub r_squared: f64,
    /// Within-cluster sum of squares in attribution space.
    pub sse: f64,
    pub restarts: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
struct Fit {
    centers: Vec<Vec<f64>>,
    assignments: Vec<usize>,
    sse: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centers: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = dist2(center, x);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd iterations from the given centers. Empty clusters are re-seeded
/// with the point farthest from its center.
fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> Fit {
    let dim = points[0].len();
    let mut prev_sse = f64::INFINITY;
    let mut assignments = vec![0; points.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut dists = vec![0.0; points.len()];
        for (i, x) in points.iter().enumerate() {
            let (c, d) = nearest(&centers, x);
            assignments[i] = c;
            dists[i] = d;
        }
        let sse: f64 = dists.iter().sum();
        let mut sums = vec![vec![0.0; dim]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (x, &c) in points.iter().zip(&assignments) {
            counts[c] += 1;
            sums[c].iter_mut().zip(x).for_each(|(s, v)| *s += v);
        }
        for c in 0..centers.len() {
            if counts[c] == 0 {
                let far = (0..points.len())
                    .max_by(|a, b| dists[*a].total_cmp(&dists[*b]).then(b.cmp(a)))
                    .expect("points are non-empty");
                centers[c] = points[far].clone();
                dists[far] = 0.0;
            } else {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let converged = prev_sse.is_finite() && (prev_sse - sse).abs() <= RELATIVE_TOLERANCE * prev_sse.max(f64::MIN_POSITIVE);
        prev_sse = sse;
        if converged {
            break;
        }
    }
    // final assignment against the final centers
    let mut sse = 0.0;
    for (i, x) in points.iter().enumerate() {
        let (c, d) = nearest(&centers, x);
        assignments[i] = c;
        sse += d;
    }
    Fit {
        centers,
        assignments,
        sse,
    }
}

fn random_fits(points: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Vec<Fit> {
    (0..restarts.max(1))
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            let centers = sample(&mut rng, points.len(), k).iter().map(|i| points[i].clone()).collect();
            lloyd(points, centers)
        })
        .collect()
}

fn best(fits: Vec<Fit>) -> Fit {
    fits.into_iter()
        .reduce(|a, b| if b.sse < a.sse { b } else { a })
        .expect("at least one fit")
}

fn check(points: &[Vec<f64>], response: &[f64], k: usize) -> Result<()> {
    if points.len() != response.len() {
        return Err(Error::InvalidArgument(format!(
            "{} attribution rows for {} responses",
            points.len(),
            response.len()
        )));
    }
    if k == 0 || k > points.len() {
        return Err(Error::InvalidArgument(format!("k = {k} needs 1 <= k <= rows = {}", points.len())));
    }
    if points.iter().any(|p| p.len() != points[0].len()) {
        return Err(Error::InvalidArgument("attribution rows differ in length".into()));
    }
    Ok(())
}

/// `1 - SS_res / SS_tot` with each row predicted by its cluster's mean
/// response.
pub fn r_squared(response: &[f64], assignments: &[usize], k: usize) -> Result<f64> {
    let all = vec![0; response.len()];
    let ss_tot = residual_ss(response, &all, 1);
    if ss_tot <= 0.0 {
        return Err(Error::DegenerateResponse);
    }
    Ok(1.0 - residual_ss(response, assignments, k) / ss_tot)
}

fn residual_ss(response: &[f64], assignments: &[usize], k: usize) -> f64 {
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (y, &c) in response.iter().zip(assignments) {
        sums[c] += y;
        counts[c] += 1;
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, n)| s / (*n).max(1) as f64).collect();
    response.iter().zip(assignments).map(|(y, &c)| (y - means[c]).powi(2)).sum()
}

fn result(fit: Fit, response: &[f64], k: usize, restarts: usize, seed: u64) -> Result<ClusteringResult> {
    Ok(ClusteringResult {
        k,
        r_squared: r_squared(response, &fit.assignments, k)?,
        assignments: fit.assignments,
        sse: fit.sse,
        restarts,
        seed,
    })
}

pub fn supervised_clustering(
    attributions: &[Vec<f64>],
    response: &[f64],
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusteringResult> {
    check(attributions, response, k)?;
    let fit = best(random_fits(attributions, k, restarts, seed));
    result(fit, response, k, restarts, seed)
}

/// Clustering of `p + 1` dimensional loss attributions (features and label)
/// against the loss values.
pub fn loss_clustering(
    attributions: &[Vec<f64>],
    loss_values: &[f64],
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusteringResult> {
    supervised_clustering(attributions, loss_values, k, restarts, seed)
}

/// Results for `k = 1..=max_k`. Each `k + 1` fit also starts from the
/// `k` centers plus the worst-fit point; when no candidate explains at
/// least as much response variance as the previous partition, that
/// partition with the worst-fit point split off is kept instead, so the
/// reported R² never decreases.
pub fn cluster_sweep(
    attributions: &[Vec<f64>],
    response: &[f64],
    max_k: usize,
    restarts: usize,
    seed: u64,
) -> Result<Vec<ClusteringResult>> {
    check(attributions, response, max_k)?;
    let mut out: Vec<ClusteringResult> = Vec::with_capacity(max_k);
    let mut prev = best(random_fits(attributions, 1, restarts, seed));
    out.push(result(prev.clone(), response, 1, restarts, seed)?);
    for k in 2..=max_k {
        let worst = worst_point(attributions, &prev);
        let mut nested_centers = prev.centers.clone();
        nested_centers.push(attributions[worst].clone());
        let mut candidates = random_fits(attributions, k, restarts, seed.wrapping_add(k as u64 * 7919));
        candidates.push(lloyd(attributions, nested_centers.clone()));
        let fit = best(candidates);
        let r2 = r_squared(response, &fit.assignments, k)?;
        let prev_r2 = out.last().expect("k-1 result").r_squared;
        let fit = if r2 >= prev_r2 {
            fit
        } else {
            let mut assignments = prev.assignments.clone();
            assignments[worst] = k - 1;
            let sse = attributions
                .iter()
                .zip(&assignments)
                .map(|(x, &c)| dist2(x, &nested_centers[c]))
                .sum();
            Fit {
                centers: nested_centers,
                assignments,
                sse,
            }
        };
        out.push(result(fit.clone(), response, k, restarts, seed)?);
        prev = fit;
    }
    Ok(out)
}

/// Point farthest from its center, among points not alone in their cluster.
fn worst_point(points: &[Vec<f64>], fit: &Fit) -> usize {
    let mut sizes = vec![0usize; fit.centers.len()];
    for &c in &fit.assignments {
        sizes[c] += 1;
    }
    let mut worst = (usize::MAX, -1.0);
    for (i, x) in points.iter().enumerate() {
        let c = fit.assignments[i];
        if sizes[c] < 2 {
            continue;
        }
        let d = dist2(x, &fit.centers[c]);
        if d > worst.1 {
            worst = (i, d);
        }
    }
    if worst.0 == usize::MAX {
        0
    } else {
        worst.0
    }
}
