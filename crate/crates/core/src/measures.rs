//! Measures of interpretation over distributions, and the information
//! quantities derived from them.
//!
//! The cumulative paired Shannon entropy of a numeric random variable `A` is
//! `∫ h(F(λ)) dλ` with `h(p) = -p ln p - (1-p) ln (1-p)` and `F` the CDF of
//! `A`. The integrand vanishes outside `[min, max]` of the support, so the
//! integral is finite for any finite discrete law and zero for a constant.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::network::{Assignment, Network, QueryMode, VarId};

pub const DEFAULT_RIEMANN_STEPS: usize = 512;

/// Floating-point slack tolerated before an information quantity or a
/// variance is clipped to zero.
pub const CLIP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    ExpectedValue,
    Variance,
    ShannonEntropy,
    CumulativePairedEntropy,
}

impl MeasureKind {
    /// Uncertainty measures shrink under conditioning; their characteristic
    /// functions are written as `ξ(target) - ξ(target | ...)`.
    pub fn is_uncertainty(self) -> bool {
        !matches!(self, MeasureKind::ExpectedValue)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            MeasureKind::ExpectedValue => "ev",
            MeasureKind::Variance => "var",
            MeasureKind::ShannonEntropy => "entropy",
            MeasureKind::CumulativePairedEntropy => "cpe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub kind: MeasureKind,
    pub entropy_base: f64,
    pub riemann_steps: usize,
}

impl Measure {
    pub fn new(kind: MeasureKind) -> Self {
        Measure {
            kind,
            entropy_base: E,
            riemann_steps: DEFAULT_RIEMANN_STEPS,
        }
    }

    pub fn expected_value() -> Self {
        Self::new(MeasureKind::ExpectedValue)
    }

    pub fn variance() -> Self {
        Self::new(MeasureKind::Variance)
    }

    pub fn shannon_entropy() -> Self {
        Self::new(MeasureKind::ShannonEntropy)
    }

    pub fn cumulative_paired_entropy() -> Self {
        Self::new(MeasureKind::CumulativePairedEntropy)
    }

    pub fn with_base(mut self, base: f64) -> Result<Self> {
        self.entropy_base = base;
        self.validate()?;
        Ok(self)
    }

    pub fn with_riemann_steps(mut self, steps: usize) -> Result<Self> {
        self.riemann_steps = steps;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.riemann_steps < 2 {
            return Err(Error::InvalidMeasure(format!(
                "riemann_steps must be at least 2, got {}",
                self.riemann_steps
            )));
        }
        if !(self.entropy_base.is_finite() && self.entropy_base > 1.0) {
            return Err(Error::InvalidMeasure(format!(
                "entropy base must exceed 1, got {}",
                self.entropy_base
            )));
        }
        Ok(())
    }

    /// Apply the measure. Empirical distributions integrate the cumulative
    /// paired entropy on the Riemann grid, exact ones use the jump-point sum.
    pub fn apply(&self, d: &Distribution) -> Result<f64> {
        match self.kind {
            MeasureKind::ExpectedValue => expectation(d),
            MeasureKind::Variance => variance(d),
            MeasureKind::ShannonEntropy => Ok(shannon_entropy(d, self.entropy_base)),
            MeasureKind::CumulativePairedEntropy => {
                if d.is_empirical() {
                    cumulative_paired_entropy_riemann(d, self.riemann_steps, self.entropy_base)
                } else {
                    cumulative_paired_entropy(d, self.entropy_base)
                }
            }
        }
    }
}

pub fn expectation(d: &Distribution) -> Result<f64> {
    let values = d.numeric_values()?;
    Ok(values.iter().zip(d.weights()).map(|(v, w)| v * w).sum())
}

/// `E[V²] - E[V]²`, evaluated in centered form so it never drops below 0.
pub fn variance(d: &Distribution) -> Result<f64> {
    let values = d.numeric_values()?;
    let mean = expectation(d)?;
    let var: f64 = values
        .iter()
        .zip(d.weights())
        .map(|(v, w)| w * (v - mean) * (v - mean))
        .sum();
    Ok(var.max(0.0))
}

pub fn shannon_entropy(d: &Distribution, base: f64) -> f64 {
    entropy_of(&d.atoms(), base)
}

pub(crate) fn entropy_of(probs: &[f64], base: f64) -> f64 {
    let nats: f64 = probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum();
    (nats / base.ln()).max(0.0)
}

/// Binary entropy in nats with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        term(p) + term(1.0 - p)
    }
}

/// Exact cumulative paired entropy of a finite discrete law: the CDF is a
/// step function, so the integral is a sum of `h(F) × gap` over the jumps.
pub fn cumulative_paired_entropy(d: &Distribution, base: f64) -> Result<f64> {
    let values = d.numeric_values()?;
    Ok(cpe_exact(values, d.weights()) / base.ln())
}

pub(crate) fn cpe_exact(values: &[f64], weights: &[f64]) -> f64 {
    let mut atoms: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cdf = 0.0;
    let mut total = 0.0;
    for pair in atoms.windows(2) {
        cdf += pair[0].1;
        total += binary_entropy(cdf.min(1.0)) * (pair[1].0 - pair[0].0);
    }
    total
}

/// Left Riemann sum of `h(F(λ))` on `steps` equally spaced grid points
/// spanning `[min, max]` of the support.
pub fn cumulative_paired_entropy_riemann(d: &Distribution, steps: usize, base: f64) -> Result<f64> {
    if steps < 2 {
        return Err(Error::InvalidMeasure(format!("riemann_steps must be at least 2, got {steps}")));
    }
    let values = d.numeric_values()?;
    let mut atoms: Vec<(f64, f64)> = values.iter().copied().zip(d.weights().iter().copied()).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lo = atoms[0].0;
    let hi = atoms[atoms.len() - 1].0;
    if hi <= lo {
        return Ok(0.0);
    }
    let delta = (hi - lo) / (steps - 1) as f64;
    let mut next = 0;
    let mut cdf = 0.0;
    let mut total = 0.0;
    for j in 0..steps - 1 {
        let lambda = lo + j as f64 * delta;
        while next < atoms.len() && atoms[next].0 <= lambda {
            cdf += atoms[next].1;
            next += 1;
        }
        total += binary_entropy(cdf.min(1.0));
    }
    Ok(total * delta / base.ln())
}

/// `ξ` applied to the law of `target` once `given` is fixed per `mode`.
pub fn conditional_measure(
    net: &Network,
    target: VarId,
    mode: QueryMode,
    given: &Assignment,
    measure: &Measure,
) -> Result<f64> {
    measure.apply(&net.query(mode, given, target)?)
}

/// Split a joint table over `a ∪ {b}` (b last) into the marginal of `a` and
/// the conditional law of `b` within each `a` cell.
pub(crate) fn conditional_slices(table: Vec<(Vec<usize>, f64)>) -> Vec<(f64, Vec<(usize, f64)>)> {
    let mut slices: Vec<(Vec<usize>, f64, Vec<(usize, f64)>)> = Vec::new();
    for (mut tuple, p) in table {
        let b = tuple.pop().expect("table includes b");
        match slices.last_mut() {
            Some((key, mass, cells)) if *key == tuple => {
                *mass += p;
                cells.push((b, p));
            }
            _ => slices.push((tuple, p, vec![(b, p)])),
        }
    }
    slices
        .into_iter()
        .map(|(_, mass, cells)| (mass, cells.into_iter().map(|(b, p)| (b, p / mass)).collect()))
        .collect()
}

/// `I(X_a; X_b) = H(b) - E_a[H(b | a)]` in nats.
pub fn mutual_information(net: &Network, a: &[VarId], b: VarId) -> Result<f64> {
    let marginal = net.joint_table(&Assignment::new(), &[b])?;
    let h_b = entropy_of(&marginal.iter().map(|(_, p)| *p).collect::<Vec<_>>(), E);
    let mut vars = a.to_vec();
    vars.push(b);
    let table = net.joint_table(&Assignment::new(), &vars)?;
    let h_cond: f64 = conditional_slices(table)
        .into_iter()
        .map(|(mass, cells)| mass * entropy_of(&cells.iter().map(|(_, p)| *p).collect::<Vec<_>>(), E))
        .sum();
    Ok(clip(h_b - h_cond))
}

/// `𝓘(X_a → X_b) = 𝓔(b) - E_a[𝓔(b | a)]` in nats. Not symmetric.
pub fn cumulative_paired_mutual_information(net: &Network, a: &[VarId], b: VarId) -> Result<f64> {
    let var = net.variable(b);
    let values = var
        .numeric_values()
        .ok_or_else(|| Error::NonNumericSupport(var.name().to_string()))?;
    let cpe_of = |cells: &[(usize, f64)]| {
        let v: Vec<f64> = cells.iter().map(|(s, _)| values[*s]).collect();
        let w: Vec<f64> = cells.iter().map(|(_, p)| *p).collect();
        cpe_exact(&v, &w)
    };
    let marginal: Vec<(usize, f64)> = net
        .joint_table(&Assignment::new(), &[b])?
        .into_iter()
        .map(|(t, p)| (t[0], p))
        .collect();
    let total = cpe_of(&marginal);
    let mut vars = a.to_vec();
    vars.push(b);
    let table = net.joint_table(&Assignment::new(), &vars)?;
    let cond: f64 = conditional_slices(table)
        .into_iter()
        .map(|(mass, cells)| mass * cpe_of(&cells))
        .sum();
    Ok(clip(total - cond))
}

fn clip(x: f64) -> f64 {
    if x < 0.0 && x > -CLIP_TOLERANCE {
        0.0
    } else {
        x
    }
}
