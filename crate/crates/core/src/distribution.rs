//! Finite discrete distributions over a random variable's support.
//!
//! A distribution is either *exact* (the law of a network node, computed by
//! enumeration) or *empirical* (weighted samples, e.g. model outputs over a
//! background dataset). The flag only changes how the cumulative paired
//! entropy is integrated; every other measure treats both the same way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance within which weights are accepted as summing to one.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;
/// Tolerance within which weights are silently renormalized.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Numeric(Vec<f64>),
    Labels(Vec<String>),
}

impl Support {
    pub fn len(&self) -> usize {
        match self {
            Support::Numeric(v) => v.len(),
            Support::Labels(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    support: Support,
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    empirical: bool,
}

impl Distribution {
    /// Exact law over numeric outcomes.
    pub fn numeric(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::build(Support::Numeric(values), weights, false)
    }

    /// Exact law over labelled (possibly non-numeric) outcomes.
    pub fn labels(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        Self::build(Support::Labels(labels), weights, false)
    }

    pub fn point(value: f64) -> Self {
        Distribution {
            support: Support::Numeric(vec![value]),
            weights: vec![1.0],
            empirical: false,
        }
    }

    /// Empirical law of weighted numeric samples. Weights need not be
    /// normalized; duplicates are kept as separate atoms.
    pub fn from_samples(values: Vec<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let weights = weights.unwrap_or_else(|| vec![1.0; values.len()]);
        if weights.len() != values.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} samples but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution(format!("non-finite sample {v}")));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Distribution {
            support: Support::Numeric(values),
            weights: weights.into_iter().map(|w| w / total).collect(),
            empirical: true,
        })
    }

    fn build(support: Support, mut weights: Vec<f64>, empirical: bool) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptyInput);
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} outcomes but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if let Support::Numeric(v) = &support {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidDistribution("non-finite outcome".into()));
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        let gap = (total - 1.0).abs();
        if gap > RENORMALIZE_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        if gap > WEIGHT_TOLERANCE {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Ok(Distribution {
            support,
            weights,
            empirical,
        })
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_empirical(&self) -> bool {
        self.empirical
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn numeric_values(&self) -> Result<&[f64]> {
        match &self.support {
            Support::Numeric(v) => Ok(v),
            Support::Labels(l) => Err(Error::NonNumericSupport(l.join(","))),
        }
    }

    /// Probability of each distinct outcome, merging repeated atoms.
    /// Order follows first appearance.
    pub fn atoms(&self) -> Vec<f64> {
        match &self.support {
            Support::Numeric(values) => {
                let mut seen: Vec<(f64, f64)> = Vec::new();
                for (v, w) in values.iter().zip(&self.weights) {
                    match seen.iter_mut().find(|(u, _)| u == v) {
                        Some(slot) => slot.1 += w,
                        None => seen.push((*v, *w)),
                    }
                }
                seen.into_iter().map(|(_, w)| w).collect()
            }
            Support::Labels(labels) => {
                let mut seen: Vec<(&str, f64)> = Vec::new();
                for (l, w) in labels.iter().zip(&self.weights) {
                    match seen.iter_mut().find(|(u, _)| u == l) {
                        Some(slot) => slot.1 += w,
                        None => seen.push((l.as_str(), *w)),
                    }
                }
                seen.into_iter().map(|(_, w)| w).collect()
            }
        }
    }
}
