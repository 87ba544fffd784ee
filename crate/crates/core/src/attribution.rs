//! The attribution vector shared by every explanation method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-feature attribution scores plus the intercept (the value of the
/// empty coalition for Shapley-style methods).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionVector {
    /// One value per feature, in feature-index order.
    pub phi: Vec<f64>,
    pub intercept: f64,
    /// Which method produced this, e.g. `"rankshap-kernel"`.
    pub method: String,
    /// Which value function the game used, e.g. `"ndcg"`.
    pub value_fn: String,
}

impl AttributionVector {
    pub fn new(
        phi: Vec<f64>,
        intercept: f64,
        method: impl Into<String>,
        value_fn: impl Into<String>,
    ) -> Result<Self> {
        if let Some(i) = phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteAttribution(i));
        }
        if !intercept.is_finite() {
            return Err(Error::NonFiniteAttribution(phi.len()));
        }
        Ok(AttributionVector {
            phi,
            intercept,
            method: method.into(),
            value_fn: value_fn.into(),
        })
    }

    /// Number of features covered.
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.phi.iter().sum()
    }

    pub fn expect_len(&self, m: usize) -> Result<()> {
        if self.phi.len() == m {
            Ok(())
        } else {
            Err(Error::AttributionSize {
                expected: m,
                got: self.phi.len(),
            })
        }
    }

    /// Feature indices sorted by |phi| descending, ties by lower index first.
    pub fn ranked_by_magnitude(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.phi.len()).collect();
        idx.sort_by(|&a, &b| {
            self.phi[b]
                .abs()
                .total_cmp(&self.phi[a].abs())
                .then(a.cmp(&b))
        });
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_values() {
        assert!(AttributionVector::new(vec![0.0, f64::NAN], 0.0, "m", "v").is_err());
        assert!(AttributionVector::new(vec![0.0], f64::INFINITY, "m", "v").is_err());
        assert!(AttributionVector::new(vec![0.1, -0.2], 0.3, "m", "v").is_ok());
    }

    #[test]
    fn magnitude_ranking_breaks_ties_by_index() {
        let a = AttributionVector::new(vec![0.5, -0.5, 1.0, 0.0], 0.0, "m", "v").unwrap();
        assert_eq!(a.ranked_by_magnitude(), vec![2, 0, 1, 3]);
        assert_eq!(a.sum(), 1.0);
    }
}
