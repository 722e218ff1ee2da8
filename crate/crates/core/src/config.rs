use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Decision thresholds shared by the sampled classifiers and the
/// regularity engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Fitted order at or above which a family counts as negligible.
    pub k_reg: f64,
    /// Fitted order at or below which a spectrum counts as non-decaying.
    pub n_sing: f64,
    /// Dead band around zero slope.
    pub tau_fast: f64,
    /// Number of finest ladder entries that define "eventually".
    pub window: usize,
    /// Minimum fit quality for a fitted slope to decide anything.
    pub min_fit_quality: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { k_reg: 8.0, n_sing: 2.0, tau_fast: 0.05, window: 3, min_fit_quality: 0.9 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), CoreError> {
        let bad = |m: &str| Err(CoreError::InvalidThresholds(m.to_string()));
        if !(self.k_reg > 0.0 && self.n_sing > 0.0 && self.tau_fast > 0.0) {
            return bad("thresholds must be positive");
        }
        if self.k_reg <= self.n_sing {
            return bad("k_reg must exceed n_sing");
        }
        if self.window == 0 {
            return bad("stabilization window must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.min_fit_quality) {
            return bad("min_fit_quality must lie in [0, 1]");
        }
        Ok(())
    }
}
