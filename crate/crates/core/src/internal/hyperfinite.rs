use serde::{Deserialize, Serialize};

use super::InternalFunctionSampled;
use crate::error::CoreError;
use crate::ladder::{EpsFamily, EpsLadder};

/// An internal set that is finite at every ladder entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperfiniteSet {
    pub ladder: EpsLadder,
    pub dim: usize,
    /// `points[i]` lists the elements at ladder entry `i`.
    pub points: Vec<Vec<Vec<f64>>>,
}

impl HyperfiniteSet {
    pub fn new(ladder: EpsLadder, points: Vec<Vec<Vec<f64>>>) -> Result<Self, CoreError> {
        if points.len() != ladder.len() {
            return Err(CoreError::LengthMismatch { expected: ladder.len(), got: points.len() });
        }
        let dim = points.first().and_then(|p| p.first()).map_or(0, Vec::len);
        for (i, ps) in points.iter().enumerate() {
            if ps.is_empty() {
                return Err(CoreError::EmptyHyperfinite(i));
            }
            if let Some(p) = ps.iter().find(|p| p.len() != dim) {
                return Err(CoreError::DimensionMismatch { expected: dim, got: p.len() });
            }
        }
        Ok(HyperfiniteSet { ladder, dim, points })
    }

    pub fn from_fn<F: Fn(f64) -> Vec<Vec<f64>>>(ladder: &EpsLadder, f: F) -> Result<Self, CoreError> {
        HyperfiniteSet::new(ladder.clone(), ladder.epsilons().iter().map(|&e| f(e)).collect())
    }

    /// The star-extension of a finite standard set.
    pub fn constant(ladder: &EpsLadder, pts: Vec<Vec<f64>>) -> Result<Self, CoreError> {
        HyperfiniteSet::new(ladder.clone(), vec![pts; ladder.len()])
    }

    /// Per-eps concatenation; a disjoint union when the parts are disjoint.
    pub fn union(&self, other: &HyperfiniteSet) -> Result<HyperfiniteSet, CoreError> {
        if self.ladder != other.ladder {
            return Err(CoreError::LadderMismatch);
        }
        let points = self.points.iter().zip(&other.points).map(|(a, b)| a.iter().chain(b).cloned().collect()).collect();
        HyperfiniteSet::new(self.ladder.clone(), points)
    }
}

/// `#H`, the per-eps number of elements.
pub fn hf_count(h: &HyperfiniteSet) -> EpsFamily {
    EpsFamily { ladder: h.ladder.clone(), values: h.points.iter().map(|p| p.len() as f64).collect() }
}

/// The hyperfinite sum of a scalar internal function over `H`.
pub fn hf_sum(h: &HyperfiniteSet, f: &InternalFunctionSampled) -> Result<EpsFamily, CoreError> {
    if h.ladder != f.ladder {
        return Err(CoreError::LadderMismatch);
    }
    if f.out_dim != 1 {
        return Err(CoreError::DimensionMismatch { expected: 1, got: f.out_dim });
    }
    let values = h
        .points
        .iter()
        .enumerate()
        .map(|(i, pts)| pts.iter().map(|p| f.eval(i, p).map(|v| v[0])).sum::<Result<f64, _>>())
        .collect::<Result<_, _>>()?;
    Ok(EpsFamily { ladder: h.ladder.clone(), values })
}
