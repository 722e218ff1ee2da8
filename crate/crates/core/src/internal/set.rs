use serde::{Deserialize, Serialize};

use super::InternalPoint;
use crate::error::CoreError;
use crate::ladder::EpsLadder;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Shape {
    /// Closed axis-aligned box.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Box { lo, .. } => lo.len(),
            Shape::Ball { center, .. } => center.len(),
        }
    }

    fn valid(&self) -> bool {
        match self {
            Shape::Box { lo, hi } => lo.len() == hi.len() && lo.iter().zip(hi).all(|(a, b)| a <= b),
            Shape::Ball { radius, .. } => *radius >= 0.0,
        }
    }

    /// Euclidean distance from `x` to the shape (0 inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&xi, (&a, &b))| {
                    let d = (a - xi).max(xi - b).max(0.0);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            Shape::Ball { center, radius } => {
                let r: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                (r - radius).max(0.0)
            }
        }
    }
}

/// Finite union of boxes and balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub shapes: Vec<Shape>,
}

impl Region {
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.shapes.iter().map(|s| s.distance(x)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.distance(x) == 0.0
    }
}

/// Per-epsilon regions; nonempty at every ladder entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalSet {
    pub ladder: EpsLadder,
    pub dim: usize,
    pub regions: Vec<Region>,
}

impl InternalSet {
    pub fn new(ladder: EpsLadder, regions: Vec<Region>) -> Result<Self, CoreError> {
        if regions.len() != ladder.len() {
            return Err(CoreError::LengthMismatch { expected: ladder.len(), got: regions.len() });
        }
        let dim = regions.first().and_then(|r| r.shapes.first()).map_or(0, Shape::dim);
        for (i, r) in regions.iter().enumerate() {
            if r.shapes.is_empty() || !r.shapes.iter().all(Shape::valid) {
                return Err(CoreError::EmptySet(i));
            }
            if let Some(s) = r.shapes.iter().find(|s| s.dim() != dim) {
                return Err(CoreError::DimensionMismatch { expected: dim, got: s.dim() });
            }
        }
        Ok(InternalSet { ladder, dim, regions })
    }

    /// The star-extension of a standard region.
    pub fn constant(ladder: &EpsLadder, region: Region) -> Result<Self, CoreError> {
        InternalSet::new(ladder.clone(), vec![region; ladder.len()])
    }

    pub fn ball(ladder: &EpsLadder, center: &[f64], radius: f64) -> Result<Self, CoreError> {
        InternalSet::constant(ladder, Region { shapes: vec![Shape::Ball { center: center.to_vec(), radius }] })
    }

    pub fn from_fn<F: Fn(f64) -> Region>(ladder: &EpsLadder, f: F) -> Result<Self, CoreError> {
        InternalSet::new(ladder.clone(), ladder.epsilons().iter().map(|&e| f(e)).collect())
    }

    /// Pointwise membership at every ladder entry.
    pub fn contains(&self, x: &InternalPoint) -> Result<Vec<bool>, CoreError> {
        self.check(x)?;
        Ok(self.regions.iter().zip(&x.values).map(|(r, v)| r.contains(v)).collect())
    }

    fn check(&self, x: &InternalPoint) -> Result<(), CoreError> {
        if self.ladder != x.ladder {
            return Err(CoreError::LadderMismatch);
        }
        if self.dim != x.dim {
            return Err(CoreError::DimensionMismatch { expected: self.dim, got: x.dim });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExteriorVerdict {
    InsideEventually,
    ExteriorEventually,
    Mixed,
}

/// Membership predicate for the exterior of an internal set, with the
/// stabilization window used to read "for small eps".
#[derive(Debug, Clone)]
pub struct Exterior {
    pub set: InternalSet,
    pub window: usize,
}

impl Exterior {
    pub fn classify(&self, x: &InternalPoint) -> Result<ExteriorVerdict, CoreError> {
        self.set.check(x)?;
        let tail = self.set.ladder.tail(self.window);
        let d: Vec<f64> = tail.map(|i| self.set.regions[i].distance(&x.values[i])).collect();
        Ok(if d.iter().all(|&v| v > 0.0) {
            ExteriorVerdict::ExteriorEventually
        } else if d.iter().all(|&v| v == 0.0) {
            ExteriorVerdict::InsideEventually
        } else {
            ExteriorVerdict::Mixed
        })
    }
}

pub fn exterior(a: &InternalSet, window: usize) -> Exterior {
    Exterior { set: a.clone(), window: window.max(1) }
}

/// `A *u B`, the interleaved closure of the union: per-eps union of regions.
pub fn star_union(a: &InternalSet, b: &InternalSet) -> Result<InternalSet, CoreError> {
    if a.ladder != b.ladder {
        return Err(CoreError::LadderMismatch);
    }
    if a.dim != b.dim {
        return Err(CoreError::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    let regions = a
        .regions
        .iter()
        .zip(&b.regions)
        .map(|(ra, rb)| {
            let mut shapes = ra.shapes.clone();
            for s in &rb.shapes {
                if !shapes.contains(s) {
                    shapes.push(s.clone());
                }
            }
            Region { shapes }
        })
        .collect();
    InternalSet::new(a.ladder.clone(), regions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::internal::{interleave, Idempotent};

    #[test]
    fn exterior_examples() {
        let l = EpsLadder::default();
        let a = InternalSet::ball(&l, &[0.0], 1.0).unwrap();
        let ext = exterior(&a, 3);
        let c = |v: f64| InternalPoint::constant(&l, &[v]);
        assert_eq!(ext.classify(&c(2.0)).unwrap(), ExteriorVerdict::ExteriorEventually);
        assert_eq!(ext.classify(&c(0.0)).unwrap(), ExteriorVerdict::InsideEventually);
        let edge = InternalPoint::from_fn(&l, |e| vec![1.0 + e]).unwrap();
        assert_eq!(ext.classify(&edge).unwrap(), ExteriorVerdict::ExteriorEventually);
        let osc = InternalPoint::from_fn(&l, |e| vec![if e < 3e-4 && e > 1e-4 { 0.0 } else { 2.0 }]).unwrap();
        assert_eq!(ext.classify(&osc).unwrap(), ExteriorVerdict::Mixed);
    }

    #[test]
    fn star_union_examples() {
        let l = EpsLadder::default();
        let a = InternalSet::ball(&l, &[0.0], 1.0).unwrap();
        let b = InternalSet::ball(&l, &[3.0], 1.0).unwrap();
        assert_eq!(star_union(&a, &a).unwrap(), a);
        let u = star_union(&a, &b).unwrap();
        assert!(u.regions.iter().all(|r| r.shapes.len() == 2));
        let x = InternalPoint::constant(&l, &[0.5]);
        let y = InternalPoint::constant(&l, &[3.5]);
        let z = interleave(&x, &y, &Idempotent::threshold(1e-3)).unwrap();
        assert_eq!(exterior(&u, 3).classify(&z).unwrap(), ExteriorVerdict::InsideEventually);
        assert!(u.contains(&z).unwrap().iter().all(|&b| b));
    }

    #[test]
    fn empty_regions_rejected() {
        let l = EpsLadder::default();
        assert!(InternalSet::constant(&l, Region { shapes: vec![] }).is_err());
        let bad = Shape::Box { lo: vec![1.0], hi: vec![0.0] };
        assert!(InternalSet::constant(&l, Region { shapes: vec![bad] }).is_err());
    }

    #[test]
    fn box_distance() {
        let s = Shape::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] };
        assert_eq!(s.distance(&[0.5, 0.5]), 0.0);
        assert!((s.distance(&[2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
    }
}
