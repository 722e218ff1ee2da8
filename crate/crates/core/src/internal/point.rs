use serde::{Deserialize, Serialize};

use super::Idempotent;
use crate::error::CoreError;
use crate::ladder::{EpsFamily, EpsLadder};

/// A point of `*R^d`, represented by its value at every ladder entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalPoint {
    pub ladder: EpsLadder,
    pub dim: usize,
    /// `values[i]` is the point at ladder entry `i`.
    pub values: Vec<Vec<f64>>,
}

impl InternalPoint {
    pub fn new(ladder: EpsLadder, values: Vec<Vec<f64>>) -> Result<Self, CoreError> {
        if values.len() != ladder.len() {
            return Err(CoreError::LengthMismatch { expected: ladder.len(), got: values.len() });
        }
        let dim = values.first().map_or(0, Vec::len);
        for (i, v) in values.iter().enumerate() {
            if v.len() != dim {
                return Err(CoreError::DimensionMismatch { expected: dim, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(CoreError::NonFinite(i));
            }
        }
        Ok(InternalPoint { ladder, dim, values })
    }

    pub fn scalar(f: &EpsFamily) -> Result<Self, CoreError> {
        InternalPoint::new(f.ladder.clone(), f.values.iter().map(|&v| vec![v]).collect())
    }

    /// The star-extension of a standard point: a constant family.
    pub fn constant(ladder: &EpsLadder, x: &[f64]) -> Self {
        InternalPoint { ladder: ladder.clone(), dim: x.len(), values: vec![x.to_vec(); ladder.len()] }
    }

    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(ladder: &EpsLadder, f: F) -> Result<Self, CoreError> {
        InternalPoint::new(ladder.clone(), ladder.epsilons().iter().map(|&e| f(e)).collect())
    }

    pub fn coord(&self, k: usize) -> EpsFamily {
        EpsFamily { ladder: self.ladder.clone(), values: self.values.iter().map(|v| v[k]).collect() }
    }

    fn compatible(&self, other: &InternalPoint) -> Result<(), CoreError> {
        if self.ladder != other.ladder {
            return Err(CoreError::LadderMismatch);
        }
        if self.dim != other.dim {
            return Err(CoreError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }
}

/// `x e + y e_c`: takes `x` where the idempotent is 1, else `y`.
pub fn interleave(x: &InternalPoint, y: &InternalPoint, e: &Idempotent) -> Result<InternalPoint, CoreError> {
    x.compatible(y)?;
    let bits = e.on(&x.ladder)?;
    let values = bits
        .iter()
        .zip(x.values.iter().zip(&y.values))
        .map(|(&b, (xv, yv))| if b { xv.clone() } else { yv.clone() })
        .collect();
    Ok(InternalPoint { ladder: x.ladder.clone(), dim: x.dim, values })
}

/// The idempotent `e` with `x e <= 0` and `x e_c > 0`.
pub fn sign_split(x: &InternalPoint) -> Result<Idempotent, CoreError> {
    if x.dim != 1 {
        return Err(CoreError::DimensionMismatch { expected: 1, got: x.dim });
    }
    let bits = x.values.iter().map(|v| v[0] <= 0.0).collect();
    Idempotent::bits(&x.ladder, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleave_examples() {
        let l = EpsLadder::default();
        let x = InternalPoint::from_fn(&l, |e| vec![e, 2.0 * e]).unwrap();
        let y = InternalPoint::constant(&l, &[7.0, 8.0]);
        assert_eq!(interleave(&x, &x, &Idempotent::threshold(1e-3)).unwrap(), x);
        assert_eq!(interleave(&x, &y, &Idempotent::Ones).unwrap(), x);
        let one = InternalPoint::constant(&l, &[1.0]);
        let mone = InternalPoint::constant(&l, &[-1.0]);
        let z = interleave(&one, &mone, &Idempotent::threshold(2f64.powi(-9))).unwrap();
        let got: Vec<f64> = z.values.iter().map(|v| v[0]).collect();
        let want: Vec<f64> = (4..=14).map(|j| if j >= 9 { 1.0 } else { -1.0 }).collect();
        assert_eq!(got, want);
        assert!(interleave(&x, &one, &Idempotent::Ones).is_err());
    }

    #[test]
    fn sign_split_examples() {
        let l = EpsLadder::default();
        assert_eq!(sign_split(&InternalPoint::constant(&l, &[-1.0])).unwrap().on(&l).unwrap(), vec![true; 11]);
        assert_eq!(sign_split(&InternalPoint::constant(&l, &[1.0])).unwrap().on(&l).unwrap(), vec![false; 11]);
        let s = InternalPoint::from_fn(&l, |e| vec![(1.0 / e).sin()]).unwrap();
        let bits = sign_split(&s).unwrap().on(&l).unwrap();
        for (i, &e) in l.epsilons().iter().enumerate() {
            assert_eq!(bits[i], (1.0 / e).sin() <= 0.0);
        }
    }
}
