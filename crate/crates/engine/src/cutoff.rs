use rhoscale_core::internal::InternalPoint;
use serde::Serialize;

use crate::config::MProfile;
use crate::error::{EngineError, Result};
use crate::plateau::phi0_radial;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Center {
    Standard(Vec<f64>),
    #[serde(skip)]
    Internal(InternalPoint),
}

/// `phi_{m,x0}(x) = phi0((x - x0) / eps^(1/m(eps)))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffSpec {
    pub center: Center,
    pub profile: MProfile,
}

impl CutoffSpec {
    pub fn new(x0: &[f64], profile: MProfile) -> Result<Self> {
        if !(1..=2).contains(&x0.len()) {
            return Err(EngineError::Dimension(x0.len()));
        }
        profile.validate()?;
        Ok(CutoffSpec { center: Center::Standard(x0.to_vec()), profile })
    }

    pub fn internal(x0: InternalPoint, profile: MProfile) -> Result<Self> {
        if !(1..=2).contains(&x0.dim) {
            return Err(EngineError::Dimension(x0.dim));
        }
        profile.validate()?;
        Ok(CutoffSpec { center: Center::Internal(x0), profile })
    }

    pub fn dim(&self) -> usize {
        match &self.center {
            Center::Standard(x) => x.len(),
            Center::Internal(p) => p.dim,
        }
    }

    /// Center at ladder index `i`.
    pub fn center(&self, i: usize) -> &[f64] {
        match &self.center {
            Center::Standard(x) => x,
            Center::Internal(p) => &p.values[i],
        }
    }

    pub fn radius(&self, eps: f64) -> f64 {
        self.profile.radius(eps)
    }

    pub fn eval(&self, i: usize, eps: f64, x: &[f64]) -> f64 {
        let c = self.center(i);
        let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        phi0_radial(d2.sqrt() / self.radius(eps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rhoscale_core::EpsLadder;

    proptest! {
        #[test]
        fn plateau_property(j in 4i32..=14, t in 0.0f64..1.5, ang in 0.0f64..6.3) {
            let eps = 2f64.powi(-j);
            let c = CutoffSpec::new(&[0.3, -0.2], MProfile::LogLog).unwrap();
            let r = c.radius(eps);
            prop_assert!(r > 0.0 && r <= 1.0);
            let x = [0.3 + t * r * ang.cos(), -0.2 + t * r * ang.sin()];
            let v = c.eval(0, eps, &x);
            prop_assert!((0.0..=1.0).contains(&v));
            if t <= 0.5 - 1e-9 { prop_assert_eq!(v, 1.0); }
            if t >= 1.0 + 1e-9 { prop_assert_eq!(v, 0.0); }
        }
    }

    #[test]
    fn internal_center_moves() {
        let l = EpsLadder::dyadic(4, 7).unwrap();
        let p = InternalPoint::from_fn(&l, |e| vec![e]).unwrap();
        let c = CutoffSpec::internal(p, MProfile::Constant { m: 2 }).unwrap();
        assert_eq!(c.center(1), &[1.0 / 32.0]);
        assert_eq!(c.eval(1, 1.0 / 32.0, &[1.0 / 32.0]), 1.0);
    }
}
