use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Generator parameters for a geometric ladder `eps_j = base^-j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderParams {
    pub base: f64,
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for LadderParams {
    fn default() -> Self {
        LadderParams { base: 2.0, j_min: 4, j_max: 14 }
    }
}

/// A finite, strictly decreasing sample of the index set (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LadderRepr", into = "LadderRepr")]
pub struct EpsLadder {
    epsilons: Vec<f64>,
    params: Option<LadderParams>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LadderRepr {
    Params(LadderParams),
    Explicit { epsilons: Vec<f64> },
}

impl TryFrom<LadderRepr> for EpsLadder {
    type Error = CoreError;
    fn try_from(r: LadderRepr) -> Result<Self, CoreError> {
        match r {
            LadderRepr::Params(p) => EpsLadder::geometric(p),
            LadderRepr::Explicit { epsilons } => EpsLadder::new(epsilons),
        }
    }
}

impl From<EpsLadder> for LadderRepr {
    fn from(l: EpsLadder) -> Self {
        match l.params {
            Some(p) => LadderRepr::Params(p),
            None => LadderRepr::Explicit { epsilons: l.epsilons },
        }
    }
}

impl Default for EpsLadder {
    fn default() -> Self {
        EpsLadder::geometric(LadderParams::default()).expect("default ladder is valid")
    }
}

impl EpsLadder {
    pub fn new(epsilons: Vec<f64>) -> Result<Self, CoreError> {
        if epsilons.len() < 4 {
            return Err(CoreError::InvalidLadder(format!("need at least 4 entries, got {}", epsilons.len())));
        }
        for (i, &e) in epsilons.iter().enumerate() {
            if !(e > 0.0 && e <= 1.0) {
                return Err(CoreError::InvalidLadder(format!("entry {i} = {e} outside (0, 1]")));
            }
            if i > 0 && e >= epsilons[i - 1] {
                return Err(CoreError::InvalidLadder("entries must be strictly decreasing".into()));
            }
        }
        Ok(EpsLadder { epsilons, params: None })
    }

    pub fn geometric(p: LadderParams) -> Result<Self, CoreError> {
        if !(p.base > 1.0) || p.j_min < 0 || p.j_max <= p.j_min {
            return Err(CoreError::InvalidLadder(format!("bad generator {p:?}")));
        }
        let eps = (p.j_min..=p.j_max).map(|j| p.base.powi(-j)).collect();
        let mut l = EpsLadder::new(eps)?;
        l.params = Some(p);
        Ok(l)
    }

    /// Dyadic ladder `2^-j`, `j = j_min..=j_max`.
    pub fn dyadic(j_min: i32, j_max: i32) -> Result<Self, CoreError> {
        EpsLadder::geometric(LadderParams { base: 2.0, j_min, j_max })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn params(&self) -> Option<LadderParams> {
        self.params
    }

    pub fn len(&self) -> usize {
        self.epsilons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilons.is_empty()
    }

    pub fn eps(&self, i: usize) -> f64 {
        self.epsilons[i]
    }

    /// Index of `eps` on the ladder (relative tolerance 1e-12).
    pub fn index_of(&self, eps: f64) -> Result<usize, CoreError> {
        self.epsilons.iter().position(|&e| (e - eps).abs() <= 1e-12 * e).ok_or(CoreError::NotOnLadder(eps))
    }

    /// Indices of the finest `s` entries.
    pub fn tail(&self, s: usize) -> std::ops::Range<usize> {
        self.len().saturating_sub(s)..self.len()
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> EpsFamily {
        EpsFamily { ladder: self.clone(), values: self.epsilons.iter().map(|&e| f(e)).collect() }
    }
}

/// A real quantity sampled once per ladder entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsFamily {
    pub ladder: EpsLadder,
    pub values: Vec<f64>,
}

impl EpsFamily {
    pub fn new(ladder: EpsLadder, values: Vec<f64>) -> Result<Self, CoreError> {
        if values.len() != ladder.len() {
            return Err(CoreError::LengthMismatch { expected: ladder.len(), got: values.len() });
        }
        Ok(EpsFamily { ladder, values })
    }

    pub fn constant(ladder: &EpsLadder, v: f64) -> Self {
        EpsFamily { ladder: ladder.clone(), values: vec![v; ladder.len()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> EpsFamily {
        EpsFamily { ladder: self.ladder.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ladder() {
        let l = EpsLadder::default();
        assert_eq!(l.len(), 11);
        assert_eq!(l.eps(0), 0.0625);
        assert_eq!(l.eps(10), 2f64.powi(-14));
        assert_eq!(l.tail(3), 8..11);
    }

    #[test]
    fn rejects_bad_ladders() {
        assert!(EpsLadder::new(vec![0.5, 0.25, 0.125]).is_err());
        assert!(EpsLadder::new(vec![0.5, 0.5, 0.25, 0.1]).is_err());
        assert!(EpsLadder::new(vec![2.0, 0.5, 0.25, 0.1]).is_err());
        assert!(EpsLadder::new(vec![0.5, 0.25, 0.1, 0.0]).is_err());
        assert!(EpsLadder::dyadic(5, 5).is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let l = EpsLadder::dyadic(3, 9).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(serde_json::from_str::<EpsLadder>(&s).unwrap(), l);
        let e = EpsLadder::new(vec![0.9, 0.5, 0.3, 0.1]).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<EpsLadder>(&s).unwrap(), e);
    }
}
