use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::ladder::EpsLadder;

/// A {0,1}-valued internal number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Idempotent {
    Ones,
    Zeros,
    /// Bit is 1 iff `eps <= t` (or `eps > t` when `fine` is false).
    Threshold {
        t: f64,
        fine: bool,
    },
    Bits {
        ladder: EpsLadder,
        bits: Vec<bool>,
    },
}

impl Idempotent {
    pub fn threshold(t: f64) -> Self {
        Idempotent::Threshold { t, fine: true }
    }

    pub fn bits(ladder: &EpsLadder, bits: Vec<bool>) -> Result<Self, CoreError> {
        if bits.len() != ladder.len() {
            return Err(CoreError::LengthMismatch { expected: ladder.len(), got: bits.len() });
        }
        Ok(Idempotent::Bits { ladder: ladder.clone(), bits })
    }

    /// Value at `eps`; bit-vector idempotents only know their own ladder.
    pub fn at(&self, eps: f64) -> Result<bool, CoreError> {
        match self {
            Idempotent::Ones => Ok(true),
            Idempotent::Zeros => Ok(false),
            Idempotent::Threshold { t, fine } => Ok((eps <= *t) == *fine),
            Idempotent::Bits { ladder, bits } => Ok(bits[ladder.index_of(eps)?]),
        }
    }

    /// Concrete bit-vector on `ladder`.
    pub fn on(&self, ladder: &EpsLadder) -> Result<Vec<bool>, CoreError> {
        if let Idempotent::Bits { ladder: own, bits } = self {
            if own != ladder {
                return Err(CoreError::LadderMismatch);
            }
            return Ok(bits.clone());
        }
        ladder.epsilons().iter().map(|&e| self.at(e)).collect()
    }

    /// `e_c = 1 - e`.
    pub fn complement(&self) -> Self {
        match self {
            Idempotent::Ones => Idempotent::Zeros,
            Idempotent::Zeros => Idempotent::Ones,
            Idempotent::Threshold { t, fine } => Idempotent::Threshold { t: *t, fine: !fine },
            Idempotent::Bits { ladder, bits } => {
                Idempotent::Bits { ladder: ladder.clone(), bits: bits.iter().map(|b| !b).collect() }
            }
        }
    }
}

impl fmt::Display for Idempotent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Idempotent::Ones => f.write_str("1"),
            Idempotent::Zeros => f.write_str("0"),
            Idempotent::Threshold { t, fine: true } => write!(f, "eps<={t}"),
            Idempotent::Threshold { t, fine: false } => write!(f, "eps>{t}"),
            Idempotent::Bits { bits, .. } => {
                f.write_str("bits:")?;
                bits.iter().try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
            }
        }
    }
}
