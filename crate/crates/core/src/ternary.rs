use serde::{Deserialize, Serialize};
use std::fmt;

/// Three-valued verdict used wherever finite data cannot certify an
/// eventual property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ternary {
    Yes,
    No,
    Undecidable,
}

impl Ternary {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Ternary::Yes
        } else {
            Ternary::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Ternary::Yes
    }

    pub fn and(self, other: Ternary) -> Ternary {
        match (self, other) {
            (Ternary::No, _) | (_, Ternary::No) => Ternary::No,
            (Ternary::Yes, Ternary::Yes) => Ternary::Yes,
            _ => Ternary::Undecidable,
        }
    }
}

impl fmt::Display for Ternary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ternary::Yes => "yes",
            Ternary::No => "no",
            Ternary::Undecidable => "undecidable",
        })
    }
}
