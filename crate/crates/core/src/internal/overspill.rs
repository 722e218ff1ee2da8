use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::ladder::{EpsFamily, EpsLadder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverspillVerdict {
    UnboundedWitness,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverspillResult {
    /// Largest `m <= cap` with `P_eps(1..=m)` all true, per ladder entry.
    pub witness: Vec<u64>,
    pub cap: u64,
    pub verdict: OverspillVerdict,
}

impl OverspillResult {
    pub fn family(&self, ladder: &EpsLadder) -> EpsFamily {
        EpsFamily { ladder: ladder.clone(), values: self.witness.iter().map(|&m| m as f64).collect() }
    }
}

/// Searches, per eps, the largest initial run `1..=m` on which `p(eps, m)`
/// holds. The witness is unbounded when it reaches the cap everywhere or
/// grows monotonically along the ladder.
pub fn overspill_witness<P>(ladder: &EpsLadder, cap: u64, p: P) -> Result<OverspillResult, CoreError>
where
    P: Fn(f64, u64) -> bool,
{
    if cap < 1 {
        return Err(CoreError::BadCap);
    }
    let witness: Vec<u64> = ladder
        .epsilons()
        .iter()
        .map(|&e| {
            let mut m = 0;
            while m < cap && p(e, m + 1) {
                m += 1;
            }
            m
        })
        .collect();
    let at_cap = witness.iter().all(|&m| m == cap);
    let monotone = witness.windows(2).all(|w| w[0] <= w[1]);
    let grows = witness.last() > witness.first();
    let verdict =
        if at_cap || (monotone && grows) { OverspillVerdict::UnboundedWitness } else { OverspillVerdict::Bounded };
    Ok(OverspillResult { witness, cap, verdict })
}
