use std::fmt;
use std::sync::Arc;

use super::{InternalPoint, InternalSet};
use crate::error::CoreError;
use crate::ladder::EpsLadder;

type Rule = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Closed(Rule),
    /// Per-eps lookup table of `(argument, value)` pairs.
    Table(Vec<Vec<(Vec<f64>, Vec<f64>)>>),
}

/// An internal function `[f_eps]`, given per eps by a closed-form rule or a
/// lookup table.
#[derive(Clone)]
pub struct InternalFunctionSampled {
    pub ladder: EpsLadder,
    pub out_dim: usize,
    domain: Option<InternalSet>,
    repr: Repr,
}

impl fmt::Debug for InternalFunctionSampled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.repr {
            Repr::Closed(_) => "closed",
            Repr::Table(_) => "table",
        };
        f.debug_struct("InternalFunctionSampled").field("out_dim", &self.out_dim).field("kind", &kind).finish()
    }
}

impl InternalFunctionSampled {
    pub fn closed<F>(ladder: &EpsLadder, out_dim: usize, f: F) -> Self
    where
        F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        InternalFunctionSampled { ladder: ladder.clone(), out_dim, domain: None, repr: Repr::Closed(Arc::new(f)) }
    }

    /// Scalar-valued closed-form rule.
    pub fn scalar<F>(ladder: &EpsLadder, f: F) -> Self
    where
        F: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        InternalFunctionSampled::closed(ladder, 1, move |e, x| vec![f(e, x)])
    }

    pub fn table(ladder: &EpsLadder, out_dim: usize, table: Vec<Vec<(Vec<f64>, Vec<f64>)>>) -> Result<Self, CoreError> {
        if table.len() != ladder.len() {
            return Err(CoreError::LengthMismatch { expected: ladder.len(), got: table.len() });
        }
        if let Some(v) = table.iter().flatten().map(|(_, v)| v).find(|v| v.len() != out_dim) {
            return Err(CoreError::DimensionMismatch { expected: out_dim, got: v.len() });
        }
        Ok(InternalFunctionSampled { ladder: ladder.clone(), out_dim, domain: None, repr: Repr::Table(table) })
    }

    /// Restricts a closed-form rule to a recorded per-eps domain.
    pub fn with_domain(mut self, domain: InternalSet) -> Result<Self, CoreError> {
        if domain.ladder != self.ladder {
            return Err(CoreError::LadderMismatch);
        }
        self.domain = Some(domain);
        Ok(self)
    }

    /// `f_eps(x)` at ladder index `i`.
    pub fn eval(&self, i: usize, x: &[f64]) -> Result<Vec<f64>, CoreError> {
        let undefined = || CoreError::UndefinedPoint { index: i, point: x.to_vec() };
        if let Some(d) = &self.domain {
            if !d.regions[i].contains(x) {
                return Err(undefined());
            }
        }
        match &self.repr {
            Repr::Closed(f) => Ok(f(self.ladder.eps(i), x)),
            Repr::Table(t) => {
                t[i].iter().find(|(a, _)| a.as_slice() == x).map(|(_, v)| v.clone()).ok_or_else(undefined)
            }
        }
    }

    /// `[f_eps]([x_eps]) = [f_eps(x_eps)]`.
    pub fn apply(&self, x: &InternalPoint) -> Result<InternalPoint, CoreError> {
        if x.ladder != self.ladder {
            return Err(CoreError::LadderMismatch);
        }
        let values = x.values.iter().enumerate().map(|(i, v)| self.eval(i, v)).collect::<Result<_, _>>()?;
        InternalPoint::new(self.ladder.clone(), values)
    }
}
