use std::sync::Arc;

use rayon::prelude::*;
use rhoscale_core::EpsLadder;
use serde::Serialize;

use crate::config::EngineParams;
use crate::error::{EngineError, Result};

/// Per-eps sample function: `(ladder index, point) -> value`.
pub type Sampler = Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SupportBox {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        SupportBox { lo: center.iter().map(|c| c - radius).collect(), hi: center.iter().map(|c| c + radius).collect() }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn hull(&self, o: &SupportBox) -> SupportBox {
        SupportBox {
            lo: self.lo.iter().zip(&o.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&o.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

/// An eps-parameterized grid function on `[-L, L]^d` with step
/// `h(eps) = eps / step_divisor`. Samples are produced on demand over
/// patches, never as full grids.
#[derive(Clone)]
pub struct GeneralizedFunction {
    dim: usize,
    ladder: EpsLadder,
    extent: f64,
    step_divisor: f64,
    sampler: Sampler,
    /// Per-eps box outside which the samples vanish; `None` means unknown.
    support: Vec<Option<SupportBox>>,
    pub label: String,
}

impl std::fmt::Debug for GeneralizedFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneralizedFunction")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("ladder", &self.ladder.epsilons())
            .finish()
    }
}

/// Samples on an axis-aligned block of grid nodes; `values` is row-major
/// with the first coordinate fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub dim: usize,
    pub step: f64,
    pub origin: Vec<f64>,
    pub n: Vec<usize>,
    pub values: Vec<f64>,
}

impl Patch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        self.origin[axis] + k as f64 * self.step
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        if self.dim == 1 {
            vec![self.coord(0, idx)]
        } else {
            vec![self.coord(0, idx % self.n[0]), self.coord(1, idx / self.n[0])]
        }
    }

    pub fn umax(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl GeneralizedFunction {
    pub fn new(
        dim: usize,
        ladder: EpsLadder,
        params: &EngineParams,
        sampler: Sampler,
        support: Vec<Option<SupportBox>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(EngineError::Dimension(dim));
        }
        if support.len() != ladder.len() {
            return Err(EngineError::Invalid("support record must have one entry per eps".into()));
        }
        Ok(GeneralizedFunction {
            dim,
            ladder,
            extent: params.extent,
            step_divisor: params.step_divisor,
            sampler,
            support,
            label: label.into(),
        })
    }

    pub fn from_fn<F>(dim: usize, ladder: &EpsLadder, params: &EngineParams, label: &str, f: F) -> Result<Self>
    where
        F: Fn(usize, &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(dim, ladder.clone(), params, Arc::new(f), vec![None; ladder.len()], label)
    }

    pub fn zero(dim: usize, ladder: &EpsLadder, params: &EngineParams) -> Result<Self> {
        let empty = SupportBox { lo: vec![0.0; dim], hi: vec![-1.0; dim] };
        Self::new(dim, ladder.clone(), params, Arc::new(|_, _| 0.0), vec![Some(empty); ladder.len()], "zero")
    }

    pub fn constant(dim: usize, ladder: &EpsLadder, params: &EngineParams, c: f64) -> Result<Self> {
        Self::from_fn(dim, ladder, params, "constant", move |_, _| c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ladder(&self) -> &EpsLadder {
        &self.ladder
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn step(&self, i: usize) -> f64 {
        self.ladder.eps(i) / self.step_divisor
    }

    pub fn support(&self, i: usize) -> Option<&SupportBox> {
        self.support[i].as_ref()
    }

    pub fn has_compact_support(&self) -> bool {
        self.support.iter().all(|s| s.is_some())
    }

    pub fn sample(&self, i: usize, x: &[f64]) -> f64 {
        match &self.support[i] {
            Some(b) if !b.contains(x) => 0.0,
            _ => (self.sampler)(i, x),
        }
    }

    /// Pointwise transform `u -> f(i, x, u)`; the support record is kept,
    /// so `f(i, x, 0)` must be 0.
    pub fn map<F>(&self, label: &str, f: F) -> Self
    where
        F: Fn(usize, &[f64], f64) -> f64 + Send + Sync + 'static,
    {
        let s = self.sampler.clone();
        let mut out = self.clone();
        out.sampler = Arc::new(move |i, x| f(i, x, s(i, x)));
        out.label = label.to_string();
        out
    }

    /// Multiplication by a function; the support record is kept.
    pub fn multiply<F>(&self, label: &str, f: F) -> Self
    where
        F: Fn(usize, &[f64]) -> f64 + Send + Sync + 'static,
    {
        self.map(label, move |i, x, u| if u == 0.0 { 0.0 } else { u * f(i, x) })
    }

    /// `x -> u(x - c)`. Samples agree with `u` exactly on the grid when `c`
    /// is a multiple of every grid step.
    pub fn translate(&self, c: &[f64]) -> Result<Self> {
        if c.len() != self.dim {
            return Err(EngineError::DimensionMismatch { expected: self.dim, got: c.len() });
        }
        let (u, shift) = (self.clone(), c.to_vec());
        let support = self
            .support
            .iter()
            .map(|b| {
                b.as_ref().map(|b| SupportBox {
                    lo: b.lo.iter().zip(c).map(|(a, d)| a + d).collect(),
                    hi: b.hi.iter().zip(c).map(|(a, d)| a + d).collect(),
                })
            })
            .collect();
        Ok(GeneralizedFunction {
            sampler: Arc::new(move |i, x| {
                let y: Vec<f64> = x.iter().zip(&shift).map(|(a, d)| a - d).collect();
                u.sample(i, &y)
            }),
            support,
            label: format!("{}(x - {c:?})", self.label),
            ..self.clone()
        })
    }

    fn check_same_grid(&self, o: &Self) -> Result<()> {
        if self.dim != o.dim
            || self.ladder != o.ladder
            || self.extent != o.extent
            || self.step_divisor != o.step_divisor
        {
            return Err(EngineError::GridMismatch);
        }
        Ok(())
    }

    /// `self + c * other`, sample by sample.
    pub fn add_scaled(&self, other: &Self, c: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let (a, b) = (self.clone(), other.clone());
        let support = (0..self.ladder.len())
            .map(|i| match (&self.support[i], &other.support[i]) {
                (Some(x), Some(y)) => Some(x.hull(y)),
                _ => None,
            })
            .collect();
        let label = format!("{} + {c}*{}", self.label, other.label);
        Ok(GeneralizedFunction {
            sampler: Arc::new(move |i, x| a.sample(i, x) + c * b.sample(i, x)),
            support,
            label,
            ..self.clone()
        })
    }

    /// `self + f(eps) * other`.
    pub fn add_family(&self, other: &Self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let coeffs: Vec<f64> = self.ladder.epsilons().iter().map(|&e| f(e)).collect();
        let (a, b) = (self.clone(), other.clone());
        let mut out = self.add_scaled(other, 1.0)?;
        out.sampler = Arc::new(move |i, x| a.sample(i, x) + coeffs[i] * b.sample(i, x));
        Ok(out)
    }

    /// Grid indices `[k_lo, k_hi]` (in units of `stride * h`) covering
    /// `[lo, hi]` on one axis.
    fn index_range(&self, i: usize, stride: usize, lo: f64, hi: f64) -> (i64, i64) {
        let hs = self.step(i) * stride as f64;
        let k_lo = ((lo + self.extent) / hs - 1e-9).ceil() as i64;
        let k_hi = ((hi + self.extent) / hs + 1e-9).floor() as i64;
        (k_lo, k_hi)
    }

    /// Samples at the grid nodes of spacing `stride * h` in the box
    /// `|x_k - center_k| <= radius`, padded by `halo` nodes on each side.
    pub fn patch(&self, i: usize, center: &[f64], radius: f64, stride: usize, halo: usize) -> Result<Patch> {
        if center.len() != self.dim {
            return Err(EngineError::DimensionMismatch { expected: self.dim, got: center.len() });
        }
        let hs = self.step(i) * stride as f64;
        let pad = radius + halo as f64 * hs;
        if center.iter().any(|c| c - pad < -self.extent - 1e-12 || c + pad > self.extent + 1e-12) {
            return Err(EngineError::CutoffEscapesGrid { center: center.to_vec(), radius: pad, extent: self.extent });
        }
        let mut origin = Vec::with_capacity(self.dim);
        let mut n = Vec::with_capacity(self.dim);
        for &c in center {
            let (k_lo, k_hi) = self.index_range(i, stride, c - radius, c + radius);
            let (k_lo, k_hi) = (k_lo - halo as i64, k_hi + halo as i64);
            origin.push(-self.extent + k_lo as f64 * hs);
            n.push((k_hi - k_lo + 1).max(0) as usize);
        }
        let values = if self.dim == 1 {
            (0..n[0]).into_par_iter().map(|k| self.sample(i, &[origin[0] + k as f64 * hs])).collect()
        } else {
            let mut v = vec![0.0; n[0] * n[1]];
            if n[0] > 0 {
                v.par_chunks_mut(n[0]).enumerate().for_each(|(k2, row)| {
                    let y = origin[1] + k2 as f64 * hs;
                    if let Some(b) = &self.support[i] {
                        if y < b.lo[1] || y > b.hi[1] {
                            return;
                        }
                    }
                    for (k1, r) in row.iter_mut().enumerate() {
                        *r = self.sample(i, &[origin[0] + k1 as f64 * hs, y]);
                    }
                });
            }
            v
        };
        Ok(Patch { dim: self.dim, step: hs, origin, n, values })
    }
}
