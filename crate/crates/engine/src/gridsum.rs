//! Sums of translated scaled cutoffs over a hyperfinite lattice.

use std::sync::Arc;

use rhoscale_core::internal::{hf_count, hf_sum, HyperfiniteSet, InternalFunctionSampled};
use rhoscale_core::EpsLadder;
use serde::Serialize;

use crate::config::{EngineParams, MProfile};
use crate::error::{EngineError, Result};
use crate::gf::{GeneralizedFunction, SupportBox};
use crate::minfty::{derivative_sups, AlphaFit, Region};
use crate::plateau::phi0_radial;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSumReport {
    pub dim: usize,
    pub x0: Vec<f64>,
    pub r: f64,
    pub profile: MProfile,
    pub epsilons: Vec<f64>,
    /// Support radius `s = eps^(1/k)` of each translated cutoff.
    pub support_radius: Vec<f64>,
    pub spacing: Vec<f64>,
    pub cardinality: Vec<usize>,
    /// `(2r/s + 1)^d`.
    pub cardinality_bound: Vec<f64>,
    /// Min of psi over the grid nodes of the inner box `|x - x0|_inf <= r / (2 sqrt d)`.
    pub min_psi_inner: Vec<f64>,
    /// Max number of lattice points `y` with `|x - y| <= s`, over the
    /// lattice and the inner box nodes.
    pub max_overlap: Vec<usize>,
    pub psi_at_center: Vec<f64>,
    pub derivative_fits: Vec<AlphaFit>,
    /// `1/sqrt(k)` per eps (0 for a fixed radius).
    pub envelope: Vec<f64>,
}

pub struct GridSum {
    pub psi: GeneralizedFunction,
    pub set: HyperfiniteSet,
    pub report: GridSumReport,
}

/// Lattice `(s/sqrt d) Z^d` at one eps, restricted to `|y - x0|_inf < r/sqrt d`;
/// returned as the integer index range per axis.
fn lattice_range(x0: &[f64], r: f64, spacing: f64, dim: usize) -> Vec<(i64, i64)> {
    let half = r / (dim as f64).sqrt();
    x0.iter()
        .map(|&c| {
            let mut lo = ((c - half) / spacing).ceil() as i64;
            let mut hi = ((c + half) / spacing).floor() as i64;
            if (lo as f64 * spacing - c).abs() >= half {
                lo += 1;
            }
            if (hi as f64 * spacing - c).abs() >= half {
                hi -= 1;
            }
            (lo, hi)
        })
        .collect()
}

struct Lattice {
    spacing: f64,
    s: f64,
    range: Vec<(i64, i64)>,
}

impl Lattice {
    /// Calls `f(y)` for every lattice point with `|x - y| <= s (1 + tol)`.
    fn near(&self, x: &[f64], mut f: impl FnMut(&[f64])) {
        let tol = 1.0 + 1e-12;
        let span = |k: usize| {
            let lo = ((x[k] - self.s) / self.spacing).floor() as i64;
            let hi = ((x[k] + self.s) / self.spacing).ceil() as i64;
            (lo.max(self.range[k].0), hi.min(self.range[k].1))
        };
        let (a0, b0) = span(0);
        if x.len() == 1 {
            for n in a0..=b0 {
                let y = n as f64 * self.spacing;
                if (x[0] - y).abs() <= self.s * tol {
                    f(&[y]);
                }
            }
            return;
        }
        let (a1, b1) = span(1);
        for n2 in a1..=b1 {
            for n1 in a0..=b0 {
                let y = [n1 as f64 * self.spacing, n2 as f64 * self.spacing];
                let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
                if d2 <= self.s * self.s * tol * tol {
                    f(&y);
                }
            }
        }
    }

    fn psi(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        self.near(x, |y| {
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            v += phi0_radial(d2.sqrt() / self.s);
        });
        v
    }

    fn overlap(&self, x: &[f64]) -> usize {
        let mut n = 0;
        self.near(x, |_| n += 1);
        n
    }

    fn points(&self) -> Vec<Vec<f64>> {
        let (a0, b0) = self.range[0];
        if self.range.len() == 1 {
            return (a0..=b0).map(|n| vec![n as f64 * self.spacing]).collect();
        }
        let (a1, b1) = self.range[1];
        (a1..=b1)
            .flat_map(|n2| (a0..=b0).map(move |n1| (n1, n2)))
            .map(|(n1, n2)| vec![n1 as f64 * self.spacing, n2 as f64 * self.spacing])
            .collect()
    }
}

/// Builds `psi = sum_{y in G} phi0(|x - y| / s)` over the lattice `G` of
/// spacing `s / sqrt d` in the box `|y - x0|_inf < r / sqrt d`, with
/// `s = eps^(1/k(eps))` from `profile`.
pub fn grid_sum(x0: &[f64], r: f64, profile: MProfile, ladder: &EpsLadder, params: &EngineParams) -> Result<GridSum> {
    params.validate()?;
    profile.validate()?;
    let dim = x0.len();
    if !(1..=2).contains(&dim) {
        return Err(EngineError::Dimension(dim));
    }
    if !(r > 0.0) {
        return Err(EngineError::Invalid(format!("box radius {r} must be positive")));
    }
    if x0.iter().any(|c| c.abs() + r + 1.0 > params.extent) {
        return Err(EngineError::CenterOutOfDomain(x0.to_vec()));
    }
    let sd = (dim as f64).sqrt();
    let eps = ladder.epsilons().to_vec();
    let mut lattices = Vec::with_capacity(eps.len());
    for &e in &eps {
        let s = profile.radius(e);
        let spacing = s / sd;
        let h = params.step(e);
        if spacing < h {
            return Err(EngineError::SpacingBelowStep { spacing, step: h, eps: e });
        }
        let range = lattice_range(x0, r, spacing, dim);
        if range.iter().any(|(a, b)| a > b) {
            return Err(EngineError::Invalid(format!("no lattice point within {r} of the center at eps = {e}")));
        }
        lattices.push(Lattice { spacing, s, range });
    }
    let lattices = Arc::new(lattices);
    let set = HyperfiniteSet::new(ladder.clone(), lattices.iter().map(Lattice::points).collect())?;

    let support = lattices
        .iter()
        .map(|l| {
            let lo = l.range.iter().map(|(a, _)| *a as f64 * l.spacing - l.s).collect();
            let hi = l.range.iter().map(|(_, b)| *b as f64 * l.spacing + l.s).collect();
            Some(SupportBox { lo, hi })
        })
        .collect();
    let lat = Arc::clone(&lattices);
    let psi = GeneralizedFunction::new(
        dim,
        ladder.clone(),
        params,
        Arc::new(move |i: usize, x: &[f64]| lat[i].psi(x)),
        support,
        "grid_sum",
    )?;

    let c = x0.to_vec();
    let centre_term = InternalFunctionSampled::scalar(ladder, move |e, y| {
        let s = profile.radius(e);
        let d2: f64 = y.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
        phi0_radial(d2.sqrt() / s)
    });
    let psi_at_center = hf_sum(&set, &centre_term)?.values;
    let cardinality: Vec<usize> = hf_count(&set).values.iter().map(|&v| v as usize).collect();

    let inner = r / (2.0 * sd);
    let mut min_psi_inner = Vec::with_capacity(eps.len());
    let mut max_overlap = Vec::with_capacity(eps.len());
    for (i, l) in lattices.iter().enumerate() {
        let p = psi.patch(i, x0, inner, 1, 0)?;
        let (mut lo, mut ov) = (f64::INFINITY, 0usize);
        for (k, v) in p.values.iter().enumerate() {
            lo = lo.min(*v);
            ov = ov.max(l.overlap(&p.point(k)));
        }
        for y in &set.points[i] {
            ov = ov.max(l.overlap(y));
        }
        min_psi_inner.push(lo);
        max_overlap.push(ov);
    }

    let n = eps.len();
    let s = derivative_sups(&psi, &vec![x0.to_vec(); n], &vec![Region::Box { half_width: inner }; n], params)?;
    let derivative_fits = s
        .alphas
        .iter()
        .zip(&s.sups)
        .map(|(a, v)| {
            let fam = rhoscale_core::EpsFamily::new(ladder.clone(), v.clone())?;
            let fit = rhoscale_core::estimate_order(&fam).ok();
            Ok(AlphaFit { alpha: a.clone(), sups: v.clone(), fit, growth: fit.map(|f| (-f.slope).max(0.0)) })
        })
        .collect::<Result<Vec<_>>>()?;

    let report = GridSumReport {
        dim,
        x0: x0.to_vec(),
        r,
        profile,
        support_radius: lattices.iter().map(|l| l.s).collect(),
        spacing: lattices.iter().map(|l| l.spacing).collect(),
        cardinality_bound: lattices.iter().map(|l| (2.0 * r / l.s + 1.0).powi(dim as i32)).collect(),
        cardinality,
        min_psi_inner,
        max_overlap,
        psi_at_center,
        derivative_fits,
        envelope: eps.iter().map(|&e| profile.m(e).map_or(0.0, |k| 1.0 / (k as f64).sqrt())).collect(),
        epsilons: eps,
    };
    Ok(GridSum { psi, set, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_box() {
        let l = EpsLadder::default();
        let p = EngineParams::default();
        let g = grid_sum(&[0.1], 0.5, MProfile::LogLog, &l, &p).unwrap();
        let r = &g.report;
        for i in 0..l.len() {
            assert!(r.min_psi_inner[i] >= 1.0 - 1e-12, "{i}: {}", r.min_psi_inner[i]);
            assert!(r.cardinality[i] as f64 <= r.cardinality_bound[i]);
            assert_eq!(r.max_overlap[i], 3);
            assert!((r.psi_at_center[i] - g.psi.sample(i, &[0.1])).abs() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_box() {
        let l = EpsLadder::dyadic(4, 9).unwrap();
        let p = EngineParams::default();
        let g = grid_sum(&[0.0, 0.2], 0.5, MProfile::LogLog, &l, &p).unwrap();
        let r = &g.report;
        for i in 0..l.len() {
            assert!(r.min_psi_inner[i] >= 1.0 - 1e-12);
            assert!(r.cardinality[i] as f64 <= r.cardinality_bound[i]);
            assert_eq!(r.max_overlap[i], 9);
        }
    }

    #[test]
    fn spacing_below_step() {
        let l = EpsLadder::dyadic(4, 8).unwrap();
        let p = EngineParams::default();
        let e = grid_sum(&[0.0], 0.5, MProfile::Fixed { radius: 1e-3 }, &l, &p);
        assert!(matches!(e, Err(EngineError::SpacingBelowStep { .. })));
    }
}
