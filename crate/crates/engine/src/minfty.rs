//! Derivative sups by finite differences, the slow-scale M^inf test and the
//! negligibility surrogate.

use rhoscale_core::{estimate_order, EpsFamily, OrderFit, Ternary, Thresholds};
use serde::Serialize;

use crate::config::{EngineParams, MProfile};
use crate::error::{EngineError, Result};
use crate::gf::{GeneralizedFunction, Patch, SupportBox};

/// Centered stencils for derivatives of order 0..=4 (offsets `-2..=2`).
const STENCILS: [[f64; 5]; 5] = [
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, -0.5, 0.0, 0.5, 0.0],
    [0.0, 1.0, -2.0, 1.0, 0.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
    [1.0, -4.0, 6.0, -4.0, 1.0],
];
/// Sum of absolute stencil weights, for the rounding-noise estimate.
const NOISE: [f64; 5] = [1.0, 1.0, 4.0, 3.0, 16.0];
const HALO: usize = 2;
/// An estimate counts only if it is this many times the rounding noise.
const NOISE_MARGIN: f64 = 1e3;
pub const MAX_ORDER: usize = 4;

/// All multi-indices with `|alpha| <= max`, ordered by `|alpha|`.
pub fn multi_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 0..=max {
        if dim == 1 {
            out.push(vec![k]);
        } else {
            for a1 in (0..=k).rev() {
                out.push(vec![a1, k - a1]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    Ball { radius: f64 },
    Box { half_width: f64 },
}

impl Region {
    fn half_width(&self) -> f64 {
        match *self {
            Region::Ball { radius } => radius,
            Region::Box { half_width } => half_width,
        }
    }

    fn contains(&self, center: &[f64], x: &[f64]) -> bool {
        match *self {
            Region::Ball { radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= radius * radius * (1.0 + 1e-12)
            }
            Region::Box { half_width } => {
                x.iter().zip(center).all(|(a, b)| (a - b).abs() <= half_width * (1.0 + 1e-12))
            }
        }
    }
}

fn stencil_at(values: &[f64], stride: usize, k: usize, order: usize) -> f64 {
    let w = &STENCILS[order];
    let mut s = 0.0;
    for (t, &c) in w.iter().enumerate() {
        if c != 0.0 {
            s += c * values[(k + t * stride) - 2 * stride];
        }
    }
    s
}

/// Max of `|D^alpha u|` (undivided, i.e. without the `h^-|alpha|`) over the
/// patch nodes in the region, for every alpha.
fn undivided_sups(p: &Patch, center: &[f64], region: Region, alphas: &[Vec<usize>]) -> Vec<f64> {
    let mut out = vec![0.0f64; alphas.len()];
    if p.dim == 1 {
        let n = p.n[0];
        for k in HALO..n.saturating_sub(HALO) {
            if !region.contains(center, &[p.coord(0, k)]) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(alphas) {
                *o = o.max(stencil_at(&p.values, 1, k, a[0]).abs());
            }
        }
        return out;
    }
    let (n1, n2) = (p.n[0], p.n[1]);
    if n1 <= 2 * HALO || n2 <= 2 * HALO {
        return out;
    }
    // Nodes of each row inside the region, as an index range.
    let ranges: Vec<Option<(usize, usize)>> = (0..n2)
        .map(|k2| {
            let y = p.coord(1, k2);
            let inside: Vec<usize> =
                (HALO..n1 - HALO).filter(|&k1| region.contains(center, &[p.coord(0, k1), y])).collect();
            inside.first().map(|&a| (a, *inside.last().unwrap()))
        })
        .collect();
    let mut a1 = vec![0.0; n1 * n2];
    for order1 in 0..=MAX_ORDER {
        let idx: Vec<usize> = (0..alphas.len()).filter(|&j| alphas[j][0] == order1).collect();
        if idx.is_empty() {
            continue;
        }
        for k2 in 0..n2 {
            let row = &p.values[k2 * n1..(k2 + 1) * n1];
            let dst = &mut a1[k2 * n1..(k2 + 1) * n1];
            for k1 in HALO..n1 - HALO {
                dst[k1] = stencil_at(row, 1, k1, order1);
            }
        }
        for k2 in HALO..n2 - HALO {
            let Some((lo, hi)) = ranges[k2] else { continue };
            for k1 in lo..=hi {
                for &j in &idx {
                    let v = stencil_at(&a1, n1, k2 * n1 + k1, alphas[j][1]).abs();
                    out[j] = out[j].max(v);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeSups {
    pub alphas: Vec<Vec<usize>>,
    /// `sups[a][i]`: estimate of `sup |D^alpha u_eps|` at ladder entry `i`.
    pub sups: Vec<Vec<f64>>,
    /// Stride (in grid steps) the estimate was taken at; 0 if none passed.
    pub strides: Vec<Vec<usize>>,
}

/// Estimates `sup |D^alpha u_eps|` over a region for all `|alpha| <=
/// params.alpha_max`. Per alpha, takes the finest step `h 2^j <= width /
/// fd_max_ratio` whose estimate clears the rounding noise; if none does the
/// sup is recorded as 0.
pub fn derivative_sups(
    u: &GeneralizedFunction,
    centers: &[Vec<f64>],
    regions: &[Region],
    params: &EngineParams,
) -> Result<DerivativeSups> {
    if params.alpha_max > MAX_ORDER {
        return Err(EngineError::Invalid(format!("alpha_max above {MAX_ORDER}")));
    }
    let alphas = multi_indices(u.dim(), params.alpha_max);
    let n = u.ladder().len();
    let mut sups = vec![vec![0.0; n]; alphas.len()];
    let mut strides = vec![vec![0usize; n]; alphas.len()];
    for i in 0..n {
        let (c, region) = (&centers[i], regions[i]);
        let h = u.step(i);
        let width = region.half_width();
        if width < 2.0 * h {
            return Err(EngineError::StencilExceedsGrid { radius: width, step: h });
        }
        let mut stride = 1usize;
        loop {
            let p = u.patch(i, c, width, stride, HALO).map_err(|e| match e {
                EngineError::CutoffEscapesGrid { radius, .. } => {
                    EngineError::StencilExceedsGrid { radius, step: h * stride as f64 }
                }
                e => e,
            })?;
            let umax = p.umax();
            if umax == 0.0 {
                break;
            }
            let hs = p.step;
            let raw = undivided_sups(&p, c, region, &alphas);
            for (j, a) in alphas.iter().enumerate() {
                if strides[j][i] != 0 {
                    continue;
                }
                let k: usize = a.iter().sum();
                let noise: f64 = a.iter().map(|&o| NOISE[o]).product::<f64>() * umax * f64::EPSILON;
                if raw[j] >= NOISE_MARGIN * noise {
                    sups[j][i] = raw[j] / hs.powi(k as i32);
                    strides[j][i] = stride;
                }
            }
            if strides.iter().all(|s| s[i] != 0) {
                break;
            }
            stride *= 2;
            if h * stride as f64 > width / params.fd_max_ratio {
                break;
            }
        }
    }
    Ok(DerivativeSups { alphas, sups, strides })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaFit {
    pub alpha: Vec<usize>,
    pub sups: Vec<f64>,
    pub fit: Option<OrderFit>,
    /// Growth exponent `max(0, -order)`.
    pub growth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MInftyVerdict {
    pub verdict: Ternary,
    /// Smallest `N` with `sup |D^alpha u| <= eps^-N` for all fitted alpha.
    pub n: Option<f64>,
    pub x0: Vec<f64>,
    pub profile: MProfile,
    /// Per derivative order, the largest growth exponent over `|alpha| = k`.
    pub growth_by_order: Vec<Option<f64>>,
    pub alphas: Vec<AlphaFit>,
    pub thresholds: Thresholds,
}

fn fits(u: &GeneralizedFunction, s: &DerivativeSups) -> Result<Vec<AlphaFit>> {
    s.alphas
        .iter()
        .zip(&s.sups)
        .map(|(a, v)| {
            let fam = EpsFamily::new(u.ladder().clone(), v.clone())?;
            let fit = estimate_order(&fam).ok();
            Ok(AlphaFit { alpha: a.clone(), sups: v.clone(), fit, growth: fit.map(|f| (-f.slope).max(0.0)) })
        })
        .collect()
}

/// M^inf test on the slow-scale ball `|x - x0| <= eps^(1/m(eps))`: fits the
/// growth of every `sup |D^alpha u|` and answers yes iff one `N` bounds all
/// orders, i.e. the growth does not increase with `|alpha|` by more than
/// `order_tolerance`.
pub fn m_infinity_test(u: &GeneralizedFunction, x0: &[f64], params: &EngineParams) -> Result<MInftyVerdict> {
    params.validate()?;
    if x0.len() != u.dim() {
        return Err(EngineError::DimensionMismatch { expected: u.dim(), got: x0.len() });
    }
    if x0.iter().any(|c| c.abs() > u.extent() / 2.0 + 1e-12) {
        return Err(EngineError::CenterOutOfDomain(x0.to_vec()));
    }
    let eps = u.ladder().epsilons();
    let centers = vec![x0.to_vec(); eps.len()];
    let regions: Vec<Region> = eps.iter().map(|&e| Region::Ball { radius: params.profile.radius(e) }).collect();
    let s = derivative_sups(u, &centers, &regions, params)?;
    let alphas = fits(u, &s)?;
    let th = params.thresholds;
    // A poorly fitted family that does not grow still bounds nothing away.
    let good =
        |a: &AlphaFit| a.fit.is_some_and(|f| f.fit_quality >= th.min_fit_quality || f.slope >= -params.order_tolerance);

    let mut growth_by_order = vec![None; params.alpha_max + 1];
    for a in alphas.iter().filter(|a| good(a)) {
        let k: usize = a.alpha.iter().sum();
        let g = a.growth.unwrap();
        growth_by_order[k] = Some(growth_by_order[k].map_or(g, |m: f64| m.max(g)));
    }
    let mut prev: Option<f64> = None;
    let mut no = false;
    for g in growth_by_order.iter().flatten() {
        if prev.is_some_and(|p| *g > p + params.order_tolerance) {
            no = true;
        }
        prev = Some(prev.map_or(*g, |p| p.max(*g)));
    }
    let verdict = if no {
        Ternary::No
    } else if alphas.iter().all(good) {
        Ternary::Yes
    } else {
        Ternary::Undecidable
    };
    Ok(MInftyVerdict {
        verdict,
        n: if verdict == Ternary::Yes { prev } else { None },
        x0: x0.to_vec(),
        profile: params.profile,
        growth_by_order,
        alphas,
        thresholds: th,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegligibleReport {
    pub verdict: Ternary,
    pub domain: Vec<SupportBox>,
    pub alphas: Vec<AlphaFit>,
    pub k_reg: f64,
}

/// Truncated negligibility test for `u - v`: every `sup |D^alpha (u - v)|`
/// with `|alpha| <= alpha_max` must decay with order at least `k_reg`.
/// The sup runs over the hull of the supports, or the whole interior grid
/// (1D only) when either function lacks compact support.
pub fn negligible_equiv(
    u: &GeneralizedFunction,
    v: &GeneralizedFunction,
    params: &EngineParams,
) -> Result<NegligibleReport> {
    params.validate()?;
    let d = u.add_scaled(v, -1.0)?;
    let n = d.ladder().len();
    let mut centers = Vec::with_capacity(n);
    let mut regions = Vec::with_capacity(n);
    let mut domain = Vec::with_capacity(n);
    for i in 0..n {
        let h = d.step(i);
        let margin = (HALO as f64 + 2.0) * h * params.fd_max_ratio;
        let inner = u.extent() - margin;
        let b = match (u.support(i), v.support(i)) {
            (Some(a), Some(b)) => a.hull(b),
            _ if d.dim() == 1 => SupportBox { lo: vec![-inner], hi: vec![inner] },
            _ => return Err(EngineError::Invalid("negligible_equiv in 2D needs compact supports".into())),
        };
        let lo: Vec<f64> = b.lo.iter().map(|x| x.max(-inner)).collect();
        let hi: Vec<f64> = b.hi.iter().map(|x| x.min(inner)).collect();
        let c: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let w = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).fold(4.0 * h * params.fd_max_ratio, f64::max);
        centers.push(c);
        regions.push(Region::Box { half_width: w });
        domain.push(SupportBox { lo, hi });
    }
    let s = derivative_sups(&d, &centers, &regions, params)?;
    let alphas = fits(&d, &s)?;
    let th = params.thresholds;
    let failing: Vec<&AlphaFit> = alphas.iter().filter(|a| !a.fit.is_some_and(|f| f.slope >= th.k_reg)).collect();
    let verdict = if failing.is_empty() {
        Ternary::Yes
    } else if failing.iter().any(|a| a.fit.is_some_and(|f| f.fit_quality >= th.min_fit_quality)) {
        Ternary::No
    } else {
        Ternary::Undecidable
    };
    Ok(NegligibleReport { verdict, domain, alphas, k_reg: th.k_reg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{regularize, Model};
    use rhoscale_core::EpsLadder;

    #[test]
    fn stencils_exact_on_monomials() {
        for (order, w) in STENCILS.iter().enumerate() {
            let f = |x: f64| x.powi(order as i32);
            let s: f64 = w.iter().enumerate().map(|(t, c)| c * f(t as f64 - 2.0)).sum();
            let fact: f64 = (1..=order).map(|k| k as f64).product();
            assert!((s - fact).abs() < 1e-12, "order {order}");
            assert_eq!(NOISE[order], w.iter().map(|c| c.abs()).sum::<f64>());
        }
    }

    #[test]
    fn sups_of_polynomial_2d() {
        let l = EpsLadder::dyadic(4, 7).unwrap();
        let p = EngineParams::default();
        let u = GeneralizedFunction::from_fn(2, &l, &p, "x^2 y", |_, x| x[0] * x[0] * x[1]).unwrap();
        let c = vec![vec![0.0, 0.0]; 4];
        let r = vec![Region::Box { half_width: 0.5 }; 4];
        let s = derivative_sups(&u, &c, &r, &p).unwrap();
        let at = |a: &[usize]| s.sups[s.alphas.iter().position(|x| x == a).unwrap()][3];
        assert!((at(&[0, 0]) - 0.125).abs() < 1e-12);
        assert!((at(&[2, 1]) - 2.0).abs() < 1e-9);
        assert!((at(&[1, 1]) - 1.0).abs() < 1e-9);
        assert_eq!(at(&[0, 2]), 0.0);
    }

    #[test]
    fn delta_examples() {
        let l = EpsLadder::default();
        let p = EngineParams::default();
        let u = regularize(&Model::Delta { x0: vec![0.0] }, &l, &p).unwrap();
        let v = m_infinity_test(&u, &[0.0], &p).unwrap();
        assert_eq!(v.verdict, Ternary::No);
        for (k, g) in v.growth_by_order.iter().enumerate() {
            assert!((g.unwrap() - (1.0 + k as f64)).abs() < 0.1, "{k}: {g:?}");
        }
        let v = m_infinity_test(&u, &[1.0], &p).unwrap();
        assert_eq!((v.verdict, v.n), (Ternary::Yes, Some(0.0)));
    }

    #[test]
    fn gaussian_bounded() {
        let l = EpsLadder::default();
        let p = EngineParams::default();
        let u = regularize(&Model::SmoothGaussian { dim: 1 }, &l, &p).unwrap();
        for x in [0.0, 0.7, -1.5] {
            let v = m_infinity_test(&u, &[x], &p).unwrap();
            assert_eq!(v.verdict, Ternary::Yes, "{x}");
            assert!(v.n.unwrap() <= p.order_tolerance);
        }
    }

    #[test]
    fn negligible_examples() {
        let l = EpsLadder::default();
        let p = EngineParams::default();
        let u = regularize(&Model::Delta { x0: vec![0.0] }, &l, &p).unwrap();
        let bump =
            GeneralizedFunction::from_fn(1, &l, &p, "bump", |_, x| crate::plateau::phi0_radial(x[0].abs())).unwrap();
        assert_eq!(negligible_equiv(&u, &u, &p).unwrap().verdict, Ternary::Yes);
        let far = u.add_family(&bump, |e| e.powi(20)).unwrap();
        assert_eq!(negligible_equiv(&u, &far, &p).unwrap().verdict, Ternary::Yes);
        let near = u.add_family(&bump, |e| e * e).unwrap();
        assert_eq!(negligible_equiv(&u, &near, &p).unwrap().verdict, Ternary::No);
    }
}
