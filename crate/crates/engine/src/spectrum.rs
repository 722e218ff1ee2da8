//! Fourier values of cut-off grid functions at prescribed frequencies.

use num_complex::Complex64;
use rayon::prelude::*;
use rhoscale_core::{estimate_order, EpsFamily, EpsLadder, OrderFit};
use serde::Serialize;

use crate::config::{EngineParams, MProfile};
use crate::cutoff::CutoffSpec;
use crate::error::{EngineError, Result};
use crate::gf::{GeneralizedFunction, Patch};
use crate::plateau::make_plateau;

/// Rows needed for a fit over the resolved tail.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tilt {
    /// Angle `sign * eps^b` away from the base direction.
    pub b: f64,
    pub sign: i8,
}

/// Frequencies `xi(eps) = eps^-a theta(eps)`, `theta` the base direction
/// `xi0` rotated by an optional eps-dependent tilt.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSpec {
    pub xi0: Vec<f64>,
    pub tilt: Option<Tilt>,
    pub a: f64,
}

impl RowSpec {
    pub fn theta(&self, eps: f64) -> Vec<f64> {
        match self.tilt {
            None => self.xi0.clone(),
            Some(t) => {
                let ang = t.sign as f64 * eps.powf(t.b);
                let (s, c) = ang.sin_cos();
                vec![c * self.xi0[0] - s * self.xi0[1], s * self.xi0[0] + c * self.xi0[1]]
            }
        }
    }

    pub fn xi(&self, eps: f64) -> Vec<f64> {
        let m = eps.powf(-self.a);
        self.theta(eps).iter().map(|t| t * m).collect()
    }
}

/// Base direction plus its tilts (2D only), for every exponent.
pub fn rows_for_direction(xi0: &[f64], params: &EngineParams) -> Vec<RowSpec> {
    let mut out = Vec::new();
    for &a in &params.exponents {
        out.push(RowSpec { xi0: xi0.to_vec(), tilt: None, a });
        if xi0.len() == 2 {
            for &b in &params.tilts {
                for sign in [1i8, -1] {
                    out.push(RowSpec { xi0: xi0.to_vec(), tilt: Some(Tilt { b, sign }), a });
                }
            }
        }
    }
    out
}

pub fn unit_direction(xi0: &[f64]) -> Result<Vec<f64>> {
    let n = xi0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(1..=2).contains(&xi0.len()) || (n - 1.0).abs() > 1e-9 {
        return Err(EngineError::BadDirection(xi0.to_vec()));
    }
    Ok(xi0.to_vec())
}

/// `k` equally spaced unit directions in the plane, starting at `e1`; in 1D
/// the two directions `+1, -1`.
pub fn direction_grid(dim: usize, k: usize) -> Vec<Vec<f64>> {
    if dim == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    (0..k)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / k as f64;
            let (s, c) = t.sin_cos();
            // exact axes
            let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
            vec![snap(c), snap(s)]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub spec: RowSpec,
    /// `|F(phi u)(xi)|` per ladder entry; `None` where not computed.
    pub values: Vec<Option<f64>>,
    /// `r(eps) |xi(eps)| / z_star`; the entry is resolved when this is >= 1.
    pub margin: Vec<f64>,
    /// First index of the resolved tail, if it has at least four entries.
    pub resolved_from: Option<usize>,
    pub fit: Option<OrderFit>,
}

impl DecayRow {
    pub fn resolved(&self) -> bool {
        self.resolved_from.is_some()
    }

    pub fn order(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTable {
    pub epsilons: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
    pub radius: Vec<f64>,
    /// `||phi u||_L1` per entry; Fourier values below `zero_floor` times this
    /// are reported as exact zeros.
    pub l1: Vec<f64>,
    pub profile: MProfile,
    pub z_star: f64,
    pub zero_floor: f64,
    pub rows: Vec<DecayRow>,
}

impl DecayTable {
    /// Flat records `(eps, theta, a, |F|)` for CSV output.
    pub fn records(&self) -> Vec<(f64, Vec<f64>, f64, f64)> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (i, v) in row.values.iter().enumerate() {
                if let Some(v) = v {
                    let e = self.epsilons[i];
                    out.push((e, row.spec.theta(e), row.spec.a, *v));
                }
            }
        }
        out
    }
}

/// Cut-off samples `phi u` on a patch covering the cutoff support.
pub fn windowed_patch(u: &GeneralizedFunction, cutoff: &CutoffSpec, i: usize) -> Result<Patch> {
    let eps = u.ladder().eps(i);
    let c = cutoff.center(i);
    let r = cutoff.radius(eps);
    let mut p = u.patch(i, c, r, 1, 0)?;
    let n0 = p.n[0];
    let origin = p.origin.clone();
    let step = p.step;
    p.values.par_chunks_mut(n0.max(1)).enumerate().for_each(|(k2, row)| {
        for (k1, v) in row.iter_mut().enumerate() {
            if *v != 0.0 {
                let x = [origin[0] + k1 as f64 * step, origin.get(1).map_or(0.0, |o| o + k2 as f64 * step)];
                *v *= cutoff.eval(i, eps, &x[..u.dim()]);
            }
        }
    });
    Ok(p)
}

fn twiddles(n: usize, x0: f64, h: f64, xi: f64) -> (Vec<f64>, Vec<f64>) {
    // phase (x - c) xi reduced mod 1 before scaling by 2 pi
    let a = (x0 * xi).rem_euclid(1.0);
    let b = (h * xi).rem_euclid(1.0);
    (0..n)
        .map(|k| {
            let t = (a + k as f64 * b).rem_euclid(1.0);
            let (s, c) = (std::f64::consts::TAU * t).sin_cos();
            (c, -s)
        })
        .unzip()
}

fn dot2(w: &[f64], re: &[f64], im: &[f64]) -> (f64, f64) {
    let mut sr = [0.0; 4];
    let mut si = [0.0; 4];
    let n4 = w.len() / 4 * 4;
    for ((wc, rc), ic) in w[..n4].chunks_exact(4).zip(re[..n4].chunks_exact(4)).zip(im[..n4].chunks_exact(4)) {
        for l in 0..4 {
            sr[l] += wc[l] * rc[l];
            si[l] += wc[l] * ic[l];
        }
    }
    let (mut r, mut i) = ((sr[0] + sr[1]) + (sr[2] + sr[3]), (si[0] + si[1]) + (si[2] + si[3]));
    for k in n4..w.len() {
        r += w[k] * re[k];
        i += w[k] * im[k];
    }
    (r, i)
}

const ROW_CHUNK: usize = 64;
const FREQ_BLOCK: usize = 8;

/// `h^d sum_x w(x) e^{-2 pi i (x - c).xi}` for each `xi`, exact (no bins).
pub fn patch_dft(p: &Patch, center: &[f64], xis: &[Vec<f64>]) -> Vec<Complex64> {
    let hd = p.step.powi(p.dim as i32);
    if p.is_empty() || xis.is_empty() {
        return vec![Complex64::new(0.0, 0.0); xis.len()];
    }
    let n1 = p.n[0];
    let n2 = if p.dim == 1 { 1 } else { p.n[1] };
    // nonzero extent of every row
    let ranges: Vec<(usize, usize)> = p
        .values
        .chunks(n1)
        .map(|row| match row.iter().position(|v| *v != 0.0) {
            None => (0, 0),
            Some(lo) => (lo, n1 - row.iter().rev().position(|v| *v != 0.0).unwrap()),
        })
        .collect();
    if ranges.iter().all(|r| r.0 == r.1) {
        return vec![Complex64::new(0.0, 0.0); xis.len()];
    }
    let mut out = Vec::with_capacity(xis.len());
    for block in xis.chunks(FREQ_BLOCK) {
        let e1: Vec<(Vec<f64>, Vec<f64>)> =
            block.iter().map(|xi| twiddles(n1, p.origin[0] - center[0], p.step, xi[0])).collect();
        let e2: Vec<(Vec<f64>, Vec<f64>)> =
            block
                .iter()
                .map(|xi| {
                    if p.dim == 1 {
                        (vec![1.0], vec![0.0])
                    } else {
                        twiddles(n2, p.origin[1] - center[1], p.step, xi[1])
                    }
                })
                .collect();
        let partials: Vec<Vec<Complex64>> = (0..n2.div_ceil(ROW_CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![Complex64::new(0.0, 0.0); block.len()];
                for k2 in c * ROW_CHUNK..((c + 1) * ROW_CHUNK).min(n2) {
                    let (lo, hi) = ranges[k2];
                    if lo == hi {
                        continue;
                    }
                    let w = &p.values[k2 * n1 + lo..k2 * n1 + hi];
                    for (f, a) in acc.iter_mut().enumerate() {
                        let (r, i) = dot2(w, &e1[f].0[lo..hi], &e1[f].1[lo..hi]);
                        *a += Complex64::new(r, i) * Complex64::new(e2[f].0[k2], e2[f].1[k2]);
                    }
                }
                acc
            })
            .collect();
        for f in 0..block.len() {
            out.push(partials.iter().fold(Complex64::new(0.0, 0.0), |s, v| s + v[f]) * hd);
        }
    }
    out
}

/// Fit over the longest resolved tail; `None` when it is shorter than
/// [`MIN_FIT_POINTS`] or the fit fails.
fn fit_tail(ladder: &EpsLadder, values: &[Option<f64>], resolved: &[bool]) -> (Option<usize>, Option<OrderFit>) {
    let n = values.len();
    let start = (0..n).rev().take_while(|&i| resolved[i] && values[i].is_some()).last();
    let Some(start) = start.filter(|s| n - s >= MIN_FIT_POINTS) else {
        return (None, None);
    };
    let sub = EpsLadder::new(ladder.epsilons()[start..].to_vec()).expect("tail of a ladder");
    let fam = EpsFamily::new(sub, values[start..].iter().map(|v| v.unwrap()).collect()).expect("lengths match");
    (Some(start), estimate_order(&fam).ok())
}

/// Decay table of `phi_{m,x0} u` on the ladder: exact Fourier values at
/// `xi = eps^-a theta`, resolution gate `r |xi| >= z_star`, order fits over
/// the resolved tail.
pub fn windowed_spectrum(
    u: &GeneralizedFunction,
    cutoff: &CutoffSpec,
    rows: &[RowSpec],
    params: &EngineParams,
) -> Result<DecayTable> {
    if cutoff.dim() != u.dim() {
        return Err(EngineError::DimensionMismatch { expected: u.dim(), got: cutoff.dim() });
    }
    for r in rows {
        if r.xi0.len() != u.dim() {
            return Err(EngineError::DimensionMismatch { expected: u.dim(), got: r.xi0.len() });
        }
        unit_direction(&r.xi0)?;
        if !(r.a > 0.0) {
            return Err(EngineError::Invalid(format!("frequency exponent {}", r.a)));
        }
    }
    let ladder = u.ladder();
    let n = ladder.len();
    let z_star = make_plateau(u.dim())?.z_star();
    let mut values = vec![vec![None; n]; rows.len()];
    let mut margin = vec![vec![0.0; n]; rows.len()];
    let (mut radius, mut l1, mut centers) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        let eps = ladder.eps(i);
        let h = u.step(i);
        let r = cutoff.radius(eps);
        let nyq = 0.5 / h;
        let xis: Vec<Vec<f64>> = rows.iter().map(|s| s.xi(eps)).collect();
        for xi in &xis {
            if let Some(&x) = xi.iter().find(|x| x.abs() > nyq) {
                return Err(EngineError::Nyquist { xi: x, limit: nyq, eps });
            }
        }
        let p = windowed_patch(u, cutoff, i)?;
        let norm1 = p.values.iter().map(|v| v.abs()).sum::<f64>() * h.powi(u.dim() as i32);
        let mut wanted = Vec::new();
        for (k, xi) in xis.iter().enumerate() {
            let mag = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            margin[k][i] = r * mag / z_star;
            if params.compute_unresolved || margin[k][i] >= 1.0 {
                wanted.push(k);
            }
        }
        let sel: Vec<Vec<f64>> = wanted.iter().map(|&k| xis[k].clone()).collect();
        let f = patch_dft(&p, cutoff.center(i), &sel);
        for (&k, v) in wanted.iter().zip(f) {
            let m = v.norm();
            values[k][i] = Some(if m <= params.zero_floor * norm1 { 0.0 } else { m });
        }
        radius.push(r);
        l1.push(norm1);
        centers.push(cutoff.center(i).to_vec());
    }
    let table_rows = rows
        .iter()
        .zip(values)
        .zip(margin)
        .map(|((spec, values), margin)| {
            let resolved: Vec<bool> = margin.iter().map(|m| *m >= 1.0).collect();
            let (resolved_from, fit) = fit_tail(ladder, &values, &resolved);
            DecayRow { spec: spec.clone(), values, margin, resolved_from, fit }
        })
        .collect();
    Ok(DecayTable {
        epsilons: ladder.epsilons().to_vec(),
        centers,
        radius,
        l1,
        profile: cutoff.profile,
        z_star,
        zero_floor: params.zero_floor,
        rows: table_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{psi, regularize, Model};
    use crate::plateau::integrate;

    #[test]
    fn dft_matches_quadrature_1d() {
        // smooth bump sampled finely: the Riemann sum is spectrally accurate
        let l = EpsLadder::dyadic(4, 7).unwrap();
        let params = EngineParams::default();
        let u = GeneralizedFunction::from_fn(1, &l, &params, "one", |_, _| 1.0).unwrap();
        let c = CutoffSpec::new(&[0.3], MProfile::Fixed { radius: 0.5 }).unwrap();
        let p = windowed_patch(&u, &c, 3).unwrap();
        let plat = make_plateau(1).unwrap();
        for xi in [0.0, 1.3, 7.0] {
            let f = patch_dft(&p, &[0.3], &[vec![xi]])[0];
            assert!((f.re - 0.5 * plat.hat(0.5 * xi)).abs() < 1e-12, "{xi}");
            assert!(f.im.abs() < 1e-12);
        }
    }

    #[test]
    fn delta_closed_form() {
        // F(psi_eps)(xi) = psi_hat(eps xi) up to grid aliasing
        let l = EpsLadder::dyadic(4, 9).unwrap();
        let params = EngineParams { step_divisor: 16.0, ..Default::default() };
        let u = regularize(&Model::Delta { x0: vec![0.0] }, &l, &params).unwrap();
        let c = CutoffSpec::new(&[0.0], MProfile::LogLog).unwrap();
        let rows = vec![RowSpec { xi0: vec![1.0], tilt: None, a: 0.5 }];
        let t = windowed_spectrum(&u, &c, &rows, &params).unwrap();
        let plat = make_plateau(1).unwrap();
        for (i, v) in t.rows[0].values.iter().enumerate() {
            let e = l.eps(i);
            let expect = plat.hat(e * e.powf(-0.5)) / 1.5;
            assert!((v.unwrap() - expect.abs()).abs() < 1e-5, "{i} {v:?} {expect}");
        }
        let fit = t.rows[0].fit;
        assert!(fit.is_none(), "a = 1/2 rows are below the resolution gate");
        let _ = psi(1, 0.0);
        let _ = integrate(0.0, 1.0, 1, |x| x);
    }

    #[test]
    fn zero_function_gives_vanishing_rows() {
        let l = EpsLadder::default();
        let params = EngineParams::default();
        let u = GeneralizedFunction::zero(1, &l, &params).unwrap();
        let c = CutoffSpec::new(&[0.0], MProfile::LogLog).unwrap();
        let rows = rows_for_direction(&[1.0], &params);
        let t = windowed_spectrum(&u, &c, &rows, &params).unwrap();
        for r in &t.rows {
            assert!(r.values.iter().all(|v| *v == Some(0.0)));
        }
        let a1 = t.rows.iter().find(|r| r.spec.a == 1.0).unwrap();
        assert!(a1.resolved() && a1.fit.unwrap().is_vanishing());
    }

    #[test]
    fn nyquist_violation() {
        let l = EpsLadder::dyadic(4, 7).unwrap();
        let params = EngineParams::default();
        let u = GeneralizedFunction::constant(1, &l, &params, 1.0).unwrap();
        let c = CutoffSpec::new(&[0.0], MProfile::LogLog).unwrap();
        let rows = vec![RowSpec { xi0: vec![1.0], tilt: None, a: 1.5 }];
        assert!(matches!(windowed_spectrum(&u, &c, &rows, &params), Err(EngineError::Nyquist { .. })));
        let rows = vec![RowSpec { xi0: vec![1.0], tilt: None, a: 1.0 }];
        let p = EngineParams { step_divisor: 4.0, ..params };
        assert!(windowed_spectrum(&u, &c, &rows, &p).is_ok());
    }

    #[test]
    fn tilted_directions() {
        let r = RowSpec { xi0: vec![1.0, 0.0], tilt: Some(Tilt { b: 0.5, sign: 1 }), a: 1.0 };
        let e: f64 = 1.0 / 256.0;
        let t = r.theta(e);
        assert!(((t[0] - 1.0).powi(2) + t[1].powi(2)).sqrt() <= e.sqrt());
        assert!((t[1] - (1.0 / 16.0f64).sin()).abs() < 1e-15);
        assert_eq!(rows_for_direction(&[0.0, 1.0], &EngineParams::default()).len(), 20);
        let d = direction_grid(2, 8);
        assert_eq!(d[2], vec![0.0, 1.0]);
    }
}
