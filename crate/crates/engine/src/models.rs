//! Model distributions and their mollifications `(model * psi_eps) . window`
//! with `psi_eps(x) = eps^-d psi(x / eps)`, `psi = phi0 / int phi0`.

use std::num::NonZeroUsize;
use std::sync::{Arc, OnceLock};

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi};

use rhoscale_core::EpsLadder;
use serde::{Deserialize, Serialize};

use crate::config::EngineParams;
use crate::error::{EngineError, Result};
use crate::gf::{GeneralizedFunction, SupportBox};
use crate::plateau::{integrate, make_plateau, norm, phi0_radial};

/// Radius of the fixed window applied to models without compact support.
pub const WINDOW_RADIUS: f64 = 3.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum Model {
    Delta {
        x0: Vec<f64>,
    },
    Heaviside1d,
    /// `H(x1)` in the plane.
    HalfplaneJump2d,
    /// `|x|^alpha`, `alpha > -1`, on the line.
    PowerSingularity {
        alpha: f64,
    },
    /// `exp(-|x|^2)`.
    SmoothGaussian {
        dim: usize,
    },
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Delta { x0 } => x0.len(),
            Model::Heaviside1d | Model::PowerSingularity { .. } => 1,
            Model::HalfplaneJump2d => 2,
            Model::SmoothGaussian { dim } => *dim,
        }
    }

    pub fn id(&self) -> String {
        match self {
            Model::Delta { x0 } => format!("delta{x0:?}"),
            Model::Heaviside1d => "heaviside_1d".into(),
            Model::HalfplaneJump2d => "halfplane_jump_2d".into(),
            Model::PowerSingularity { alpha } => format!("power_singularity[{alpha}]"),
            Model::SmoothGaussian { dim } => format!("smooth_gaussian_{dim}d"),
        }
    }

    /// Parses `delta`, `delta:x0` / `delta:x0,y0`, `heaviside`, `halfplane`,
    /// `power:alpha`, `gaussian` / `gaussian2d`.
    pub fn from_id(s: &str) -> Result<Model> {
        let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
        let nums = |a: Option<&str>| -> Result<Vec<f64>> {
            a.map_or(Ok(vec![]), |a| {
                a.split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|_| EngineError::UnsupportedModel(s.into())))
                    .collect()
            })
        };
        match name {
            "delta" => {
                let x0 = nums(arg)?;
                Ok(Model::Delta { x0: if x0.is_empty() { vec![0.0] } else { x0 } })
            }
            "delta2d" => Ok(Model::Delta { x0: vec![0.0, 0.0] }),
            "heaviside" | "heaviside_1d" => Ok(Model::Heaviside1d),
            "halfplane" | "halfplane_jump_2d" => Ok(Model::HalfplaneJump2d),
            "power" | "power_singularity" => match nums(arg)?.as_slice() {
                [a] => Ok(Model::PowerSingularity { alpha: *a }),
                _ => Err(EngineError::UnsupportedModel(s.into())),
            },
            "gaussian" | "smooth_gaussian" => Ok(Model::SmoothGaussian { dim: 1 }),
            "gaussian2d" => Ok(Model::SmoothGaussian { dim: 2 }),
            _ => Err(EngineError::UnsupportedModel(s.into())),
        }
    }
}

/// Mollifier `psi` at `|t|`.
pub fn psi(dim: usize, t: f64) -> f64 {
    phi0_radial(t) / mass(dim)
}

fn mass(dim: usize) -> f64 {
    static M: [OnceLock<f64>; 2] = [OnceLock::new(), OnceLock::new()];
    *M[dim - 1].get_or_init(|| make_plateau(dim).unwrap().mass())
}

/// The fixed window `phi0(|x| / WINDOW_RADIUS)`.
pub fn window(x: &[f64]) -> f64 {
    phi0_radial(norm(x) / WINDOW_RADIUS)
}

const TABLE_N: usize = 4096;

/// Marginal density of `psi` along the first axis, and its primitive,
/// tabulated on `[-1, 1]`.
struct CdfTable {
    density: Vec<f64>,
    cdf: Vec<f64>,
}

fn marginal(dim: usize, s: f64) -> f64 {
    if s.abs() >= 1.0 {
        return 0.0;
    }
    if dim == 1 {
        psi(1, s.abs())
    } else {
        let w = (1.0 - s * s).sqrt();
        2.0 * integrate(0.0, w, 8, |y| psi(2, (s * s + y * y).sqrt()))
    }
}

fn cdf_table(dim: usize) -> &'static CdfTable {
    static T: [OnceLock<CdfTable>; 2] = [OnceLock::new(), OnceLock::new()];
    T[dim - 1].get_or_init(|| {
        let dx = 2.0 / TABLE_N as f64;
        let node = |k: usize| -1.0 + k as f64 * dx;
        let density: Vec<f64> = (0..=TABLE_N).map(|k| marginal(dim, node(k))).collect();
        let mut cdf = vec![0.0; TABLE_N + 1];
        for k in 0..TABLE_N {
            cdf[k + 1] = cdf[k] + integrate(node(k), node(k + 1), 1, |s| marginal(dim, s));
        }
        // the total is 1 up to quadrature error; pin it
        let total = cdf[TABLE_N];
        cdf.iter_mut().for_each(|c| *c /= total);
        CdfTable { density, cdf }
    })
}

/// Mollified step `(H * psi_1)(s)` through cubic Hermite interpolation.
pub fn smoothed_step(dim: usize, s: f64) -> f64 {
    if s <= -1.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let t = cdf_table(dim);
    let dx = 2.0 / TABLE_N as f64;
    let u = (s + 1.0) / dx;
    let k = (u.floor() as usize).min(TABLE_N - 1);
    let w = u - k as f64;
    let (h00, h10, h01, h11) = (
        (1.0 + 2.0 * w) * (1.0 - w) * (1.0 - w),
        w * (1.0 - w) * (1.0 - w),
        w * w * (3.0 - 2.0 * w),
        w * w * (w - 1.0),
    );
    h00 * t.cdf[k] + h10 * dx * t.density[k] + h01 * t.cdf[k + 1] + h11 * dx * t.density[k + 1]
}

/// Radial moments `int |t|^{2k} psi(t) dt`.
fn moments(dim: usize, kmax: usize) -> Vec<f64> {
    (0..=kmax)
        .map(|k| {
            let p = 2 * k as i32;
            if dim == 1 {
                2.0 * integrate(0.0, 1.0, 64, |t| t.powi(p) * psi(1, t))
            } else {
                std::f64::consts::TAU * integrate(0.0, 1.0, 64, |t| t.powi(p + 1) * psi(2, t))
            }
        })
        .collect()
}

const GAUSS_TERMS: usize = 10;

/// Coefficients of `(G * psi_eps)(x) = sum_k eps^{2k} e^{-s} sum_j a_kj s^j`,
/// `s = |x|^2`, `G = e^{-|x|^2}`.
fn gaussian_series(dim: usize) -> &'static Vec<Vec<f64>> {
    static S: [OnceLock<Vec<Vec<f64>>>; 2] = [OnceLock::new(), OnceLock::new()];
    S[dim - 1].get_or_init(|| {
        let m = moments(dim, GAUSS_TERMS);
        let d = dim as f64;
        // Laplacian powers: Delta(P(s) e^{-s}) = [4s(P'' - 2P' + P) + 2d(P' - P)] e^{-s}
        let mut p = vec![1.0];
        let mut out = Vec::new();
        let mut fact = 1.0;
        let mut poch = 1.0;
        for k in 0..=GAUSS_TERMS {
            if k > 0 {
                fact *= k as f64;
                poch *= d / 2.0 + (k - 1) as f64;
            }
            let c = m[k] / (4f64.powi(k as i32) * fact * poch);
            out.push(p.iter().map(|a| a * c).collect());
            let n = p.len();
            let dp: Vec<f64> = (1..n).map(|j| j as f64 * p[j]).collect();
            let ddp: Vec<f64> = (2..n).map(|j| (j * (j - 1)) as f64 * p[j]).collect();
            let at = |v: &Vec<f64>, j: usize| v.get(j).copied().unwrap_or(0.0);
            p = (0..=n)
                .map(|j| {
                    let inner = |jj: usize| at(&ddp, jj) - 2.0 * at(&dp, jj) + at(&p, jj);
                    let shifted = if j > 0 { 4.0 * inner(j - 1) } else { 0.0 };
                    shifted + 2.0 * d * (at(&dp, j) - at(&p, j))
                })
                .collect();
        }
        out
    })
}

pub fn mollified_gaussian(dim: usize, eps: f64, x: &[f64]) -> f64 {
    let s: f64 = x.iter().map(|v| v * v).sum();
    let mut acc = 0.0;
    let mut e2k = 1.0;
    for poly in gaussian_series(dim) {
        acc += e2k * poly.iter().rev().fold(0.0, |a, c| a * s + c);
        e2k *= eps * eps;
    }
    acc * (-s).exp()
}

/// `int |s - t|^alpha psi(t) dt` over `|t| <= 1`.
struct PowerKernel {
    alpha: f64,
    jacobi: GaussJacobi,
}

impl PowerKernel {
    fn new(alpha: f64) -> Result<Self> {
        let beta = FiniteAboveNegOneF64::new(alpha).ok_or_else(|| EngineError::Invalid(format!("alpha = {alpha}")))?;
        let jacobi = GaussJacobi::new(NonZeroUsize::new(32).unwrap(), FiniteAboveNegOneF64::new(0.0).unwrap(), beta);
        Ok(PowerKernel { alpha, jacobi })
    }

    /// `int_0^len v^alpha psi(s - sign v) dv`, Gauss-Jacobi on the first panel.
    fn piece(&self, s: f64, len: f64, sign: f64) -> f64 {
        if len <= 0.0 {
            return 0.0;
        }
        let f = |v: f64| psi(1, (s - sign * v).abs());
        let d = len.min(0.125);
        let near = self.jacobi.integrate(0.0, d, f) * (0.5 * d).powf(self.alpha);
        let far = if len > d { integrate(d, len, 12, |v| v.powf(self.alpha) * f(v)) } else { 0.0 };
        near + far
    }

    fn eval(&self, s: f64) -> f64 {
        if s.abs() < 1.0 {
            self.piece(s, s + 1.0, 1.0) + self.piece(s, 1.0 - s, -1.0)
        } else {
            integrate(-1.0, 1.0, 16, |t| (s - t).abs().powf(self.alpha) * psi(1, t.abs()))
        }
    }
}

/// `(model * psi_eps) . window` on the ladder; the window applies to the
/// models without compact support.
pub fn regularize(model: &Model, ladder: &EpsLadder, params: &EngineParams) -> Result<GeneralizedFunction> {
    params.validate()?;
    let dim = model.dim();
    if !(1..=2).contains(&dim) {
        return Err(EngineError::Dimension(dim));
    }
    let n = ladder.len();
    let eps: Vec<f64> = ladder.epsilons().to_vec();
    let windowed = !matches!(model, Model::Delta { .. });
    if windowed && WINDOW_RADIUS > params.extent {
        return Err(EngineError::WindowExceedsDomain { radius: WINDOW_RADIUS, extent: params.extent });
    }
    let wsupport = vec![Some(SupportBox::ball(&vec![0.0; dim], WINDOW_RADIUS)); n];
    let label = model.id();
    match model.clone() {
        Model::Delta { x0 } => {
            if x0.iter().any(|c| c.abs() + eps[0] > params.extent) {
                return Err(EngineError::CenterOutOfDomain(x0));
            }
            let support = eps.iter().map(|&e| Some(SupportBox::ball(&x0, e))).collect();
            let e2 = eps.clone();
            let f = move |i: usize, x: &[f64]| {
                let e = e2[i];
                let r = x.iter().zip(&x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                psi(dim, r / e) / e.powi(dim as i32)
            };
            GeneralizedFunction::new(dim, ladder.clone(), params, Arc::new(f), support, label)
        }
        Model::Heaviside1d | Model::HalfplaneJump2d => {
            cdf_table(dim);
            let f = move |i: usize, x: &[f64]| {
                let w = window(x);
                if w == 0.0 {
                    0.0
                } else {
                    smoothed_step(dim, x[0] / eps[i]) * w
                }
            };
            GeneralizedFunction::new(dim, ladder.clone(), params, Arc::new(f), wsupport, label)
        }
        Model::PowerSingularity { alpha } => {
            if dim != 1 || alpha <= -1.0 {
                return Err(EngineError::UnsupportedModel(format!("{label} (needs d = 1, alpha > -1)")));
            }
            let k = PowerKernel::new(alpha)?;
            let f = move |i: usize, x: &[f64]| {
                let w = window(x);
                if w == 0.0 {
                    0.0
                } else {
                    eps[i].powf(alpha) * k.eval(x[0] / eps[i]) * w
                }
            };
            GeneralizedFunction::new(dim, ladder.clone(), params, Arc::new(f), wsupport, label)
        }
        Model::SmoothGaussian { .. } => {
            gaussian_series(dim);
            let f = move |i: usize, x: &[f64]| mollified_gaussian(dim, eps[i], x) * window(x);
            GeneralizedFunction::new(dim, ladder.clone(), params, Arc::new(f), wsupport, label)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_conv(dim: usize, eps: f64, x: &[f64], g: impl Fn(&[f64]) -> f64) -> f64 {
        if dim == 1 {
            integrate(-1.0, 1.0, 64, |t| g(&[x[0] - eps * t]) * psi(1, t.abs()))
        } else {
            integrate(0.0, 1.0, 48, |r| {
                integrate(0.0, std::f64::consts::TAU, 48, |a| {
                    g(&[x[0] - eps * r * a.cos(), x[1] - eps * r * a.sin()]) * psi(2, r) * r
                })
            })
        }
    }

    #[test]
    fn step_table_matches_quadrature() {
        for dim in [1, 2] {
            for s in [-0.9, -0.31, 0.0, 0.123, 0.77] {
                let direct = integrate(-1.0, s, 64, |t| marginal(dim, t));
                assert!((smoothed_step(dim, s) - direct).abs() < 1e-10, "d={dim} s={s}");
            }
            assert!((smoothed_step(dim, 0.0) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_series_matches_convolution() {
        let g = |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>()).exp();
        for dim in [1, 2] {
            for eps in [0.25, 1.0 / 16.0] {
                let x = if dim == 1 { vec![0.4] } else { vec![0.4, -0.3] };
                let d = direct_conv(dim, eps, &x, g);
                assert!((mollified_gaussian(dim, eps, &x) - d).abs() < 1e-12, "d={dim} eps={eps}");
            }
        }
    }

    #[test]
    fn power_profile_matches_convolution() {
        // t = s -+ v^2 turns |s - t|^(1/2) dt into the smooth 2 v^2 dv
        let k = PowerKernel::new(0.5).unwrap();
        for s in [0.0f64, 0.3, -0.8, 1.5] {
            let half = |len: f64, sign: f64| {
                if len <= 0.0 {
                    0.0
                } else {
                    integrate(0.0, len.sqrt(), 200, |v| 2.0 * v * v * psi(1, (s - sign * v * v).abs()))
                }
            };
            let d = if s.abs() < 1.0 {
                half(s + 1.0, 1.0) + half(1.0 - s, -1.0)
            } else {
                half(s + 1.0, 1.0) - half(s - 1.0, 1.0)
            };
            assert!((k.eval(s) - d).abs() < 1e-12, "s={s} {} {d}", k.eval(s));
        }
    }

    #[test]
    fn delta_peak_scaling() {
        let l = EpsLadder::dyadic(4, 8).unwrap();
        let u = regularize(&Model::Delta { x0: vec![0.0] }, &l, &EngineParams::default()).unwrap();
        for (i, &e) in l.epsilons().iter().enumerate() {
            assert!((u.sample(i, &[0.0]) * e - 1.0 / 1.5).abs() < 1e-14);
            assert_eq!(u.sample(i, &[1.1 * e]), 0.0);
        }
    }

    #[test]
    fn heaviside_ramp() {
        let l = EpsLadder::dyadic(4, 8).unwrap();
        let u = regularize(&Model::Heaviside1d, &l, &EngineParams::default()).unwrap();
        let e = l.eps(2);
        assert_eq!(u.sample(2, &[-e]), 0.0);
        assert_eq!(u.sample(2, &[e]), 1.0);
        assert!((u.sample(2, &[0.0]) - 0.5).abs() < 1e-12);
        let xs: Vec<f64> = (-20..=20).map(|k| u.sample(2, &[k as f64 * e / 16.0])).collect();
        assert!(xs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn gaussian_close_to_analytic() {
        let l = EpsLadder::dyadic(4, 10).unwrap();
        let u = regularize(&Model::SmoothGaussian { dim: 1 }, &l, &EngineParams::default()).unwrap();
        for (i, &e) in l.epsilons().iter().enumerate() {
            let x = 0.7;
            let err = (u.sample(i, &[x]) - (-x * x as f64).exp()).abs();
            assert!(err < e * e, "{err}");
        }
    }

    #[test]
    fn model_ids() {
        assert_eq!(Model::from_id("delta").unwrap(), Model::Delta { x0: vec![0.0] });
        assert_eq!(Model::from_id("delta:0.5,1").unwrap(), Model::Delta { x0: vec![0.5, 1.0] });
        assert_eq!(Model::from_id("power:0.5").unwrap(), Model::PowerSingularity { alpha: 0.5 });
        assert!(Model::from_id("sine").is_err());
        let l = EpsLadder::dyadic(4, 7).unwrap();
        let p = EngineParams { extent: 3.0, ..Default::default() };
        assert!(matches!(regularize(&Model::Heaviside1d, &l, &p), Err(EngineError::WindowExceedsDomain { .. })));
        let m = Model::PowerSingularity { alpha: 0.5 };
        assert!(regularize(&Model::Delta { x0: vec![0.0, 0.0] }, &l, &EngineParams::default()).is_ok());
        assert!(serde_json::to_string(&m).unwrap().contains("power_singularity"));
    }
}
