//! The fixed plateau `phi0(x) = S(2(1 - |x|))` and its Fourier transform.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{EngineError, Result};

fn f(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let (a, b) = (f(t), f(1.0 - t));
        a / (a + b)
    }
}

/// `phi0` as a function of `|x|`: 1 on `[0, 1/2]`, 0 on `[1, inf)`.
pub fn phi0_radial(r: f64) -> f64 {
    smooth_step(2.0 * (1.0 - r))
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The plateau in dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plateau {
    dim: usize,
}

pub fn make_plateau(dim: usize) -> Result<Plateau> {
    match dim {
        1 | 2 => Ok(Plateau { dim }),
        d => Err(EngineError::Dimension(d)),
    }
}

impl Plateau {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        phi0_radial(norm(x))
    }

    /// `int phi0`.
    pub fn mass(&self) -> f64 {
        plateau_hat(self.dim, 0.0)
    }

    /// Fourier transform `int phi0(x) e^{-2 pi i x.xi} dx` at `|xi| = z`
    /// (real, since `phi0` is radial).
    pub fn hat(&self, z: f64) -> f64 {
        plateau_hat(self.dim, z)
    }

    /// Smallest `z` such that `|hat(z')| <= 1e-12 hat(0)` for all `z' >= z`.
    pub fn z_star(&self) -> f64 {
        z_star(self.dim)
    }
}

fn gl16() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(16).unwrap()))
}

/// Composite 16-point Gauss-Legendre on `[a, b]`.
pub(crate) fn integrate(a: f64, b: f64, panels: usize, g: impl Fn(f64) -> f64) -> f64 {
    let w = (b - a) / panels as f64;
    (0..panels).map(|k| gl16().integrate(a + k as f64 * w, a + (k + 1) as f64 * w, &g)).sum()
}

fn plateau_hat(dim: usize, z: f64) -> f64 {
    let z = z.abs();
    let panels = 16 + (2.0 * z).ceil() as usize;
    let tp = std::f64::consts::TAU;
    if dim == 1 {
        let flat = if z == 0.0 { 1.0 } else { (std::f64::consts::PI * z).sin() / (std::f64::consts::PI * z) };
        flat + 2.0 * integrate(0.5, 1.0, panels, |x| phi0_radial(x) * (tp * z * x).cos())
    } else {
        let flat = if z == 0.0 { std::f64::consts::PI / 4.0 } else { libm::j1(std::f64::consts::PI * z) / (2.0 * z) };
        flat + tp * integrate(0.5, 1.0, panels, |r| phi0_radial(r) * libm::j0(tp * z * r) * r)
    }
}

const Z_REL: f64 = 1e-12;

fn z_star(dim: usize) -> f64 {
    static Z: [OnceLock<f64>; 2] = [OnceLock::new(), OnceLock::new()];
    *Z[dim - 1].get_or_init(|| {
        let h0 = plateau_hat(dim, 0.0);
        let (lo, hi, step) = (10.0, 240.0, 0.1);
        let n = ((hi - lo) / step) as usize;
        let mut z = hi;
        for k in (0..=n).rev() {
            let zk = lo + k as f64 * step;
            if plateau_hat(dim, zk).abs() > Z_REL * h0 {
                break;
            }
            z = zk;
        }
        z
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_values() {
        let p = make_plateau(2).unwrap();
        assert_eq!(p.eval(&[0.0, 0.0]), 1.0);
        assert_eq!(p.eval(&[0.3, 0.3]), 1.0);
        assert_eq!(p.eval(&[1.0, 0.0]), 0.0);
        // S(1/2) = 1/2 by symmetry
        assert!((p.eval(&[0.75, 0.0]) - 0.5).abs() < 1e-15);
        let v = p.eval(&[0.6, 0.0]);
        let (a, b) = ((-1.0f64 / 0.8).exp(), (-1.0f64 / 0.2).exp());
        assert!((v - a / (a + b)).abs() < 1e-15);
        assert!(make_plateau(3).is_err());
    }

    #[test]
    fn masses() {
        assert!((make_plateau(1).unwrap().mass() - 1.5).abs() < 1e-13);
        let m2 = make_plateau(2).unwrap().mass();
        let direct = std::f64::consts::TAU * integrate(0.0, 1.0, 64, |r| phi0_radial(r) * r);
        assert!((m2 - direct).abs() < 1e-13);
        assert!((m2 - 1.78829).abs() < 1e-5, "{m2}");
    }

    #[test]
    fn hat_matches_direct_quadrature() {
        for z in [0.3, 1.0, 2.7, 7.5] {
            let d = 2.0 * integrate(0.0, 1.0, 200, |x| phi0_radial(x) * (std::f64::consts::TAU * z * x).cos());
            assert!((plateau_hat(1, z) - d).abs() < 1e-13, "{z}");
        }
    }

    #[test]
    fn resolution_thresholds() {
        for d in [1, 2] {
            let p = make_plateau(d).unwrap();
            let z = p.z_star();
            assert!(z > 30.0 && z < 200.0, "d={d} z*={z}");
            for k in 0..200 {
                let zz = z + 0.37 * k as f64;
                assert!(p.hat(zz).abs() <= 1e-12 * p.mass());
            }
        }
    }
}
