//! Bin spectra of patches by FFT, with continuum normalization.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::Result;
use crate::gf::{GeneralizedFunction, Patch};

/// `U_m = h^d sum_k u_k e^{-2 pi i k.m / N}`, row-major like the patch; bin
/// `m` sits at frequency `m / (N h)` (aliased to `(m - N) / (N h)` above
/// `N/2`), phase referenced to the patch origin.
pub fn patch_fft(p: &Patch) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = p.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if data.is_empty() {
        return data;
    }
    let mut planner = FftPlanner::new();
    let n1 = p.n[0];
    let f1 = planner.plan_fft_forward(n1);
    for row in data.chunks_mut(n1) {
        f1.process(row);
    }
    if p.dim == 2 {
        let n2 = p.n[1];
        let f2 = planner.plan_fft_forward(n2);
        let mut col = vec![Complex64::new(0.0, 0.0); n2];
        for k1 in 0..n1 {
            for k2 in 0..n2 {
                col[k2] = data[k2 * n1 + k1];
            }
            f2.process(&mut col);
            for k2 in 0..n2 {
                data[k2 * n1 + k1] = col[k2];
            }
        }
    }
    let hd = p.step.powi(p.dim as i32);
    data.iter_mut().for_each(|z| *z *= hd);
    data
}

/// Frequency of bin `m` out of `n` at step `h`.
pub fn bin_frequency(m: usize, n: usize, h: f64) -> f64 {
    let m = if 2 * m >= n { m as f64 - n as f64 } else { m as f64 };
    m / (n as f64 * h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsevalRecord {
    pub eps: f64,
    pub points: usize,
    /// `h^d sum |u|^2`.
    pub l2_squared: f64,
    /// `sum |U|^2 / (N h)^d`, the spectral energy at bin spacing `1/(N h)`.
    pub spectral_energy: f64,
    pub rel_err: f64,
}

/// Parseval on the grid patch `|x - center|_inf <= radius` at every eps.
pub fn parseval_check(u: &GeneralizedFunction, center: &[f64], radius: f64) -> Result<Vec<ParsevalRecord>> {
    let mut out = Vec::with_capacity(u.ladder().len());
    for (i, &eps) in u.ladder().epsilons().iter().enumerate() {
        let p = u.patch(i, center, radius, 1, 0)?;
        let hd = p.step.powi(p.dim as i32);
        let l2_squared = hd * p.values.iter().map(|v| v * v).sum::<f64>();
        let spec = patch_fft(&p);
        let nh: f64 = p.n.iter().map(|&n| n as f64 * p.step).product();
        let spectral_energy = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() / nh;
        let rel_err =
            if l2_squared == 0.0 { spectral_energy } else { (spectral_energy - l2_squared).abs() / l2_squared };
        out.push(ParsevalRecord { eps, points: p.len(), l2_squared, spectral_energy, rel_err });
    }
    Ok(out)
}
