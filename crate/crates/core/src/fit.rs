//! Order fits of sampled families against `log eps`.

use serde::{Deserialize, Serialize};

use crate::config::Thresholds;
use crate::error::CoreError;
use crate::ladder::EpsFamily;
use crate::scale::ScaleFlags;
use crate::ternary::Ternary;

/// Log-unit noise floor below which residual scatter does not count
/// against the fit quality (a flat family then scores 1).
const LOG_NOISE_FLOOR: f64 = 0.1;

/// Default number of finest entries that must all vanish for the
/// "identically zero" sentinel.
pub const ZERO_TAIL: usize = 3;

/// Result of a log-log regression; `slope = s` means the family behaves
/// like `eps^s`. An eventually vanishing family has `slope = +inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    #[serde(with = "inf_f64")]
    pub slope: f64,
    #[serde(with = "inf_f64")]
    pub intercept: f64,
    pub fit_quality: f64,
    pub used: usize,
}

impl OrderFit {
    pub fn vanishing() -> Self {
        OrderFit { slope: f64::INFINITY, intercept: f64::NEG_INFINITY, fit_quality: 1.0, used: 0 }
    }

    pub fn is_vanishing(&self) -> bool {
        self.slope == f64::INFINITY
    }
}

/// Fit of `log|v| = c + p log(eps) + q log(log(1/eps))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLogFit {
    pub p: f64,
    pub q: f64,
    pub intercept: f64,
    pub fit_quality: f64,
    pub used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledFlags {
    pub flags: ScaleFlags,
    pub fit: Option<PowerLogFit>,
}

pub fn estimate_order(family: &EpsFamily) -> Result<OrderFit, CoreError> {
    estimate_order_tail(family, ZERO_TAIL)
}

/// As [`estimate_order`], with an explicit zero-tail length. Zero entries
/// outside the tail are dropped from the fit.
pub fn estimate_order_tail(family: &EpsFamily, tail: usize) -> Result<OrderFit, CoreError> {
    let pts = usable_points(family)?;
    let n = family.len();
    if family.values[n.saturating_sub(tail.max(1))..].iter().all(|&v| v == 0.0) {
        return Ok(OrderFit::vanishing());
    }
    if pts.len() < 4 {
        return Err(CoreError::InsufficientPoints(pts.len()));
    }
    let xs: Vec<f64> = pts.iter().map(|&(e, _)| e.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, v)| v.abs().ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    Ok(OrderFit { slope, intercept, fit_quality: quality(ss_res, ss_tot, xs.len()), used: xs.len() })
}

fn usable_points(family: &EpsFamily) -> Result<Vec<(f64, f64)>, CoreError> {
    let mut pts = Vec::with_capacity(family.len());
    for (i, (&e, &v)) in family.ladder.epsilons().iter().zip(&family.values).enumerate() {
        if !v.is_finite() {
            return Err(CoreError::NonFinite(i));
        }
        if v != 0.0 {
            pts.push((e, v));
        }
    }
    Ok(pts)
}

fn quality(ss_res: f64, ss_tot: f64, n: usize) -> f64 {
    let floor = n as f64 * LOG_NOISE_FLOOR * LOG_NOISE_FLOOR;
    (1.0 - ss_res / ss_tot.max(floor)).clamp(0.0, 1.0)
}

/// Power-log regression; recovers `(p, q)` exactly for `eps^p log(1/eps)^q`.
/// Zero entries and `eps = 1` are skipped.
pub fn fit_power_log(family: &EpsFamily) -> Result<PowerLogFit, CoreError> {
    let pts: Vec<(f64, f64)> = usable_points(family)?.into_iter().filter(|&(e, _)| e < 1.0).collect();
    if pts.len() < 4 {
        return Err(CoreError::InsufficientPoints(pts.len()));
    }
    let cols: [Vec<f64>; 3] = [
        vec![1.0; pts.len()],
        pts.iter().map(|&(e, _)| e.ln()).collect(),
        pts.iter().map(|&(e, _)| (1.0 / e).ln().ln()).collect(),
    ];
    let y: Vec<f64> = pts.iter().map(|&(_, v)| v.abs().ln()).collect();
    let beta = least_squares3(&cols, &y);
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 =
        (0..y.len()).map(|i| (y[i] - beta[0] - beta[1] * cols[1][i] - beta[2] * cols[2][i]).powi(2)).sum();
    Ok(PowerLogFit {
        p: beta[1],
        q: beta[2],
        intercept: beta[0],
        fit_quality: quality(ss_res, ss_tot, y.len()),
        used: y.len(),
    })
}

/// Least squares with three columns by modified Gram-Schmidt.
fn least_squares3(cols: &[Vec<f64>; 3], y: &[f64]) -> [f64; 3] {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(3);
    let mut r = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut v = cols[j].clone();
        for (i, qi) in q.iter().enumerate() {
            r[i][j] = dot(qi, &v);
            for (vk, qk) in v.iter_mut().zip(qi) {
                *vk -= r[i][j] * qk;
            }
        }
        r[j][j] = dot(&v, &v).sqrt();
        let inv = 1.0 / r[j][j];
        v.iter_mut().for_each(|x| *x *= inv);
        q.push(v);
    }
    let qty: Vec<f64> = q.iter().map(|qi| dot(qi, y)).collect();
    let mut beta = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| r[i][k] * beta[k]).sum();
        beta[i] = (qty[i] - s) / r[i][i];
    }
    beta
}

/// Ternary scale flags of a sampled family.
pub fn classify_sampled(family: &EpsFamily, th: &Thresholds) -> Result<SampledFlags, CoreError> {
    let n = family.len();
    usable_points(family)?;
    if family.values[n.saturating_sub(th.window.max(1))..].iter().all(|&v| v == 0.0) {
        return Ok(SampledFlags { flags: ScaleFlags::zero(), fit: None });
    }
    let fit = fit_power_log(family)?;
    if fit.fit_quality < th.min_fit_quality {
        return Ok(SampledFlags { flags: ScaleFlags::undecidable(), fit: Some(fit) });
    }
    let band = |x: f64| {
        if x >= th.tau_fast {
            1
        } else if x <= -th.tau_fast {
            -1
        } else {
            0
        }
    };
    let mut flags = ScaleFlags::leading(band(fit.p), band(fit.q));
    if fit.p >= th.k_reg {
        flags.negligible = Ternary::Undecidable;
    }
    Ok(SampledFlags { flags, fit: Some(fit) })
}

/// Serializes infinite floats as the strings `"inf"` / `"-inf"`.
pub mod inf_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("bad float {s}"))),
            },
        }
    }
}
