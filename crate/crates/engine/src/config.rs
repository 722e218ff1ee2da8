use rhoscale_core::Thresholds;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

/// Integer profile `m(eps)` of a scaled cutoff; the cutoff radius is
/// `eps^(1/m(eps))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "profile")]
pub enum MProfile {
    /// `max(2, ceil(log2 log2(1/eps)))`
    LogLog,
    /// `max(2, ceil(sqrt(log2(1/eps))))`
    SqrtLog,
    Constant {
        m: u32,
    },
    /// An eps-independent radius.
    Fixed {
        radius: f64,
    },
}

impl Default for MProfile {
    fn default() -> Self {
        MProfile::LogLog
    }
}

impl MProfile {
    pub fn m(&self, eps: f64) -> Option<u32> {
        let l2 = (1.0 / eps).log2();
        match *self {
            MProfile::LogLog => Some((l2.log2().ceil().max(2.0)) as u32),
            MProfile::SqrtLog => Some((l2.sqrt().ceil().max(2.0)) as u32),
            MProfile::Constant { m } => Some(m),
            MProfile::Fixed { .. } => None,
        }
    }

    pub fn radius(&self, eps: f64) -> f64 {
        match (*self, self.m(eps)) {
            (MProfile::Fixed { radius }, _) => radius,
            (_, Some(m)) => eps.powf(1.0 / m as f64),
            _ => unreachable!(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MProfile::Constant { m: 0 } => Err(EngineError::Invalid("m must be positive".into())),
            MProfile::Fixed { radius } if !(radius > 0.0 && radius <= 1.0) => {
                Err(EngineError::Invalid(format!("fixed cutoff radius {radius} not in (0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

/// Grid and decision parameters shared by the spectral and derivative tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineParams {
    /// Domain `(-extent, extent)^d`.
    pub extent: f64,
    /// Grid step `h = eps / step_divisor`.
    pub step_divisor: f64,
    pub alpha_max: usize,
    pub thresholds: Thresholds,
    pub profile: MProfile,
    /// Frequency magnitudes `|xi| = eps^(-a)`.
    pub exponents: Vec<f64>,
    /// Direction tilts `|theta - xi0| ~ eps^b` (2D only).
    pub tilts: Vec<f64>,
    /// Relative level below which a Fourier value counts as zero.
    pub zero_floor: f64,
    /// Stop finite differences at steps above `radius / fd_max_ratio`.
    pub fd_max_ratio: f64,
    /// Tolerance on derivative-order growth for the M-infinity decision.
    pub order_tolerance: f64,
    /// Compute Fourier values at entries the resolution gate excludes.
    pub compute_unresolved: bool,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            extent: 4.0,
            step_divisor: 4.0,
            alpha_max: 4,
            thresholds: Thresholds::default(),
            profile: MProfile::LogLog,
            exponents: vec![0.25, 0.5, 0.75, 1.0],
            tilts: vec![0.5, 1.0],
            zero_floor: 1e-10,
            fd_max_ratio: 8.0,
            order_tolerance: 0.25,
            compute_unresolved: true,
        }
    }
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()?;
        self.profile.validate()?;
        if !(self.extent > 0.0) {
            return Err(EngineError::Invalid("extent must be positive".into()));
        }
        if self.step_divisor < 4.0 {
            return Err(EngineError::Invalid("step_divisor below 4 does not resolve the eps scale".into()));
        }
        if self.exponents.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(EngineError::Invalid("frequency exponents must lie in (0, 1]".into()));
        }
        if self.tilts.iter().any(|&b| !(b > 0.0)) {
            return Err(EngineError::Invalid("tilt exponents must be positive".into()));
        }
        Ok(())
    }

    pub fn step(&self, eps: f64) -> f64 {
        eps / self.step_divisor
    }
}
