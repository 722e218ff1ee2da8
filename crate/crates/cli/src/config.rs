use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rhoscale_core::ladder::LadderParams;
use rhoscale_core::{EpsLadder, Thresholds};
use rhoscale_engine::{EngineParams, MProfile};
use serde::{Deserialize, Serialize};

/// Run configuration: a TOML file, then flag overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Ladder for 1D runs and for the scale and formula commands.
    pub ladder: LadderParams,
    /// Ladder for 2D models.
    pub ladder_2d: LadderParams,
    pub thresholds: Thresholds,
    pub engine: EngineParams,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ladder: LadderParams::default(),
            ladder_2d: LadderParams { j_max: 12, ..LadderParams::default() },
            thresholds: Thresholds::default(),
            engine: EngineParams::default(),
            out: PathBuf::from("rhoscale-out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        for l in [&self.ladder, &self.ladder_2d] {
            if l.j_min >= l.j_max {
                bail!("ladder needs j_min < j_max, got {}..{}", l.j_min, l.j_max);
            }
            EpsLadder::geometric(*l)?;
        }
        self.thresholds.validate()?;
        self.engine_params().validate()?;
        Ok(())
    }

    /// Engine parameters with the top-level thresholds applied.
    pub fn engine_params(&self) -> EngineParams {
        EngineParams { thresholds: self.thresholds, ..self.engine.clone() }
    }

    pub fn ladder_for(&self, dim: usize) -> Result<EpsLadder> {
        Ok(EpsLadder::geometric(if dim == 2 { self.ladder_2d } else { self.ladder })?)
    }
}

/// `J_MIN..J_MAX` or `BASE:J_MIN..J_MAX`.
pub fn parse_ladder(s: &str) -> Result<LadderParams> {
    let (base, range) = match s.split_once(':') {
        Some((b, r)) => (b.trim().parse::<f64>().context("ladder base")?, r),
        None => (2.0, s),
    };
    let Some((a, b)) = range.split_once("..") else { bail!("ladder must look like 4..14, got {s:?}") };
    Ok(LadderParams {
        base,
        j_min: a.trim().parse().context("ladder j_min")?,
        j_max: b.trim().parse().context("ladder j_max")?,
    })
}

/// Comma-separated `key=value` overrides, e.g. `k_reg=10,window=4`.
pub fn apply_thresholds(th: &mut Thresholds, s: &str) -> Result<()> {
    for kv in s.split(',').filter(|t| !t.trim().is_empty()) {
        let Some((k, v)) = kv.split_once('=') else { bail!("threshold override {kv:?} is not key=value") };
        let v = v.trim();
        let num = || v.parse::<f64>().with_context(|| format!("threshold {k}"));
        match k.trim() {
            "k_reg" => th.k_reg = num()?,
            "n_sing" => th.n_sing = num()?,
            "tau_fast" => th.tau_fast = num()?,
            "min_fit_quality" => th.min_fit_quality = num()?,
            "window" => th.window = v.parse().context("threshold window")?,
            other => bail!("unknown threshold {other:?}"),
        }
    }
    Ok(())
}

/// `loglog`, `sqrtlog`, `const:M` or `fixed:R`.
pub fn parse_profile(s: &str) -> Result<MProfile> {
    let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
    Ok(match (name, arg) {
        ("loglog", None) => MProfile::LogLog,
        ("sqrtlog", None) => MProfile::SqrtLog,
        ("const", Some(m)) => MProfile::Constant { m: m.parse().context("profile m")? },
        ("fixed", Some(r)) => MProfile::Fixed { radius: r.parse().context("profile radius")? },
        _ => bail!("unknown cutoff profile {s:?}"),
    })
}

/// Comma-separated coordinates.
pub fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().with_context(|| format!("bad coordinate in {s:?}"))).collect()
}

/// `LO:HI:N` evenly spaced values.
pub fn parse_axis(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else { bail!("axis must look like -2:2:9, got {s:?}") };
    let (lo, hi): (f64, f64) = (lo.parse()?, hi.parse()?);
    let n: usize = n.parse()?;
    if n == 0 || (n == 1 && lo != hi) || hi < lo {
        bail!("bad axis {s:?}");
    }
    Ok((0..n).map(|k| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect())
}
