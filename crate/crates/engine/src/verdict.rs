use rhoscale_core::{EpsLadder, OrderFit, Thresholds};
use serde::Serialize;

use crate::config::{EngineParams, MProfile};
use crate::cutoff::CutoffSpec;
use crate::error::{EngineError, Result};
use crate::gf::GeneralizedFunction;
use crate::spectrum::{rows_for_direction, unit_direction, windowed_spectrum, DecayRow, DecayTable, RowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Regular,
    Singular,
    Undecidable,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Regular => "regular",
            Status::Singular => "singular",
            Status::Undecidable => "undecidable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowVerdict {
    pub spec: RowSpec,
    pub resolved: bool,
    /// Coarsest eps of the resolved tail the order was fitted on.
    pub resolved_from_eps: Option<f64>,
    pub fit: Option<OrderFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityVerdict {
    pub status: Status,
    pub x0: Vec<f64>,
    pub xi0: Vec<f64>,
    pub rows: Vec<RowVerdict>,
    pub thresholds: Thresholds,
    pub profile: MProfile,
    pub z_star: f64,
    pub zero_floor: f64,
}

impl RegularityVerdict {
    /// Fitted orders of the resolved rows.
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.fit.map(|f| f.slope)).collect()
    }
}

/// Singular if a resolved row decays with order `<= n_sing` and good fit
/// quality; regular if there are resolved rows and every one has order
/// `>= k_reg`; undecidable otherwise.
pub fn classify_rows(rows: &[&DecayRow], th: &Thresholds) -> Status {
    let resolved: Vec<&&DecayRow> = rows.iter().filter(|r| r.resolved()).collect();
    let singular =
        resolved.iter().any(|r| r.fit.is_some_and(|f| f.slope <= th.n_sing && f.fit_quality >= th.min_fit_quality));
    if singular {
        return Status::Singular;
    }
    let regular = !resolved.is_empty() && resolved.iter().all(|r| r.fit.is_some_and(|f| f.slope >= th.k_reg));
    if regular {
        Status::Regular
    } else {
        Status::Undecidable
    }
}

fn verdict_for(table: &DecayTable, x0: &[f64], xi0: &[f64], params: &EngineParams) -> RegularityVerdict {
    let rows: Vec<&DecayRow> = table.rows.iter().filter(|r| r.spec.xi0 == xi0).collect();
    RegularityVerdict {
        status: classify_rows(&rows, &params.thresholds),
        x0: x0.to_vec(),
        xi0: xi0.to_vec(),
        rows: rows
            .iter()
            .map(|r| RowVerdict {
                spec: r.spec.clone(),
                resolved: r.resolved(),
                resolved_from_eps: r.resolved_from.map(|i| table.epsilons[i]),
                fit: r.fit,
            })
            .collect(),
        thresholds: params.thresholds,
        profile: table.profile,
        z_star: table.z_star,
        zero_floor: table.zero_floor,
    }
}

fn check_center(u: &GeneralizedFunction, x0: &[f64]) -> Result<()> {
    if x0.len() != u.dim() {
        return Err(EngineError::DimensionMismatch { expected: u.dim(), got: x0.len() });
    }
    if x0.iter().any(|c| c.abs() > u.extent() / 2.0 + 1e-12) {
        return Err(EngineError::CenterOutOfDomain(x0.to_vec()));
    }
    Ok(())
}

/// Verdicts at `x0` for several base directions from one shared table.
pub fn microlocal_directions(
    u: &GeneralizedFunction,
    x0: &[f64],
    directions: &[Vec<f64>],
    params: &EngineParams,
) -> Result<(Vec<RegularityVerdict>, DecayTable)> {
    params.validate()?;
    check_center(u, x0)?;
    let mut rows = Vec::new();
    for d in directions {
        if d.len() != u.dim() {
            return Err(EngineError::DimensionMismatch { expected: u.dim(), got: d.len() });
        }
        rows.extend(rows_for_direction(&unit_direction(d)?, params));
    }
    let cutoff = CutoffSpec::new(x0, params.profile)?;
    let table = windowed_spectrum(u, &cutoff, &rows, params)?;
    let verdicts = directions.iter().map(|d| verdict_for(&table, x0, d, params)).collect();
    Ok((verdicts, table))
}

/// Microlocal regularity of `u` at `(x0, xi0)`.
pub fn microlocal_test(
    u: &GeneralizedFunction,
    x0: &[f64],
    xi0: &[f64],
    params: &EngineParams,
) -> Result<(RegularityVerdict, DecayTable)> {
    let (mut v, t) = microlocal_directions(u, x0, &[xi0.to_vec()], params)?;
    Ok((v.remove(0), t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlaggedPair {
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub orders: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WavefrontScan {
    pub profile: MProfile,
    pub flagged: Vec<FlaggedPair>,
    pub undecided: Vec<FlaggedPair>,
    pub verdicts: Vec<RegularityVerdict>,
}

/// Runs the microlocal test on every `(x, theta)` of the grids with one
/// shared cutoff profile; returns the pairs found singular.
pub fn wavefront_scan(
    u: &GeneralizedFunction,
    xs: &[Vec<f64>],
    directions: &[Vec<f64>],
    params: &EngineParams,
) -> Result<WavefrontScan> {
    let mut scan = WavefrontScan { profile: params.profile, flagged: vec![], undecided: vec![], verdicts: vec![] };
    for x in xs {
        let (vs, _) = microlocal_directions(u, x, directions, params)?;
        for v in vs {
            let pair = FlaggedPair { x: v.x0.clone(), theta: v.xi0.clone(), orders: v.orders() };
            match v.status {
                Status::Singular => scan.flagged.push(pair),
                Status::Undecidable => scan.undecided.push(pair),
                Status::Regular => {}
            }
            scan.verdicts.push(v);
        }
    }
    Ok(scan)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCheck {
    pub status: Status,
    /// Fitted order per row, `None` for rows below the resolution gate.
    pub orders: Vec<(RowSpec, Option<f64>)>,
    pub table: DecayTable,
}

/// Decay of the cutoff's own transform (`u = 1`) at `xi = eps^-a theta`.
pub fn fourier_decay_check(
    dim: usize,
    ladder: &EpsLadder,
    profile: MProfile,
    exponents: &[f64],
    params: &EngineParams,
) -> Result<DecayCheck> {
    let p = EngineParams { profile, exponents: exponents.to_vec(), ..params.clone() };
    p.validate()?;
    let u = GeneralizedFunction::constant(dim, ladder, &p, 1.0)?;
    let dirs = crate::spectrum::direction_grid(dim, 4);
    let mut rows = Vec::new();
    for d in &dirs {
        rows.extend(exponents.iter().map(|&a| RowSpec { xi0: d.clone(), tilt: None, a }));
    }
    let cutoff = CutoffSpec::new(&vec![0.0; dim], profile)?;
    let table = windowed_spectrum(&u, &cutoff, &rows, &p)?;
    let refs: Vec<&DecayRow> = table.rows.iter().collect();
    let status = classify_rows(&refs, &p.thresholds);
    let orders = table.rows.iter().map(|r| (r.spec.clone(), r.order())).collect();
    Ok(DecayCheck { status, orders, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{regularize, Model};

    #[test]
    fn delta_1d() {
        let l = EpsLadder::default();
        let p = EngineParams::default();
        let u = regularize(&Model::Delta { x0: vec![0.0] }, &l, &p).unwrap();
        let (v, _) = microlocal_test(&u, &[0.0], &[1.0], &p).unwrap();
        assert_eq!(v.status, Status::Singular);
        assert!(v.orders().iter().all(|o| *o <= 2.0));
        let (v, _) = microlocal_test(&u, &[1.0], &[-1.0], &p).unwrap();
        assert_eq!(v.status, Status::Regular);
    }

    #[test]
    fn cutoff_decay_at_full_scale() {
        let l = EpsLadder::default();
        let p = EngineParams::default();
        for profile in [MProfile::LogLog, MProfile::SqrtLog, MProfile::Fixed { radius: 1.0 }] {
            let c = fourier_decay_check(1, &l, profile, &[1.0], &p).unwrap();
            assert_eq!(c.status, Status::Regular, "{profile:?}");
        }
    }

    #[test]
    fn center_must_be_interior() {
        let l = EpsLadder::dyadic(4, 8).unwrap();
        let p = EngineParams::default();
        let u = GeneralizedFunction::constant(1, &l, &p, 1.0).unwrap();
        assert!(matches!(microlocal_test(&u, &[2.5], &[1.0], &p), Err(EngineError::CenterOutOfDomain(_))));
        assert!(matches!(microlocal_test(&u, &[0.0], &[0.5], &p), Err(EngineError::BadDirection(_))));
    }
}
