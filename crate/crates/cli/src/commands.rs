use std::path::Path;

use anyhow::{bail, Context, Result};
use rhoscale_core::formula::{check_text, corpus, evaluate, evaluate_eventually, parse, transfer_test, Structure};
use rhoscale_core::{classify_sampled, ScaleExpr, Ternary};
use rhoscale_engine::spectrum::direction_grid;
use rhoscale_engine::verdict::microlocal_directions;
use rhoscale_engine::{
    grid_sum, m_infinity_test, regularize, wavefront_scan, DecayTable, EngineParams, MProfile, Model,
};
use serde_json::json;

use crate::config::RunConfig;

/// What a command produces: a JSON document, optionally a CSV table, and a
/// one-line summary. `ok = false` makes the process exit nonzero.
pub struct Output {
    pub name: &'static str,
    pub json: serde_json::Value,
    pub csv: Option<Vec<Vec<String>>>,
    pub summary: String,
    pub ok: bool,
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn csv_point(x: &[f64]) -> String {
    x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn scale(cfg: &RunConfig, expr: &str) -> Result<Output> {
    let e: ScaleExpr = expr.parse().with_context(|| format!("parsing scale expression {expr:?}"))?;
    let exact = e.classify()?;
    let ladder = cfg.ladder_for(1)?;
    let mut values = Vec::with_capacity(ladder.len());
    for &eps in ladder.epsilons() {
        values.push(e.eval(eps)?);
    }
    let fam = rhoscale_core::EpsFamily::new(ladder, values)?;
    let sampled = classify_sampled(&fam, &cfg.thresholds)?;
    let summary = exact.as_pairs().iter().map(|(k, v)| format!("{k}={}", ternary(*v))).collect::<Vec<_>>().join(" ");
    Ok(Output {
        name: "scale",
        json: json!({ "expr": e.to_string(), "flags": exact, "sampled": sampled, "agree": sampled.flags == exact }),
        csv: None,
        summary,
        ok: true,
    })
}

fn ternary(t: Ternary) -> &'static str {
    match t {
        Ternary::Yes => "yes",
        Ternary::No => "no",
        Ternary::Undecidable => "undecidable",
    }
}

/// Formulas of a file, one per nonempty line; `#` starts a comment line.
pub fn read_formulas(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let out: Vec<String> =
        text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect();
    if out.is_empty() {
        bail!("{} contains no formulas", path.display());
    }
    Ok(out)
}

pub fn read_structure(path: Option<&Path>) -> Result<Structure> {
    let Some(path) = path else { return Ok(corpus::structure()) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let s = Structure::from_json(&text).with_context(|| format!("parsing structure {}", path.display()))?;
    if let Err(e) = s.validate() {
        bail!("invalid structure {}: {e}", path.display());
    }
    Ok(s)
}

pub fn check(formulas: &[String]) -> Result<Output> {
    let reports: Vec<_> = formulas
        .iter()
        .map(|f| {
            let (_, r) = check_text(f);
            json!({ "formula": f, "report": r })
        })
        .collect();
    let bad = reports.iter().filter(|r| r["report"]["ok"] == false).count();
    Ok(Output {
        name: "check",
        summary: format!("checked {} formula(s), {bad} rejected", formulas.len()),
        json: json!(reports),
        csv: None,
        ok: bad == 0,
    })
}

pub fn transfer(cfg: &RunConfig, formulas: &[String], model: &Structure) -> Result<Output> {
    let ladder = model.ladder.clone().map_or_else(|| cfg.ladder_for(1), Ok)?;
    let mut out = Vec::new();
    let mut disagree = 0;
    for f in formulas {
        let ast = parse(f).with_context(|| format!("parsing {f:?}"))?;
        let r =
            transfer_test(&ast, model, &ladder, cfg.thresholds.window).with_context(|| format!("evaluating {f:?}"))?;
        disagree += usize::from(!r.agree);
        out.push(json!({ "formula": f, "report": r }));
    }
    Ok(Output {
        name: "transfer",
        summary: format!("{} formula(s), {disagree} disagreement(s)", formulas.len()),
        json: json!(out),
        csv: None,
        ok: true,
    })
}

pub fn eval(cfg: &RunConfig, formulas: &[String], model: &Structure, eps: Option<f64>) -> Result<Output> {
    let ladder = model.ladder.clone().map_or_else(|| cfg.ladder_for(1), Ok)?;
    let mut out = Vec::new();
    let mut line = Vec::new();
    for f in formulas {
        let ast = parse(f).with_context(|| format!("parsing {f:?}"))?;
        match eps {
            Some(e) => {
                let r = evaluate(&ast, model, e).with_context(|| format!("evaluating {f:?}"))?;
                line.push(r.value.to_string());
                out.push(json!({ "formula": f, "eps": e, "outcome": r }));
            }
            None => {
                let r = evaluate_eventually(&ast, model, &ladder, cfg.thresholds.window)
                    .with_context(|| format!("evaluating {f:?}"))?;
                line.push(ternary(r.verdict).to_string());
                out.push(json!({ "formula": f, "verdict": r }));
            }
        }
    }
    Ok(Output { name: "eval", summary: line.join(" "), json: json!(out), csv: None, ok: true })
}

fn decay_csv(t: &DecayTable) -> Vec<Vec<String>> {
    let dim = t.centers.first().map_or(1, Vec::len);
    let mut head: Vec<String> = ["eps", "a", "tilt_b", "tilt_sign"].map(String::from).to_vec();
    head.extend((1..=dim).map(|k| format!("xi0_{k}")));
    head.extend((1..=dim).map(|k| format!("theta_{k}")));
    head.extend(["abs_value", "margin", "resolved"].map(String::from));
    let mut rows = vec![head];
    for r in &t.rows {
        for (i, v) in r.values.iter().enumerate() {
            let Some(v) = v else { continue };
            let e = t.epsilons[i];
            let mut row = vec![fmt(e), r.spec.a.to_string()];
            match r.spec.tilt {
                Some(tl) => row.extend([tl.b.to_string(), tl.sign.to_string()]),
                None => row.extend([String::new(), String::new()]),
            }
            row.extend(r.spec.xi0.iter().map(|x| x.to_string()));
            row.extend(r.spec.theta(e).iter().map(|x| x.to_string()));
            let resolved = r.resolved_from.is_some_and(|from| i >= from);
            row.extend([fmt(*v), r.margin[i].to_string(), resolved.to_string()]);
            rows.push(row);
        }
    }
    rows
}

fn model_and_ladder(cfg: &RunConfig, id: &str) -> Result<(Model, rhoscale_engine::GeneralizedFunction)> {
    let model = Model::from_id(id)?;
    let ladder = cfg.ladder_for(model.dim())?;
    let u = regularize(&model, &ladder, &cfg.engine_params())?;
    Ok((model, u))
}

fn check_dim(what: &str, x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        bail!("{what} has {} coordinate(s), the model is {dim}-dimensional", x.len());
    }
    Ok(())
}

pub fn mlreg(cfg: &RunConfig, id: &str, x0: &[f64], xi0: &[f64]) -> Result<Output> {
    let (model, u) = model_and_ladder(cfg, id)?;
    check_dim("x0", x0, model.dim())?;
    check_dim("xi0", xi0, model.dim())?;
    let (mut vs, table) = microlocal_directions(&u, x0, &[xi0.to_vec()], &cfg.engine_params())?;
    let v = vs.remove(0);
    let orders: Vec<String> = v.orders().iter().map(|o| format!("{o:.3}")).collect();
    Ok(Output {
        name: "mlreg",
        summary: format!(
            "model={} x0={x0:?} xi0={xi0:?} status={} orders=[{}]",
            model.id(),
            v.status,
            orders.join(", ")
        ),
        json: json!({ "model": model.id(), "verdict": v }),
        csv: Some(decay_csv(&table)),
        ok: true,
    })
}

pub fn default_x_grid(dim: usize) -> Vec<Vec<f64>> {
    if dim == 1 {
        (-4..=4).map(|k| vec![k as f64 * 0.5]).collect()
    } else {
        let t = [-1.0, 0.0, 1.0];
        t.iter().flat_map(|&a| t.iter().map(move |&b| vec![a, b])).collect()
    }
}

pub fn wavefront(cfg: &RunConfig, id: &str, xs: Option<Vec<Vec<f64>>>, directions: usize) -> Result<Output> {
    let (model, u) = model_and_ladder(cfg, id)?;
    let xs = xs.unwrap_or_else(|| default_x_grid(model.dim()));
    for x in &xs {
        check_dim("x-grid point", x, model.dim())?;
    }
    let scan = wavefront_scan(&u, &xs, &direction_grid(model.dim(), directions), &cfg.engine_params())?;
    let mut rows = vec![["x", "theta", "status", "min_order"].map(String::from).to_vec()];
    for v in &scan.verdicts {
        let min = v.orders().iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(vec![csv_point(&v.x0), csv_point(&v.xi0), v.status.to_string(), min.to_string()]);
    }
    let flagged: Vec<String> = scan.flagged.iter().map(|f| format!("({:?},{:?})", f.x, f.theta)).collect();
    Ok(Output {
        name: "wavefront",
        summary: format!(
            "model={} points={} flagged={} undecided={} [{}]",
            model.id(),
            xs.len(),
            scan.flagged.len(),
            scan.undecided.len(),
            flagged.join(" ")
        ),
        json: json!({ "model": model.id(), "scan": scan }),
        csv: Some(rows),
        ok: true,
    })
}

pub fn minfty(cfg: &RunConfig, id: &str, x0: &[f64]) -> Result<Output> {
    let (model, u) = model_and_ladder(cfg, id)?;
    check_dim("x0", x0, model.dim())?;
    let v = m_infinity_test(&u, x0, &cfg.engine_params())?;
    let mut rows = vec![["alpha", "eps", "sup"].map(String::from).to_vec()];
    for a in &v.alphas {
        for (e, s) in u.ladder().epsilons().iter().zip(&a.sups) {
            rows.push(vec![csv_point(&a.alpha.iter().map(|&k| k as f64).collect::<Vec<_>>()), fmt(*e), fmt(*s)]);
        }
    }
    Ok(Output {
        name: "minfty",
        summary: format!("model={} x0={x0:?} verdict={} n={:?}", model.id(), ternary(v.verdict), v.n),
        json: json!({ "model": model.id(), "verdict": v }),
        csv: Some(rows),
        ok: true,
    })
}

pub fn gridsum(cfg: &RunConfig, x0: &[f64], r: f64, profile: MProfile) -> Result<Output> {
    let params: EngineParams = cfg.engine_params();
    let ladder = cfg.ladder_for(x0.len())?;
    let g = grid_sum(x0, r, profile, &ladder, &params)?;
    let rep = &g.report;
    let mut rows = vec![[
        "eps",
        "support_radius",
        "spacing",
        "cardinality",
        "cardinality_bound",
        "min_psi_inner",
        "max_overlap",
        "psi_at_center",
    ]
    .map(String::from)
    .to_vec()];
    for i in 0..rep.epsilons.len() {
        rows.push(vec![
            fmt(rep.epsilons[i]),
            fmt(rep.support_radius[i]),
            fmt(rep.spacing[i]),
            rep.cardinality[i].to_string(),
            rep.cardinality_bound[i].to_string(),
            rep.min_psi_inner[i].to_string(),
            rep.max_overlap[i].to_string(),
            rep.psi_at_center[i].to_string(),
        ]);
    }
    let min_psi = rep.min_psi_inner.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ov = rep.max_overlap.iter().max().copied().unwrap_or(0);
    Ok(Output {
        name: "gridsum",
        summary: format!("x0={x0:?} r={r} min_psi_inner={min_psi} max_overlap={max_ov}"),
        json: serde_json::to_value(rep)?,
        csv: Some(rows),
        ok: true,
    })
}
