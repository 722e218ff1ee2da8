use serde::Serialize;
use thiserror::Error;

use super::ast::{Atom, Formula, FormulaAst, SymbolCategory, Term};
use super::structure::{FunctionDef, Object, RelationDef, Structure, Value};
use crate::internal::Region;
use crate::ladder::EpsLadder;
use crate::ternary::Ternary;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum EvalError {
    #[error("symbol `{0}` is not bound")]
    Unbound(String),
    #[error("symbol `{name}` is bound to a {found:?} object but used as {used:?}")]
    WrongCategory { name: String, used: SymbolCategory, found: SymbolCategory },
    #[error("quantifier bound `{0}` is not an enumerable finite or hyperfinite set")]
    NonEnumerable(String),
    #[error("constant `{0}` has no star-extension in this model")]
    NoStarExtension(String),
    #[error("internal object used but eps {0} is not on the model ladder")]
    NotOnLadder(f64),
    #[error("internal objects or star-extensions need a ladder")]
    NoLadder,
    #[error("constant `{0}` is not standard")]
    NotStandard(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("function `{function}` undefined at {arg}")]
    Undefined { function: String, arg: String },
}

/// Truth value at one eps, with every guard obligation that failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalOutcome {
    pub value: bool,
    pub failed_obligations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventualVerdict {
    /// Yes: true on the finest `window` entries; No: false there.
    pub verdict: Ternary,
    pub per_eps: Vec<bool>,
    /// First ladder index from which the truth value no longer changes.
    pub stabilization_index: Option<usize>,
    pub stabilization_eps: Option<f64>,
    pub window: usize,
    pub failed_obligations: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub standard: bool,
    pub starred: EventualVerdict,
    pub agree: bool,
}

enum Rt {
    Val(Value),
    Finite(Vec<Value>),
    Region(Region),
    Naturals,
}

struct Ctx<'a> {
    ast: &'a FormulaAst,
    model: &'a Structure,
    idx: Option<usize>,
    eps: f64,
    env: Vec<(String, Value)>,
    failed: Vec<String>,
}

impl Ctx<'_> {
    fn object(&self, name: &str, cat: SymbolCategory) -> Result<Object, EvalError> {
        let obj = self
            .ast
            .constants
            .get(name)
            .and_then(|c| c.object.clone())
            .or_else(|| self.model.resolve(name, cat))
            .ok_or_else(|| EvalError::Unbound(name.to_string()))?;
        if obj.category() != cat {
            return Err(EvalError::WrongCategory { name: name.to_string(), used: cat, found: obj.category() });
        }
        Ok(obj)
    }

    fn idx(&self) -> Result<usize, EvalError> {
        self.idx.ok_or(if self.model.ladder.is_some() { EvalError::NotOnLadder(self.eps) } else { EvalError::NoLadder })
    }

    fn term(&self, t: &Term) -> Result<Rt, EvalError> {
        match t {
            Term::Num(x) => Ok(Rt::Val(Value::Num(*x))),
            Term::Var(v) => {
                if let Some((_, val)) = self.env.iter().rev().find(|(n, _)| n == v) {
                    return Ok(Rt::Val(val.clone()));
                }
                Ok(match self.object(v, SymbolCategory::Term)? {
                    Object::Element { value } => Rt::Val(value),
                    Object::FiniteSet { elements } => Rt::Finite(elements),
                    Object::Naturals => Rt::Naturals,
                    Object::InternalElement { mut values } => Rt::Val(values.swap_remove(self.idx()?)),
                    Object::InternalFiniteSet { mut sets } => Rt::Finite(sets.swap_remove(self.idx()?)),
                    Object::InternalRegion { mut set } => Rt::Region(set.regions.swap_remove(self.idx()?)),
                    Object::Hyperfinite { set } => {
                        Rt::Finite(set.points[self.idx()?].iter().map(|p| Value::from_coords(p)).collect())
                    }
                    _ => unreachable!("category checked"),
                })
            }
            Term::Tuple(ts) => {
                let vals = ts.iter().map(|t| self.value(t)).collect::<Result<_, _>>()?;
                Ok(Rt::Val(Value::Tuple(vals)))
            }
            Term::Apply(f, arg) => {
                let a = self.value(arg)?;
                let def = match self.object(f, SymbolCategory::Function)? {
                    Object::Function { def } => def,
                    Object::InternalFunction { mut defs } => defs.swap_remove(self.idx()?),
                    _ => unreachable!("category checked"),
                };
                apply_fn(f, &def, &a).map(Rt::Val)
            }
        }
    }

    fn value(&self, t: &Term) -> Result<Value, EvalError> {
        match self.term(t)? {
            Rt::Val(v) => Ok(v),
            _ => Err(EvalError::Type(format!("`{t}` denotes a set, expected an element"))),
        }
    }

    fn atom(&self, a: &Atom) -> Result<bool, EvalError> {
        match a {
            Atom::Eq(x, y) => match (self.term(x)?, self.term(y)?) {
                (Rt::Val(u), Rt::Val(v)) => Ok(u == v),
                (Rt::Finite(u), Rt::Finite(v)) => {
                    Ok(u.iter().all(|e| v.contains(e)) && v.iter().all(|e| u.contains(e)))
                }
                _ => Err(EvalError::Type(format!("cannot decide `{x} = {y}`"))),
            },
            Atom::In(x, s) => {
                let v = self.value(x)?;
                match self.term(s)? {
                    Rt::Finite(es) => Ok(es.contains(&v)),
                    Rt::Region(r) => {
                        let c = v.coords().ok_or_else(|| EvalError::Type(format!("`{x}` is not a point")))?;
                        Ok(r.contains(&c))
                    }
                    Rt::Naturals => Ok(matches!(v, Value::Num(n) if n >= 0.0 && n.fract() == 0.0)),
                    Rt::Val(_) => Err(EvalError::Type(format!("`{s}` is not a set"))),
                }
            }
            Atom::Rel(r, x, y) => {
                let (u, v) = (self.value(x)?, self.value(y)?);
                let def = match self.object(r, SymbolCategory::Relation)? {
                    Object::Relation { def } => def,
                    Object::InternalRelation { mut defs } => defs.swap_remove(self.idx()?),
                    _ => unreachable!("category checked"),
                };
                relate(r, &def, &u, &v, self.eps)
            }
        }
    }

    fn enumerate(&self, bound: &Term) -> Result<Vec<Value>, EvalError> {
        match self.term(bound)? {
            Rt::Finite(es) => Ok(es),
            _ => Err(EvalError::NonEnumerable(bound.to_string())),
        }
    }

    fn with<T>(&mut self, var: &str, v: Value, f: impl FnOnce(&mut Self) -> T) -> T {
        self.env.push((var.to_string(), v));
        let r = f(self);
        self.env.pop();
        r
    }

    fn formula(&mut self, f: &Formula) -> Result<bool, EvalError> {
        match f {
            Formula::Atom(a) => self.atom(a),
            Formula::And(a, b) => Ok(self.formula(a)? && self.formula(b)?),
            Formula::Exists { var, bound, body } => {
                for v in self.enumerate(bound)? {
                    if self.with(var, v, |c| c.formula(body))? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Forall { var, bound, body } => {
                for v in self.enumerate(bound)? {
                    if !self.with(var, v, |c| c.formula(body))? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::GuardedImpl { var, bound, guard, conclusion } => {
                let (mut witnessed, mut holds) = (false, true);
                for v in self.enumerate(bound)? {
                    let g = self.with(var, v.clone(), |c| c.formula(guard))?;
                    witnessed |= g;
                    if g && !self.with(var, v, |c| c.formula(conclusion))? {
                        holds = false;
                    }
                }
                if !witnessed {
                    self.failed.push(format!("exists {var} in {bound} ({guard})"));
                }
                Ok(witnessed && holds)
            }
        }
    }
}

fn num(v: &Value, what: &str) -> Result<f64, EvalError> {
    match v {
        Value::Num(x) => Ok(*x),
        _ => Err(EvalError::Type(format!("{what} expects a number, got {v}"))),
    }
}

fn pair(v: &Value, what: &str) -> Result<(Value, Value), EvalError> {
    match v {
        Value::Tuple(vs) if vs.len() == 2 => Ok((vs[0].clone(), vs[1].clone())),
        _ => Err(EvalError::Type(format!("{what} expects a pair, got {v}"))),
    }
}

fn apply_fn(name: &str, def: &FunctionDef, a: &Value) -> Result<Value, EvalError> {
    match def {
        FunctionDef::Table(rows) => rows
            .iter()
            .find(|(k, _)| k == a)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| EvalError::Undefined { function: name.to_string(), arg: a.to_string() }),
        FunctionDef::Builtin(b) => {
            let unary = |f: fn(f64) -> f64| num(a, b).map(|x| Value::Num(f(x)));
            let binary = |f: fn(f64, f64) -> f64| {
                let (x, y) = pair(a, b)?;
                Ok(Value::Num(f(num(&x, b)?, num(&y, b)?)))
            };
            match b.as_str() {
                "sq" => unary(|x| x * x),
                "succ" => unary(|x| x + 1.0),
                "pred" => unary(|x| x - 1.0),
                "neg" => unary(|x| -x),
                "abs" => unary(f64::abs),
                "half" => unary(|x| x / 2.0),
                "double" => unary(|x| 2.0 * x),
                "add" => binary(|x, y| x + y),
                "sub" => binary(|x, y| x - y),
                "mul" => binary(|x, y| x * y),
                "fst" => pair(a, b).map(|p| p.0),
                "snd" => pair(a, b).map(|p| p.1),
                _ => Err(EvalError::Unbound(b.clone())),
            }
        }
    }
}

fn relate(name: &str, def: &RelationDef, u: &Value, v: &Value, eps: f64) -> Result<bool, EvalError> {
    match def {
        RelationDef::Table(rows) => Ok(rows.iter().any(|(a, b)| a == u && b == v)),
        RelationDef::EpsClose { scale } => {
            let (a, b) = (u.coords(), v.coords());
            match (a, b) {
                (Some(a), Some(b)) if a.len() == b.len() => {
                    let d = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                    Ok(d <= scale * eps)
                }
                _ => Err(EvalError::Type(format!("`{name}` expects points of equal dimension"))),
            }
        }
        RelationDef::Builtin(b) => {
            if b == "ne" {
                return Ok(u != v);
            }
            let (x, y) = (num(u, b)?, num(v, b)?);
            match b.as_str() {
                "le" => Ok(x <= y),
                "lt" => Ok(x < y),
                "ge" => Ok(x >= y),
                "gt" => Ok(x > y),
                _ => Err(EvalError::Unbound(b.clone())),
            }
        }
    }
}

fn eval_at(ast: &FormulaAst, model: &Structure, idx: Option<usize>, eps: f64) -> Result<EvalOutcome, EvalError> {
    let mut ctx = Ctx { ast, model, idx, eps, env: Vec::new(), failed: Vec::new() };
    let value = ctx.formula(&ast.root)?;
    Ok(EvalOutcome { value, failed_obligations: ctx.failed })
}

/// Classical evaluation at a fixed eps.
pub fn evaluate(ast: &FormulaAst, model: &Structure, eps: f64) -> Result<EvalOutcome, EvalError> {
    let idx = model.ladder.as_ref().and_then(|l| l.index_of(eps).ok());
    eval_at(ast, model, idx, eps)
}

/// Evaluation at every ladder entry, read "for small eps" through the
/// finest `window` entries.
pub fn evaluate_eventually(
    ast: &FormulaAst,
    model: &Structure,
    ladder: &EpsLadder,
    window: usize,
) -> Result<EventualVerdict, EvalError> {
    if model.ladder.as_ref().is_some_and(|l| l != ladder) {
        return Err(EvalError::Type("model ladder differs from evaluation ladder".into()));
    }
    let mut per_eps = Vec::with_capacity(ladder.len());
    let mut failed = Vec::new();
    for (i, &e) in ladder.epsilons().iter().enumerate() {
        let o = eval_at(ast, model, Some(i), e)?;
        per_eps.push(o.value);
        failed.extend(o.failed_obligations.into_iter().map(|s| (i, s)));
    }
    let window = window.clamp(1, ladder.len());
    let tail = &per_eps[ladder.len() - window..];
    let verdict = if tail.iter().all(|&b| b) {
        Ternary::Yes
    } else if tail.iter().all(|&b| !b) {
        Ternary::No
    } else {
        Ternary::Undecidable
    };
    let stabilization_index = (verdict != Ternary::Undecidable).then(|| {
        let last = per_eps[per_eps.len() - 1];
        per_eps.iter().rposition(|&b| b != last).map_or(0, |i| i + 1)
    });
    Ok(EventualVerdict {
        verdict,
        stabilization_eps: stabilization_index.map(|i| ladder.eps(i)),
        per_eps,
        stabilization_index,
        window,
        failed_obligations: failed,
    })
}

/// Replaces every constant by its star-extension (the constant family on
/// the model ladder); internal constants are kept as they are.
pub fn star_transform(ast: &FormulaAst, model: &Structure) -> Result<FormulaAst, EvalError> {
    let ladder = model.ladder.as_ref().ok_or(EvalError::NoLadder)?;
    let mut out = ast.clone();
    for (name, c) in out.constants.iter_mut() {
        let obj = c
            .object
            .clone()
            .or_else(|| model.resolve(name, c.category))
            .ok_or_else(|| EvalError::Unbound(name.clone()))?;
        if obj.category() != c.category {
            return Err(EvalError::WrongCategory { name: name.clone(), used: c.category, found: obj.category() });
        }
        c.object = Some(obj.star(ladder).ok_or_else(|| EvalError::NoStarExtension(name.clone()))?);
    }
    Ok(out)
}

/// Compares the standard truth of `P(a...)` with the eventual truth of
/// `P(*a...)` on `ladder`.
pub fn transfer_test(
    ast: &FormulaAst,
    model: &Structure,
    ladder: &EpsLadder,
    window: usize,
) -> Result<TransferReport, EvalError> {
    for (name, c) in &ast.constants {
        let obj = c
            .object
            .clone()
            .or_else(|| model.resolve(name, c.category))
            .ok_or_else(|| EvalError::Unbound(name.clone()))?;
        if !obj.is_standard() {
            return Err(EvalError::NotStandard(name.clone()));
        }
    }
    let standard = eval_at(ast, model, None, f64::NAN)?.value;
    let starred_model = Structure { ladder: Some(ladder.clone()), bindings: model.bindings.clone() };
    let star = star_transform(ast, &starred_model)?;
    let starred = evaluate_eventually(&star, &starred_model, ladder, window)?;
    let agree = starred.verdict == Ternary::from_bool(standard);
    Ok(TransferReport { standard, starred, agree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::internal::HyperfiniteSet;

    fn nums(xs: impl IntoIterator<Item = i32>) -> Object {
        Object::FiniteSet { elements: xs.into_iter().map(|x| Value::Num(x as f64)).collect() }
    }

    fn model() -> Structure {
        let mut m = Structure::new();
        m.bind("A", nums(1..=3)).bind("B", nums([1, 2])).bind("D", nums(1..=10)).bind("E", nums([]));
        m
    }

    #[test]
    fn spec_examples() {
        let m = model();
        let t = |s: &str| evaluate(&parse(s).unwrap(), &m, 0.5).unwrap();
        assert!(t("forall x in A (x le 3)").value);
        assert!(!t("exists x in B (x = 5)").value);
        let o = t("forall x in E (x = x => x = 1)");
        assert!(!o.value);
        assert_eq!(o.failed_obligations, vec!["exists x in E (x = x)".to_string()]);
        let o = t("forall x in A (x gt 5 => x = 1)");
        assert!(!o.value && o.failed_obligations.len() == 1);
        let o = t("forall x in A (x ge 2 => sq(x) gt x)");
        assert!(o.value && o.failed_obligations.is_empty());
    }

    #[test]
    fn transfer_examples() {
        let m = model();
        let l = EpsLadder::default();
        let r = transfer_test(&parse("forall x in D (mul((x, x)) ge x)").unwrap(), &m, &l, 3).unwrap();
        assert!(r.standard && r.agree);
        let r = transfer_test(&parse("exists x in D (x gt 10)").unwrap(), &m, &l, 3).unwrap();
        assert!(!r.standard && r.agree);
        assert_eq!(r.starred.verdict, Ternary::No);
    }

    #[test]
    fn star_transform_wraps_only_standard() {
        let l = EpsLadder::dyadic(1, 5).unwrap();
        let mut m = Structure::with_ladder(l.clone());
        m.bind("A", nums([1, 2]));
        let h = HyperfiniteSet::constant(&l, vec![vec![1.0]]).unwrap();
        m.bind("H", Object::Hyperfinite { set: h.clone() });
        let ast = parse("forall x in H (exists y in A (x le y))").unwrap();
        let s = star_transform(&ast, &m).unwrap();
        assert_eq!(s.root, ast.root);
        assert_eq!(s.constants["H"].object, Some(Object::Hyperfinite { set: h }));
        assert_eq!(
            s.constants["A"].object,
            Some(Object::InternalFiniteSet { sets: vec![vec![Value::Num(1.0), Value::Num(2.0)]; 5] })
        );
        assert!(matches!(s.constants["le"].object, Some(Object::InternalRelation { .. })));
        let mut n = m.clone();
        n.bind("A", Object::Naturals);
        assert_eq!(star_transform(&ast, &n), Err(EvalError::NoStarExtension("A".into())));
    }

    #[test]
    fn hyperfinite_eventual_truth() {
        // H_eps = {0, eps, 2 eps, ..., 1}; "some grid point lies within 0.01 of 1/3"
        let l = EpsLadder::default();
        let h =
            HyperfiniteSet::from_fn(&l, |e| (0..=(1.0 / e) as usize).map(|k| vec![k as f64 * e]).collect()).unwrap();
        let mut m = Structure::with_ladder(l.clone());
        m.bind("H", Object::Hyperfinite { set: h });
        m.bind("third", Object::Element { value: Value::Num(1.0 / 3.0) });
        m.bind("near", Object::Relation { def: RelationDef::Table(vec![]) });
        m.bind("close", Object::InternalRelation { defs: vec![RelationDef::EpsClose { scale: 1.0 }; l.len()] });
        let ast = parse("exists x in H (x close third)").unwrap();
        let v = evaluate_eventually(&ast, &m, &l, 3).unwrap();
        assert_eq!(v.verdict, Ternary::Yes);
        assert!(v.per_eps.iter().all(|&b| b));
        assert_eq!(v.stabilization_index, Some(0));
    }

    #[test]
    fn non_enumerable_bounds_refused() {
        let mut m = model();
        m.bind("N", Object::Naturals);
        let e = evaluate(&parse("forall n in N (n ge 0)").unwrap(), &m, 0.5).unwrap_err();
        assert_eq!(e, EvalError::NonEnumerable("N".into()));
        assert!(evaluate(&parse("3 in N").unwrap(), &m, 0.5).unwrap().value);
    }

    #[test]
    fn stabilization_index_reported() {
        let l = EpsLadder::default();
        let mut m = Structure::with_ladder(l.clone());
        let vals = l.epsilons().iter().map(|&e| Value::Num(if e < 1e-3 { 0.0 } else { 1.0 })).collect();
        m.bind("x", Object::InternalElement { values: vals });
        let v = evaluate_eventually(&parse("x = 0").unwrap(), &m, &l, 3).unwrap();
        assert_eq!(v.verdict, Ternary::Yes);
        assert_eq!(v.stabilization_index, Some(6));
    }
}
