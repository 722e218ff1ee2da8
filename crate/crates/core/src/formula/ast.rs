use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::structure::Object;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Term {
    /// A bound variable or a term-category constant.
    Var(String),
    Num(f64),
    Tuple(Vec<Term>),
    Apply(String, Box<Term>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Atom {
    Eq(Term, Term),
    In(Term, Term),
    Rel(String, Term, Term),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Formula {
    Atom(Atom),
    And(Box<Formula>, Box<Formula>),
    Exists {
        var: String,
        bound: Term,
        body: Box<Formula>,
    },
    Forall {
        var: String,
        bound: Term,
        body: Box<Formula>,
    },
    /// `forall var in bound (guard => conclusion)`, with side condition
    /// `exists var in bound (guard)`.
    GuardedImpl {
        var: String,
        bound: Term,
        guard: Box<Formula>,
        conclusion: Box<Formula>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolCategory {
    Term,
    Function,
    Relation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constant {
    pub category: SymbolCategory,
    /// Bound object, if the AST has been bound or star-transformed.
    #[serde(skip)]
    pub object: Option<Object>,
}

/// A parsed formula together with its table of free symbols.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaAst {
    pub root: Formula,
    pub constants: BTreeMap<String, Constant>,
}

impl Term {
    pub fn var(s: &str) -> Term {
        Term::Var(s.to_string())
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => v == name,
            Term::Num(_) => false,
            Term::Tuple(ts) => ts.iter().any(|t| t.mentions(name)),
            Term::Apply(f, t) => f == name || t.mentions(name),
        }
    }
}

impl Formula {
    /// Conjunction, kept left-associated so printing and parsing agree.
    pub fn and(a: Formula, b: Formula) -> Formula {
        match b {
            Formula::And(b1, b2) => Formula::and(Formula::and(a, *b1), *b2),
            b => Formula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Eq(a, b))
    }

    pub fn member(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::In(a, b))
    }

    pub fn rel(r: &str, a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Rel(r.to_string(), a, b))
    }

    pub fn forall(var: &str, bound: Term, body: Formula) -> Formula {
        Formula::Forall { var: var.to_string(), bound, body: Box::new(body) }
    }

    pub fn exists(var: &str, bound: Term, body: Formula) -> Formula {
        Formula::Exists { var: var.to_string(), bound, body: Box::new(body) }
    }

    pub fn guarded(var: &str, bound: Term, guard: Formula, conclusion: Formula) -> Formula {
        Formula::GuardedImpl { var: var.to_string(), bound, guard: Box::new(guard), conclusion: Box::new(conclusion) }
    }

    /// Conjuncts of a (left-associated) conjunction.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            f => vec![f],
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::And(a, b) => 1 + a.node_count() + b.node_count(),
            Formula::Exists { body, .. } | Formula::Forall { body, .. } => 1 + body.node_count(),
            Formula::GuardedImpl { guard, conclusion, .. } => 1 + guard.node_count() + conclusion.node_count(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Num(x) => write!(f, "{x}"),
            Term::Tuple(ts) => {
                f.write_str("(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
            Term::Apply(g, t) => write!(f, "{g}({t})"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Eq(a, b) => write!(f, "{a} = {b}"),
            Atom::In(a, b) => write!(f, "{a} in {b}"),
            Atom::Rel(r, a, b) => write!(f, "{a} {r} {b}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(a, b) => write!(f, "{a} & {b}"),
            Formula::Exists { var, bound, body } => write!(f, "exists {var} in {bound} ({body})"),
            Formula::Forall { var, bound, body } => write!(f, "forall {var} in {bound} ({body})"),
            Formula::GuardedImpl { var, bound, guard, conclusion } => {
                write!(f, "forall {var} in {bound} ({guard} => {conclusion})")
            }
        }
    }
}

impl fmt::Display for FormulaAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}
