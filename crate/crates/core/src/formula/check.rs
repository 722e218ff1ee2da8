use std::collections::BTreeSet;

use serde::Serialize;

use super::ast::{Atom, Formula, FormulaAst, Term};
use super::parser::{parse, ParseError};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    /// "variable occurs in bound term"
    VariableInOwnBound {
        var: String,
        bound: String,
    },
    /// The variable is already bound by an enclosing quantifier or is used
    /// free elsewhere in the formula.
    NonFreshVariable {
        var: String,
    },
    Syntax {
        error: ParseError,
    },
}

/// Side condition `exists var in bound (guard)` of a guarded implication,
/// left to be discharged by evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Obligation {
    pub var: String,
    pub bound: String,
    pub guard: String,
}

impl Obligation {
    pub fn statement(&self) -> String {
        format!("exists {} in {} ({})", self.var, self.bound, self.guard)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub obligations: Vec<Obligation>,
}

fn term_symbols(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(v) => {
            out.insert(v.clone());
        }
        Term::Num(_) => {}
        Term::Tuple(ts) => ts.iter().for_each(|t| term_symbols(t, out)),
        Term::Apply(f, t) => {
            out.insert(f.clone());
            term_symbols(t, out);
        }
    }
}

/// Free symbols of `f`, ignoring the bound term of any quantifier over
/// `skip` (that case is reported as its own violation).
fn free_symbols(f: &Formula, scope: &mut Vec<String>, skip: &str, out: &mut BTreeSet<String>) {
    let add = |t: &Term, scope: &Vec<String>, out: &mut BTreeSet<String>| {
        let mut s = BTreeSet::new();
        term_symbols(t, &mut s);
        out.extend(s.into_iter().filter(|v| !scope.contains(v)));
    };
    match f {
        Formula::Atom(Atom::Eq(a, b)) | Formula::Atom(Atom::In(a, b)) => {
            add(a, scope, out);
            add(b, scope, out);
        }
        Formula::Atom(Atom::Rel(r, a, b)) => {
            if !scope.contains(r) {
                out.insert(r.clone());
            }
            add(a, scope, out);
            add(b, scope, out);
        }
        Formula::And(a, b) => {
            free_symbols(a, scope, skip, out);
            free_symbols(b, scope, skip, out);
        }
        Formula::Exists { var, bound, body } | Formula::Forall { var, bound, body } => {
            if var != skip {
                add(bound, scope, out);
            }
            scope.push(var.clone());
            free_symbols(body, scope, skip, out);
            scope.pop();
        }
        Formula::GuardedImpl { var, bound, guard, conclusion } => {
            if var != skip {
                add(bound, scope, out);
            }
            scope.push(var.clone());
            free_symbols(guard, scope, skip, out);
            free_symbols(conclusion, scope, skip, out);
            scope.pop();
        }
    }
}

fn walk(f: &Formula, root: &Formula, scope: &mut Vec<String>, report: &mut CheckReport) {
    let binder = |var: &String, bound: &Term, scope: &Vec<String>, report: &mut CheckReport| {
        if bound.mentions(var) {
            report.violations.push(Violation::VariableInOwnBound { var: var.clone(), bound: bound.to_string() });
        }
        let mut free = BTreeSet::new();
        free_symbols(root, &mut Vec::new(), var, &mut free);
        if scope.contains(var) || free.contains(var) {
            report.violations.push(Violation::NonFreshVariable { var: var.clone() });
        }
    };
    match f {
        Formula::Atom(_) => {}
        Formula::And(a, b) => {
            walk(a, root, scope, report);
            walk(b, root, scope, report);
        }
        Formula::Exists { var, bound, body } | Formula::Forall { var, bound, body } => {
            binder(var, bound, scope, report);
            scope.push(var.clone());
            walk(body, root, scope, report);
            scope.pop();
        }
        Formula::GuardedImpl { var, bound, guard, conclusion } => {
            binder(var, bound, scope, report);
            report.obligations.push(Obligation {
                var: var.clone(),
                bound: bound.to_string(),
                guard: guard.to_string(),
            });
            scope.push(var.clone());
            walk(guard, root, scope, report);
            walk(conclusion, root, scope, report);
            scope.pop();
        }
    }
}

/// Checks the quantifier side conditions and collects guard obligations.
/// Negation, disjunction and unbounded quantifiers cannot occur in an AST;
/// the parser rejects them.
pub fn check_transferrable(ast: &FormulaAst) -> CheckReport {
    let mut report = CheckReport { ok: true, violations: Vec::new(), obligations: Vec::new() };
    walk(&ast.root, &ast.root, &mut Vec::new(), &mut report);
    report.ok = report.violations.is_empty();
    report
}

/// Parse and check; a parse error becomes a violation.
pub fn check_text(text: &str) -> (Option<FormulaAst>, CheckReport) {
    match parse(text) {
        Ok(ast) => {
            let r = check_transferrable(&ast);
            (Some(ast), r)
        }
        Err(error) => {
            (None, CheckReport { ok: false, violations: vec![Violation::Syntax { error }], obligations: Vec::new() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::ParseErrorKind;

    #[test]
    fn simple_forall_ok() {
        let (_, r) = check_text("forall x in A (x = x)");
        assert!(r.ok && r.obligations.is_empty());
    }

    #[test]
    fn variable_in_own_bound() {
        let (_, r) = check_text("exists x in f(x) (x = x)");
        assert!(!r.ok);
        assert_eq!(r.violations, vec![Violation::VariableInOwnBound { var: "x".into(), bound: "f(x)".into() }]);
    }

    #[test]
    fn guard_obligation_recorded() {
        let (_, r) = check_text("forall x in A (x R x & x in B => x = c)");
        assert!(r.ok);
        assert_eq!(r.obligations.len(), 1);
        assert_eq!(r.obligations[0].statement(), "exists x in A (x R x & x in B)");
    }

    #[test]
    fn shadowing_and_free_clash() {
        let (_, r) = check_text("forall x in A (exists x in B (x = x))");
        assert_eq!(r.violations, vec![Violation::NonFreshVariable { var: "x".into() }]);
        let (_, r) = check_text("x in A & forall x in A (x = x)");
        assert_eq!(r.violations, vec![Violation::NonFreshVariable { var: "x".into() }]);
        let (_, r) = check_text("forall x in A (x = x) & exists x in B (x = x)");
        assert!(r.ok);
    }

    #[test]
    fn syntax_errors_become_violations() {
        let (a, r) = check_text("forall x in A (P(x) or Q(x))");
        assert!(a.is_none() && !r.ok);
        match &r.violations[0] {
            Violation::Syntax { error } => assert_eq!(error.kind, ParseErrorKind::Disjunction),
            v => panic!("{v:?}"),
        }
    }
}
