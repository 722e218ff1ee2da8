//! Reference formulas over small standard structures, and the three
//! mutation kinds a checker must reject.

use std::fmt::Write;

use super::ast::{Atom, Formula, Term};
use super::structure::{FunctionDef, Object, RelationDef, Structure, Value};

/// Thirty rule-conformant formulas, all evaluable over [`structure`].
pub const FORMULAS: [&str; 30] = [
    "forall x in A (x = x)",
    "forall x in A (x le 3)",
    "exists x in B (x = 5)",
    "exists x in A (forall y in B (x ge y))",
    "forall x in D (mul((x, x)) ge x)",
    "exists x in D (x gt 10)",
    "forall x in B (x in A)",
    "forall x in A (x in B)",
    "exists x in A (x in B & x gt 1)",
    "forall x in A (x gt 1 => pred(x) in A)",
    "forall x in A (x ge 2 => sq(x) gt x)",
    "forall x in E (x = x => x = 1)",
    "forall x in A (x gt 5 => x = 1)",
    "exists p in P (fst(p) lt snd(p))",
    "forall p in P (fst(p) R snd(p))",
    "forall x in A (exists y in A (x R y) => x lt 3)",
    "c in A & c R 3",
    "f(1) = c",
    "forall x in K (f(x) in A)",
    "exists x in K (f(x) = 4)",
    "forall x in A (forall y in A (x le y => sq(x) le sq(y)))",
    "exists x in A (exists y in A (add((x, y)) = 5))",
    "forall x in D (exists y in D (y = succ(x)))",
    "forall x in D (x lt 10 => exists y in D (y = succ(x)))",
    "exists x in A (x = c) & exists y in B (y = c)",
    "forall x in A (x ne 0) & forall y in B (y le 2)",
    "forall x in D (x in A => x le 3)",
    "exists x in D (half(x) = c & double(x) in D)",
    "forall x in P (x in P)",
    "forall q in Q (exists x in D (q = (x, sq(x))))",
];

fn nums(xs: impl IntoIterator<Item = i32>) -> Object {
    Object::FiniteSet { elements: xs.into_iter().map(|x| Value::Num(x as f64)).collect() }
}

fn pair(a: i32, b: i32) -> Value {
    Value::Tuple(vec![Value::Num(a as f64), Value::Num(b as f64)])
}

/// Standard structure the corpus is evaluated in.
pub fn structure() -> Structure {
    let mut m = Structure::new();
    m.bind("A", nums(1..=3))
        .bind("B", nums([1, 2]))
        .bind("D", nums(1..=10))
        .bind("E", nums([]))
        .bind("K", nums([1, 2]))
        .bind("P", Object::FiniteSet { elements: vec![pair(1, 2), pair(2, 3)] })
        .bind("Q", Object::FiniteSet { elements: vec![pair(1, 1), pair(2, 4), pair(3, 9)] })
        .bind("c", Object::Element { value: Value::Num(2.0) })
        .bind(
            "f",
            Object::Function {
                def: FunctionDef::Table(vec![(Value::Num(1.0), Value::Num(2.0)), (Value::Num(2.0), Value::Num(4.0))]),
            },
        )
        .bind("R", Object::Relation { def: RelationDef::Builtin("lt".into()) });
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// `not` in front of an atom.
    Negation,
    /// An atom replaced by `atom | atom`.
    Disjunction,
    /// A quantifier with its `in bound` removed.
    Unbounded,
}

impl Mutation {
    pub const ALL: [Mutation; 3] = [Mutation::Negation, Mutation::Disjunction, Mutation::Unbounded];
}

fn atoms(f: &Formula) -> usize {
    match f {
        Formula::Atom(_) => 1,
        Formula::And(a, b) => atoms(a) + atoms(b),
        Formula::Exists { body, .. } | Formula::Forall { body, .. } => atoms(body),
        Formula::GuardedImpl { guard, conclusion, .. } => atoms(guard) + atoms(conclusion),
    }
}

fn quantifiers(f: &Formula) -> usize {
    match f {
        Formula::Atom(_) => 0,
        Formula::And(a, b) => quantifiers(a) + quantifiers(b),
        Formula::Exists { body, .. } | Formula::Forall { body, .. } => 1 + quantifiers(body),
        Formula::GuardedImpl { guard, conclusion, .. } => 1 + quantifiers(guard) + quantifiers(conclusion),
    }
}

struct Mutator {
    kind: Mutation,
    target: usize,
    seen: usize,
    out: String,
}

impl Mutator {
    fn hit(&mut self) -> bool {
        let h = self.seen == self.target;
        self.seen += 1;
        h
    }

    fn atom(&mut self, a: &Atom) {
        let hit = matches!(self.kind, Mutation::Negation | Mutation::Disjunction) && self.hit();
        let _ = match (hit, self.kind) {
            (true, Mutation::Negation) => write!(self.out, "not {a}"),
            (true, _) => write!(self.out, "{a} | {a}"),
            _ => write!(self.out, "{a}"),
        };
    }

    fn header(&mut self, q: &str, var: &str, bound: &Term) {
        if self.kind == Mutation::Unbounded && self.hit() {
            let _ = write!(self.out, "{q} {var} (");
        } else {
            let _ = write!(self.out, "{q} {var} in {bound} (");
        }
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::Atom(a) => self.atom(a),
            Formula::And(a, b) => {
                self.formula(a);
                self.out.push_str(" & ");
                self.formula(b);
            }
            Formula::Exists { var, bound, body } | Formula::Forall { var, bound, body } => {
                self.header(if matches!(f, Formula::Exists { .. }) { "exists" } else { "forall" }, var, bound);
                self.formula(body);
                self.out.push(')');
            }
            Formula::GuardedImpl { var, bound, guard, conclusion } => {
                self.header("forall", var, bound);
                self.formula(guard);
                self.out.push_str(" => ");
                self.formula(conclusion);
                self.out.push(')');
            }
        }
    }
}

/// Prints `f` with mutation `kind` applied at site `site` (taken modulo the
/// number of sites). `None` if `f` has no site of that kind.
pub fn mutate(f: &Formula, kind: Mutation, site: usize) -> Option<String> {
    let n = match kind {
        Mutation::Unbounded => quantifiers(f),
        _ => atoms(f),
    };
    if n == 0 {
        return None;
    }
    let mut m = Mutator { kind, target: site % n, seen: 0, out: String::new() };
    m.formula(f);
    Some(m.out)
}
