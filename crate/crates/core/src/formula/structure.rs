use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::SymbolCategory;
use crate::internal::{HyperfiniteSet, InternalSet};
use crate::ladder::EpsLadder;

/// A first-order element: a number or a tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Tuple(Vec<Value>),
}

impl Value {
    /// Coordinates of a point of `R^d`, if the value is one.
    pub fn coords(&self) -> Option<Vec<f64>> {
        match self {
            Value::Num(x) => Some(vec![*x]),
            Value::Tuple(vs) => vs
                .iter()
                .map(|v| match v {
                    Value::Num(x) => Some(*x),
                    Value::Tuple(_) => None,
                })
                .collect(),
        }
    }

    pub fn from_coords(x: &[f64]) -> Value {
        if x.len() == 1 {
            Value::Num(x[0])
        } else {
            Value::Tuple(x.iter().map(|&v| Value::Num(v)).collect())
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) => write!(f, "{x}"),
            Value::Tuple(vs) => {
                f.write_str("(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionDef {
    /// One of `sq, succ, pred, neg, abs, half, double, add, sub, mul, fst, snd`.
    Builtin(String),
    Table(Vec<(Value, Value)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationDef {
    /// One of `le, lt, ge, gt, ne`.
    Builtin(String),
    Table(Vec<(Value, Value)>),
    /// `|x - y| <= scale * eps`; only meaningful as an internal relation.
    EpsClose {
        scale: f64,
    },
}

pub(crate) const BUILTIN_FUNCTIONS: &[&str] =
    &["sq", "succ", "pred", "neg", "abs", "half", "double", "add", "sub", "mul", "fst", "snd"];
pub(crate) const BUILTIN_RELATIONS: &[&str] = &["le", "lt", "ge", "gt", "ne"];

/// Objects a constant symbol can be bound to. The first five kinds are
/// standard; the rest are internal, given per ladder entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Object {
    Element {
        value: Value,
    },
    FiniteSet {
        elements: Vec<Value>,
    },
    /// The standard naturals: membership only, no modelled star-extension.
    Naturals,
    Function {
        def: FunctionDef,
    },
    Relation {
        def: RelationDef,
    },
    InternalElement {
        values: Vec<Value>,
    },
    InternalFiniteSet {
        sets: Vec<Vec<Value>>,
    },
    InternalRegion {
        set: InternalSet,
    },
    Hyperfinite {
        set: HyperfiniteSet,
    },
    InternalFunction {
        defs: Vec<FunctionDef>,
    },
    InternalRelation {
        defs: Vec<RelationDef>,
    },
}

impl Object {
    pub fn is_standard(&self) -> bool {
        matches!(
            self,
            Object::Element { .. }
                | Object::FiniteSet { .. }
                | Object::Naturals
                | Object::Function { .. }
                | Object::Relation { .. }
        )
    }

    pub fn category(&self) -> SymbolCategory {
        match self {
            Object::Function { .. } | Object::InternalFunction { .. } => SymbolCategory::Function,
            Object::Relation { .. } | Object::InternalRelation { .. } => SymbolCategory::Relation,
            _ => SymbolCategory::Term,
        }
    }

    /// Star-extension on `ladder`: the constant family. Internal objects are
    /// returned unchanged; `None` if the object has no modelled extension.
    pub fn star(&self, ladder: &EpsLadder) -> Option<Object> {
        let n = ladder.len();
        Some(match self {
            Object::Element { value } => Object::InternalElement { values: vec![value.clone(); n] },
            Object::FiniteSet { elements } => Object::InternalFiniteSet { sets: vec![elements.clone(); n] },
            Object::Naturals => return None,
            Object::Function { def } => Object::InternalFunction { defs: vec![def.clone(); n] },
            Object::Relation { def } => Object::InternalRelation { defs: vec![def.clone(); n] },
            internal => internal.clone(),
        })
    }

    /// Number of per-eps entries of an internal object.
    pub(crate) fn internal_len(&self) -> Option<usize> {
        match self {
            Object::InternalElement { values } => Some(values.len()),
            Object::InternalFiniteSet { sets } => Some(sets.len()),
            Object::InternalRegion { set } => Some(set.ladder.len()),
            Object::Hyperfinite { set } => Some(set.ladder.len()),
            Object::InternalFunction { defs } => Some(defs.len()),
            Object::InternalRelation { defs } => Some(defs.len()),
            _ => None,
        }
    }

    pub(crate) fn builtin(name: &str, cat: SymbolCategory) -> Option<Object> {
        match cat {
            SymbolCategory::Function if BUILTIN_FUNCTIONS.contains(&name) => {
                Some(Object::Function { def: FunctionDef::Builtin(name.to_string()) })
            }
            SymbolCategory::Relation if BUILTIN_RELATIONS.contains(&name) => {
                Some(Object::Relation { def: RelationDef::Builtin(name.to_string()) })
            }
            _ => None,
        }
    }
}

/// Bindings for the constants of a formula, plus the ladder that internal
/// objects are sampled on.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    #[serde(default)]
    pub ladder: Option<EpsLadder>,
    #[serde(default)]
    pub bindings: BTreeMap<String, Object>,
}

impl Structure {
    pub fn new() -> Self {
        Structure::default()
    }

    pub fn with_ladder(ladder: EpsLadder) -> Self {
        Structure { ladder: Some(ladder), bindings: BTreeMap::new() }
    }

    pub fn bind(&mut self, name: &str, obj: Object) -> &mut Self {
        self.bindings.insert(name.to_string(), obj);
        self
    }

    /// Resolves a symbol: explicit bindings first, then builtins.
    pub fn resolve(&self, name: &str, cat: SymbolCategory) -> Option<Object> {
        self.bindings.get(name).cloned().or_else(|| Object::builtin(name, cat))
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Every internal object must match the ladder length.
    pub fn validate(&self) -> Result<(), String> {
        for (name, obj) in &self.bindings {
            if let Some(n) = obj.internal_len() {
                match &self.ladder {
                    None => return Err(format!("internal object `{name}` needs a ladder")),
                    Some(l) if l.len() != n => {
                        return Err(format!("`{name}` has {n} entries, ladder has {}", l.len()));
                    }
                    _ => {}
                }
            }
            if let Object::InternalRegion { set } = obj {
                if Some(&set.ladder) != self.ladder.as_ref() {
                    return Err(format!("`{name}` is sampled on a different ladder"));
                }
            }
            if let Object::Hyperfinite { set } = obj {
                if Some(&set.ladder) != self.ladder.as_ref() {
                    return Err(format!("`{name}` is sampled on a different ladder"));
                }
            }
        }
        Ok(())
    }
}
