//! Transferrable formulas: built only from atoms, conjunction, bounded
//! quantifiers and the guarded implication `forall x in t (P => Q)`.
//! Negation and disjunction have no AST node.

mod ast;
mod check;
pub mod corpus;
mod eval;
mod parser;
mod structure;

pub use ast::{Atom, Constant, Formula, FormulaAst, SymbolCategory, Term};
pub use check::{check_text, check_transferrable, CheckReport, Obligation, Violation};
pub use eval::{
    evaluate, evaluate_eventually, star_transform, transfer_test, EvalError, EvalOutcome, EventualVerdict,
    TransferReport,
};
pub use parser::{parse, ParseError, ParseErrorKind};
pub use structure::{FunctionDef, Object, RelationDef, Structure, Value};
