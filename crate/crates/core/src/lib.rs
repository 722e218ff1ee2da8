//! Epsilon-indexed models of internal numbers, sets and functions, an exact
//! calculus for power-log scales in `rho`, and a checker/evaluator for
//! transferrable formulas.

pub mod config;
pub mod error;
pub mod fit;
pub mod formula;
pub mod internal;
pub mod ladder;
pub mod scale;
pub mod ternary;

pub use config::Thresholds;
pub use error::CoreError;
pub use fit::{
    classify_sampled, estimate_order, estimate_order_tail, fit_power_log, OrderFit, PowerLogFit, SampledFlags,
};
pub use ladder::{EpsFamily, EpsLadder};
pub use scale::{ScaleExpr, ScaleFlags, ScaleOrdering, Term};
pub use ternary::Ternary;
