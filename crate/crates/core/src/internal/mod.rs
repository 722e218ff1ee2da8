//! Internal numbers, points, sets and functions as representatives sampled
//! on an epsilon ladder.

mod function;
mod hyperfinite;
mod idempotent;
mod overspill;
mod point;
mod set;

pub use function::InternalFunctionSampled;
pub use hyperfinite::{hf_count, hf_sum, HyperfiniteSet};
pub use idempotent::Idempotent;
pub use overspill::{overspill_witness, OverspillResult, OverspillVerdict};
pub use point::{interleave, sign_split, InternalPoint};
pub use set::{exterior, star_union, Exterior, ExteriorVerdict, InternalSet, Region, Shape};
