//! Regularized distributions on eps-grids, scaled plateau cutoffs, Fourier
//! decay tables and the regularity verdicts built on them.

pub mod config;
pub mod cutoff;
pub mod error;
pub mod fft;
pub mod gf;
pub mod gridsum;
pub mod minfty;
pub mod models;
pub mod plateau;
pub mod spectrum;
pub mod verdict;

pub use config::{EngineParams, MProfile};
pub use cutoff::CutoffSpec;
pub use error::{EngineError, Result};
pub use gf::{GeneralizedFunction, Patch, SupportBox};
pub use gridsum::{grid_sum, GridSum, GridSumReport};
pub use minfty::{m_infinity_test, negligible_equiv, MInftyVerdict};
pub use models::{regularize, Model};
pub use plateau::{make_plateau, Plateau};
pub use spectrum::{windowed_spectrum, DecayRow, DecayTable, RowSpec};
pub use verdict::{fourier_decay_check, microlocal_test, wavefront_scan, RegularityVerdict, Status};
