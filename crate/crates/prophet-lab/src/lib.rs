//! A laboratory for finite-horizon optimal stopping against i.i.d. samples.
//!
//! The crate has five parts:
//!
//! - [`dist`]: finite discrete distributions and the transforms used
//!   throughout (max powers, CDF roots, dilation, zero padding).
//! - [`dp`]: exact gambler/prophet values by backward induction, batch-game
//!   values, and acceptance probabilities.
//! - [`engine`]: a seeded simulator for standard, batched, and windowed
//!   sample presentation, with the stopping policies and wrappers, Monte
//!   Carlo estimation, and two closed-form experiments.
//! - [`bounds`]: numerical evaluators for the window-vs-batch improvement
//!   gap and for upper bounds on the windowed competitive ratio.
//! - [`search`]: a derivative-free minimax search for distributions that
//!   drive the competitive ratio down, plus import/export of witnesses.
//!
//! Built with `--features parallel` (the default) trajectory simulation and
//! search restarts run on rayon; the sequential build produces bit-identical
//! results.

pub mod bounds;
pub mod dist;
pub mod dp;
pub mod engine;
mod exec;
pub mod search;
pub mod sum;

pub use bounds::{bound_sweep, clean_upper_bound, delta_gap, tight_upper_bound, BoundReport};
pub use dist::{DistError, FiniteDist, LoadedDist};
pub use dp::{acceptance_probs, batch_value, competitive_ratio, DpError, StoppingTable};
pub use engine::{
    monte_carlo, noniid_demo, padding_experiment, play, play_traced, EngineError, GameSetting,
    McEstimate, Mode, Outcome,
};
pub use search::{alpha_estimate, import_hard, search_hard, AlphaEntry, AlphaTable, Provenance};
