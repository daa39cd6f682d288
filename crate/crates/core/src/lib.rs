//! Task-aware morphology optimization for planar two-link arms.
//!
//! The crate covers the whole pipeline from kinematics to learning:
//!
//! - [`kinematics`]: forward/inverse kinematics, Jacobian, manipulability.
//! - [`taskpath`]: circle, ellipse and rectangle tasks and their radial bands.
//! - [`reward`]: coverage, manipulability and band-penalty rewards.
//! - [`baselines`]: analytic optimum, φ sweep, equal-dex and band-match designs.
//! - [`blackbox`]: PSO, GP/EI Bayesian optimization and CMA-ES in one dimension.
//! - [`nn`]: small MLPs with hand-written backprop and Adam.
//! - [`rl`]: SAC, DDPG and PPO trained as single-step contextual bandits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod baselines;
pub mod blackbox;
pub mod error;
pub mod kinematics;
pub mod nn;
pub mod reward;
pub mod rl;
pub mod rng;
pub mod taskpath;

pub use error::{Error, Result};
