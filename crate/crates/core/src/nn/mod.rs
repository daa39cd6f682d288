//! Small fully-connected networks with hand-written backpropagation.
//!
//! A forward pass returns a [`Tape`] holding the activations; `backward`
//! consumes it, so gradients always belong to a forward computation.

mod adam;
mod mlp;
mod policy;

pub use adam::Adam;
pub use mlp::{fd_tolerance, gradient_check, GradCheck, Layers, Mlp, Tape, FD_STEP};
pub use policy::{
    gaussian_log_prob, split_head, squash_correction, SquashedGaussian, SquashedSample, LOG_STD_MAX,
    LOG_STD_MIN, SQUASH_EPS,
};

/// Hidden width used by every actor and critic.
pub const HIDDEN: usize = 64;
