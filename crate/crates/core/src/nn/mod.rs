//! Feed-forward Gaussian policy and value networks over flat parameter
//! vectors, with exact reverse-mode gradients and Adam.

mod adam;
mod gaussian;
mod layout;
mod mlp;

pub use adam::{adam_step, AdamState};
pub use gaussian::{gaussian_logprob, sample_action, GaussianActionDistribution};
pub use layout::{ParamLayout, ParamSlot, ParamVector};
pub(crate) use mlp::{accumulate_gradient, forward_into};
pub use mlp::{backprop, mlp_forward, Workspace};
