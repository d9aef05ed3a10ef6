//! Dense arrays, reverse-mode autodiff, optimizers, and deterministic RNG.

mod array;
mod gradcheck;
mod optim;
mod rng;
mod tape;

pub use array::Array;
pub use gradcheck::{grad_check, GradCheckReport};
pub use optim::{Optimizer, OptimizerKind};
pub use rng::Rng;
pub use tape::{Gradients, NodeId, OpKind, Tape};
