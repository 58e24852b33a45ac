//! Random walks on static and regenerating random digraphs.
//!
//! The crate samples digraphs from the directed configuration model (DCM) and
//! the out-configuration model (OCM), propagates walk distributions exactly
//! through their sparse transition kernels, and runs the Monte-Carlo
//! experiments that trace total-variation mixing profiles for a walk whose
//! environment is fully resampled with probability `alpha` at every step.
//!
//! Module map:
//! - [`degrees`]: validated degree sequences, `mu_in`, entropy and entropic time
//! - [`dist`]: probability vectors and total variation distance
//! - [`rng`]: counter-based reproducible random streams
//! - [`sampler`]: DCM/OCM configuration sampling and structural diagnostics
//! - [`walk`]: transition kernels, exact propagation, double-environment laws
//! - [`stationary`]: stationary distributions and their diagnostics
//! - [`experiments`]: theory curves and the mixing experiments
//! - [`cli`]: run specification parsing and the batch driver

// `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod degrees;
pub mod dist;
mod error;
pub mod experiments;
pub mod rng;
pub mod sampler;
pub mod stationary;
pub mod walk;

pub use degrees::{DegreeSequence, EntropicScale, ModelKind};
pub use dist::{tv_distance, Distribution};
pub use error::{Error, Result};
pub use rng::RngStream;
pub use sampler::Digraph;
pub use walk::{Trajectory, TransitionKernel};
