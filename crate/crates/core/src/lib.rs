//! Certified numerics for grand and small Lebesgue sequence spaces and their
//! amalgam function-space counterparts.

pub mod amalgam;
pub mod cli;
pub mod error;
pub mod grandnorm;
pub mod operators;
pub mod report;
mod search;
pub mod smallnorm;
pub mod seqcore;
pub mod specfun;
pub mod verifier;

pub use error::{Error, Result};
pub use seqcore::{linf_norm, lp_norm, pointwise_dominates, GrandSequence, IndexSet, NormBracket, PowerLogTail};
pub use specfun::{c_eps0, conjugate_exponent, lambert_w0, psi, psi_argmax, psi_max, Epsilon};
pub use grandnorm::{grand_norm, grand_norm_truncated, GrandParams, OptimizerConfig};
pub use report::{Status, VerificationReport};
