//! Numerical verification laboratory for the rational Ruijsenaars-Schneider
//! model.
//!
//! The crate builds the Hermitian, positive definite Lax matrix of the model,
//! evaluates the commuting invariants `I_k = tr(L^k)` and their
//! position-weighted companions `I1_k = tr(diag(q) L^k)`, and then audits, at
//! machine precision, the structures that make the model maximally
//! superintegrable:
//!
//! - the bracket algebra `{I1_k, I_j} = j I_{j+k}` and the centerless
//!   Virasoro relations `{I1_k, I1_j} = (j - k) I1_{k+j}`,
//! - the explicit extra constants of motion `C_{k,j}`, `K_j`, `L_j` and their
//!   exact invariant-coordinate Jacobian determinants,
//! - linear evolution of the weighted traces along any flow generated by a
//!   function of the commuting invariants,
//! - scattering asymptotics against the conserved Lax spectrum,
//! - the symplectic-reduction gauge slice `(g, J_R, xi)` with its moment-map
//!   constraints and invariant restrictions.
//!
//! Derivatives are taken with forward-mode dual numbers threaded through the
//! complex matrix algebra, so Poisson brackets are exact up to roundoff. See
//! the crate examples for one runnable entry point per capability, and the
//! `rrs-lab` binary for the `verify` / `calibrate` / `evolve` / `scatter`
//! commands.

pub mod config;
pub mod dual;
pub mod error;
pub mod flow;
pub mod linalg;
pub mod model;
pub mod observable;
pub mod phase;
pub mod poisson;
pub mod reduction;
pub mod report;
pub mod sample;
pub mod superint;
pub mod verify;

pub use config::{Convention, ModelConfig, SampleRanges, Tolerances};
pub use error::{Error, Result};
pub use phase::PhasePoint;
