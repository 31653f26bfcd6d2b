//! Exact nonlinear primal-dual hybrid gradient method (NL-PDHGM) for
//! saddle-point problems
//!
//! ```text
//! min_x max_y  G(x) + <K(x), y> - F*(y)
//! ```
//!
//! with a nonlinear, continuously differentiable `K`.
//!
//! The crate is organised bottom-up:
//!
//! - [`problems`]: the [`SaddleProblem`] abstraction, a library of closed-form
//!   proximal maps and the complex phase/amplitude toy problem.
//! - [`pde`]: a 1D P0/P1 finite-element discretisation of the elliptic
//!   potential-to-state map together with its derivative and adjoint.
//! - [`solver`]: the iteration itself, the three step-length regimes, the
//!   testing ledger and the metric / descent diagnostics built on it.
//! - [`experiments`]: data generation, problem wiring, reference runs and
//!   empirical rate fitting.
//! - [`checks`]: randomized consistency checks (adjoints, Taylor remainders,
//!   prox identities) shared by the test-suite and the command-line tool.

// `!(a > b)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod error;
pub mod experiments;
pub mod pde;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};
pub use problems::SaddleProblem;
pub use solver::{PrimalDualPoint, StepRule, StepState};
