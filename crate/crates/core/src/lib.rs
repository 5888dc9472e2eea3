//! Guaranteed (minimax) state observation for linear time-varying systems
//! under periodic two-point boundary conditions.
//!
//! Given `ẋ = A(t)x + B(t)f`, `x(0) = x(ω)` observed through
//! `y = H(t)x + η`, the crate decides whether a linear functional
//! `ℓ(x) = ∫(ℓ(t), x(t))dt` can be estimated with finite worst-case
//! mean-square error, builds the minimax estimator and its error, and
//! reconstructs the state from an observed signal.
//!
//! Layers, bottom-up:
//!
//! - [`expr`]: scalar expressions of `t` used to declare matrix entries.
//! - [`linalg`]: dense matrices, Jacobi SVD, pseudoinverse, nullspaces.
//! - [`ode`]: RK4 propagation on a uniform grid, Simpson quadrature.
//! - [`bvp`]: periodic linear boundary value problems with singular monodromy.
//! - [`observer`]: feasibility test, estimator, reconstruction, diagnostics,
//!   observation simulator and the Monte-Carlo bound harness.
//! - [`config`] and [`cli`]: JSON experiment files and the command-line front end.

pub mod bvp;
pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod observer;
pub mod ode;
pub mod time_matrix;

pub use error::{Error, Result};
pub use linalg::Mat;
pub use ode::{Grid, VectorTrajectory};
