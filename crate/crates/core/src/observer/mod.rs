//! Minimax observation for the periodic problem
//!
//! ```text
//! ẋ(t) − A(t)x(t) = B(t)f(t),   x(0) = x(ω)
//! y(t) = H(t)x(t) + η(t)
//! ```
//!
//! with `∫|f|² ≤ 1` and `∫ tr R_η(t,t) dt ≤ 1`.

mod bound;
mod diagnostics;
mod estimator;
mod feasibility;
pub mod operators;
mod reconstruction;
mod simulate;

use std::sync::Arc;

pub use bound::{guaranteed_bound_check, BoundOptions, BoundReport};
pub use diagnostics::{observability_diagnostic, ObservabilityReport};
pub use estimator::{solve_estimator, Estimate, MinimaxEstimate};
pub use feasibility::{
    check_feasibility, compute_h, compute_p, compute_w, feasibility_oracle, fredholm_check, FeasibilityReport,
    FredholmReport,
};
pub use reconstruction::{functional_value, solve_reconstruction, StateEstimate};
pub use simulate::{simulate_observation, NoiseModel, Simulation, SimulationReport};

use crate::bvp::BvpOptions;
use crate::error::{Error, Result};
use crate::linalg::{Cutoff, DEFAULT_RTOL};
use crate::time_matrix::{EntryError, ExprMatrix, SharedTimeMatrix, TimeMatrix};

pub const DEFAULT_FEAS_TOL: f64 = 1e-6;

/// The triple `(A, B, H)` on `[0, ω]`.
#[derive(Clone)]
pub struct ObservationSystem {
    a: SharedTimeMatrix,
    b: SharedTimeMatrix,
    h: SharedTimeMatrix,
    omega: f64,
}

impl ObservationSystem {
    pub fn new(a: SharedTimeMatrix, b: SharedTimeMatrix, h: SharedTimeMatrix, omega: f64) -> Result<Self> {
        let (n, nc) = a.shape();
        if n == 0 || n != nc {
            return Err(Error::Dimension(format!(
                "A must be square and non-empty, got {n}x{nc}"
            )));
        }
        if b.rows() != n || b.cols() == 0 {
            return Err(Error::Dimension(format!(
                "B must be {n}xr with r >= 1, got {}x{}",
                b.rows(),
                b.cols()
            )));
        }
        if h.cols() != n || h.rows() == 0 {
            return Err(Error::Dimension(format!(
                "H must be mx{n} with m >= 1, got {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::Invalid(format!("horizon must be positive, got {omega}")));
        }
        Ok(ObservationSystem { a, b, h, omega })
    }

    /// Builds the system from expression strings; panics on malformed input.
    pub fn from_strs(a: &[&[&str]], b: &[&[&str]], h: &[&[&str]], omega: f64) -> Self {
        Self::new(
            Arc::new(ExprMatrix::from_strs(a)),
            Arc::new(ExprMatrix::from_strs(b)),
            Arc::new(ExprMatrix::from_strs(h)),
            omega,
        )
        .unwrap_or_else(|e| panic!("invalid system: {e}"))
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn r(&self) -> usize {
        self.b.cols()
    }

    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn a(&self) -> &dyn TimeMatrix {
        &*self.a
    }

    pub fn b(&self) -> &dyn TimeMatrix {
        &*self.b
    }

    pub fn h(&self) -> &dyn TimeMatrix {
        &*self.h
    }

    pub fn shared_a(&self) -> SharedTimeMatrix {
        self.a.clone()
    }

    pub fn shared_b(&self) -> SharedTimeMatrix {
        self.b.clone()
    }

    pub fn shared_h(&self) -> SharedTimeMatrix {
        self.h.clone()
    }
}

impl std::fmt::Debug for ObservationSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObservationSystem")
            .field("n", &self.n())
            .field("r", &self.r())
            .field("m", &self.m())
            .field("omega", &self.omega)
            .finish()
    }
}

/// `ℓ(·)` in `ℓ(x) = ∫(ℓ(t), x(t))dt`.
#[derive(Clone)]
pub struct Functional(SharedTimeMatrix);

impl Functional {
    pub fn new(l: SharedTimeMatrix) -> Result<Self> {
        if l.cols() != 1 {
            return Err(Error::Dimension(format!(
                "functional must be a column, got {}x{}",
                l.rows(),
                l.cols()
            )));
        }
        Ok(Functional(l))
    }

    pub fn parse<S: AsRef<str>>(entries: &[S]) -> Result<Self, EntryError> {
        Ok(Functional(Arc::new(ExprMatrix::vector(entries)?)))
    }

    /// Panics on malformed input.
    pub fn from_strs(entries: &[&str]) -> Self {
        Self::parse(entries).unwrap_or_else(|e| panic!("invalid functional: {e}"))
    }

    pub fn zero(n: usize) -> Self {
        Self::from_strs(&vec!["0"; n])
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_time_matrix(&self) -> &dyn TimeMatrix {
        &*self.0
    }

    pub fn shared(&self) -> SharedTimeMatrix {
        self.0.clone()
    }

    fn check(&self, sys: &ObservationSystem) -> Result<()> {
        if self.dim() != sys.n() {
            return Err(Error::Dimension(format!(
                "functional has dimension {}, system state has {}",
                self.dim(),
                sys.n()
            )));
        }
        Ok(())
    }
}

/// Numerical tolerances shared by the observer operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverOptions {
    pub rank_tol: f64,
    pub feas_tol: f64,
    pub compat_tol: f64,
}

impl Default for ObserverOptions {
    fn default() -> Self {
        ObserverOptions {
            rank_tol: DEFAULT_RTOL,
            feas_tol: DEFAULT_FEAS_TOL,
            compat_tol: crate::bvp::DEFAULT_COMPAT_TOL,
        }
    }
}

impl ObserverOptions {
    pub fn with_rank_tol(rank_tol: f64) -> Self {
        ObserverOptions {
            rank_tol,
            ..Default::default()
        }
    }

    pub(crate) fn bvp(&self) -> BvpOptions {
        BvpOptions {
            rtol: self.rank_tol,
            compat_tol: self.compat_tol,
        }
    }

    pub(crate) fn cutoff(&self, floor: f64) -> Cutoff {
        Cutoff::relative(self.rank_tol).with_floor(floor)
    }
}

pub(crate) fn check_grid(sys: &ObservationSystem, grid: crate::ode::Grid) -> Result<()> {
    if (grid.omega() - sys.omega()).abs() > 1e-12 * sys.omega().max(1.0) {
        return Err(Error::Grid(format!(
            "grid horizon {} does not match system horizon {}",
            grid.omega(),
            sys.omega()
        )));
    }
    Ok(())
}
