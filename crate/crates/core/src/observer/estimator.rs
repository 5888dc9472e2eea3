use super::operators::{Coupled, PaddedForcing};
use super::{check_grid, Functional, ObservationSystem, ObserverOptions};
use crate::bvp::{solve_periodic, PeriodicLinearSystem};
use crate::error::{Error, Result};
use crate::ode::{Grid, VectorTrajectory};

/// Largest negative error still treated as round-off and clamped to zero.
const NEGATIVE_SIGMA_SLACK: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct MinimaxEstimate {
    pub z_hat: VectorTrajectory,
    pub p_hat: VectorTrajectory,
    /// Estimator kernel `û(t) = H(t) p̂(t)`.
    pub u_hat: VectorTrajectory,
    /// Minimax mean-square error `∫(ℓ, p̂)dt`.
    pub sigma_hat: f64,
    /// Periodic homogeneous solutions `(δz, δp)` of the coupled problem.
    pub kernel_basis: Vec<VectorTrajectory>,
    pub compatibility_residual: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum Estimate {
    Finite(MinimaxEstimate),
    /// The coupled problem has no periodic solution: `ℓ` is outside the
    /// estimable set and the guaranteed error is `+∞`.
    Infinite {
        compatibility_residual: f64,
    },
}

impl Estimate {
    pub fn sigma_hat(&self) -> f64 {
        match self {
            Estimate::Finite(e) => e.sigma_hat,
            Estimate::Infinite { .. } => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<&MinimaxEstimate> {
        match self {
            Estimate::Finite(e) => Some(e),
            Estimate::Infinite { .. } => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Estimate::Infinite { .. })
    }
}

/// Solves
///
/// ```text
/// ż = −Aᵀz + HᵀH p − ℓ,   ṗ = A p + BBᵀ z,   z(0) = z(ω), p(0) = p(ω)
/// ```
///
/// and returns `û = H p̂`, `σ̂ = ∫(ℓ, p̂)dt` for the minimum-norm
/// representative.
pub fn solve_estimator(
    sys: &ObservationSystem,
    l: &Functional,
    grid: Grid,
    opts: &ObserverOptions,
) -> Result<Estimate> {
    check_grid(sys, grid)?;
    l.check(sys)?;
    let n = sys.n();
    let coeff = Coupled {
        a: sys.a(),
        b: sys.b(),
        h: sys.h(),
        adjoint: false,
    };
    let forcing = PaddedForcing {
        top: l.as_time_matrix(),
        scale: -1.0,
        pad: n,
    };
    let sol = solve_periodic(
        &PeriodicLinearSystem::forced(&coeff, &forcing, sys.omega()),
        grid,
        &opts.bvp(),
    )?;
    if !sol.solvable {
        return Ok(Estimate::Infinite {
            compatibility_residual: sol.compatibility_residual,
        });
    }
    let z_hat = sol.particular.slice(0, n);
    let p_hat = sol.particular.slice(n, n);
    let mut u_values = Vec::with_capacity(grid.len());
    for (t, p) in grid.nodes().zip(&p_hat.values) {
        u_values.push(sys.h().eval(t)?.mul_vec(p));
    }
    let u_hat = VectorTrajectory { grid, values: u_values };
    let lv = VectorTrajectory::sample(l.as_time_matrix(), grid)?;
    let mut sigma_hat = lv.inner(&p_hat);
    let mut notes = Vec::new();
    if sigma_hat < 0.0 {
        if sigma_hat < -NEGATIVE_SIGMA_SLACK {
            return Err(Error::NumericalConsistency(format!(
                "minimax error evaluated to {sigma_hat:.3e} < 0"
            )));
        }
        notes.push(format!("sigma_hat {sigma_hat:.3e} clamped to 0"));
        sigma_hat = 0.0;
    }
    Ok(Estimate::Finite(MinimaxEstimate {
        z_hat,
        p_hat,
        u_hat,
        sigma_hat,
        kernel_basis: sol.kernel_basis,
        compatibility_residual: sol.compatibility_residual,
        notes,
    }))
}
