use super::operators::{Coupled, PaddedForcing, TransposeProduct};
use super::{check_grid, Functional, ObservationSystem, ObserverOptions};
use crate::bvp::{solve_periodic, PeriodicLinearSystem};
use crate::error::{Error, Result};
use crate::ode::{Grid, VectorTrajectory};
use crate::time_matrix::TimeMatrix;

#[derive(Debug, Clone)]
pub struct StateEstimate {
    pub p_hat: VectorTrajectory,
    pub x_hat: VectorTrajectory,
    pub kernel_basis: Vec<VectorTrajectory>,
    pub compatibility_residual: f64,
}

/// Solves
///
/// ```text
/// ṗ = −Aᵀp − Hᵀ(y − Hx),   ẋ = A x + BBᵀ p,   p(0) = p(ω), x(0) = x(ω)
/// ```
///
/// for an observed signal `y` (any time-vector of dimension `m`; sampled
/// data can be wrapped in [`PiecewiseLinear`](crate::time_matrix::PiecewiseLinear)).
pub fn solve_reconstruction(
    sys: &ObservationSystem,
    y: &dyn TimeMatrix,
    grid: Grid,
    opts: &ObserverOptions,
) -> Result<StateEstimate> {
    check_grid(sys, grid)?;
    if y.shape() != (sys.m(), 1) {
        return Err(Error::Dimension(format!(
            "observation must be {}x1, got {}x{}",
            sys.m(),
            y.rows(),
            y.cols()
        )));
    }
    let n = sys.n();
    let coeff = Coupled {
        a: sys.a(),
        b: sys.b(),
        h: sys.h(),
        adjoint: false,
    };
    let hty = TransposeProduct { m: sys.h(), v: y };
    let forcing = PaddedForcing {
        top: &hty,
        scale: -1.0,
        pad: n,
    };
    let sol = solve_periodic(
        &PeriodicLinearSystem::forced(&coeff, &forcing, sys.omega()),
        grid,
        &opts.bvp(),
    )?;
    if !sol.solvable {
        return Err(Error::Incompatible {
            residual: sol.compatibility_residual,
        });
    }
    Ok(StateEstimate {
        p_hat: sol.particular.slice(0, n),
        x_hat: sol.particular.slice(n, n),
        kernel_basis: sol.kernel_basis,
        compatibility_residual: sol.compatibility_residual,
    })
}

/// `∫(ℓ(t), x̂(t))dt` on the trajectory's grid.
pub fn functional_value(l: &Functional, x_hat: &VectorTrajectory) -> Result<f64> {
    if l.dim() != x_hat.dim() {
        return Err(Error::Dimension(format!(
            "functional has dimension {}, trajectory has {}",
            l.dim(),
            x_hat.dim()
        )));
    }
    let lv = VectorTrajectory::sample(l.as_time_matrix(), x_hat.grid)?;
    Ok(lv.inner(x_hat))
}
