use super::{check_grid, ObservationSystem, ObserverOptions};
use crate::bvp::{solve_periodic, PeriodicLinearSystem};
use crate::error::Result;
use crate::linalg::{norm2, svd, Mat};
use crate::ode::{Grid, VectorTrajectory};

#[derive(Debug, Clone)]
pub struct ObservabilityReport {
    /// Dimension of the periodic kernel of `ẋ = A(t)x`.
    pub kernel_dim: usize,
    /// `G_jk = ∫(Hψ_j, Hψ_k)dt` over the kernel basis.
    pub gram: Mat,
    pub rank: usize,
    pub fully_estimable: bool,
    /// Kernel directions `ψ_k`, rotated to the principal axes of `gram`
    /// (descending observed energy).
    pub kernel_basis: Vec<VectorTrajectory>,
    /// Eigenvalues of `gram`, matching `kernel_basis`.
    pub principal_energies: Vec<f64>,
    /// `‖Hψ_k‖₂` for each principal direction.
    pub observed_norms: Vec<f64>,
}

/// Checks linear independence of `{Hψ_k}` over the periodic kernel `{ψ_k}`.
pub fn observability_diagnostic(
    sys: &ObservationSystem,
    grid: Grid,
    opts: &ObserverOptions,
) -> Result<ObservabilityReport> {
    check_grid(sys, grid)?;
    let sol = solve_periodic(
        &PeriodicLinearSystem::homogeneous(sys.a(), sys.omega()),
        grid,
        &opts.bvp(),
    )?;
    let basis = sol.kernel_basis;
    let k = basis.len();
    let hs = grid.nodes().map(|t| sys.h().eval(t)).collect::<Result<Vec<_>>>()?;
    let observed: Vec<VectorTrajectory> = basis.iter().map(|psi| psi.map(|i, x| hs[i].mul_vec(x))).collect();

    let mut gram = Mat::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let g = observed[i].inner(&observed[j]);
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }

    // trace bound: ∫‖H‖²_F Σ|ψ_k|² dominates tr G
    let bound: Vec<f64> = (0..grid.len())
        .map(|i| {
            let h2 = hs[i].frobenius_norm().powi(2);
            h2 * basis.iter().map(|p| norm2(&p.values[i]).powi(2)).sum::<f64>()
        })
        .collect();
    let floor = grid.simpson(&bound);

    let f = svd(&gram)?;
    let rank = f.rank_with(opts.cutoff(floor));
    let mut kernel_basis = Vec::with_capacity(k);
    let mut observed_norms = Vec::with_capacity(k);
    for c in 0..k {
        let coef = f.v.column(c);
        let mut psi = VectorTrajectory::zeros(grid, sys.n());
        let mut hpsi = VectorTrajectory::zeros(grid, sys.m());
        for (j, &w) in coef.iter().enumerate() {
            psi = psi.add_scaled(w, &basis[j]);
            hpsi = hpsi.add_scaled(w, &observed[j]);
        }
        observed_norms.push(hpsi.l2_norm());
        kernel_basis.push(psi);
    }
    Ok(ObservabilityReport {
        kernel_dim: k,
        gram,
        rank,
        fully_estimable: rank == k,
        kernel_basis,
        principal_energies: f.s,
        observed_norms,
    })
}
