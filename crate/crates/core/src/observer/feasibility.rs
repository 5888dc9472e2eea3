//! Finite-error criterion: `ℓ` is estimable with finite guaranteed error iff
//! `P h(ω) ⊥ N(W(0,ω))`, where
//!
//! - `Φ` is the fundamental matrix of `ż = −Aᵀz`,
//! - `P = E − (E − Φ(ω,0))(E − Φ(ω,0))⁺`,
//! - `W(0,ω) = ∫ P Φ(ω,s) Hᵀ(s) H(s) Φᵀ(ω,s) P ds`,
//! - `ḣ = −Aᵀh + ℓ`, `h(0) = 0`.
//!
//! [`feasibility_oracle`] reaches the same verdict independently through the
//! Fredholm alternative on the coupled estimator problem.

use super::operators::{Coupled, NegTranspose};
use super::{check_grid, Functional, ObservationSystem, ObserverOptions};
use crate::bvp::{solve_periodic, PeriodicLinearSystem};
use crate::error::Result;
use crate::linalg::{norm2, nullspace_cut, pinv_cut, Mat};
use crate::ode::{propagate_affine, propagate_fundamental, propagate_inverse_fundamental, Grid, VectorTrajectory};

#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub p: Mat,
    pub w: Mat,
    pub h_end: Vec<f64>,
    pub ph_end: Vec<f64>,
    /// Orthonormal columns spanning `N(W)`.
    pub w_nullspace: Mat,
    /// `‖Vᵀ P h(ω)‖` for the nullspace basis `V`.
    pub defect: f64,
    pub threshold: f64,
    pub feasible: bool,
}

struct AdjointFlow {
    /// `Φ(ω, 0)`
    end: Mat,
    /// `Φ(s, 0)⁻¹` at the grid nodes
    inverse: Vec<Mat>,
}

fn adjoint_flow(sys: &ObservationSystem, grid: Grid, with_inverse: bool) -> Result<AdjointFlow> {
    let neg_at = NegTranspose(sys.a());
    let end = propagate_fundamental(&neg_at, grid)?.last().clone();
    let inverse = if with_inverse {
        propagate_inverse_fundamental(&neg_at, grid)?.values
    } else {
        Vec::new()
    };
    Ok(AdjointFlow { end, inverse })
}

fn projector(flow: &AdjointFlow, opts: &ObserverOptions) -> Result<Mat> {
    let n = flow.end.rows();
    let e = Mat::identity(n);
    let m = &e - &flow.end;
    let mp = pinv_cut(&m, opts.cutoff(1.0))?;
    Ok(&e - &(&m * &mp))
}

/// `P`, the orthogonal projector onto `N((E − Φ(ω,0))ᵀ)`.
pub fn compute_p(sys: &ObservationSystem, grid: Grid, opts: &ObserverOptions) -> Result<Mat> {
    check_grid(sys, grid)?;
    projector(&adjoint_flow(sys, grid, false)?, opts)
}

/// Returns the symmetrised Gramian and the trace of its unprojected
/// counterpart (used as the rank floor).
fn gramian(sys: &ObservationSystem, grid: Grid, flow: &AdjointFlow, p: &Mat) -> Result<(Mat, f64)> {
    let n = sys.n();
    let mut acc = Mat::zeros(n, n);
    let mut trace_samples = Vec::with_capacity(grid.len());
    let steps = grid.steps();
    for (i, s) in grid.nodes().enumerate() {
        let h = sys.h().eval(s)?;
        // Φ(ω,s) Hᵀ(s) = Φ(ω,0) Φ(s,0)⁻¹ Hᵀ(s)
        let k = &(&flow.end * &flow.inverse[i]) * &h.transpose();
        trace_samples.push(k.frobenius_norm().powi(2));
        let pk = p * &k;
        let integrand = &pk * &pk.transpose();
        // composite Simpson weights
        let wgt = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.axpy(wgt, &integrand);
    }
    let w = acc.scale(grid.step() / 3.0).symmetrize();
    Ok((w, grid.simpson(&trace_samples)))
}

/// `W(0, ω)` by Simpson quadrature, symmetrised.
pub fn compute_w(sys: &ObservationSystem, grid: Grid, opts: &ObserverOptions) -> Result<Mat> {
    check_grid(sys, grid)?;
    let flow = adjoint_flow(sys, grid, true)?;
    let p = projector(&flow, opts)?;
    Ok(gramian(sys, grid, &flow, &p)?.0)
}

/// `h(t)` solving `ḣ = −Aᵀh + ℓ`, `h(0) = 0`.
pub fn compute_h(sys: &ObservationSystem, l: &Functional, grid: Grid) -> Result<VectorTrajectory> {
    check_grid(sys, grid)?;
    l.check(sys)?;
    propagate_affine(
        &NegTranspose(sys.a()),
        Some(l.as_time_matrix()),
        &vec![0.0; sys.n()],
        grid,
    )
}

pub fn check_feasibility(
    sys: &ObservationSystem,
    l: &Functional,
    grid: Grid,
    opts: &ObserverOptions,
) -> Result<FeasibilityReport> {
    check_grid(sys, grid)?;
    l.check(sys)?;
    let flow = adjoint_flow(sys, grid, true)?;
    let p = projector(&flow, opts)?;
    let (w, scale) = gramian(sys, grid, &flow, &p)?;
    let h_end = compute_h(sys, l, grid)?.last().to_vec();
    let ph_end = p.mul_vec(&h_end);
    let w_nullspace = nullspace_cut(&w, opts.cutoff(scale))?;
    let defect = norm2(&w_nullspace.tr_mul_vec(&ph_end));
    let threshold = opts.feas_tol * norm2(&h_end).max(1.0);
    Ok(FeasibilityReport {
        p,
        w,
        h_end,
        ph_end,
        w_nullspace,
        defect,
        threshold,
        feasible: defect <= threshold,
    })
}

#[derive(Debug, Clone)]
pub struct FredholmReport {
    pub feasible: bool,
    pub kernel_dim: usize,
    /// `|∫((−ℓ, 0), w_k)dt|` for each adjoint kernel element `w_k`.
    pub inner_products: Vec<f64>,
    pub thresholds: Vec<f64>,
}

/// Fredholm-alternative verdict on the coupled estimator problem: the forcing
/// `(−ℓ, 0)` must be orthogonal to every periodic solution of the adjoint
/// homogeneous system.
pub fn fredholm_check(
    sys: &ObservationSystem,
    l: &Functional,
    grid: Grid,
    opts: &ObserverOptions,
) -> Result<FredholmReport> {
    check_grid(sys, grid)?;
    l.check(sys)?;
    let n = sys.n();
    let adj = Coupled {
        a: sys.a(),
        b: sys.b(),
        h: sys.h(),
        adjoint: true,
    };
    let sol = solve_periodic(&PeriodicLinearSystem::homogeneous(&adj, sys.omega()), grid, &opts.bvp())?;
    let lv = VectorTrajectory::sample(l.as_time_matrix(), grid)?;
    let forcing = lv.map(|_, v| {
        let mut f: Vec<f64> = v.iter().map(|x| -x).collect();
        f.resize(2 * n, 0.0);
        f
    });
    let fnorm = forcing.l2_norm();
    let mut inner_products = Vec::new();
    let mut thresholds = Vec::new();
    for k in &sol.kernel_basis {
        inner_products.push(forcing.inner(k).abs());
        thresholds.push(opts.feas_tol * (fnorm * k.l2_norm()).max(1.0));
    }
    let feasible = inner_products.iter().zip(&thresholds).all(|(ip, th)| ip <= th);
    Ok(FredholmReport {
        feasible,
        kernel_dim: sol.kernel_dim(),
        inner_products,
        thresholds,
    })
}

pub fn feasibility_oracle(sys: &ObservationSystem, l: &Functional, grid: Grid, opts: &ObserverOptions) -> Result<bool> {
    Ok(fredholm_check(sys, l, grid, opts)?.feasible)
}
