//! Linear periodic two-point problems `ẋ = M(t)x + g(t)`, `x(0) = x(ω)`,
//! solved by single shooting with a minimum-norm shooting constant, so a
//! singular monodromy is handled rather than rejected.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, svd, Cutoff, Mat, DEFAULT_RTOL};
use crate::ode::{propagate_with_fundamental, Grid, VectorTrajectory};
use crate::time_matrix::TimeMatrix;

pub const DEFAULT_COMPAT_TOL: f64 = 1e-6;

#[derive(Clone, Copy)]
pub struct PeriodicLinearSystem<'a> {
    pub coeff: &'a dyn TimeMatrix,
    pub forcing: Option<&'a dyn TimeMatrix>,
    pub omega: f64,
}

impl<'a> PeriodicLinearSystem<'a> {
    pub fn homogeneous(coeff: &'a dyn TimeMatrix, omega: f64) -> Self {
        PeriodicLinearSystem {
            coeff,
            forcing: None,
            omega,
        }
    }

    pub fn forced(coeff: &'a dyn TimeMatrix, forcing: &'a dyn TimeMatrix, omega: f64) -> Self {
        PeriodicLinearSystem {
            coeff,
            forcing: Some(forcing),
            omega,
        }
    }

    pub fn dim(&self) -> usize {
        self.coeff.rows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpOptions {
    /// Relative rank tolerance for `E − F(ω)`; the cutoff never drops below
    /// `rtol` in absolute terms.
    pub rtol: f64,
    /// Solvable iff `‖(E − F(ω))c − q(ω)‖ ≤ compat_tol · max(1, ‖q(ω)‖)`.
    pub compat_tol: f64,
}

impl Default for BvpOptions {
    fn default() -> Self {
        BvpOptions {
            rtol: DEFAULT_RTOL,
            compat_tol: DEFAULT_COMPAT_TOL,
        }
    }
}

impl BvpOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        BvpOptions {
            rtol,
            ..Default::default()
        }
    }

    fn cutoff(&self) -> Cutoff {
        Cutoff::relative(self.rtol).with_floor(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct BvpSolution {
    /// `F(t)c + q(t)` with the minimum-norm shooting constant `c`.
    pub particular: VectorTrajectory,
    /// Periodic homogeneous solutions, orthonormal at `t = 0`.
    pub kernel_basis: Vec<VectorTrajectory>,
    pub compatibility_residual: f64,
    pub solvable: bool,
    pub monodromy: Mat,
    pub shooting_constant: Vec<f64>,
    /// `q(ω)`, the end value of the zero-start particular solution.
    pub free_end: Vec<f64>,
}

impl BvpSolution {
    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.len()
    }

    /// Basis of `N((E − F(ω))ᵀ)`: the directions `q(ω)` must avoid.
    pub fn cokernel_at_end(&self) -> Result<Mat> {
        let d = self.monodromy.rows();
        let m = &Mat::identity(d) - &self.monodromy;
        let k = self.kernel_dim();
        let f = svd(&m.transpose())?;
        let mut out = Mat::zeros(d, k);
        for j in 0..k {
            for i in 0..d {
                out[(i, j)] = f.v[(i, d - k + j)];
            }
        }
        Ok(out)
    }
}

pub fn solve_periodic(sys: &PeriodicLinearSystem<'_>, grid: Grid, opts: &BvpOptions) -> Result<BvpSolution> {
    if (grid.omega() - sys.omega).abs() > 1e-12 * sys.omega.max(1.0) {
        return Err(Error::Grid(format!(
            "grid horizon {} does not match system horizon {}",
            grid.omega(),
            sys.omega
        )));
    }
    let d = sys.dim();
    let (fund, q) = propagate_with_fundamental(sys.coeff, sys.forcing, &vec![0.0; d], grid)?;
    let monodromy = fund.last().clone();
    let shoot = &Mat::identity(d) - &monodromy;
    let q_end = q.last().to_vec();

    let f = svd(&shoot)?;
    let cut = opts.cutoff();
    let rank = f.rank_with(cut);
    let mut c = vec![0.0; d];
    for k in 0..rank {
        let coef = dot(&f.u.column(k), &q_end) / f.s[k];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci += coef * f.v[(i, k)];
        }
    }
    let res: Vec<f64> = shoot.mul_vec(&c).iter().zip(&q_end).map(|(a, b)| a - b).collect();
    let compatibility_residual = norm2(&res);
    let solvable = compatibility_residual <= opts.compat_tol * norm2(&q_end).max(1.0);

    let particular = VectorTrajectory {
        grid,
        values: fund
            .values
            .iter()
            .zip(&q.values)
            .map(|(fm, qv)| fm.mul_vec(&c).iter().zip(qv).map(|(a, b)| a + b).collect())
            .collect(),
    };
    let kernel_basis = (rank..d)
        .map(|k| {
            let v = f.v.column(k);
            VectorTrajectory {
                grid,
                values: fund.values.iter().map(|fm| fm.mul_vec(&v)).collect(),
            }
        })
        .collect();

    Ok(BvpSolution {
        particular,
        kernel_basis,
        compatibility_residual,
        solvable,
        monodromy,
        shooting_constant: c,
        free_end: q_end,
    })
}

/// `dim N(E − F(ω))` under the options' rank cutoff.
pub fn kernel_dimension(sys: &PeriodicLinearSystem<'_>, grid: Grid, opts: &BvpOptions) -> Result<usize> {
    let homogeneous = PeriodicLinearSystem::homogeneous(sys.coeff, sys.omega);
    Ok(solve_periodic(&homogeneous, grid, opts)?.kernel_dim())
}
