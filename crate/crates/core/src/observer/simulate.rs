use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::operators::Product;
use super::{check_grid, ObservationSystem, ObserverOptions};
use crate::bvp::{solve_periodic, PeriodicLinearSystem};
use crate::error::{Error, Result};
use crate::ode::{Grid, VectorTrajectory};
use crate::time_matrix::{SharedTimeMatrix, TimeMatrix};

/// Bound of the admissible sets, with a little room for quadrature round-off.
const ADMISSIBLE_SLACK: f64 = 1e-9;

#[derive(Clone, Default)]
pub enum NoiseModel {
    #[default]
    None,
    /// `η(t) = g(t)`.
    Deterministic { shape: SharedTimeMatrix },
    /// `η_j(t) = scale · ξ_j · g_j(t)` with independent standard normal
    /// `ξ_j` drawn from a ChaCha8 stream seeded by `seed`.
    Random {
        shape: SharedTimeMatrix,
        scale: f64,
        seed: u64,
    },
}

impl std::fmt::Debug for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseModel::None => f.write_str("None"),
            NoiseModel::Deterministic { .. } => f.write_str("Deterministic"),
            NoiseModel::Random { scale, seed, .. } => f
                .debug_struct("Random")
                .field("scale", scale)
                .field("seed", seed)
                .finish(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    /// `‖f‖₂`
    pub f_norm: f64,
    pub f_admissible: bool,
    /// `∫ tr R_η(t,t) dt` of the noise law.
    pub noise_trace_integral: f64,
    pub noise_admissible: bool,
    /// Relative distance of the requested kernel component from the periodic
    /// kernel of `ẋ = A(t)x`; `None` when no component was requested.
    pub kernel_residual: Option<f64>,
    pub compatibility_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub x: VectorTrajectory,
    pub eta: VectorTrajectory,
    pub y: VectorTrajectory,
    pub report: SimulationReport,
}

/// Solves `ẋ = A x + B f`, `x(0) = x(ω)` for the minimum-norm periodic
/// solution, adds `kernel_component`, and returns `y = H x + η`.
///
/// Admissibility of `f` and `η` is reported, not enforced.
pub fn simulate_observation(
    sys: &ObservationSystem,
    f: &dyn TimeMatrix,
    kernel_component: Option<&dyn TimeMatrix>,
    noise: &NoiseModel,
    grid: Grid,
    opts: &ObserverOptions,
) -> Result<Simulation> {
    check_grid(sys, grid)?;
    if f.shape() != (sys.r(), 1) {
        return Err(Error::Dimension(format!(
            "input must be {}x1, got {}x{}",
            sys.r(),
            f.rows(),
            f.cols()
        )));
    }
    let bf = Product { m: sys.b(), v: f };
    let sol = solve_periodic(
        &PeriodicLinearSystem::forced(sys.a(), &bf, sys.omega()),
        grid,
        &opts.bvp(),
    )?;
    if !sol.solvable {
        return Err(Error::Incompatible {
            residual: sol.compatibility_residual,
        });
    }
    let mut x = sol.particular;
    let mut kernel_residual = None;
    if let Some(k) = kernel_component {
        if k.shape() != (sys.n(), 1) {
            return Err(Error::Dimension(format!(
                "kernel component must be {}x1, got {}x{}",
                sys.n(),
                k.rows(),
                k.cols()
            )));
        }
        let kv = VectorTrajectory::sample(k, grid)?;
        kernel_residual = Some(distance_from_span(&kv, &sol.kernel_basis));
        x = x.add_scaled(1.0, &kv);
    }

    let fv = VectorTrajectory::sample(f, grid)?;
    let f_norm = fv.l2_norm();
    let (eta, noise_trace_integral) = sample_noise(noise, sys.m(), grid)?;
    let mut y_values = Vec::with_capacity(grid.len());
    for (i, xi) in x.values.iter().enumerate() {
        let mut yi = sys.h().eval(grid.t(i))?.mul_vec(xi);
        for (a, b) in yi.iter_mut().zip(&eta.values[i]) {
            *a += b;
        }
        y_values.push(yi);
    }
    let y = VectorTrajectory { grid, values: y_values };
    Ok(Simulation {
        x,
        eta,
        y,
        report: SimulationReport {
            f_norm,
            f_admissible: f_norm <= 1.0 + ADMISSIBLE_SLACK,
            noise_trace_integral,
            noise_admissible: noise_trace_integral <= 1.0 + ADMISSIBLE_SLACK,
            kernel_residual,
            compatibility_residual: sol.compatibility_residual,
        },
    })
}

fn sample_noise(noise: &NoiseModel, m: usize, grid: Grid) -> Result<(VectorTrajectory, f64)> {
    let check = |shape: &SharedTimeMatrix| {
        if shape.shape() != (m, 1) {
            return Err(Error::Dimension(format!(
                "noise shape must be {m}x1, got {}x{}",
                shape.rows(),
                shape.cols()
            )));
        }
        VectorTrajectory::sample(&**shape, grid)
    };
    match noise {
        NoiseModel::None => Ok((VectorTrajectory::zeros(grid, m), 0.0)),
        NoiseModel::Deterministic { shape } => {
            let g = check(shape)?;
            let tr = g.inner(&g);
            Ok((g, tr))
        }
        NoiseModel::Random { shape, scale, seed } => {
            let g = check(shape)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let xi: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            let eta = g.map(|_, v| v.iter().zip(&xi).map(|(gj, x)| scale * x * gj).collect());
            Ok((eta, scale * scale * g.inner(&g)))
        }
    }
}

/// `‖v − Πv‖ / ‖v‖` for the L2-orthogonal projection onto `span(basis)`.
fn distance_from_span(v: &VectorTrajectory, basis: &[VectorTrajectory]) -> f64 {
    let norm = v.l2_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut ortho: Vec<VectorTrajectory> = Vec::new();
    for b in basis {
        let mut w = b.clone();
        for q in &ortho {
            w = w.add_scaled(-w.inner(q), q);
        }
        let wn = w.l2_norm();
        if wn > 1e-12 {
            ortho.push(w.scaled(1.0 / wn));
        }
    }
    let mut r = v.clone();
    for q in &ortho {
        r = r.add_scaled(-r.inner(q), q);
    }
    r.l2_norm() / norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time_matrix::ExprMatrix;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn oscillator() -> ObservationSystem {
        ObservationSystem::from_strs(
            &[&["0", "1"], &["-1", "0"]],
            &[&["1", "0"], &["0", "1"]],
            &[&["sin(t)/20", "cos(t)/20"], &["sin(t)/2", "cos(t)/2"]],
            2.0 * PI,
        )
    }

    #[test]
    fn zero_input_zero_noise_gives_zero_observation() {
        let sys = ObservationSystem::from_strs(&[&["-1"]], &[&["1"]], &[&["1"]], 1.0);
        let f = ExprMatrix::vector(&["0"]).unwrap();
        let grid = Grid::new(1.0, 32).unwrap();
        let s = simulate_observation(&sys, &f, None, &NoiseModel::None, grid, &Default::default()).unwrap();
        assert_eq!(s.y.sup_norm(), 0.0);
        assert_eq!(s.report.f_norm, 0.0);
        assert!(s.report.f_admissible && s.report.noise_admissible);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let sys = oscillator();
        let f = ExprMatrix::vector(&["cos(2*t)/4", "0"]).unwrap();
        let noise = NoiseModel::Random {
            shape: Arc::new(ExprMatrix::vector(&["0.1", "0.1*sin(t)"]).unwrap()),
            scale: 1.0,
            seed: 42,
        };
        let grid = Grid::new(2.0 * PI, 256).unwrap();
        let run = || simulate_observation(&sys, &f, None, &noise, grid, &Default::default()).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.y.values, b.y.values);
        assert!((a.report.noise_trace_integral - 2.0 * PI * (0.01 + 0.005)).abs() < 1e-10);
    }

    #[test]
    fn kernel_component_is_checked_against_the_kernel() {
        let sys = oscillator();
        let f = ExprMatrix::vector(&["0", "0"]).unwrap();
        let grid = Grid::new(2.0 * PI, 2048).unwrap();
        let k = ExprMatrix::vector(&["cos(t)/2", "-sin(t)/2"]).unwrap();
        let s = simulate_observation(&sys, &f, Some(&k), &NoiseModel::None, grid, &Default::default()).unwrap();
        assert!(s.report.kernel_residual.unwrap() < 1e-8, "{:?}", s.report);
        // (cos, −sin) is invisible to H
        assert!(s.y.sup_norm() < 1e-12);
        let off = ExprMatrix::vector(&["1", "0"]).unwrap();
        let s = simulate_observation(&sys, &f, Some(&off), &NoiseModel::None, grid, &Default::default()).unwrap();
        assert!(s.report.kernel_residual.unwrap() > 0.5);
    }

    #[test]
    fn resonant_input_is_an_error() {
        let sys = oscillator();
        let f = ExprMatrix::vector(&["sin(t)", "cos(t)"]).unwrap();
        let grid = Grid::new(2.0 * PI, 2048).unwrap();
        let r = simulate_observation(&sys, &f, None, &NoiseModel::None, grid, &Default::default());
        assert!(
            matches!(r, Err(Error::Incompatible { .. })),
            "{:?}",
            r.map(|s| s.report)
        );
    }
}
