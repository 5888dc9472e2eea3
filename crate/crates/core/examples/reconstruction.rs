//! Reconstruct the state from an observed signal y = Hx + η.
//!
//! ```bash
//! cargo run --example reconstruction
//! ```

use std::f64::consts::PI;

use minimax_bvp::config::{ExperimentConfig, Observation};
use minimax_bvp::observer::{functional_value, solve_reconstruction, Functional, ObservationSystem};
use minimax_bvp::time_matrix::ExprMatrix;
use minimax_bvp::{Grid, VectorTrajectory};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // noise-free data of a free periodic motion on a system whose periodic
    // motions are all visible: the state comes back exactly
    let sys = ObservationSystem::from_strs(
        &[&["0", "1", "0"], &["-1", "0", "0"], &["0", "0", "-0.5"]],
        &[&["0"], &["1"], &["1"]],
        &[&["1", "0", "1"]],
        2.0 * PI,
    );
    let grid = Grid::new(2.0 * PI, 2048)?;
    let x = ExprMatrix::vector(&["2*cos(t) + sin(t)", "cos(t) - 2*sin(t)", "0"])?;
    let y = ExprMatrix::vector(&["2*cos(t) + sin(t)"])?;
    let est = solve_reconstruction(&sys, &y, grid, &Default::default())?;
    let xv = VectorTrajectory::sample(&x, grid)?;
    println!(
        "exact recovery: relative error {:.2e}",
        xv.add_scaled(-1.0, &est.x_hat).l2_norm() / xv.l2_norm()
    );
    let l = Functional::from_strs(&["cos(t)", "0", "1"]);
    println!(
        "ℓ(x̂) = {:.10} (exact 2π = {:.10})",
        functional_value(&l, &est.x_hat)?,
        2.0 * PI
    );

    // harmonic oscillator with a component H cannot see
    let exp = ExperimentConfig::builtin("oscillator")?.build(None)?;
    let Some(Observation::Signal(y)) = &exp.observation else {
        unreachable!()
    };
    let est = solve_reconstruction(&exp.system, &**y, exp.grid, &exp.options)?;
    let truth = VectorTrajectory::sample(&**exp.truth.as_ref().unwrap(), exp.grid)?;
    println!(
        "oscillator: ‖x − x̂‖₂ = {:.5}, {} unobservable direction(s)",
        truth.add_scaled(-1.0, &est.x_hat).l2_norm(),
        est.kernel_basis.len()
    );
    Ok(())
}
