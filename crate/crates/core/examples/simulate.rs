//! Generate observations from an input, a kernel component and a noise law.
//!
//! ```bash
//! cargo run --example simulate
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use minimax_bvp::observer::{simulate_observation, NoiseModel, ObservationSystem};
use minimax_bvp::time_matrix::ExprMatrix;
use minimax_bvp::Grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = ObservationSystem::from_strs(
        &[&["0", "1"], &["-1", "0"]],
        &[&["1", "0"], &["0", "1"]],
        &[&["sin(t)/20", "cos(t)/20"], &["sin(t)/2", "cos(t)/2"]],
        2.0 * PI,
    );
    let grid = Grid::new(2.0 * PI, 2048)?;
    let f = ExprMatrix::vector(&["cos(2*t)/4", "0"])?;
    let kernel = ExprMatrix::vector(&["cos(t)/2", "-sin(t)/2"])?;
    let shape = Arc::new(ExprMatrix::vector(&["0.1*sin(t)", "0.1*sin(t)"])?);

    let models = [
        ("none", NoiseModel::None),
        ("deterministic", NoiseModel::Deterministic { shape: shape.clone() }),
        (
            "random, seed 7",
            NoiseModel::Random {
                shape,
                scale: 1.0,
                seed: 7,
            },
        ),
    ];
    for (name, noise) in &models {
        let s = simulate_observation(&sys, &f, Some(&kernel), noise, grid, &Default::default())?;
        let r = &s.report;
        println!(
            "{name:<15} ‖f‖₂ = {:.4} (admissible {}), ∫tr R = {:.4} (admissible {}), kernel residual {:.1e}, y(π/2) = {:.6?}",
            r.f_norm,
            r.f_admissible,
            r.noise_trace_integral,
            r.noise_admissible,
            r.kernel_residual.unwrap_or(0.0),
            s.y.values[512]
        );
    }

    // forcing at the natural frequency has no periodic response
    let resonant = ExprMatrix::vector(&["sin(t)", "cos(t)"])?;
    let err = simulate_observation(&sys, &resonant, None, &NoiseModel::None, grid, &Default::default()).unwrap_err();
    println!("resonant input: {err}");
    Ok(())
}
