//! Which periodic motions can the sensors see?
//!
//! ```bash
//! cargo run --example observability
//! ```

use std::f64::consts::PI;

use minimax_bvp::observer::{observability_diagnostic, ObservationSystem};
use minimax_bvp::Grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(2.0 * PI, 2048)?;
    let oscillator = ObservationSystem::from_strs(
        &[&["0", "1"], &["-1", "0"]],
        &[&["1", "0"], &["0", "1"]],
        &[&["sin(t)/20", "cos(t)/20"], &["sin(t)/2", "cos(t)/2"]],
        2.0 * PI,
    );
    let d = observability_diagnostic(&oscillator, grid, &Default::default())?;
    println!("periodic kernel dimension {}, observed rank {}", d.kernel_dim, d.rank);
    for (k, psi) in d.kernel_basis.iter().enumerate() {
        let h = oscillator.h().eval(0.0)?.mul_vec(psi.first());
        println!(
            "  ψ{k}(0) = {:.6?}: ‖Hψ‖₂ = {:.3e}, Hψ(0) = {:.6?}",
            psi.first(),
            d.observed_norms[k],
            h
        );
    }
    println!(
        "principal energies {:.8?} (2π·(1/400 + 1/4) = {:.8})",
        d.principal_energies,
        2.0 * PI * (0.0025 + 0.25)
    );

    let stable = ObservationSystem::from_strs(
        &[&["-1", "0"], &["0", "-2"]],
        &[&["1"], &["0"]],
        &[&["0", "0"]],
        2.0 * PI,
    );
    let d = observability_diagnostic(&stable, grid, &Default::default())?;
    println!(
        "stable system: kernel {}, fully estimable {}",
        d.kernel_dim, d.fully_estimable
    );
    Ok(())
}
