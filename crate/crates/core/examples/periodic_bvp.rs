//! Periodic boundary value problems with a singular monodromy.
//!
//! ```bash
//! cargo run --example periodic_bvp
//! ```

use std::f64::consts::PI;

use minimax_bvp::bvp::{solve_periodic, BvpOptions, PeriodicLinearSystem};
use minimax_bvp::time_matrix::ExprMatrix;
use minimax_bvp::Grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let omega = 2.0 * PI;
    let grid = Grid::new(omega, 2048)?;
    let opts = BvpOptions::default();
    let rotation = ExprMatrix::from_strs(&[&["0", "-1"], &["1", "0"]]);

    let homogeneous = solve_periodic(&PeriodicLinearSystem::homogeneous(&rotation, omega), grid, &opts)?;
    println!("ẋ = Jx: {} periodic homogeneous solutions", homogeneous.kernel_dim());
    for (k, psi) in homogeneous.kernel_basis.iter().enumerate() {
        println!("  ψ{k}(0) = {:?}, ψ{k}(π/2) = {:.6?}", psi.first(), psi.values[512]);
    }

    for forcing in [["cos(2*t)", "0"], ["cos(t)", "sin(t)"]] {
        let g = ExprMatrix::vector(&forcing)?;
        let sol = solve_periodic(&PeriodicLinearSystem::forced(&rotation, &g, omega), grid, &opts)?;
        println!(
            "forcing ({}, {}): solvable {}, compatibility residual {:.3e}",
            forcing[0], forcing[1], sol.solvable, sol.compatibility_residual
        );
        if sol.solvable {
            let x = &sol.particular;
            println!("  x(0) = {:.6?}, x(ω) = {:.6?}", x.first(), x.last());
        }
    }

    let damped = ExprMatrix::from_strs(&[&["-1"]]);
    let g = ExprMatrix::vector(&["cos(t)"])?;
    let sol = solve_periodic(&PeriodicLinearSystem::forced(&damped, &g, omega), grid, &opts)?;
    println!(
        "ẋ = −x + cos t: x(0) = {:.10} (exact 1/2), no kernel: {}",
        sol.particular.first()[0],
        sol.kernel_basis.is_empty()
    );
    Ok(())
}
