//! Decide whether a functional ℓ(x) = ∫(ℓ, x)dt admits a finite guaranteed
//! error, with the projector/Gramian test and the Fredholm oracle.
//!
//! ```bash
//! cargo run --example feasibility
//! ```

use std::f64::consts::PI;

use minimax_bvp::observer::{check_feasibility, fredholm_check, Functional, ObservationSystem, ObserverOptions};
use minimax_bvp::Grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = ObservationSystem::from_strs(
        &[&["1", "0"], &["1", "0"]],
        &[&["1", "0"], &["0", "1"]],
        &[&["1", "0"], &["0", "0"]],
        2.0 * PI,
    );
    let grid = Grid::new(2.0 * PI, 2048)?;
    let opts = ObserverOptions::default();

    for entries in [["sin(t)", "1"], ["sin(t)", "cos(t)"]] {
        let l = Functional::from_strs(&entries);
        let r = check_feasibility(&sys, &l, grid, &opts)?;
        let oracle = fredholm_check(&sys, &l, grid, &opts)?;
        println!("ℓ = ({}, {})", entries[0], entries[1]);
        println!("  P = {:?}", r.p);
        println!("  W = {:?}", r.w);
        println!("  h(ω) = {:.6?}, P h(ω) = {:.6?}", r.h_end, r.ph_end);
        println!(
            "  defect {:.6} vs threshold {:.1e}: feasible {}",
            r.defect, r.threshold, r.feasible
        );
        println!(
            "  Fredholm oracle: {} adjoint kernel element(s), inner products {:?}, feasible {}",
            oracle.kernel_dim, oracle.inner_products, oracle.feasible
        );
    }
    Ok(())
}
