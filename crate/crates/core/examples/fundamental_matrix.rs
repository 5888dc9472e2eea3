//! Propagate the fundamental matrix of ẋ = A x and of the adjoint ż = −Aᵀz.
//!
//! ```bash
//! cargo run --example fundamental_matrix
//! ```

use minimax_bvp::linalg::Mat;
use minimax_bvp::observer::operators::NegTranspose;
use minimax_bvp::ode::propagate_fundamental;
use minimax_bvp::time_matrix::ExprMatrix;
use minimax_bvp::Grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = ExprMatrix::from_strs(&[&["1", "0"], &["1", "0"]]);
    for t in [1.0, 2.0 * std::f64::consts::PI] {
        let grid = Grid::new(t, 2048)?;
        let f = propagate_fundamental(&a, grid)?;
        let g = propagate_fundamental(&NegTranspose(&a), grid)?;
        let (e, ei) = (t.exp(), (-t).exp());
        let f_exact = Mat::from_rows(&[&[e, 0.0], &[e - 1.0, 1.0]]);
        let g_exact = Mat::from_rows(&[&[ei, ei - 1.0], &[0.0, 1.0]]);
        println!("t = {t:.4}");
        println!(
            "  F(t) = {:?}  max error {:.2e}",
            f.last(),
            (f.last() - &f_exact).max_abs()
        );
        println!(
            "  G(t) = {:?}  max error {:.2e}",
            g.last(),
            (g.last() - &g_exact).max_abs()
        );
    }

    // RK4 converges at fourth order: halving the step cuts the error ~16x
    let rot = ExprMatrix::from_strs(&[&["0", "1"], &["-1", "0"]]);
    let mut previous = None;
    for steps in [8, 16, 32, 64] {
        let f = propagate_fundamental(&rot, Grid::new(3.0, steps)?)?;
        let err = (f.last()[(0, 0)] - 3.0f64.cos()).abs();
        match previous {
            Some(p) => println!("N = {steps:>3}: error {err:.3e}, ratio {:.1}", p / err),
            None => println!("N = {steps:>3}: error {err:.3e}"),
        }
        previous = Some(err);
    }
    Ok(())
}
