//! Parse time-dependent entries and evaluate them.
//!
//! ```bash
//! cargo run --example expressions
//! ```

use std::f64::consts::PI;

use minimax_bvp::expr::Expr;
use minimax_bvp::time_matrix::{ExprMatrix, TimeMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e: Expr = "0.5 + 0.159155*t + 0.1*sin(t)".parse()?;
    for t in [0.0, PI / 2.0, PI] {
        println!("{e} at t = {t:.4}: {:.6}", e.eval(t)?);
    }

    // precedence: ^ is right-associative and binds tighter than unary minus
    for src in ["2^3^2", "-t^2", "exp(-t)*cos(2*t)"] {
        println!("{src:>18} at t = 1: {}", src.parse::<Expr>()?.eval(1.0)?);
    }

    let h = ExprMatrix::from_strs(&[&["sin(t)/20", "cos(t)/20"], &["sin(t)/2", "cos(t)/2"]]);
    println!("H(π/2) = {:?}", h.eval(PI / 2.0)?);

    match "sin(t".parse::<Expr>() {
        Ok(_) => unreachable!(),
        Err(err) => println!("malformed input: {err}"),
    }
    Ok(())
}
