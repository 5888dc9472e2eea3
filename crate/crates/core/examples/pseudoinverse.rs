//! SVD, Moore-Penrose pseudoinverse, nullspace and minimum-norm solutions.
//!
//! ```bash
//! cargo run --example pseudoinverse
//! ```

use minimax_bvp::linalg::{nullspace_basis, pinv, solve_min_norm, svd, Mat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // rank 2: the third row is the sum of the first two
    let m = Mat::from_rows(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 1.0], &[1.0, 3.0, 1.0]]);
    let f = svd(&m)?;
    println!("singular values {:?}, rank {}", f.s, f.rank);

    let mp = pinv(&m, 1e-10)?;
    let checks = [
        ("M M⁺ M = M", (&(&(&m * &mp) * &m) - &m).max_abs()),
        ("M⁺ M M⁺ = M⁺", (&(&(&mp * &m) * &mp) - &mp).max_abs()),
        ("(M M⁺)ᵀ = M M⁺", (&(&m * &mp).transpose() - &(&m * &mp)).max_abs()),
        ("(M⁺ M)ᵀ = M⁺ M", (&(&mp * &m).transpose() - &(&mp * &m)).max_abs()),
    ];
    for (name, err) in checks {
        println!("{name:<18} error {err:.2e}");
    }

    let null = nullspace_basis(&m, 1e-10)?;
    println!("nullspace basis {:?}", null.column(0));

    // consistent right-hand side: exact minimum-norm solution
    let sol = solve_min_norm(&m, &[3.0, 2.0, 5.0], 1e-10)?;
    println!("x = {:?}, residual {:.2e}", sol.x, sol.residual);
    // inconsistent: least-squares residual reported
    let sol = solve_min_norm(&m, &[1.0, 1.0, 0.0], 1e-10)?;
    println!("x = {:?}, residual {:.4}", sol.x, sol.residual);
    Ok(())
}
