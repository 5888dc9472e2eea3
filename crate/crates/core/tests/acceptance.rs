//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{random_case, worked_example, Want, OMEGA};
use minimax_bvp::config::{Experiment, ExperimentConfig, Observation};
use minimax_bvp::linalg::{pinv, svd, Mat};
use minimax_bvp::observer::operators::NegTranspose;
use minimax_bvp::observer::{
    check_feasibility, feasibility_oracle, guaranteed_bound_check, observability_diagnostic, solve_estimator,
    solve_reconstruction, BoundOptions, Functional, ObservationSystem, ObserverOptions,
};
use minimax_bvp::ode::{propagate_affine, propagate_fundamental, simpson};
use minimax_bvp::time_matrix::{ConstMatrix, ExprMatrix};
use minimax_bvp::{Grid, VectorTrajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const RUNTIME_LIMIT: Duration = Duration::from_secs(5);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

/// Collects named sub-checks so a criterion reports every failing part.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    passed: usize,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(what());
        }
    }

    fn close(&mut self, name: &str, got: &Mat, want: &Mat, tol: f64) {
        let err = (got - want).max_abs();
        self.check(err <= tol, || format!("{name}: max error {err:.3e} > {tol:.0e}"));
    }

    fn finish(self, summary: String) -> Outcome {
        if self.failed.is_empty() {
            Outcome::new(true, format!("{} checks; {summary}", self.passed))
        } else {
            Outcome::new(false, format!("{}; {summary}", self.failed.join("; ")))
        }
    }
}

fn builtin(name: &str) -> Experiment {
    ExperimentConfig::builtin(name).unwrap().build(None).unwrap()
}

fn worked_example_scenario() -> Outcome {
    let start = Instant::now();
    let sys = worked_example();
    let grid = builtin("singular-l1").grid;
    assert_eq!(grid.steps(), 2048);
    let opts = ObserverOptions::default();
    let mut c = Checks::default();

    for t in [0.0, 1.0, OMEGA] {
        let (f, g) = if t == 0.0 {
            let g = Grid::new(1.0, 4).unwrap();
            (
                propagate_fundamental(sys.a(), g).unwrap().values[0].clone(),
                propagate_fundamental(&NegTranspose(sys.a()), g).unwrap().values[0].clone(),
            )
        } else {
            let g = Grid::new(t, 2048).unwrap();
            (
                propagate_fundamental(sys.a(), g).unwrap().last().clone(),
                propagate_fundamental(&NegTranspose(sys.a()), g).unwrap().last().clone(),
            )
        };
        let (e, ei) = (t.exp(), (-t).exp());
        c.close(
            &format!("F({t:.3})"),
            &f,
            &Mat::from_rows(&[&[e, 0.0], &[e - 1.0, 1.0]]),
            1e-7 * e.max(1.0),
        );
        c.close(
            &format!("G({t:.3})"),
            &g,
            &Mat::from_rows(&[&[ei, ei - 1.0], &[0.0, 1.0]]),
            1e-7,
        );
    }

    let l1 = Functional::from_strs(&["sin(t)", "1"]);
    let r1 = check_feasibility(&sys, &l1, grid, &opts).unwrap();
    c.close("P", &r1.p, &Mat::from_rows(&[&[0.0, 0.0], &[0.0, 1.0]]), 1e-8);
    c.close("W", &r1.w, &Mat::zeros(2, 2), 1e-8);
    let h1 = [0.5 - (-OMEGA).exp() / 2.0 - OMEGA, OMEGA];
    c.close("h1(2π)", &Mat::column_vector(&r1.h_end), &Mat::column_vector(&h1), 1e-6);
    c.check(!r1.feasible, || "l1 judged feasible".into());
    let s1 = solve_estimator(&sys, &l1, grid, &opts).unwrap().sigma_hat();
    c.check(s1.is_infinite(), || format!("sigma_hat(l1) = {s1}, expected inf"));

    let l2 = Functional::from_strs(&["sin(t)", "cos(t)"]);
    let r2 = check_feasibility(&sys, &l2, grid, &opts).unwrap();
    c.close("h2(2π)", &Mat::column_vector(&r2.h_end), &Mat::zeros(2, 1), 1e-6);
    c.check(r2.feasible, || "l2 judged infeasible".into());
    let s2 = solve_estimator(&sys, &l2, grid, &opts).unwrap().sigma_hat();
    c.check(s2.is_finite() && s2 >= 0.0, || format!("sigma_hat(l2) = {s2}"));
    c.check((s2 - PI).abs() <= 1e-6, || format!("sigma_hat(l2) = {s2}, baseline π"));

    let elapsed = start.elapsed();
    c.check(elapsed <= RUNTIME_LIMIT, || format!("runtime {elapsed:?}"));
    c.finish(format!(
        "defect(l1) = {:.6}, sigma_hat(l2) = {s2:.10}, {elapsed:.2?}",
        r1.defect
    ))
}

fn example_one_reconstruction() -> Outcome {
    let start = Instant::now();
    let exp = builtin("oscillator");
    assert_eq!(exp.grid.steps(), 2048);
    let y = match &exp.observation {
        Some(Observation::Signal(y)) => y.clone(),
        _ => unreachable!("oscillator carries expression observations"),
    };
    let est = solve_reconstruction(&exp.system, &*y, exp.grid, &exp.options).unwrap();
    let x = VectorTrajectory::sample(&**exp.truth.as_ref().unwrap(), exp.grid).unwrap();
    let err = x.add_scaled(-1.0, &est.x_hat).l2_norm();
    let elapsed = start.elapsed();
    let in_range = (1.83..=1.90).contains(&err);
    Outcome::new(
        in_range && elapsed <= RUNTIME_LIMIT,
        format!("‖x − x̂‖₂ = {err:.5}, accepted [1.83, 1.90], {elapsed:.2?}"),
    )
}

fn observability() -> Outcome {
    let sys = common::oscillator();
    let grid = Grid::new(OMEGA, 2048).unwrap();
    let d = observability_diagnostic(&sys, grid, &ObserverOptions::default()).unwrap();
    let expected = OMEGA * (1.0 / 400.0 + 0.25);
    let blind = d.observed_norms.iter().copied().fold(f64::INFINITY, f64::min);
    let energy = d.principal_energies.first().copied().unwrap_or(0.0);
    let mut c = Checks::default();
    c.check(d.kernel_dim == 2, || format!("kernel dimension {}", d.kernel_dim));
    c.check(blind <= 1e-6, || format!("blind direction ‖Hψ‖₂ = {blind:.3e}"));
    c.check((energy - expected).abs() <= 1e-4, || {
        format!("observed energy {energy} vs {expected}")
    });
    // the observed direction is ±(sin, cos), so Hψ ≡ ±(1/20, 1/2)
    if let Some(psi) = d.kernel_basis.first() {
        let mut worst: f64 = 0.0;
        for (i, t) in grid.nodes().enumerate() {
            let hv = sys.h().eval(t).unwrap().mul_vec(&psi.values[i]);
            let s = hv[1].signum();
            worst = worst.max((s * hv[0] - 0.05).abs()).max((s * hv[1] - 0.5).abs());
        }
        c.check(worst <= 1e-6, || format!("Hψ departs from a constant by {worst:.3e}"));
    }
    c.finish(format!(
        "kernel dim {}, min ‖Hψ‖₂ = {blind:.2e}, ‖Hψ‖₂² = {energy:.8} (2π·(1/400 + 1/4) = {expected:.8})",
        d.kernel_dim
    ))
}

fn oracle_equivalence() -> Outcome {
    let (grid, opts) = (common::grid(), common::options());
    let results: Vec<(bool, bool, bool, String)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let case = random_case(1000 + seed, Want::Any);
            let primary = check_feasibility(&case.sys, &case.l, grid, &opts).unwrap().feasible;
            let oracle = feasibility_oracle(&case.sys, &case.l, grid, &opts).unwrap();
            (primary, oracle, case.feasible, format!("{case:?}"))
        })
        .collect();
    let disagreements: Vec<&String> = results.iter().filter(|r| r.0 != r.1).map(|r| &r.3).collect();
    let wrong = results.iter().filter(|r| r.0 != r.2).count();
    let feasible = results.iter().filter(|r| r.2).count();
    Outcome::new(
        disagreements.is_empty(),
        format!(
            "{} disagreements on 100 cases ({feasible} feasible, {} infeasible), {wrong} against the analytic verdict{}",
            disagreements.len(),
            100 - feasible,
            if disagreements.is_empty() {
                String::new()
            } else {
                format!(": {disagreements:?}")
            }
        ),
    )
}

fn estimator_uniqueness() -> Outcome {
    let (grid, opts) = (common::grid(), common::options());
    let mut c = Checks::default();
    let mut directions = 0;
    let mut worst_u: f64 = 0.0;
    let mut worst_sigma: f64 = 0.0;
    let mut seed = 2000;
    let mut cases = 0;
    while cases < 20 {
        seed += 1;
        let case = random_case(seed, Want::Feasible);
        // keep the suite about kernels: at most a few cases without one
        if case.blind_dim + case.input_blind_dim == 0 && cases % 4 != 0 {
            continue;
        }
        cases += 1;
        let est = solve_estimator(&case.sys, &case.l, grid, &opts).unwrap();
        let Some(e) = est.finite() else {
            c.check(false, || format!("{case:?}: infinite error"));
            continue;
        };
        let lv = VectorTrajectory::sample(case.l.as_time_matrix(), grid).unwrap();
        for k in &e.kernel_basis {
            directions += 1;
            for amplitude in [1.0, -10.0] {
                let p = e.p_hat.add_scaled(amplitude, &k.slice(case.n, case.n));
                let u = p.map(|i, v| case.sys.h().eval(grid.t(i)).unwrap().mul_vec(v));
                let du = u.add_scaled(-1.0, &e.u_hat).sup_norm();
                let ds = (lv.inner(&p) - e.sigma_hat).abs() / e.sigma_hat.max(f64::MIN_POSITIVE);
                worst_u = worst_u.max(du);
                worst_sigma = worst_sigma.max(ds);
                c.check(du <= 1e-6, || format!("{case:?}: û moved by {du:.3e}"));
                c.check(ds <= 1e-6, || format!("{case:?}: σ̂ moved by {ds:.3e} relative"));
            }
        }
    }
    c.check(directions > 0, || "no coupled-kernel direction exercised".into());
    c.finish(format!(
        "{directions} kernel directions over 20 cases, max Δû = {worst_u:.2e}, max relative Δσ̂ = {worst_sigma:.2e}"
    ))
}

fn guaranteed_bound() -> Outcome {
    let (grid, opts) = (common::grid(), common::options());
    let mut lines = Vec::new();
    let mut bound_failures = Vec::new();
    let mut worse = 0;
    for i in 0..10u64 {
        let case = random_case(3000 + i, Want::Informative);
        let bopts = BoundOptions {
            seed: i,
            ..BoundOptions::default()
        };
        let r = guaranteed_bound_check(&case.sys, &case.l, grid, &opts, &bopts).unwrap();
        if !r.bound_holds {
            bound_failures.push(format!("{case:?}: worst {} > bound {}", r.worst_hat, r.bound));
        }
        if r.perturbed_worse {
            worse += 1;
        }
        lines.push(format!(
            "σ̂ {:.4} worst {:.4} perturbed {:.4}",
            r.sigma_hat, r.worst_hat, r.worst_perturbed
        ));
    }
    let pass = bound_failures.is_empty() && worse >= 9;
    Outcome::new(
        pass,
        format!(
            "bound held in {}/10 cases, perturbed estimator worse in {worse}/10{}",
            10 - bound_failures.len(),
            if pass {
                String::new()
            } else {
                format!(": {bound_failures:?} {lines:?}")
            }
        ),
    )
}

fn exact_recovery() -> Outcome {
    // oscillator block plus a decaying state; H and Bᵀ see every periodic
    // motion, so the coupled kernel is trivial
    let sys = ObservationSystem::from_strs(
        &[&["0", "1", "0"], &["-1", "0", "0"], &["0", "0", "-0.5"]],
        &[&["0"], &["1"], &["1"]],
        &[&["1", "0", "1"]],
        OMEGA,
    );
    let grid = Grid::new(OMEGA, 2048).unwrap();
    let x = ExprMatrix::vector(&["2*cos(t) + sin(t)", "cos(t) - 2*sin(t)", "0"]).unwrap();
    let y = ExprMatrix::vector(&["2*cos(t) + sin(t)"]).unwrap();
    let est = solve_reconstruction(&sys, &y, grid, &ObserverOptions::default()).unwrap();
    let xv = VectorTrajectory::sample(&x, grid).unwrap();
    let rel = xv.add_scaled(-1.0, &est.x_hat).l2_norm() / xv.l2_norm();
    Outcome::new(
        rel <= 1e-5 && est.kernel_basis.is_empty(),
        format!(
            "relative L2 error {rel:.3e}, coupled kernel dimension {}",
            est.kernel_basis.len()
        ),
    )
}

fn numerical_kernel() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..20 {
        let rows = rng.gen_range(1..=6);
        let cols = rng.gen_range(1..=6);
        let rank = rng.gen_range(0..=rows.min(cols));
        let mut a = Mat::zeros(rows, cols);
        for _ in 0..rank {
            let u: Vec<f64> = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for i in 0..rows {
                for j in 0..cols {
                    a[(i, j)] += u[i] * v[j];
                }
            }
        }
        let ap = pinv(&a, 1e-10).unwrap();
        let scale = svd(&a).unwrap().s.first().copied().unwrap_or(0.0).max(1.0);
        let tol = 1e-10 * scale * scale;
        c.close(&format!("A A⁺ A (trial {trial})"), &(&(&a * &ap) * &a), &a, tol);
        c.close(
            &format!("A⁺ A A⁺ (trial {trial})"),
            &(&(&ap * &a) * &ap),
            &ap,
            tol * 1e4,
        );
        let aap = &a * &ap;
        c.close(&format!("(A A⁺)ᵀ (trial {trial})"), &aap.transpose(), &aap, tol);
        let apa = &ap * &a;
        c.close(&format!("(A⁺ A)ᵀ (trial {trial})"), &apa.transpose(), &apa, tol);
    }

    let grid = Grid::new(2.0, 8).unwrap();
    let cubic: Vec<f64> = grid.nodes().map(|t| 4.0 * t * t * t - 3.0 * t * t + t - 2.0).collect();
    let exact = 16.0 - 8.0 + 2.0 - 4.0;
    let q = simpson(&grid, &cubic);
    c.check((q - exact).abs() <= 1e-12, || {
        format!("Simpson on a cubic: {q} vs {exact}")
    });

    // ẋ = cos(t) x, x(0) = 1 has x(t) = exp(sin t)
    let m = ExprMatrix::from_strs(&[&["cos(t)"]]);
    let err = |steps| {
        let g = Grid::new(3.0, steps).unwrap();
        let x = propagate_affine(&m, None::<&ConstMatrix>, &[1.0], g).unwrap();
        (x.last()[0] - 3.0f64.sin().exp()).abs()
    };
    let ratios: Vec<f64> = [16, 32, 64].iter().map(|&n| err(n) / err(2 * n)).collect();
    c.check(ratios.iter().all(|&r| r >= 12.0), || {
        format!("RK4 halving ratios {ratios:?}")
    });
    c.finish(format!(
        "Penrose identities on 20 matrices, Simpson cubic error {:.1e}, RK4 halving ratios {:.1?}",
        (q - exact).abs(),
        ratios
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "worked example: fundamentals, projector, Gramian, verdicts, σ̂",
            worked_example_scenario,
        ),
        ("oscillator reconstruction error", example_one_reconstruction),
        ("observability diagnostics of the oscillator", observability),
        ("feasibility test agrees with the Fredholm oracle", oracle_equivalence),
        (
            "estimator is independent of the kernel representative",
            estimator_uniqueness,
        ),
        ("guaranteed bound and strict optimality", guaranteed_bound),
        ("exact recovery from noise-free data", exact_recovery),
        ("numerical kernels: Penrose, Simpson, RK4 order", numerical_kernel),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name} ({})", i + 1, out.detail);
        if !out.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
