//! Monte-Carlo check of the guaranteed bound `σ(û) ≤ σ(u)`.
//!
//! For an estimator `u` of `ℓ(x)` built from `∫(u, y)dt`, an adversary picks
//! `f` with `‖f‖₂ ≤ 1`, a periodic-kernel component of `x` (unconstrained),
//! and noise `η = ξ g` with `‖g‖₂ ≤ 1` and `ξ = ±1` equiprobable. The mean
//! over `ξ` is then exact: `d² + n²` with `d = ℓ(x) − ∫(u, Hx)` and
//! `n = ∫(u, g)`.
//!
//! The sample mixes random adversaries with the extremal ones of `û` and of
//! the perturbed estimator `(1 + ε)û`, so the worst case of the perturbed
//! estimator is attained on the sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;

use super::operators::{NegTranspose, PaddedForcing, Product};
use super::{solve_estimator, Estimate, Functional, ObservationSystem, ObserverOptions};
use crate::bvp::{solve_periodic, PeriodicLinearSystem};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::ode::{Grid, VectorTrajectory};
use crate::time_matrix::PiecewiseLinear;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Adversaries per case, extremal ones included.
    pub samples: usize,
    pub seed: u64,
    /// `ε` in the perturbed estimator `(1 + ε)û`.
    pub perturbation: f64,
    /// Pass iff every mean-square error is `≤ (1 + slack)σ̂ + abs_slack`.
    pub slack: f64,
    pub abs_slack: f64,
    /// Upper bound of `‖Σ c_k ψ_k‖₂` for random kernel components.
    pub kernel_amplitude: f64,
    /// Highest harmonic in random `f` and `g`.
    pub harmonics: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            samples: 200,
            seed: 0,
            perturbation: 0.1,
            slack: 0.05,
            abs_slack: 1e-6,
            kernel_amplitude: 1.0,
            harmonics: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub sigma_hat: f64,
    /// `σ((1 + ε)û)` in closed form; infinite when the perturbed estimator
    /// sees the periodic kernel.
    pub sigma_perturbed: f64,
    pub mse_hat: Vec<f64>,
    pub mse_perturbed: Vec<f64>,
    pub mean_hat: f64,
    pub worst_hat: f64,
    pub worst_perturbed: f64,
    pub bound: f64,
    pub bound_holds: bool,
    pub perturbed_worse: bool,
}

struct Adversary {
    /// Input on the refined grid.
    f: Vec<Vec<f64>>,
    g: VectorTrajectory,
    kernel: Vec<f64>,
}

struct Setup<'a> {
    sys: &'a ObservationSystem,
    grid: Grid,
    fine: Grid,
    opts: &'a ObserverOptions,
    u_hat: VectorTrajectory,
    l: VectorTrajectory,
    h: Vec<Mat>,
    kernel: Vec<VectorTrajectory>,
    /// Orthonormal `Bᵀψ*` for periodic adjoint solutions `ψ*` on the
    /// refined grid; admissible inputs must avoid them.
    resonant: Vec<VectorTrajectory>,
    scale: f64,
}

pub fn guaranteed_bound_check(
    sys: &ObservationSystem,
    l: &Functional,
    grid: Grid,
    opts: &ObserverOptions,
    bopts: &BoundOptions,
) -> Result<BoundReport> {
    let fine = grid.refined();
    let est = match solve_estimator(sys, l, fine, opts)? {
        Estimate::Finite(e) => e,
        Estimate::Infinite { .. } => {
            return Err(Error::Invalid(
                "functional is not estimable: minimax error is infinite".into(),
            ))
        }
    };
    let scale = 1.0 + bopts.perturbation;
    let b_fine = sample_matrix(sys.b(), fine)?;

    let adjoint = NegTranspose(sys.a());
    let adj_kernel = solve_periodic(
        &PeriodicLinearSystem::homogeneous(&adjoint, sys.omega()),
        fine,
        &opts.bvp(),
    )?
    .kernel_basis;
    let resonant = orthonormalize(adj_kernel.iter().map(|psi| psi.map(|i, v| b_fine[i].tr_mul_vec(v))));

    let kernel = orthonormalize(
        solve_periodic(
            &PeriodicLinearSystem::homogeneous(sys.a(), sys.omega()),
            grid,
            &opts.bvp(),
        )?
        .kernel_basis
        .into_iter(),
    );

    let setup = Setup {
        sys,
        grid,
        fine,
        opts,
        u_hat: est.u_hat.coarsen()?,
        l: VectorTrajectory::sample(l.as_time_matrix(), grid)?,
        h: sample_matrix(sys.h(), grid)?,
        kernel,
        resonant,
        scale,
    };

    // z of the perturbed estimator: (1 + ε)ẑ + w with ẇ = −Aᵀw + εℓ
    let eps_l = PaddedForcing {
        top: l.as_time_matrix(),
        scale: bopts.perturbation,
        pad: 0,
    };
    let w = solve_periodic(
        &PeriodicLinearSystem::forced(&adjoint, &eps_l, sys.omega()),
        fine,
        &opts.bvp(),
    )?;
    let u_norm2 = setup.u_hat.inner(&setup.u_hat);
    let btz_hat = setup.project(&est.z_hat.map(|i, v| b_fine[i].tr_mul_vec(v)));
    let z_perturbed = w
        .solvable
        .then(|| est.z_hat.scaled(scale).add_scaled(1.0, &w.particular));
    let btz_perturbed = z_perturbed.map(|z| setup.project(&z.map(|i, v| b_fine[i].tr_mul_vec(v))));
    let sigma_perturbed = match &btz_perturbed {
        Some(v) => v.inner(v) + scale * scale * u_norm2,
        None => f64::INFINITY,
    };

    let g_hat = normalized(&setup.u_hat);
    let mut adversaries = vec![Adversary {
        f: normalized(&btz_hat).values,
        g: g_hat.clone(),
        kernel: vec![0.0; setup.kernel.len()],
    }];
    match &btz_perturbed {
        Some(v) => adversaries.push(Adversary {
            f: normalized(v).values,
            g: g_hat,
            kernel: vec![0.0; setup.kernel.len()],
        }),
        None => adversaries.push(setup.kernel_adversary(est.sigma_hat)),
    }
    let extremal = adversaries.len();

    let random: Vec<Adversary> = (extremal..bopts.samples.max(extremal))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(bopts.seed);
            rng.set_stream(i as u64);
            setup.random_adversary(&mut rng, bopts)
        })
        .collect();
    adversaries.extend(random);

    let errors = adversaries
        .par_iter()
        .map(|a| setup.mean_square_errors(a))
        .collect::<Result<Vec<_>>>()?;
    let (mse_hat, mse_perturbed): (Vec<f64>, Vec<f64>) = errors.into_iter().unzip();
    let worst = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let bound = (1.0 + bopts.slack) * est.sigma_hat + bopts.abs_slack;
    let worst_hat = worst(&mse_hat);
    let worst_perturbed = worst(&mse_perturbed);
    Ok(BoundReport {
        sigma_hat: est.sigma_hat,
        sigma_perturbed,
        mean_hat: mse_hat.iter().sum::<f64>() / mse_hat.len() as f64,
        bound_holds: worst_hat <= bound,
        perturbed_worse: worst_perturbed > worst_hat,
        worst_hat,
        worst_perturbed,
        bound,
        mse_hat,
        mse_perturbed,
    })
}

impl Setup<'_> {
    fn project(&self, v: &VectorTrajectory) -> VectorTrajectory {
        let mut out = v.clone();
        for q in &self.resonant {
            out = out.add_scaled(-out.inner(q), q);
        }
        out
    }

    /// Kernel-only adversary against the perturbed estimator, sized so its
    /// error alone is well above `σ̂`.
    fn kernel_adversary(&self, sigma_hat: f64) -> Adversary {
        let kappa: Vec<f64> = self
            .kernel
            .iter()
            .map(|psi| {
                let hpsi = psi.map(|i, v| self.h[i].mul_vec(v));
                self.l.inner(psi) - self.scale * self.u_hat.inner(&hpsi)
            })
            .collect();
        let norm = crate::linalg::norm2(&kappa);
        let amp = if norm > 0.0 {
            2.0 * (sigma_hat + 1.0).sqrt() / norm
        } else {
            0.0
        };
        Adversary {
            f: vec![vec![0.0; self.sys.r()]; self.fine.len()],
            g: VectorTrajectory::zeros(self.grid, self.sys.m()),
            kernel: kappa.iter().map(|k| amp * k / norm.max(f64::MIN_POSITIVE)).collect(),
        }
    }

    fn random_adversary(&self, rng: &mut ChaCha8Rng, bopts: &BoundOptions) -> Adversary {
        let f = self.project(&trig_polynomial(rng, self.fine, self.sys.r(), bopts.harmonics));
        let f = normalized(&f).scaled(rng.gen::<f64>());
        let g = normalized(&trig_polynomial(rng, self.grid, self.sys.m(), bopts.harmonics)).scaled(rng.gen::<f64>());
        let mut kernel: Vec<f64> = (0..self.kernel.len()).map(|_| StandardNormal.sample(rng)).collect();
        let kn = crate::linalg::norm2(&kernel);
        if kn > 0.0 {
            let r = bopts.kernel_amplitude * rng.gen::<f64>() / kn;
            kernel.iter_mut().for_each(|c| *c *= r);
        }
        Adversary { f: f.values, g, kernel }
    }

    /// Mean-square errors of `û` and of `(1 + ε)û` against one adversary.
    fn mean_square_errors(&self, adv: &Adversary) -> Result<(f64, f64)> {
        let f = PiecewiseLinear::new(self.fine.nodes().collect(), adv.f.clone())?;
        let bf = Product { m: self.sys.b(), v: &f };
        let sol = solve_periodic(
            &PeriodicLinearSystem::forced(self.sys.a(), &bf, self.sys.omega()),
            self.grid,
            &self.opts.bvp(),
        )?;
        if !sol.solvable {
            return Err(Error::Incompatible {
                residual: sol.compatibility_residual,
            });
        }
        let mut x = sol.particular;
        for (c, psi) in adv.kernel.iter().zip(&self.kernel) {
            x = x.add_scaled(*c, psi);
        }
        let hx = x.map(|i, v| self.h[i].mul_vec(v));
        let lx = self.l.inner(&x);
        let ux = self.u_hat.inner(&hx);
        let ug = self.u_hat.inner(&adv.g);
        let d_hat = lx - ux;
        let d_pert = lx - self.scale * ux;
        Ok((d_hat * d_hat + ug * ug, d_pert * d_pert + (self.scale * ug).powi(2)))
    }
}

fn sample_matrix(m: &dyn crate::time_matrix::TimeMatrix, grid: Grid) -> Result<Vec<Mat>> {
    grid.nodes().map(|t| m.eval(t)).collect()
}

fn normalized(v: &VectorTrajectory) -> VectorTrajectory {
    let n = v.l2_norm();
    if n > 1e-300 {
        v.scaled(1.0 / n)
    } else {
        v.scaled(0.0)
    }
}

/// Gram-Schmidt in `L₂(0, ω)`; near-dependent members are dropped.
fn orthonormalize(vs: impl Iterator<Item = VectorTrajectory>) -> Vec<VectorTrajectory> {
    let mut out: Vec<VectorTrajectory> = Vec::new();
    for v in vs {
        let scale = v.l2_norm();
        let mut w = v;
        for _ in 0..2 {
            for q in &out {
                w = w.add_scaled(-w.inner(q), q);
            }
        }
        let n = w.l2_norm();
        if n > 1e-8 * scale.max(1e-300) {
            out.push(w.scaled(1.0 / n));
        }
    }
    out
}

fn trig_polynomial(rng: &mut ChaCha8Rng, grid: Grid, dim: usize, harmonics: usize) -> VectorTrajectory {
    let nu = 2.0 * PI / grid.omega();
    let coef: Vec<Vec<(f64, f64)>> = (0..dim)
        .map(|_| {
            (0..=harmonics)
                .map(|k| {
                    let s = 1.0 / (1.0 + k as f64);
                    let a: f64 = StandardNormal.sample(rng);
                    let b: f64 = StandardNormal.sample(rng);
                    (s * a, s * b)
                })
                .collect()
        })
        .collect();
    VectorTrajectory {
        grid,
        values: grid
            .nodes()
            .map(|t| {
                coef.iter()
                    .map(|c| {
                        c.iter()
                            .enumerate()
                            .map(|(k, (a, b))| a * (k as f64 * nu * t).cos() + b * (k as f64 * nu * t).sin())
                            .sum()
                    })
                    .collect()
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(sys: &ObservationSystem, l: &Functional, grid: Grid) -> BoundReport {
        let opts = BoundOptions {
            samples: 40,
            ..Default::default()
        };
        let r = guaranteed_bound_check(sys, l, grid, &Default::default(), &opts).unwrap();
        assert!(r.bound_holds, "{} > {}", r.worst_hat, r.bound);
        assert!(r.perturbed_worse);
        // the extremal adversary of û attains σ̂
        assert!((r.mse_hat[0] - r.sigma_hat).abs() < 1e-4 * r.sigma_hat.max(1.0));
        assert_eq!(r.mse_hat.len(), 40);
        r
    }

    #[test]
    fn scalar_stable_system() {
        let sys = ObservationSystem::from_strs(&[&["-1"]], &[&["1"]], &[&["1"]], 1.0);
        let l = Functional::from_strs(&["1"]);
        let r = check(&sys, &l, Grid::new(1.0, 256).unwrap());
        assert!(r.sigma_perturbed.is_finite() && r.sigma_perturbed > r.sigma_hat);
        assert!((r.mse_perturbed[1] - r.sigma_perturbed).abs() < 1e-4 * r.sigma_perturbed);
    }

    #[test]
    fn observed_kernel_makes_perturbation_unbounded() {
        let sys = ObservationSystem::from_strs(
            &[&["0", "1"], &["-1", "0"]],
            &[&["1", "0"], &["0", "1"]],
            &[&["sin(t)/20", "cos(t)/20"], &["sin(t)/2", "cos(t)/2"]],
            2.0 * PI,
        );
        let l = Functional::from_strs(&["sin(t)", "cos(t)"]);
        let r = check(&sys, &l, Grid::new(2.0 * PI, 512).unwrap());
        assert!(r.sigma_perturbed.is_infinite());
    }

    #[test]
    fn infeasible_functional_is_rejected() {
        let sys = ObservationSystem::from_strs(
            &[&["1", "0"], &["1", "0"]],
            &[&["1", "0"], &["0", "1"]],
            &[&["1", "0"], &["0", "0"]],
            2.0 * PI,
        );
        let l1 = Functional::from_strs(&["sin(t)", "1"]);
        let grid = Grid::new(2.0 * PI, 128).unwrap();
        assert!(guaranteed_bound_check(&sys, &l1, grid, &Default::default(), &Default::default()).is_err());
    }
}
