//! Randomized observation systems with an analytically known periodic kernel.
//!
//! A case is a block-diagonal constant system `ẋ₀ = A₀x₀ + B₀f`, `y = H₀x₀`
//! seen through a periodic rotation `x = R(t)x₀` with
//! `R(t) = exp(θ(t)J)` in one coordinate plane and `θ = ε sin(t + φ)`:
//!
//! ```text
//! A = θ'J + R A₀ Rᵀ,   B = R B₀,   H = H₀ Rᵀ,   ℓ = R ℓ₀
//! ```
//!
//! The periodic kernel of `ẋ₀ = A₀x₀` comes from zero blocks (constants) and
//! rotation blocks with integer frequency. A functional is estimable with
//! finite error iff it is orthogonal to the kernel elements that `H` cannot
//! see; both are computed here without any ODE integration.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use minimax_bvp::observer::{Functional, ObservationSystem, ObserverOptions};
use minimax_bvp::time_matrix::FnMatrix;
use minimax_bvp::{Grid, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const OMEGA: f64 = 2.0 * PI;

/// Grid and rank tolerance shared by the randomized suites. RK4 at this step
/// leaves a monodromy defect near 1e-8 on the kernel, so the rank tolerance
/// sits well above it.
pub const STEPS: usize = 512;
pub const RANK_TOL: f64 = 1e-6;

pub fn grid() -> Grid {
    Grid::new(OMEGA, STEPS).unwrap()
}

pub fn options() -> ObserverOptions {
    ObserverOptions::with_rank_tol(RANK_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Want {
    Any,
    Feasible,
    Infeasible,
    /// Feasible with an observed, nonzero estimator.
    Informative,
}

#[derive(Debug, Clone, Copy)]
enum Block {
    Zero,
    Decay(f64),
    Grow(f64),
    Rotation(f64),
}

impl Block {
    fn size(self) -> usize {
        match self {
            Block::Rotation(_) => 2,
            _ => 1,
        }
    }
}

/// A trigonometric polynomial `a₀ + Σₖ (aₖ cos kt + bₖ sin kt)`, `k ≤ 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Trig {
    pub c: [f64; 5],
}

impl Trig {
    pub fn eval(&self, t: f64) -> f64 {
        let c = &self.c;
        c[0] + c[1] * t.cos() + c[2] * t.sin() + c[3] * (2.0 * t).cos() + c[4] * (2.0 * t).sin()
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }
}

pub struct Case {
    pub seed: u64,
    pub sys: ObservationSystem,
    pub l: Functional,
    pub n: usize,
    /// Dimension of the periodic kernel of `ẋ = A x`.
    pub kernel_dim: usize,
    /// Dimension of the part of that kernel invisible to `H`.
    pub blind_dim: usize,
    /// Dimension of the periodic adjoint solutions invisible to `Bᵀ`.
    pub input_blind_dim: usize,
    pub feasible: bool,
    pub description: String,
    blocks: Vec<Block>,
    rotation: Rotation,
    l0: Vec<Trig>,
    h0: Mat,
    b0: Mat,
}

impl std::fmt::Debug for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "case {} ({})", self.seed, self.description)
    }
}

#[derive(Debug, Clone, Copy)]
struct Rotation {
    plane: Option<(usize, usize)>,
    eps: f64,
    phase: f64,
}

impl Rotation {
    fn theta(&self, t: f64) -> (f64, f64) {
        (self.eps * (t + self.phase).sin(), self.eps * (t + self.phase).cos())
    }

    fn matrix(&self, n: usize, t: f64) -> Mat {
        let mut r = Mat::identity(n);
        if let Some((i, j)) = self.plane {
            let (th, _) = self.theta(t);
            r[(i, i)] = th.cos();
            r[(i, j)] = -th.sin();
            r[(j, i)] = th.sin();
            r[(j, j)] = th.cos();
        }
        r
    }

    /// `θ'(t) J` for the rotation generator `J` of the plane.
    fn generator(&self, n: usize, t: f64) -> Mat {
        let mut g = Mat::zeros(n, n);
        if let Some((i, j)) = self.plane {
            let (_, dth) = self.theta(t);
            g[(i, j)] = -dth;
            g[(j, i)] = dth;
        }
        g
    }
}

fn magnitude(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let v = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

fn block_matrix(blocks: &[Block], n: usize) -> Mat {
    let mut a = Mat::zeros(n, n);
    let mut i = 0;
    for b in blocks {
        match *b {
            Block::Zero => {}
            Block::Decay(c) => a[(i, i)] = -c,
            Block::Grow(c) => a[(i, i)] = c,
            Block::Rotation(k) => {
                a[(i, i + 1)] = k;
                a[(i + 1, i)] = -k;
            }
        }
        i += b.size();
    }
    a
}

/// Columns span the periodic solutions of `ẋ₀ = A₀x₀` at time `t`; they are
/// pointwise orthonormal, so their L2 Gram matrix is `ω·E`.
fn kernel_frame(blocks: &[Block], n: usize, t: f64) -> Vec<Vec<f64>> {
    let mut cols = Vec::new();
    let mut i = 0;
    for b in blocks {
        match *b {
            Block::Zero => {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                cols.push(v);
            }
            Block::Rotation(k) if k.fract() == 0.0 => {
                let (s, c) = (k * t).sin_cos();
                let mut v = vec![0.0; n];
                v[i] = c;
                v[i + 1] = -s;
                cols.push(v);
                let mut w = vec![0.0; n];
                w[i] = s;
                w[i + 1] = c;
                cols.push(w);
            }
            _ => {}
        }
        i += b.size();
    }
    cols
}

/// Orthonormal coefficient vectors `c` with `H₀ K₀(t) c ≡ 0`.
fn blind_combinations(blocks: &[Block], h0: &Mat, n: usize) -> Vec<Vec<f64>> {
    let k = kernel_frame(blocks, n, 0.0).len();
    if k == 0 {
        return Vec::new();
    }
    let m = h0.rows();
    let samples: Vec<f64> = (0..12).map(|j| 0.37 * j as f64 + 0.1).collect();
    let mut stacked = nalgebra::DMatrix::<f64>::zeros(samples.len() * m, k);
    for (s, &t) in samples.iter().enumerate() {
        let frame = kernel_frame(blocks, n, t);
        for (col, v) in frame.iter().enumerate() {
            let hv = h0.mul_vec(v);
            for r in 0..m {
                stacked[(s * m + r, col)] = hv[r];
            }
        }
    }
    let svd = (stacked.transpose() * &stacked).symmetric_eigen();
    (0..k)
        .filter(|&j| svd.eigenvalues[j].abs() < 1e-12)
        .map(|j| svd.eigenvectors.column(j).iter().copied().collect())
        .collect()
}

/// `∫ ℓ₀ · K₀ c dt` by the periodic trapezoid rule, exact for these
/// trigonometric degrees.
fn blind_moment(blocks: &[Block], l0: &[Trig], c: &[f64], n: usize) -> f64 {
    let samples = 256;
    let h = OMEGA / samples as f64;
    (0..samples)
        .map(|s| {
            let t = s as f64 * h;
            let frame = kernel_frame(blocks, n, t);
            (0..n)
                .map(|i| {
                    let k: f64 = frame.iter().zip(c).map(|(v, ci)| v[i] * ci).sum();
                    l0[i].eval(t) * k
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        * h
}

/// Adds `k · K₀ c` to `ℓ₀`. Kernel frames are trigonometric of degree ≤ 2,
/// so the result stays in [`Trig`].
fn add_kernel_element(blocks: &[Block], l0: &mut [Trig], c: &[f64], k: f64) {
    let mut col = 0;
    let mut i = 0;
    for b in blocks {
        match *b {
            Block::Zero => {
                l0[i].c[0] += k * c[col];
                col += 1;
            }
            Block::Rotation(freq) if freq.fract() == 0.0 => {
                let (cos_i, sin_i) = if freq == 1.0 { (1, 2) } else { (3, 4) };
                let (a, b2) = (c[col], c[col + 1]);
                // a (cos, −sin) + b (sin, cos)
                l0[i].c[cos_i] += k * a;
                l0[i].c[sin_i] += k * b2;
                l0[i + 1].c[sin_i] -= k * a;
                l0[i + 1].c[cos_i] += k * b2;
                col += 2;
            }
            _ => {}
        }
        i += b.size();
    }
}

pub fn random_case(seed: u64, want: Want) -> Case {
    let mut attempt = 0u64;
    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        if let Some(case) = try_case(seed, &mut rng, want) {
            return case;
        }
        attempt += 1;
    }
}

fn try_case(seed: u64, rng: &mut ChaCha8Rng, want: Want) -> Option<Case> {
    let n = rng.gen_range(1..=3usize);
    let mut blocks = Vec::new();
    let mut used = 0;
    while used < n {
        let b = if n - used >= 2 && rng.gen_bool(0.45) {
            Block::Rotation(*[1.0, 2.0, 1.5].get(rng.gen_range(0..3)).unwrap())
        } else {
            match rng.gen_range(0..3) {
                0 => Block::Zero,
                1 => Block::Decay(rng.gen_range(0.3..0.8)),
                _ => Block::Grow(rng.gen_range(0.3..0.8)),
            }
        };
        used += b.size();
        blocks.push(b);
    }

    let m = rng.gen_range(1..=2usize);
    let r = rng.gen_range(1..=2usize);
    let mut h0 = Mat::zeros(m, n);
    let mut hidden = vec![false; n];
    let mut i = 0;
    for b in &blocks {
        let hide = matches!(b, Block::Zero | Block::Rotation(_)) && rng.gen_bool(0.5);
        hidden[i..i + b.size()].fill(hide);
        i += b.size();
    }
    for row in 0..m {
        for col in 0..n {
            if !hidden[col] && rng.gen_bool(0.8) {
                h0[(row, col)] = magnitude(rng, 0.3, 1.0);
            }
        }
    }
    let mut b0 = Mat::zeros(n, r);
    for row in 0..n {
        for col in 0..r {
            if rng.gen_bool(0.75) {
                b0[(row, col)] = magnitude(rng, 0.3, 1.0);
            }
        }
    }
    let mut l0: Vec<Trig> = (0..n)
        .map(|_| {
            let mut t = Trig::default();
            for c in t.c.iter_mut() {
                if rng.gen_bool(0.6) {
                    *c = magnitude(rng, 0.5, 1.5);
                }
            }
            t
        })
        .collect();
    let rotation = Rotation {
        plane: if n >= 2 {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            Some((i.min(j), i.max(j)))
        } else {
            None
        },
        eps: rng.gen_range(0.2..0.8),
        phase: rng.gen_range(0.0..OMEGA),
    };

    let kernel_dim = kernel_frame(&blocks, n, 0.0).len();
    let blind = blind_combinations(&blocks, &h0, n);
    // `−A₀ᵀ` has the same periodic frame as `A₀`, and `Bᵀ R = B₀ᵀ`
    let input_blind = blind_combinations(&blocks, &b0.transpose(), n);
    match want {
        Want::Feasible | Want::Informative => {
            for c in &blind {
                let alpha = blind_moment(&blocks, &l0, c, n);
                add_kernel_element(&blocks, &mut l0, c, -alpha / OMEGA);
            }
        }
        Want::Infeasible => {
            let c = blind.first()?;
            let alpha = blind_moment(&blocks, &l0, c, n);
            let target = magnitude(rng, 0.5, 1.5);
            add_kernel_element(&blocks, &mut l0, c, target - alpha / OMEGA);
        }
        Want::Any => {}
    }
    for v in l0.iter_mut().flat_map(|t| t.c.iter_mut()) {
        if v.abs() < 1e-14 {
            *v = 0.0;
        }
    }
    if l0.iter().all(Trig::is_zero) {
        return None;
    }
    let feasible = blind.iter().all(|c| blind_moment(&blocks, &l0, c, n).abs() < 1e-9);
    if want == Want::Informative && (h0.max_abs() == 0.0 || b0.max_abs() == 0.0) {
        return None;
    }
    debug_assert!(match want {
        Want::Feasible | Want::Informative => feasible,
        Want::Infeasible => !feasible,
        Want::Any => true,
    });

    let a0 = block_matrix(&blocks, n);
    let sys = {
        let (a0, rot) = (a0.clone(), rotation);
        let a = FnMatrix::new(n, n, move |t| {
            let rt = rot.matrix(n, t);
            let mut a = &(&rt * &a0) * &rt.transpose();
            a.axpy(1.0, &rot.generator(n, t));
            a
        });
        let b0c = b0.clone();
        let b = FnMatrix::new(n, r, move |t| &rot.matrix(n, t) * &b0c);
        let h0c = h0.clone();
        let h = FnMatrix::new(m, n, move |t| &h0c * &rot.matrix(n, t).transpose());
        ObservationSystem::new(Arc::new(a), Arc::new(b), Arc::new(h), OMEGA).unwrap()
    };
    let l = {
        let l0 = l0.clone();
        let rot = rotation;
        Functional::new(Arc::new(FnMatrix::new(n, 1, move |t| {
            let v: Vec<f64> = l0.iter().map(|p| p.eval(t)).collect();
            Mat::column_vector(&rot.matrix(n, t).mul_vec(&v))
        })))
        .unwrap()
    };
    Some(Case {
        seed,
        sys,
        l,
        n,
        kernel_dim,
        blind_dim: blind.len(),
        input_blind_dim: input_blind.len(),
        feasible,
        description: format!(
            "n={n} m={m} r={r} blocks={blocks:?} kernel={kernel_dim} blind={} input_blind={}",
            blind.len(),
            input_blind.len()
        ),
        blocks,
        rotation,
        l0,
        h0,
        b0,
    })
}

impl Case {
    /// `ℓ₀` coefficients, for building closed-form comparisons.
    pub fn functional_coefficients(&self) -> &[Trig] {
        &self.l0
    }

    /// The periodic motions invisible to `H`, evaluated at `t`.
    pub fn blind_kernel_at(&self, t: f64) -> Vec<Vec<f64>> {
        self.frame_at(&blind_combinations(&self.blocks, &self.h0, self.n), t)
    }

    /// Periodic adjoint solutions invisible to `Bᵀ`, evaluated at `t`.
    pub fn input_blind_kernel_at(&self, t: f64) -> Vec<Vec<f64>> {
        self.frame_at(&blind_combinations(&self.blocks, &self.b0.transpose(), self.n), t)
    }

    fn frame_at(&self, combos: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
        let frame = kernel_frame(&self.blocks, self.n, t);
        let rt = self.rotation.matrix(self.n, t);
        combos
            .iter()
            .map(|c| {
                let v: Vec<f64> = (0..self.n)
                    .map(|i| frame.iter().zip(c).map(|(f, ci)| f[i] * ci).sum())
                    .collect();
                rt.mul_vec(&v)
            })
            .collect()
    }
}

pub fn worked_example() -> ObservationSystem {
    ObservationSystem::from_strs(
        &[&["1", "0"], &["1", "0"]],
        &[&["1", "0"], &["0", "1"]],
        &[&["1", "0"], &["0", "0"]],
        OMEGA,
    )
}

/// Harmonic oscillator whose periodic kernel `{(cos, −sin), (sin, cos)}` is
/// seen by `H` only along `(sin, cos)`.
pub fn oscillator() -> ObservationSystem {
    ObservationSystem::from_strs(
        &[&["0", "1"], &["-1", "0"]],
        &[&["1", "0"], &["0", "1"]],
        &[&["sin(t)/20", "cos(t)/20"], &["sin(t)/2", "cos(t)/2"]],
        OMEGA,
    )
}
