//! Fixed-step RK4 propagation of linear matrix/vector ODEs on a uniform grid
//! over `[0, ω]`, and composite Simpson quadrature on the same nodes.

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};
use crate::time_matrix::TimeMatrix;

pub const DEFAULT_STEPS: usize = 2048;
const DIVERGENCE_LIMIT: f64 = 1e300;

/// Uniform grid `t_i = i ω / N`, `i = 0..=N`, with `N` even.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    omega: f64,
    steps: usize,
}

impl Grid {
    pub fn new(omega: f64, steps: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::Grid(format!("horizon must be positive and finite, got {omega}")));
        }
        if steps == 0 || !steps.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "step count must be even and positive, got {steps}"
            )));
        }
        Ok(Grid { omega, steps })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.omega / self.steps as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        if i == self.steps {
            self.omega
        } else {
            i as f64 * self.omega / self.steps as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|i| self.t(i))
    }

    /// The grid with twice as many steps; its even nodes coincide with `self`.
    pub fn refined(&self) -> Grid {
        Grid {
            omega: self.omega,
            steps: 2 * self.steps,
        }
    }

    /// Composite Simpson rule over samples at the grid nodes.
    pub fn simpson(&self, values: &[f64]) -> f64 {
        simpson(self, values)
    }

    /// `∫ (a(t), b(t)) dt` for vector samples.
    pub fn inner(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let v: Vec<f64> = a.iter().zip(b).map(|(x, y)| dot(x, y)).collect();
        simpson(self, &v)
    }
}

#[derive(Debug, Clone)]
pub struct MatrixTrajectory {
    pub grid: Grid,
    pub values: Vec<Mat>,
}

impl MatrixTrajectory {
    pub fn at(&self, i: usize) -> &Mat {
        &self.values[i]
    }

    pub fn last(&self) -> &Mat {
        &self.values[self.grid.steps()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorTrajectory {
    pub grid: Grid,
    pub values: Vec<Vec<f64>>,
}

impl VectorTrajectory {
    pub fn zeros(grid: Grid, dim: usize) -> Self {
        VectorTrajectory {
            grid,
            values: vec![vec![0.0; dim]; grid.len()],
        }
    }

    /// Samples a time-vector at the grid nodes.
    pub fn sample<F: TimeMatrix + ?Sized>(f: &F, grid: Grid) -> Result<Self> {
        let values = grid
            .nodes()
            .map(|t| f.eval(t).map(Mat::into_vec))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorTrajectory { grid, values })
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn first(&self) -> &[f64] {
        &self.values[0]
    }

    pub fn last(&self) -> &[f64] {
        &self.values[self.grid.steps()]
    }

    /// Component `k` as a scalar series.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[k]).collect()
    }

    /// Sub-vector `[start, start + len)` at every node.
    pub fn slice(&self, start: usize, len: usize) -> VectorTrajectory {
        VectorTrajectory {
            grid: self.grid,
            values: self.values.iter().map(|v| v[start..start + len].to_vec()).collect(),
        }
    }

    pub fn map<F: FnMut(usize, &[f64]) -> Vec<f64>>(&self, mut f: F) -> VectorTrajectory {
        VectorTrajectory {
            grid: self.grid,
            values: self.values.iter().enumerate().map(|(i, v)| f(i, v)).collect(),
        }
    }

    /// `self + k * other`
    pub fn add_scaled(&self, k: f64, other: &VectorTrajectory) -> VectorTrajectory {
        self.map(|i, v| v.iter().zip(&other.values[i]).map(|(a, b)| a + k * b).collect())
    }

    pub fn scaled(&self, k: f64) -> VectorTrajectory {
        self.map(|_, v| v.iter().map(|x| k * x).collect())
    }

    /// `∫ (self, other) dt`
    pub fn inner(&self, other: &VectorTrajectory) -> f64 {
        self.grid.inner(&self.values, &other.values)
    }

    /// L2 norm over `[0, ω]`.
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Every other node, for a trajectory computed on a refined grid.
    pub fn coarsen(&self) -> Result<VectorTrajectory> {
        if !self.grid.steps().is_multiple_of(4) {
            return Err(Error::Grid("cannot coarsen: half step count would be odd".into()));
        }
        let grid = Grid::new(self.grid.omega(), self.grid.steps() / 2)?;
        Ok(VectorTrajectory {
            grid,
            values: self.values.iter().step_by(2).cloned().collect(),
        })
    }
}

/// Composite Simpson quadrature of node samples.
pub fn simpson(grid: &Grid, values: &[f64]) -> f64 {
    assert_eq!(values.len(), grid.len(), "simpson: sample count must be N + 1");
    let n = grid.steps();
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    grid.step() / 3.0 * (values[0] + values[n] + 4.0 * odd + 2.0 * even)
}

fn check_finite(m: &[f64], t: f64) -> Result<()> {
    if m.iter().all(|x| x.is_finite() && x.abs() <= DIVERGENCE_LIMIT) {
        Ok(())
    } else {
        Err(Error::Divergence { t })
    }
}

fn check_square<M: TimeMatrix + ?Sized>(m: &M) -> Result<usize> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::Dimension(format!("coefficient must be square, got {r}x{c}")));
    }
    Ok(r)
}

/// Coefficient samples at `t_i`, `t_i + h/2`, `t_{i+1}`, reusing the right
/// endpoint of each step as the left endpoint of the next.
struct StepSamples<'a, M: TimeMatrix + ?Sized> {
    m: &'a M,
    grid: Grid,
    left: Mat,
}

impl<'a, M: TimeMatrix + ?Sized> StepSamples<'a, M> {
    fn new(m: &'a M, grid: Grid) -> Result<Self> {
        let left = m.eval(0.0)?;
        Ok(StepSamples { m, grid, left })
    }

    fn advance(&mut self, i: usize) -> Result<(Mat, Mat, Mat)> {
        let h = self.grid.step();
        let mid = self.m.eval(self.grid.t(i) + 0.5 * h)?;
        let right = self.m.eval(self.grid.t(i + 1))?;
        let left = std::mem::replace(&mut self.left, right.clone());
        Ok((left, mid, right))
    }
}

/// RK4 solution of `Ḟ = M(t) F`, `F(0) = E`.
pub fn propagate_fundamental<M: TimeMatrix + ?Sized>(m: &M, grid: Grid) -> Result<MatrixTrajectory> {
    let d = check_square(m)?;
    let h = grid.step();
    let mut samples = StepSamples::new(m, grid)?;
    let mut f = Mat::identity(d);
    let mut values = Vec::with_capacity(grid.len());
    values.push(f.clone());
    for i in 0..grid.steps() {
        let (ml, mm, mr) = samples.advance(i)?;
        f = rk4_matrix_step(&f, h, &ml, &mm, &mr, false);
        check_finite(f.as_slice(), grid.t(i + 1))?;
        values.push(f.clone());
    }
    Ok(MatrixTrajectory { grid, values })
}

/// RK4 solution of `Ψ̇ = −Ψ M(t)`, `Ψ(0) = E`; `Ψ(t)` approximates `F(t)⁻¹`.
pub fn propagate_inverse_fundamental<M: TimeMatrix + ?Sized>(m: &M, grid: Grid) -> Result<MatrixTrajectory> {
    let d = check_square(m)?;
    let h = grid.step();
    let mut samples = StepSamples::new(m, grid)?;
    let mut psi = Mat::identity(d);
    let mut values = Vec::with_capacity(grid.len());
    values.push(psi.clone());
    for i in 0..grid.steps() {
        let (ml, mm, mr) = samples.advance(i)?;
        psi = rk4_matrix_step(&psi, h, &ml, &mm, &mr, true);
        check_finite(psi.as_slice(), grid.t(i + 1))?;
        values.push(psi.clone());
    }
    Ok(MatrixTrajectory { grid, values })
}

fn rk4_matrix_step(y: &Mat, h: f64, ml: &Mat, mm: &Mat, mr: &Mat, inverse: bool) -> Mat {
    // forward: Y' = M Y;  inverse: Y' = -Y M
    let rhs = |m: &Mat, y: &Mat| -> Mat {
        if inverse {
            (y * m).scale(-1.0)
        } else {
            m * y
        }
    };
    let k1 = rhs(ml, y);
    let mut y2 = y.clone();
    y2.axpy(0.5 * h, &k1);
    let k2 = rhs(mm, &y2);
    let mut y3 = y.clone();
    y3.axpy(0.5 * h, &k2);
    let k3 = rhs(mm, &y3);
    let mut y4 = y.clone();
    y4.axpy(h, &k3);
    let k4 = rhs(mr, &y4);
    let mut out = y.clone();
    out.axpy(h / 6.0, &k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    out
}

/// RK4 solution of `ẋ = M(t) x + g(t)`, `x(0) = x0`. `g = None` means zero forcing.
pub fn propagate_affine<M, G>(m: &M, g: Option<&G>, x0: &[f64], grid: Grid) -> Result<VectorTrajectory>
where
    M: TimeMatrix + ?Sized,
    G: TimeMatrix + ?Sized,
{
    let (_, traj) = propagate(m, g, x0, grid, false)?;
    Ok(traj)
}

/// Fundamental matrix and affine solution in a single pass (shared
/// coefficient evaluations).
pub fn propagate_with_fundamental<M, G>(
    m: &M,
    g: Option<&G>,
    x0: &[f64],
    grid: Grid,
) -> Result<(MatrixTrajectory, VectorTrajectory)>
where
    M: TimeMatrix + ?Sized,
    G: TimeMatrix + ?Sized,
{
    let (f, traj) = propagate(m, g, x0, grid, true)?;
    Ok((f.expect("fundamental requested"), traj))
}

fn propagate<M, G>(
    m: &M,
    g: Option<&G>,
    x0: &[f64],
    grid: Grid,
    with_fundamental: bool,
) -> Result<(Option<MatrixTrajectory>, VectorTrajectory)>
where
    M: TimeMatrix + ?Sized,
    G: TimeMatrix + ?Sized,
{
    let d = check_square(m)?;
    if x0.len() != d {
        return Err(Error::Dimension(format!(
            "initial value has length {}, system dimension is {d}",
            x0.len()
        )));
    }
    if let Some(g) = g {
        if g.shape() != (d, 1) {
            return Err(Error::Dimension(format!(
                "forcing must be {d}x1, got {}x{}",
                g.rows(),
                g.cols()
            )));
        }
    }
    let h = grid.step();
    let forcing = |t: f64| -> Result<Vec<f64>> {
        match g {
            Some(g) => Ok(g.eval(t)?.into_vec()),
            None => Ok(vec![0.0; d]),
        }
    };
    let mut samples = StepSamples::new(m, grid)?;
    let mut g_left = forcing(0.0)?;
    let mut x = x0.to_vec();
    let mut xs = Vec::with_capacity(grid.len());
    xs.push(x.clone());
    let mut f = with_fundamental.then(|| Mat::identity(d));
    let mut fs = Vec::new();
    if let Some(f) = &f {
        fs.reserve(grid.len());
        fs.push(f.clone());
    }

    let axpy = |a: &[f64], k: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + k * y).collect() };
    for i in 0..grid.steps() {
        let (ml, mm, mr) = samples.advance(i)?;
        let g_mid = forcing(grid.t(i) + 0.5 * h)?;
        let g_right = forcing(grid.t(i + 1))?;
        let rhs =
            |m: &Mat, g: &[f64], y: &[f64]| -> Vec<f64> { m.mul_vec(y).iter().zip(g).map(|(a, b)| a + b).collect() };
        let k1 = rhs(&ml, &g_left, &x);
        let k2 = rhs(&mm, &g_mid, &axpy(&x, 0.5 * h, &k1));
        let k3 = rhs(&mm, &g_mid, &axpy(&x, 0.5 * h, &k2));
        let k4 = rhs(&mr, &g_right, &axpy(&x, h, &k3));
        for j in 0..d {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        check_finite(&x, grid.t(i + 1))?;
        xs.push(x.clone());
        if let Some(fm) = &mut f {
            *fm = rk4_matrix_step(fm, h, &ml, &mm, &mr, false);
            check_finite(fm.as_slice(), grid.t(i + 1))?;
            fs.push(fm.clone());
        }
        g_left = g_right;
    }
    let traj = VectorTrajectory { grid, values: xs };
    Ok((f.map(|_| MatrixTrajectory { grid, values: fs }), traj))
}
