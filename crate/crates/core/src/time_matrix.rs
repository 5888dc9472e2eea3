//! Matrix- and vector-valued functions of time.
//!
//! A time-vector is a `TimeMatrix` with a single column.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprError};
use crate::linalg::Mat;

pub trait TimeMatrix: Send + Sync {
    fn shape(&self) -> (usize, usize);
    fn eval(&self, t: f64) -> Result<Mat>;

    fn rows(&self) -> usize {
        self.shape().0
    }

    fn cols(&self) -> usize {
        self.shape().1
    }

    /// Evaluates a single-column function as a plain vector.
    fn eval_vec(&self, t: f64) -> Result<Vec<f64>> {
        debug_assert_eq!(self.cols(), 1);
        Ok(self.eval(t)?.into_vec())
    }
}

impl<T: TimeMatrix + ?Sized> TimeMatrix for &T {
    fn shape(&self) -> (usize, usize) {
        (**self).shape()
    }
    fn eval(&self, t: f64) -> Result<Mat> {
        (**self).eval(t)
    }
}

impl<T: TimeMatrix + ?Sized> TimeMatrix for Box<T> {
    fn shape(&self) -> (usize, usize) {
        (**self).shape()
    }
    fn eval(&self, t: f64) -> Result<Mat> {
        (**self).eval(t)
    }
}

impl<T: TimeMatrix + ?Sized> TimeMatrix for Arc<T> {
    fn shape(&self) -> (usize, usize) {
        (**self).shape()
    }
    fn eval(&self, t: f64) -> Result<Mat> {
        (**self).eval(t)
    }
}

pub type SharedTimeMatrix = Arc<dyn TimeMatrix>;

/// Entry-wise expressions in `t`.
#[derive(Debug, Clone)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Expr>,
    constant: Option<Mat>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("entry [{row}][{col}]: {source}")]
pub struct EntryError {
    pub row: usize,
    pub col: usize,
    #[source]
    pub source: ExprError,
}

impl ExprMatrix {
    pub fn parse<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self, EntryError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(EntryError {
                    row: i,
                    col: row.len().min(c),
                    source: ExprError::Syntax {
                        offset: 0,
                        message: format!("row has {} entries, expected {c}", row.len()),
                    },
                });
            }
            for (j, s) in row.iter().enumerate() {
                let e = Expr::parse(s.as_ref()).map_err(|source| EntryError { row: i, col: j, source })?;
                entries.push(e);
            }
        }
        Ok(Self::from_exprs(r, c, entries))
    }

    pub fn from_exprs(rows: usize, cols: usize, entries: Vec<Expr>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        let constant = if entries.iter().all(Expr::is_constant) {
            entries
                .iter()
                .map(|e| e.eval(0.0))
                .collect::<Result<Vec<_>, _>>()
                .ok()
                .map(|d| Mat::from_vec(rows, cols, d))
        } else {
            None
        };
        ExprMatrix {
            rows,
            cols,
            entries,
            constant,
        }
    }

    /// Parses a rectangular grid of string slices. Panics on parse errors;
    /// meant for literals in examples and tests.
    pub fn from_strs(rows: &[&[&str]]) -> Self {
        let owned: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        Self::parse(&owned).unwrap_or_else(|e| panic!("invalid expression matrix: {e}"))
    }

    /// Column vector of expressions.
    pub fn vector<S: AsRef<str>>(entries: &[S]) -> Result<Self, EntryError> {
        let rows: Vec<Vec<&str>> = entries.iter().map(|s| vec![s.as_ref()]).collect();
        Self::parse(&rows)
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }
}

impl TimeMatrix for ExprMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn eval(&self, t: f64) -> Result<Mat> {
        if let Some(c) = &self.constant {
            return Ok(c.clone());
        }
        let data = self.entries.iter().map(|e| e.eval(t)).collect::<Result<Vec<_>, _>>()?;
        Ok(Mat::from_vec(self.rows, self.cols, data))
    }
}

#[derive(Debug, Clone)]
pub struct ConstMatrix(pub Mat);

impl TimeMatrix for ConstMatrix {
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }
    fn eval(&self, _t: f64) -> Result<Mat> {
        Ok(self.0.clone())
    }
}

/// Closure-backed time matrix.
pub struct FnMatrix<F> {
    shape: (usize, usize),
    f: F,
}

impl<F> FnMatrix<F>
where
    F: Fn(f64) -> Mat + Send + Sync,
{
    pub fn new(rows: usize, cols: usize, f: F) -> Self {
        FnMatrix { shape: (rows, cols), f }
    }
}

impl<F> TimeMatrix for FnMatrix<F>
where
    F: Fn(f64) -> Mat + Send + Sync,
{
    fn shape(&self) -> (usize, usize) {
        self.shape
    }
    fn eval(&self, t: f64) -> Result<Mat> {
        let m = (self.f)(t);
        debug_assert_eq!(m.shape(), self.shape);
        Ok(m)
    }
}

/// Piecewise-linear interpolant of vector samples at increasing times.
/// Exact at the sample times; clamps outside the sampled range.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    dim: usize,
    uniform_step: Option<f64>,
}

impl PiecewiseLinear {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::Dimension(format!(
                "need at least two samples with matching values ({} times, {} rows)",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Dimension("sample times must be strictly increasing".into()));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::Dimension("ragged sample rows".into()));
        }
        let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        let uniform = times
            .iter()
            .enumerate()
            .all(|(i, &t)| (t - (times[0] + i as f64 * h)).abs() <= 1e-12 * h.max(1.0));
        Ok(PiecewiseLinear {
            times,
            values,
            dim,
            uniform_step: uniform.then_some(h),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn sample(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        let t0 = self.times[0];
        if t <= t0 {
            return self.values[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1].clone();
        }
        let i = match self.uniform_step {
            Some(h) => {
                let x = (t - t0) / h;
                let r = x.round();
                if (x - r).abs() < 1e-9 {
                    return self.values[r as usize].clone();
                }
                (x.floor() as usize).min(n - 2)
            }
            None => match self.times.binary_search_by(|p| p.total_cmp(&t)) {
                Ok(i) => return self.values[i].clone(),
                Err(i) => i - 1,
            },
        };
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let w = (t - ta) / (tb - ta);
        self.values[i]
            .iter()
            .zip(&self.values[i + 1])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }
}

impl TimeMatrix for PiecewiseLinear {
    fn shape(&self) -> (usize, usize) {
        (self.dim, 1)
    }
    fn eval(&self, t: f64) -> Result<Mat> {
        Ok(Mat::column_vector(&self.sample(t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expr_matrix_evaluates_entries() {
        let m = ExprMatrix::from_strs(&[&["cos(t)/20", "sin(t)/20"], &["1", "t"]]);
        let v = m.eval(0.0).unwrap();
        assert_eq!(v.to_rows(), vec![vec![0.05, 0.0], vec![1.0, 0.0]]);
        let c = ExprMatrix::from_strs(&[&["1", "0"], &["1", "0"]]);
        assert!(c.constant.is_some());
    }

    #[test]
    fn entry_errors_name_the_entry() {
        let rows = vec![vec!["1", "2"], vec!["3", "sin("]];
        let e = ExprMatrix::parse(&rows).unwrap_err();
        assert_eq!((e.row, e.col), (1, 1));
        let ragged = vec![vec!["1", "2"], vec!["3"]];
        assert!(ExprMatrix::parse(&ragged).is_err());
    }

    #[test]
    fn piecewise_linear_is_exact_at_nodes() {
        let p = PiecewiseLinear::new(vec![0.0, 1.0, 2.0], vec![vec![0.0], vec![2.0], vec![0.0]]).unwrap();
        assert_eq!(p.sample(1.0), vec![2.0]);
        assert_eq!(p.sample(0.25), vec![0.5]);
        assert_eq!(p.sample(-1.0), vec![0.0]);
        let q = PiecewiseLinear::new(vec![0.0, 0.5, 2.0], vec![vec![0.0], vec![1.0], vec![4.0]]).unwrap();
        assert_eq!(q.sample(1.25), vec![2.5]);
        assert!(PiecewiseLinear::new(vec![0.0, 0.0], vec![vec![0.0], vec![1.0]]).is_err());
    }
}
