//! Time matrices derived from an [`ObservationSystem`](super::ObservationSystem).

use crate::error::Result;
use crate::linalg::Mat;
use crate::time_matrix::TimeMatrix;

/// `−A(t)ᵀ`, the adjoint coefficient.
pub struct NegTranspose<'a>(pub &'a dyn TimeMatrix);

impl TimeMatrix for NegTranspose<'_> {
    fn shape(&self) -> (usize, usize) {
        let (r, c) = self.0.shape();
        (c, r)
    }
    fn eval(&self, t: f64) -> Result<Mat> {
        Ok(self.0.eval(t)?.transpose().scale(-1.0))
    }
}

/// Coefficient of the coupled estimator/reconstruction problems:
///
/// ```text
/// [ −Aᵀ   HᵀH ]
/// [ BBᵀ    A  ]
/// ```
///
/// With `adjoint` set, evaluates the negated transpose instead, whose
/// periodic kernel is the adjoint kernel of the coupled operator.
pub struct Coupled<'a> {
    pub a: &'a dyn TimeMatrix,
    pub b: &'a dyn TimeMatrix,
    pub h: &'a dyn TimeMatrix,
    pub adjoint: bool,
}

impl TimeMatrix for Coupled<'_> {
    fn shape(&self) -> (usize, usize) {
        let n = self.a.rows();
        (2 * n, 2 * n)
    }

    fn eval(&self, t: f64) -> Result<Mat> {
        let n = self.a.rows();
        let a = self.a.eval(t)?;
        let b = self.b.eval(t)?;
        let h = self.h.eval(t)?;
        let hth = &h.transpose() * &h;
        let bbt = &b * &b.transpose();
        let mut c = Mat::zeros(2 * n, 2 * n);
        if self.adjoint {
            c.set_block(0, 0, &a);
            c.set_block(0, n, &bbt.scale(-1.0));
            c.set_block(n, 0, &hth.scale(-1.0));
            c.set_block(n, n, &a.transpose().scale(-1.0));
        } else {
            c.set_block(0, 0, &a.transpose().scale(-1.0));
            c.set_block(0, n, &hth);
            c.set_block(n, 0, &bbt);
            c.set_block(n, n, &a);
        }
        Ok(c)
    }
}

/// `(k · v(t), 0)`: a time-vector scaled and padded with `pad` trailing zeros.
pub struct PaddedForcing<'a> {
    pub top: &'a dyn TimeMatrix,
    pub scale: f64,
    pub pad: usize,
}

impl TimeMatrix for PaddedForcing<'_> {
    fn shape(&self) -> (usize, usize) {
        (self.top.rows() + self.pad, 1)
    }
    fn eval(&self, t: f64) -> Result<Mat> {
        let mut v = self.top.eval(t)?.into_vec();
        v.iter_mut().for_each(|x| *x *= self.scale);
        v.resize(v.len() + self.pad, 0.0);
        Ok(Mat::column_vector(&v))
    }
}

/// `M(t) v(t)` for a matrix function and a time-vector.
pub struct Product<'a> {
    pub m: &'a dyn TimeMatrix,
    pub v: &'a dyn TimeMatrix,
}

impl TimeMatrix for Product<'_> {
    fn shape(&self) -> (usize, usize) {
        (self.m.rows(), 1)
    }
    fn eval(&self, t: f64) -> Result<Mat> {
        let m = self.m.eval(t)?;
        let v = self.v.eval(t)?.into_vec();
        Ok(Mat::column_vector(&m.mul_vec(&v)))
    }
}

/// `Mᵀ(t) v(t)`.
pub struct TransposeProduct<'a> {
    pub m: &'a dyn TimeMatrix,
    pub v: &'a dyn TimeMatrix,
}

impl TimeMatrix for TransposeProduct<'_> {
    fn shape(&self) -> (usize, usize) {
        (self.m.cols(), 1)
    }
    fn eval(&self, t: f64) -> Result<Mat> {
        let m = self.m.eval(t)?;
        let v = self.v.eval(t)?.into_vec();
        Ok(Mat::column_vector(&m.tr_mul_vec(&v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time_matrix::ExprMatrix;

    #[test]
    fn adjoint_coupled_is_negated_transpose() {
        let a = ExprMatrix::from_strs(&[&["sin(t)", "1"], &["2", "t"]]);
        let b = ExprMatrix::from_strs(&[&["1"], &["cos(t)"]]);
        let h = ExprMatrix::from_strs(&[&["t", "0.5"]]);
        let c = Coupled {
            a: &a,
            b: &b,
            h: &h,
            adjoint: false,
        }
        .eval(0.7)
        .unwrap();
        let ca = Coupled {
            a: &a,
            b: &b,
            h: &h,
            adjoint: true,
        }
        .eval(0.7)
        .unwrap();
        assert!((&c.transpose().scale(-1.0) - &ca).max_abs() < 1e-15);
    }
}
