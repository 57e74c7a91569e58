//! Dense complex matrices over the spin-z product basis and the small set of
//! matrix functions the simulators need.

use std::ops::{Add, Mul, Sub};

use faer::prelude::*;
use faer::{c64, Mat};

use crate::error::{Error, Result};

/// Square complex matrix acting on `dim = 2^L` spin states.
///
/// Basis index `b` encodes site 1 in the most significant bit; a zero bit is
/// `|↑⟩` (σᶻ = +1) and a one bit is `|↓⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: Mat<c64>,
}

impl DenseOperator {
    pub fn from_mat(mat: Mat<c64>) -> Result<Self> {
        let dim = mat.nrows();
        if dim != mat.ncols() {
            return Err(Error::Validation(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Validation(format!(
                "operator dimension {dim} is not a power of two"
            )));
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_mat_unchecked(mat: Mat<c64>) -> Self {
        debug_assert!(mat.nrows() == mat.ncols() && mat.nrows().is_power_of_two());
        Self { mat }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Result<Self> {
        Self::from_mat(Mat::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_mat(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_mat(Mat::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Number of sites `L` with `dim = 2^L`.
    pub fn sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.mat[(row, col)]
    }

    pub fn mat(&self) -> &Mat<c64> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self::from_mat_unchecked(self.mat.adjoint().to_owned())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::from_mat_unchecked(self.mat.conjugate().to_owned())
    }

    pub fn scale(&self, factor: c64) -> Self {
        let n = self.dim();
        Self::from_mat_unchecked(Mat::from_fn(n, n, |i, j| self.mat[(i, j)] * factor))
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        assert_eq!(v.len(), self.dim());
        let n = self.dim();
        let mut out = vec![c64::new(0.0, 0.0); n];
        for j in 0..n {
            let vj = v[j];
            if vj == c64::new(0.0, 0.0) {
                continue;
            }
            let col = self.mat.col_as_slice(j);
            for (o, a) in out.iter_mut().zip(col) {
                *o += a * vj;
            }
        }
        out
    }

    /// `⟨v|A|v⟩` with the standard inner product.
    pub fn expectation(&self, v: &[c64]) -> c64 {
        let av = self.apply(v);
        v.iter().zip(&av).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn exp(&self) -> Self {
        Self::from_mat_unchecked(expm(&self.mat))
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator::from_mat_unchecked(&self.mat * &rhs.mat)
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator::from_mat_unchecked(&self.mat + &rhs.mat)
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator::from_mat_unchecked(&self.mat - &rhs.mat)
    }
}

/// Largest entry modulus of a matrix difference.
pub fn max_abs_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

fn norm_one(a: &Mat<c64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &Mat<c64>) -> Mat<c64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let norm = norm_one(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings);
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| c64::new(PADE13[k], 0.0);
    let lin = |c6: c64, c4: c64, c2: c64, c0: Option<c64>| {
        Mat::from_fn(n, n, |i, j| {
            let mut v = a6[(i, j)] * c6 + a4[(i, j)] * c4 + a2[(i, j)] * c2;
            if let Some(c0) = c0 {
                if i == j {
                    v += c0;
                }
            }
            v
        })
    };
    let u_inner = &a6 * lin(b(13), b(11), b(9), None) + lin(b(7), b(5), b(3), Some(b(1)));
    let u = &a * u_inner;
    let v = &a6 * lin(b(12), b(10), b(8), None) + lin(b(6), b(4), b(2), Some(b(0)));
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn expm_of_diagonal_matches_scalar_exponentials() {
        let d = [c(0.3, -2.0), c(-1.5, 0.7), c(4.0, 9.0)];
        let a = Mat::from_fn(3, 3, |i, j| if i == j { d[i] } else { c(0.0, 0.0) });
        let e = expm(&a);
        for i in 0..3 {
            assert!((e[(i, i)] - d[i].exp()).norm() <= 1e-12 * d[i].exp().norm());
        }
    }

    #[test]
    fn expm_of_pauli_rotation_is_closed_form() {
        // exp(-i θ σx) = cos θ I - i sin θ σx
        for &theta in &[0.1, 1.3, 7.9, 40.0] {
            let a = Mat::from_fn(2, 2, |i, j| if i != j { c(0.0, -theta) } else { c(0.0, 0.0) });
            let e = expm(&a);
            assert!((e[(0, 0)] - c(theta.cos(), 0.0)).norm() < 1e-12);
            assert!((e[(0, 1)] - c(0.0, -theta.sin())).norm() < 1e-12);
        }
    }

    #[test]
    fn expm_nilpotent_jordan_block() {
        let a = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(2.5, 1.0) } else { c(0.0, 0.0) });
        let e = expm(&a);
        assert!((e[(0, 1)] - c(2.5, 1.0)).norm() < 1e-14);
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn operator_rejects_non_power_of_two() {
        assert!(DenseOperator::zeros(3).is_err());
        assert!(DenseOperator::from_mat(Mat::zeros(2, 4)).is_err());
        assert_eq!(DenseOperator::identity(8).unwrap().sites(), 3);
    }
}
