//! Dense complex operators and the Hilbert-Schmidt geometry built on them.
//!
//! `Operator` is the universal currency of the toolkit: a square matrix over
//! C with the dimension carried alongside. All span and closure computations
//! use the Hilbert-Schmidt inner product <A, B> = tr(A' B).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{NsError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// A dense complex square matrix on a finite-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: CMatrix,
}

impl Operator {
    /// Wrap a matrix, rejecting non-square shapes and non-finite entries.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(NsError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if !mat.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(NsError::NonFinite);
        }
        Ok(Self { mat })
    }

    /// Wrap without the finiteness scan. For internal arithmetic whose inputs
    /// are already validated.
    pub(crate) fn from_matrix_unchecked(mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: CMatrix::zeros(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            mat: CMatrix::from_fn(dim, dim, f),
        }
    }

    /// Build from row-major real/imag arrays.
    pub fn from_re_im(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let dim = re.len();
        if im.len() != dim {
            return Err(NsError::DimensionMismatch {
                expected: dim,
                got: im.len(),
            });
        }
        for row in re.iter().chain(im.iter()) {
            if row.len() != dim {
                return Err(NsError::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| {
            C64::new(re[i][j], im[i][j])
        }))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Hermitian adjoint.
    pub fn dagger(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.diagonal().sum()
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            mat: &self.mat * c,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            mat: &self.mat - &other.mat,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            mat: &self.mat * &other.mat,
        })
    }

    /// [A, B] = AB - BA.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        })
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// Hilbert-Schmidt norm sqrt(tr(A' A)).
    pub fn hs_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn unitarity_residual(&self) -> f64 {
        let dim = self.dim();
        (self.mat.adjoint() * &self.mat - CMatrix::identity(dim, dim)).norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// (A + A')/2.
    pub fn hermitized(&self) -> Self {
        Self {
            mat: (&self.mat + self.mat.adjoint()).scale(0.5),
        }
    }

    /// Column-major flattening, the vectorization used for nullspace work.
    pub fn vectorize(&self) -> CVector {
        CVector::from_column_slice(self.mat.as_slice())
    }

    pub fn from_vectorized(dim: usize, v: &CVector) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(NsError::DimensionMismatch {
                expected: dim * dim,
                got: v.len(),
            });
        }
        Self::new(CMatrix::from_column_slice(dim, dim, v.as_slice()))
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(NsError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

/// Hilbert-Schmidt inner product tr(A' B); conjugate-linear in A.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    a.check_dim(b)?;
    Ok(hs_inner_unchecked(a, b))
}

pub(crate) fn hs_inner_unchecked(a: &Operator, b: &Operator) -> C64 {
    a.matrix()
        .iter()
        .zip(b.matrix().iter())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dim = self.dim();
        let mut re = vec![vec![0.0; dim]; dim];
        let mut im = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                re[i][j] = self.mat[(i, j)].re;
                im[i][j] = self.mat[(i, j)].im;
            }
        }
        OperatorRepr { re, im }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(deserializer)?;
        Operator::from_re_im(&repr.re, &repr.im).map_err(D::Error::custom)
    }
}

/// A rectangular complex matrix with the same re/im serialization as
/// `Operator`; used for isometries and state stacks.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(pub CMatrix);

impl ComplexMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

impl From<CMatrix> for ComplexMatrix {
    fn from(m: CMatrix) -> Self {
        Self(m)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (rows, cols) = (self.0.nrows(), self.0.ncols());
        let mut re = vec![vec![0.0; cols]; rows];
        let mut im = vec![vec![0.0; cols]; rows];
        for i in 0..rows {
            for j in 0..cols {
                re[i][j] = self.0[(i, j)].re;
                im[i][j] = self.0[(i, j)].im;
            }
        }
        OperatorRepr { re, im }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(deserializer)?;
        let rows = repr.re.len();
        let cols = repr.re.first().map_or(0, Vec::len);
        if repr.im.len() != rows
            || repr.re.iter().any(|r| r.len() != cols)
            || repr.im.iter().any(|r| r.len() != cols)
        {
            return Err(D::Error::custom("ragged re/im arrays"));
        }
        let mat = CMatrix::from_fn(rows, cols, |i, j| C64::new(repr.re[i][j], repr.im[i][j]));
        if !mat.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(D::Error::custom("non-finite entries"));
        }
        Ok(Self(mat))
    }
}

/// Single-qubit Pauli matrices and small tensor helpers.
pub mod qubits {
    use super::*;

    pub fn sigma_x() -> Operator {
        Operator::from_fn(2, |i, j| {
            if i != j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn sigma_y() -> Operator {
        Operator::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        })
    }

    pub fn sigma_z() -> Operator {
        Operator::from_fn(2, |i, j| match (i, j) {
            (0, 0) => C64::new(1.0, 0.0),
            (1, 1) => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, 0.0),
        })
    }

    /// Tensor product over a list, left factor most significant.
    pub fn kron_all(ops: &[Operator]) -> Operator {
        assert!(!ops.is_empty());
        let mut acc = ops[0].clone();
        for op in &ops[1..] {
            acc = acc.kron(op);
        }
        acc
    }

    /// Embed a single-qubit operator at position `pos` (0-based) of an
    /// `n`-qubit register; qubit 0 is the most significant tensor factor.
    pub fn embed_single(n: usize, pos: usize, op: &Operator) -> Operator {
        assert!(pos < n);
        assert_eq!(op.dim(), 2);
        let factors: Vec<Operator> = (0..n)
            .map(|k| {
                if k == pos {
                    op.clone()
                } else {
                    Operator::identity(2)
                }
            })
            .collect();
        kron_all(&factors)
    }
}
