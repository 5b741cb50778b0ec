//! Error-correcting codes read off a block structure, and the
//! Knill-Laflamme verification that certifies them.
//!
//! With |J lambda mu> the block basis, the multiplicity-side spans
//! H^J_mu = span{|J lambda mu>, lambda = 1..n_J} are codes for any error set
//! drawn from the algebra; the gauge-side spans H^J_lambda are codes for the
//! commutant. `kl_check` evaluates <a| e_i' e_j |b> over the code basis and
//! reports the c-matrix, its rank, and the violation magnitudes.

mod pauli;

pub use pauli::{
    classify_error_pair, stabilizer_decompose, ErrorPairClass, PauliPhase, PauliString,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{NsError, Result};
use crate::linalg::svd_rank;
use crate::operator::{C64, CMatrix, ComplexMatrix, Operator};
use crate::wedderburn::{BlockStructure, SectorLabel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeRole {
    /// H^J_mu: the lambda index varies, mu is fixed. An algebra code.
    Multiplicity,
    /// H^J_lambda: the mu index varies, lambda is fixed. A commutant code.
    Gauge,
}

/// An extracted code subspace: orthonormal basis vectors tagged with their
/// sector and which index was held fixed (1-based, following the
/// |J lambda mu> labeling).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeSubspace {
    pub ambient_dim: usize,
    /// Basis vectors as columns.
    pub vectors: ComplexMatrix,
    pub sector: SectorLabel,
    pub fixed_index: usize,
    pub role: CodeRole,
}

impl CodeSubspace {
    pub fn code_dim(&self) -> usize {
        self.vectors.matrix().ncols()
    }

    pub fn vector(&self, i: usize) -> DVector<C64> {
        self.vectors.matrix().column(i).into_owned()
    }

    /// Max deviation of the basis from orthonormality.
    pub fn gram_deviation(&self) -> f64 {
        let v = self.vectors.matrix();
        let gram = v.adjoint() * v;
        let m = gram.nrows();
        (gram - CMatrix::identity(m, m)).norm()
    }
}

/// Read a code subspace out of the block basis: fix mu (multiplicity role,
/// dimension n_J) or lambda (gauge role, dimension d_J). Indices are
/// 1-based.
pub fn extract_code(
    bs: &BlockStructure,
    sector_idx: usize,
    fixed_index: usize,
    role: CodeRole,
) -> Result<CodeSubspace> {
    let sector = bs.sector(sector_idx)?.clone();
    let (fixed_max, code_dim) = match role {
        CodeRole::Multiplicity => (sector.d, sector.n),
        CodeRole::Gauge => (sector.n, sector.d),
    };
    if fixed_index == 0 || fixed_index > fixed_max {
        return Err(NsError::IndexOutOfRange {
            index: fixed_index,
            max: fixed_max,
        });
    }
    let cols = bs.sector_columns(sector_idx)?;
    let mut vectors = CMatrix::zeros(bs.dim(), code_dim);
    for k in 0..code_dim {
        let col = match role {
            CodeRole::Multiplicity => k * sector.d + (fixed_index - 1),
            CodeRole::Gauge => (fixed_index - 1) * sector.d + k,
        };
        vectors.set_column(k, &cols.column(col));
    }
    Ok(CodeSubspace {
        ambient_dim: bs.dim(),
        vectors: vectors.into(),
        sector: sector.label,
        fixed_index,
        role,
    })
}

/// Knill-Laflamme verification report for a code against an error list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KLReport {
    /// c^{ij}: the common diagonal of <a| e_i' e_j |a> over code vectors.
    pub c_matrix: ComplexMatrix,
    /// Largest |<a| e_i' e_j |b>| with a != b.
    pub max_off_diagonal: f64,
    /// Largest deviation of a diagonal entry from the common value.
    pub max_diagonal_dependence: f64,
    pub error_count: usize,
    pub code_dim: usize,
    pub c_rank: usize,
    /// Rank-deficient c means the code is degenerate.
    pub degenerate: bool,
    pub tol: f64,
    pub pass: bool,
}

/// Evaluate the Knill-Laflamme condition <a| e_i' e_j |b> = delta_ab c_ij
/// over the code basis. Passes iff all off-diagonal magnitudes and all
/// diagonal spreads stay below `tol`.
pub fn kl_check(code: &CodeSubspace, errors: &[Operator], tol: f64) -> Result<KLReport> {
    if errors.is_empty() {
        return Err(NsError::EmptyInput("error list"));
    }
    for e in errors {
        if e.dim() != code.ambient_dim {
            return Err(NsError::DimensionMismatch {
                expected: code.ambient_dim,
                got: e.dim(),
            });
        }
    }
    let m = code.code_dim();
    let k = errors.len();
    // Images e_i |v_a> once; every matrix element is an inner product.
    let images: Vec<CMatrix> = errors
        .iter()
        .map(|e| e.matrix() * code.vectors.matrix())
        .collect();
    let mut c = CMatrix::zeros(k, k);
    let mut max_off = 0.0f64;
    let mut max_dep = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let gram = images[i].adjoint() * &images[j];
            let mean_diag: C64 = gram.diagonal().sum() / C64::new(m as f64, 0.0);
            c[(i, j)] = mean_diag;
            for a in 0..m {
                for b in 0..m {
                    if a == b {
                        max_dep = max_dep.max((gram[(a, a)] - mean_diag).norm());
                    } else {
                        max_off = max_off.max(gram[(a, b)].norm());
                    }
                }
            }
        }
    }
    let c_rank = svd_rank(&c, tol);
    Ok(KLReport {
        c_matrix: c.clone().into(),
        max_off_diagonal: max_off,
        max_diagonal_dependence: max_dep,
        error_count: k,
        code_dim: m,
        c_rank,
        degenerate: c_rank < k,
        tol,
        pass: max_off < tol && max_dep < tol,
    })
}
