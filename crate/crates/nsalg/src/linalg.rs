//! Internal numerical-linear-algebra helpers: sorted hermitian
//! eigendecompositions, eigenvalue clustering, SVD kernels, incremental
//! Hilbert-Schmidt spans and subspace intersection.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::operator::{hs_inner_unchecked, C64, CMatrix, Operator};

/// Eigendecomposition of a hermitian matrix with eigenvalues sorted
/// ascending and eigenvector columns permuted to match.
pub(crate) fn hermitian_eigen(mat: &CMatrix) -> (Vec<f64>, CMatrix) {
    let dim = mat.nrows();
    if dim == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(mat.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Group sorted eigenvalues into clusters separated by gaps larger than
/// `rel_gap` times the spectral range. Returns index ranges into the input.
///
/// The floor scales with the eigenvalue magnitude so that the numerical
/// scatter of an exactly degenerate spectrum is never split.
pub(crate) fn cluster_eigenvalues(sorted: &[f64], rel_gap: f64) -> Vec<std::ops::Range<usize>> {
    if sorted.is_empty() {
        return Vec::new();
    }
    let range = sorted[sorted.len() - 1] - sorted[0];
    let max_abs = sorted
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max);
    let threshold = (rel_gap * range).max(1e-8 * max_abs).max(1e-12);
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..sorted.len() {
        if sorted[i] - sorted[i - 1] > threshold {
            clusters.push(start..i);
            start = i;
        }
    }
    clusters.push(start..sorted.len());
    clusters
}

// nalgebra's complex SVD is numerically unreliable (reconstruction errors
// far above roundoff on benign inputs), so every complex kernel / rank /
// angle computation below goes through the hermitian eigendecomposition of
// a Gram matrix instead. Squaring costs half the digits; the effective
// singular-value resolution is ~1e-7 relative, which all structural gaps in
// this toolkit clear by orders of magnitude.

/// Eigenvalue cutoff corresponding to the singular-value threshold
/// `rel_tol * max(sigma_max, scale_floor)`, with an epsilon floor that keeps
/// genuine kernel eigenvalues (which land at roundoff level) below it.
fn gram_cutoff(lambda_max: f64, rel_tol: f64, scale_floor: f64) -> f64 {
    let sigma_max = lambda_max.max(0.0).sqrt();
    let target = rel_tol * sigma_max.max(scale_floor);
    (target * target).max(1e-13 * lambda_max.max(0.0))
}

/// Orthonormal basis of the right nullspace of `mat`. Columns of the
/// returned matrix are the kernel coordinates. The `scale_floor` keeps the
/// cutoff meaningful when the whole map is numerically zero (every
/// direction belongs to the kernel).
pub(crate) fn right_nullspace(mat: &CMatrix, rel_tol: f64, scale_floor: f64) -> CMatrix {
    let ncols = mat.ncols();
    if mat.nrows() == 0 || ncols == 0 {
        return CMatrix::identity(ncols, ncols);
    }
    let gram = mat.adjoint() * mat;
    let (vals, vecs) = hermitian_eigen(&gram);
    let lambda_max = vals.last().copied().unwrap_or(0.0);
    let cutoff = gram_cutoff(lambda_max, rel_tol, scale_floor);
    let count = vals.iter().take_while(|&&v| v <= cutoff).count();
    vecs.columns(0, count).into_owned()
}

/// Numerical rank with the relative threshold `rel_tol * sigma_max`.
pub(crate) fn svd_rank(mat: &CMatrix, rel_tol: f64) -> usize {
    if mat.nrows() == 0 || mat.ncols() == 0 {
        return 0;
    }
    let gram = if mat.nrows() >= mat.ncols() {
        mat.adjoint() * mat
    } else {
        mat * mat.adjoint()
    };
    let (vals, _) = hermitian_eigen(&gram);
    let lambda_max = vals.last().copied().unwrap_or(0.0);
    if lambda_max <= 0.0 {
        return 0;
    }
    let cutoff = gram_cutoff(lambda_max, rel_tol, 0.0);
    vals.iter().filter(|&&v| v > cutoff).count()
}

pub(crate) fn real_matrix_rank(mat: &DMatrix<f64>, rel_tol: f64) -> usize {
    if mat.nrows() == 0 || mat.ncols() == 0 {
        return 0;
    }
    let svd = SVD::new(mat.clone(), false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > rel_tol * smax)
        .count()
}

/// Incremental orthonormal span of operators under the HS inner product.
/// Candidates are orthogonalized twice (modified Gram-Schmidt) and accepted
/// when the residual exceeds `rel_tol` times the candidate norm.
pub(crate) struct HsSpan {
    dim: usize,
    basis: Vec<Operator>,
    rel_tol: f64,
}

impl HsSpan {
    pub fn new(dim: usize, rel_tol: f64) -> Self {
        Self {
            dim,
            basis: Vec::new(),
            rel_tol,
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Operator] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<Operator> {
        self.basis
    }

    /// Try to extend the span with `x`; returns true when a new basis
    /// element was added. Rejection is decided after one Gram-Schmidt pass;
    /// accepted elements get a second pass before normalization.
    pub fn try_add(&mut self, x: &Operator) -> bool {
        debug_assert_eq!(x.dim(), self.dim);
        let norm = x.hs_norm();
        if norm == 0.0 {
            return false;
        }
        let mut r = one_pass(&self.basis, x.matrix().clone());
        if r.norm() <= self.rel_tol * norm {
            return false;
        }
        r = one_pass(&self.basis, r);
        let rnorm = r.norm();
        if rnorm <= self.rel_tol * norm {
            return false;
        }
        self.basis
            .push(Operator::from_matrix_unchecked(r / C64::new(rnorm, 0.0)));
        true
    }
}

fn one_pass(basis: &[Operator], mut r: CMatrix) -> CMatrix {
    for b in basis {
        let c: C64 = b
            .matrix()
            .iter()
            .zip(r.iter())
            .map(|(p, q)| p.conj() * q)
            .sum();
        r -= b.matrix() * c;
    }
    r
}

/// Orthogonal component of `x` relative to an orthonormal operator basis
/// (two passes of modified Gram-Schmidt).
pub(crate) fn residual_against(basis: &[Operator], x: &Operator) -> Operator {
    let r = one_pass(basis, x.matrix().clone());
    Operator::from_matrix_unchecked(one_pass(basis, r))
}

/// Orthonormalize a list of operators into a span (drops dependent ones).
pub(crate) fn orthonormal_span(ops: &[Operator], rel_tol: f64) -> Vec<Operator> {
    if ops.is_empty() {
        return Vec::new();
    }
    let mut span = HsSpan::new(ops[0].dim(), rel_tol);
    for op in ops {
        span.try_add(op);
    }
    span.into_basis()
}

/// Intersection of two operator subspaces given by orthonormal bases, via
/// principal angles: directions with cos(theta) >= 1 - angle_tol are kept.
/// The principal cosines are the square roots of the eigenvalues of G G'
/// where G is the mutual Gram matrix.
pub(crate) fn intersect_spans(
    a: &[Operator],
    b: &[Operator],
    angle_tol: f64,
) -> Vec<Operator> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let gram = CMatrix::from_fn(a.len(), b.len(), |i, j| hs_inner_unchecked(&a[i], &b[j]));
    let gg = &gram * gram.adjoint();
    let (vals, vecs) = hermitian_eigen(&gg);
    let keep = (1.0 - angle_tol) * (1.0 - angle_tol);
    let mut out = Vec::new();
    for k in (0..vals.len()).rev() {
        if vals[k] < keep {
            break;
        }
        let mut acc = CMatrix::zeros(a[0].dim(), a[0].dim());
        for i in 0..a.len() {
            acc += a[i].matrix() * vecs[(i, k)];
        }
        out.push(Operator::from_matrix_unchecked(acc));
    }
    // Already orthonormal up to roundoff; tidy it anyway.
    orthonormal_span(&out, 1e-12)
}

/// Partial trace over the second (gauge) factor of an (n*d)x(n*d) block,
/// laid out with the multiplicity index major: row l*d + mu.
pub(crate) fn ptrace_gauge(block: &CMatrix, n: usize, d: usize) -> CMatrix {
    debug_assert_eq!(block.nrows(), n * d);
    CMatrix::from_fn(n, n, |l, lp| {
        (0..d).map(|m| block[(l * d + m, lp * d + m)]).sum()
    })
}

/// Partial trace over the first (multiplicity) factor: returns a d x d block.
pub(crate) fn ptrace_multiplicity(block: &CMatrix, n: usize, d: usize) -> CMatrix {
    debug_assert_eq!(block.nrows(), n * d);
    CMatrix::from_fn(d, d, |m, mp| {
        (0..n).map(|l| block[(l * d + m, l * d + mp)]).sum()
    })
}

/// Orthonormalize the columns of a rectangular matrix (thin QR by MGS),
/// dropping columns whose residual falls below `rel_tol` of their norm.
pub(crate) fn orthonormalize_columns(mat: &CMatrix, rel_tol: f64) -> CMatrix {
    let mut cols: Vec<DVector<C64>> = Vec::new();
    for j in 0..mat.ncols() {
        let mut v: DVector<C64> = mat.column(j).into();
        let norm0 = v.norm();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &cols {
                let c = q.dotc(&v);
                v -= q * c;
            }
        }
        let norm = v.norm();
        if norm > rel_tol * norm0 {
            cols.push(v / C64::new(norm, 0.0));
        }
    }
    let mut out = CMatrix::zeros(mat.nrows(), cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Unitary (polar) factor T (T'T)^{-1/2} of a square matrix.
pub(crate) fn polar_unitary(mat: &CMatrix) -> Option<CMatrix> {
    let gram = mat.adjoint() * mat;
    let (vals, vecs) = hermitian_eigen(&gram);
    let lmax = vals.last().copied().unwrap_or(0.0);
    let lmin = vals.first().copied().unwrap_or(0.0);
    // Reject near-singular transports; the caller retries with a new draw.
    if lmax <= 0.0 || lmin < 1e-12 * lmax {
        return None;
    }
    let n = vals.len();
    let inv_sqrt = CMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| vecs[(i, k)] * vecs[(j, k)].conj() * C64::new(1.0 / vals[k].sqrt(), 0.0))
            .sum()
    });
    Some(mat * inv_sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::qubits;

    #[test]
    fn hermitian_eigen_sorted() {
        let z = qubits::sigma_z();
        let (vals, vecs) = hermitian_eigen(z.matrix());
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        // Columns are eigenvectors.
        let v0 = vecs.column(0);
        let r = z.matrix() * v0 - v0.scale(vals[0]);
        assert!(r.norm() < 1e-13);
    }

    #[test]
    fn clustering_splits_on_gaps() {
        let vals = [0.0, 1e-13, 1.0, 1.0 + 2e-13, 2.0];
        let c = cluster_eigenvalues(&vals, 1e-6);
        assert_eq!(c.len(), 3);
        assert_eq!(c[0], 0..2);
        assert_eq!(c[1], 2..4);
    }

    #[test]
    fn nullspace_of_pauli_commutator_map() {
        // [X, .] on 2x2 matrices has a 2-dim kernel spanned by I and X.
        let x = qubits::sigma_x();
        let d = 2;
        let mut map = CMatrix::zeros(d * d, d * d);
        for (c, unit) in basis_units(d).iter().enumerate() {
            let com = x.commutator(unit).unwrap();
            map.set_column(c, &com.vectorize());
        }
        let kernel = right_nullspace(&map, 1e-10, map.norm());
        assert_eq!(kernel.ncols(), 2);
    }

    fn basis_units(d: usize) -> Vec<Operator> {
        let mut out = Vec::new();
        for j in 0..d {
            for i in 0..d {
                out.push(Operator::from_fn(d, |r, c| {
                    if (r, c) == (i, j) {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }));
            }
        }
        out
    }

    #[test]
    fn span_intersection_finds_common_direction() {
        let x = qubits::sigma_x();
        let z = qubits::sigma_z();
        let id = Operator::identity(2);
        let a = orthonormal_span(&[id.clone(), x], 1e-12);
        let b = orthonormal_span(&[id, z], 1e-12);
        let common = intersect_spans(&a, &b, 1e-8);
        assert_eq!(common.len(), 1);
        // The common direction is the identity line.
        let r = common[0]
            .sub(&Operator::identity(2).scaled(hs_inner_unchecked(
                &Operator::identity(2),
                &common[0],
            ) / C64::new(2.0, 0.0)))
            .unwrap();
        assert!(r.hs_norm() < 1e-10);
    }
}
