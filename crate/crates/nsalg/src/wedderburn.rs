//! Block (Wedderburn) decomposition of a dagger-closed unital algebra:
//!
//! ```text
//! A ~ sum_J 1_{n_J} (x) M(d_J, C)      on      H ~ sum_J C^{n_J} (x) C^{d_J}
//! ```
//!
//! The unitary produced here maps the computational basis to |J lambda mu>,
//! ordered sector by sector, lambda-major within a sector. Sectors with
//! n_J >= 2 are the noiseless subsystems.
//!
//! The decomposition is randomized-and-certified: generic seeded elements of
//! the center and commutant split the space, and the candidate structure is
//! accepted only after an independent verification pass. Degenerate draws
//! are retried with successor seeds (at most five).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algebra::{self, OperatorAlgebra};
use crate::error::{NsError, Result};
use crate::linalg::{
    cluster_eigenvalues, hermitian_eigen, intersect_spans, polar_unitary, ptrace_gauge,
    ptrace_multiplicity,
};
use crate::operator::{C64, CMatrix, ComplexMatrix, CVector, Operator};
use crate::sampling;

/// Relative eigenvalue-gap threshold for sector splitting.
const CLUSTER_GAP: f64 = 1e-6;
/// Residual threshold for the internal accept/retry verification.
const VERIFY_TOL: f64 = 1e-7;
const MAX_RETRIES: u64 = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorLabel {
    pub index: usize,
    /// Optional physical tag, e.g. a total-spin value like "J=1/2".
    pub tag: Option<String>,
}

/// One irreducible sector: multiplicity `n`, irrep dimension `d`, and the
/// starting column of its block in the basis change.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sector {
    pub label: SectorLabel,
    pub n: usize,
    pub d: usize,
    pub offset: usize,
}

impl Sector {
    pub fn block_dim(&self) -> usize {
        self.n * self.d
    }
}

/// The decomposition result: ordered sectors plus the unitary whose columns
/// are the |J lambda mu> vectors (lambda = 1..n_J outer, mu = 1..d_J inner).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockStructure {
    dim: usize,
    sectors: Vec<Sector>,
    basis_change: Operator,
}

impl BlockStructure {
    pub fn new(dim: usize, sectors: Vec<Sector>, basis_change: Operator) -> Result<Self> {
        let total: usize = sectors.iter().map(Sector::block_dim).sum();
        if total != dim || basis_change.dim() != dim {
            return Err(NsError::DimensionMismatch {
                expected: dim,
                got: total,
            });
        }
        Ok(Self {
            dim,
            sectors,
            basis_change,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn basis_change(&self) -> &Operator {
        &self.basis_change
    }

    pub fn sector(&self, idx: usize) -> Result<&Sector> {
        self.sectors
            .get(idx)
            .ok_or_else(|| NsError::UnknownSector(idx.to_string()))
    }

    pub fn sector_by_tag(&self, tag: &str) -> Result<&Sector> {
        self.sectors
            .iter()
            .find(|s| s.label.tag.as_deref() == Some(tag))
            .ok_or_else(|| NsError::UnknownSector(tag.to_string()))
    }

    pub fn set_sector_tag(&mut self, idx: usize, tag: String) {
        if let Some(s) = self.sectors.get_mut(idx) {
            s.label.tag = Some(tag);
        }
    }

    /// Columns of the basis change spanning sector `idx`.
    pub fn sector_columns(&self, idx: usize) -> Result<CMatrix> {
        let s = self.sector(idx)?;
        Ok(self
            .basis_change
            .matrix()
            .columns(s.offset, s.block_dim())
            .into_owned())
    }

    /// The central projector Q_J of sector `idx`.
    pub fn sector_projector(&self, idx: usize) -> Result<Operator> {
        let v = self.sector_columns(idx)?;
        Ok(Operator::from_matrix_unchecked(&v * v.adjoint()))
    }

    /// Conjugate an operator into the block basis: U' X U.
    pub fn to_block_basis(&self, x: &Operator) -> Result<Operator> {
        if x.dim() != self.dim {
            return Err(NsError::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        let u = self.basis_change.matrix();
        Ok(Operator::from_matrix_unchecked(
            u.adjoint() * x.matrix() * u,
        ))
    }

    /// Diagonal block of U' X U belonging to sector `idx`.
    pub fn sector_block(&self, x: &Operator, idx: usize) -> Result<CMatrix> {
        let s = self.sector(idx)?;
        let v = self.sector_columns(idx)?;
        let _ = s;
        Ok(v.adjoint() * x.matrix() * v)
    }

    /// Encode |logical> (x) |gauge> into sector `idx`.
    pub fn encode(&self, idx: usize, logical: &CVector, gauge: &CVector) -> Result<CVector> {
        let s = self.sector(idx)?;
        if logical.len() != s.n {
            return Err(NsError::DimensionMismatch {
                expected: s.n,
                got: logical.len(),
            });
        }
        if gauge.len() != s.d {
            return Err(NsError::DimensionMismatch {
                expected: s.d,
                got: gauge.len(),
            });
        }
        let cols = self.sector_columns(idx)?;
        let mut out = DVector::zeros(self.dim);
        for l in 0..s.n {
            for m in 0..s.d {
                out += cols.column(l * s.d + m) * (logical[l] * gauge[m]);
            }
        }
        Ok(out)
    }

    /// Residual of `x` from the block form `sum_J 1_{n_J} (x) M_J` that
    /// elements of the decomposed algebra must take. Zero (up to numerics)
    /// iff `x` lies in the algebra this structure describes.
    pub fn algebra_form_residual(&self, x: &Operator) -> Result<f64> {
        let b = self.to_block_basis(x)?;
        Ok(block_form_residual(b.matrix(), &self.sectors, FactorRole::Gauge))
    }

    /// Residual of `x` from the commutant block form `sum_J M'_J (x) 1_{d_J}`.
    pub fn commutant_form_residual(&self, x: &Operator) -> Result<f64> {
        let b = self.to_block_basis(x)?;
        Ok(block_form_residual(
            b.matrix(),
            &self.sectors,
            FactorRole::Multiplicity,
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FactorRole {
    /// Acts on the gauge factor: 1_n (x) M.
    Gauge,
    /// Acts on the multiplicity factor: M' (x) 1_d.
    Multiplicity,
}

/// Distance of a block-basis matrix from the ideal sector-block-diagonal
/// form with the given per-sector tensor factorization.
fn block_form_residual(b: &CMatrix, sectors: &[Sector], role: FactorRole) -> f64 {
    let mut ideal = CMatrix::zeros(b.nrows(), b.ncols());
    for s in sectors {
        let blk = b
            .view((s.offset, s.offset), (s.block_dim(), s.block_dim()))
            .into_owned();
        let proj = match role {
            FactorRole::Gauge => {
                let m = ptrace_multiplicity(&blk, s.n, s.d) / C64::new(s.n as f64, 0.0);
                kron_identity_left(&m, s.n)
            }
            FactorRole::Multiplicity => {
                let m = ptrace_gauge(&blk, s.n, s.d) / C64::new(s.d as f64, 0.0);
                kron_identity_right(&m, s.d)
            }
        };
        for i in 0..s.block_dim() {
            for j in 0..s.block_dim() {
                ideal[(s.offset + i, s.offset + j)] = proj[(i, j)];
            }
        }
    }
    (b - ideal).norm()
}

/// 1_n (x) m with the multiplicity index major.
fn kron_identity_left(m: &CMatrix, n: usize) -> CMatrix {
    let d = m.nrows();
    let mut out = CMatrix::zeros(n * d, n * d);
    for l in 0..n {
        for a in 0..d {
            for b in 0..d {
                out[(l * d + a, l * d + b)] = m[(a, b)];
            }
        }
    }
    out
}

/// m (x) 1_d with the multiplicity index major.
fn kron_identity_right(m: &CMatrix, d: usize) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::zeros(n * d, n * d);
    for l in 0..n {
        for lp in 0..n {
            for a in 0..d {
                out[(l * d + a, lp * d + a)] = m[(l, lp)];
            }
        }
    }
    out
}

/// A noiseless subsystem: the multiplicity factor of a sector with n_J >= 2.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NSDescriptor {
    pub label: SectorLabel,
    pub ns_dim: usize,
    pub gauge_dim: usize,
    /// Sector isometry (columns |J lambda mu>, lambda-major); combined with
    /// a gauge state it encodes C^{n_J} into the ambient space.
    pub sector_isometry: ComplexMatrix,
}

impl NSDescriptor {
    /// Encoder isometry C^{n_J} -> H for a fixed gauge state.
    pub fn encoder(&self, gauge: &CVector) -> Result<CMatrix> {
        if gauge.len() != self.gauge_dim {
            return Err(NsError::DimensionMismatch {
                expected: self.gauge_dim,
                got: gauge.len(),
            });
        }
        let cols = self.sector_isometry.matrix();
        let dim = cols.nrows();
        let mut out = CMatrix::zeros(dim, self.ns_dim);
        for l in 0..self.ns_dim {
            let mut col = DVector::zeros(dim);
            for m in 0..self.gauge_dim {
                col += cols.column(l * self.gauge_dim + m) * gauge[m];
            }
            out.set_column(l, &col);
        }
        Ok(out)
    }

    /// Encoder with the default gauge state (first basis vector).
    pub fn default_encoder(&self) -> CMatrix {
        let mut gauge = DVector::zeros(self.gauge_dim);
        gauge[0] = C64::new(1.0, 0.0);
        self.encoder(&gauge).expect("gauge dim matches")
    }
}

/// One descriptor per sector with multiplicity at least two; empty iff the
/// commutant is commutative (no noiseless subsystem exists).
pub fn noiseless_subsystems(bs: &BlockStructure) -> Vec<NSDescriptor> {
    bs.sectors()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.n >= 2)
        .map(|(idx, s)| NSDescriptor {
            label: s.label.clone(),
            ns_dim: s.n,
            gauge_dim: s.d,
            sector_isometry: ComplexMatrix::from(
                bs.sector_columns(idx).expect("sector index valid"),
            ),
        })
        .collect()
}

pub fn to_block_basis(x: &Operator, bs: &BlockStructure) -> Result<Operator> {
    bs.to_block_basis(x)
}

/// Independent certification of a block structure against an algebra.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub unitarity_residual: f64,
    pub max_algebra_residual: f64,
    pub max_commutant_residual: f64,
    pub hilbert_dim: usize,
    pub sector_dim_sum: usize,
    pub algebra_dim: usize,
    pub sum_d_squared: usize,
    pub commutant_dim: usize,
    pub sum_n_squared: usize,
    pub tol: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn dims_ok(&self) -> bool {
        self.hilbert_dim == self.sector_dim_sum
            && self.algebra_dim == self.sum_d_squared
            && self.commutant_dim == self.sum_n_squared
    }
}

/// Verify that `bs` realizes the block decomposition of `alg`: checks the
/// unitarity of the basis change, the 1 (x) M form of every algebra basis
/// element, the M' (x) 1 form of every commutant basis element, and the
/// dimension identities sum n_J d_J = dim H, sum d_J^2 = dim A,
/// sum n_J^2 = dim A'.
pub fn verify_structure(
    alg: &OperatorAlgebra,
    bs: &BlockStructure,
    tol: f64,
) -> Result<VerificationReport> {
    if alg.dim() != bs.dim() {
        return Err(NsError::DimensionMismatch {
            expected: alg.dim(),
            got: bs.dim(),
        });
    }
    let comm = algebra::commutant(alg.basis(), algebra::DEFAULT_TOL)?;
    Ok(verify_with_commutant(alg, &comm, bs, tol))
}

fn verify_with_commutant(
    alg: &OperatorAlgebra,
    comm: &OperatorAlgebra,
    bs: &BlockStructure,
    tol: f64,
) -> VerificationReport {
    let unitarity_residual = bs.basis_change().unitarity_residual();
    let max_algebra_residual = alg
        .basis()
        .iter()
        .map(|a| bs.algebra_form_residual(a).expect("dims match"))
        .fold(0.0f64, f64::max);
    let max_commutant_residual = comm
        .basis()
        .iter()
        .map(|c| bs.commutant_form_residual(c).expect("dims match"))
        .fold(0.0f64, f64::max);
    let sector_dim_sum = bs.sectors().iter().map(Sector::block_dim).sum();
    let sum_d_squared = bs.sectors().iter().map(|s| s.d * s.d).sum();
    let sum_n_squared = bs.sectors().iter().map(|s| s.n * s.n).sum();
    let report = VerificationReport {
        unitarity_residual,
        max_algebra_residual,
        max_commutant_residual,
        hilbert_dim: bs.dim(),
        sector_dim_sum,
        algebra_dim: alg.basis_len(),
        sum_d_squared,
        commutant_dim: comm.basis_len(),
        sum_n_squared,
        tol,
        pass: false,
    };
    VerificationReport {
        pass: unitarity_residual < tol
            && max_algebra_residual < tol
            && max_commutant_residual < tol
            && report.dims_ok(),
        ..report
    }
}

/// Compute the block structure of a dagger-closed unital algebra.
///
/// Seeded and deterministic: identical (basis, seed) inputs give identical
/// output. Accidental eigenvalue collisions in the random splitting are
/// detected by the verification pass and retried with successor seeds.
pub fn decompose(alg: &OperatorAlgebra, seed: u64, tol: f64) -> Result<BlockStructure> {
    precheck(alg, tol)?;
    let mut last_diag = String::new();
    for attempt in 0..MAX_RETRIES {
        // The commutant draw is part of the attempt: a non-generic draw can
        // only make it too large, and the verification below rejects that.
        let comm = algebra::commutant_of_span(alg.basis(), tol, seed + attempt)?;
        let center = intersect_spans(
            alg.basis(),
            comm.basis(),
            algebra::subspace_angle_tol(tol),
        );
        if center.is_empty() {
            last_diag = "algebra has an empty center; it cannot be unital".into();
            continue;
        }
        match try_decompose(alg, &comm, &center, seed + attempt, tol) {
            Ok(bs) => {
                let report = verify_with_commutant(alg, &comm, &bs, VERIFY_TOL.max(tol));
                if report.pass {
                    return Ok(bs);
                }
                last_diag = format!(
                    "verification failed: unitarity {:.2e}, algebra form {:.2e}, commutant form {:.2e}, dims ok {}",
                    report.unitarity_residual,
                    report.max_algebra_residual,
                    report.max_commutant_residual,
                    report.dims_ok()
                );
            }
            Err(msg) => last_diag = msg,
        }
    }
    Err(NsError::DecompositionFailed {
        attempts: MAX_RETRIES as usize,
        diagnostics: last_diag,
    })
}

fn precheck(alg: &OperatorAlgebra, tol: f64) -> Result<()> {
    let check_tol = (tol * 100.0).max(1e-8);
    if !alg.is_unital() {
        return Err(NsError::InvalidAlgebra(
            "decomposition requires a unital algebra".into(),
        ));
    }
    if alg.span_residual(&Operator::identity(alg.dim()))? > check_tol * (alg.dim() as f64).sqrt()
    {
        return Err(NsError::InvalidAlgebra(
            "identity not contained in the algebra span".into(),
        ));
    }
    for (i, b) in alg.basis().iter().enumerate() {
        if alg.span_residual(&b.dagger())? > check_tol {
            return Err(NsError::InvalidAlgebra(format!(
                "algebra is not dagger-closed (basis element {i})"
            )));
        }
    }
    Ok(())
}

/// One decomposition attempt; errors are genericity diagnostics that the
/// caller converts into seed retries.
fn try_decompose(
    alg: &OperatorAlgebra,
    comm: &OperatorAlgebra,
    center: &[Operator],
    seed: u64,
    _tol: f64,
) -> std::result::Result<BlockStructure, String> {
    let dim = alg.dim();
    let mut rng = sampling::seeded_rng(seed);

    // Step 1: split H into sectors with a generic central element.
    let z0 = sampling::random_hermitian_in_span(center, &mut rng);
    let (vals, vecs) = hermitian_eigen(z0.matrix());
    let clusters = cluster_eigenvalues(&vals, CLUSTER_GAP);
    if clusters.len() != center.len() {
        return Err(format!(
            "central element split into {} clusters but the center has dimension {}",
            clusters.len(),
            center.len()
        ));
    }

    struct RawSector {
        n: usize,
        d: usize,
        columns: CMatrix,
        fingerprint: f64,
    }
    let mut raw: Vec<RawSector> = Vec::new();

    for cl in &clusters {
        let m = cl.len();
        let sector_basis = vecs.columns(cl.start, m).into_owned();

        // Step 2: split the sector with a generic commutant element; its
        // eigenspaces are the lambda-slices (each a copy of the gauge
        // factor).
        let y1 = sampling::random_hermitian_in_span(comm.basis(), &mut rng);
        let yj = (sector_basis.adjoint() * y1.matrix() * &sector_basis).scale(1.0);
        let yj = (yj.clone() + yj.adjoint()).scale(0.5);
        let (svals, svecs) = hermitian_eigen(&yj);
        let slices = cluster_eigenvalues(&svals, CLUSTER_GAP);
        let d = slices[0].len();
        if slices.iter().any(|s| s.len() != d) || d * slices.len() != m {
            return Err(format!(
                "sector of dimension {m} split into unequal slices {:?}",
                slices.iter().map(|s| s.len()).collect::<Vec<_>>()
            ));
        }
        let n = slices.len();

        // Step 3: align the gauge bases of the slices by transporting the
        // reference slice with a second generic commutant element. Within
        // the sector any commutant element maps slice 1 to slice l by a
        // scalar multiple of a unitary, so the polar factor is exactly the
        // transport.
        let w: Vec<CMatrix> = slices
            .iter()
            .map(|s| {
                let coords = svecs.columns(s.start, d);
                &sector_basis * coords
            })
            .collect();
        let mut aligned: Vec<CMatrix> = Vec::with_capacity(n);
        aligned.push(w[0].clone());
        if n > 1 {
            let y2 = sampling::random_hermitian_in_span(comm.basis(), &mut rng);
            for wl in w.iter().skip(1) {
                let t = wl.adjoint() * y2.matrix() * &w[0];
                let u = polar_unitary(&t).ok_or_else(|| {
                    "transport between multiplicity slices was near-singular".to_string()
                })?;
                aligned.push(wl * u);
            }
        }

        let mut columns = CMatrix::zeros(dim, m);
        for (l, wl) in aligned.iter().enumerate() {
            for mu in 0..d {
                columns.set_column(l * d + mu, &wl.column(mu));
            }
        }

        // Canonical, seed-independent tiebreak: first moment of the sector
        // projector against the coordinate index.
        let fingerprint = (0..dim)
            .map(|i| {
                let w: f64 = (0..m).map(|k| columns[(i, k)].norm_sqr()).sum();
                i as f64 * w
            })
            .sum();
        raw.push(RawSector {
            n,
            d,
            columns,
            fingerprint,
        });
    }

    raw.sort_by(|a, b| {
        (a.d, a.n)
            .cmp(&(b.d, b.n))
            .then(a.fingerprint.total_cmp(&b.fingerprint))
    });

    let mut u = CMatrix::zeros(dim, dim);
    let mut sectors = Vec::with_capacity(raw.len());
    let mut offset = 0;
    for (idx, rs) in raw.iter().enumerate() {
        for k in 0..rs.columns.ncols() {
            u.set_column(offset + k, &rs.columns.column(k));
        }
        sectors.push(Sector {
            label: SectorLabel {
                index: idx,
                tag: None,
            },
            n: rs.n,
            d: rs.d,
            offset,
        });
        offset += rs.n * rs.d;
    }
    if offset != dim {
        return Err(format!("sector dimensions sum to {offset}, expected {dim}"));
    }
    BlockStructure::new(dim, sectors, Operator::from_matrix_unchecked(u))
        .map_err(|e| e.to_string())
}
