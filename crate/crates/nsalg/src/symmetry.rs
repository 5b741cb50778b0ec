//! Finite unitary group representations, the symmetrizing (twirl)
//! projector, noise-suppression checks, and the symmetrized-universality
//! test via numerical Lie closure.
//!
//! The twirl pi(X) = |G|^-1 sum_g U_g X U_g' projects onto the commutant of
//! the group algebra: it is idempotent, trace-preserving and
//! hermiticity-preserving. Compact/continuous symmetries are supported
//! through finite-dimensional images only: supply Lie-algebra generators
//! and use the generated associative algebra in place of the group algebra.

use serde::{Deserialize, Serialize};

use crate::algebra::{self, OperatorAlgebra};
use crate::error::{NsError, Result};
use crate::linalg::{orthonormal_span, real_matrix_rank, residual_against, HsSpan};
use crate::operator::{C64, CMatrix, Operator};
use crate::wedderburn::{self, BlockStructure};

/// A finite group of unitaries given by an explicit element list, closed
/// under product and inverse, containing the identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupRep {
    dim: usize,
    elements: Vec<Operator>,
    labels: Option<Vec<String>>,
}

impl GroupRep {
    pub fn new(dim: usize, elements: Vec<Operator>, labels: Option<Vec<String>>) -> Result<Self> {
        let g = Self {
            dim,
            elements,
            labels,
        };
        g.check_dims()?;
        Ok(g)
    }

    fn check_dims(&self) -> Result<()> {
        for e in &self.elements {
            if e.dim() != self.dim {
                return Err(NsError::DimensionMismatch {
                    expected: self.dim,
                    got: e.dim(),
                });
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.elements.len() {
                return Err(NsError::InvalidInput(format!(
                    "{} labels for {} elements",
                    labels.len(),
                    self.elements.len()
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Check unitarity of every element, presence of the identity, and
    /// closure under products.
    pub fn validate(&self, tol: f64) -> Result<()> {
        self.check_dims()?;
        for (i, e) in self.elements.iter().enumerate() {
            let r = e.unitarity_residual();
            if r > tol {
                return Err(NsError::InvalidInput(format!(
                    "group element {i} is not unitary (residual {r:.3e})"
                )));
            }
        }
        let id = Operator::identity(self.dim);
        let closure_tol = tol.max(1e-8);
        if !self
            .elements
            .iter()
            .any(|e| e.sub(&id).unwrap().hs_norm() < closure_tol)
        {
            return Err(NsError::InvalidInput("identity missing from group".into()));
        }
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let p = a.mul(b)?;
                if !self
                    .elements
                    .iter()
                    .any(|e| e.sub(&p).unwrap().hs_norm() < closure_tol)
                {
                    return Err(NsError::InvalidInput(format!(
                        "product of elements {i} and {j} escapes the group"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Breadth-first closure of unitary generators under multiplication, with
/// duplicate detection by Hilbert-Schmidt distance. Fails once the order
/// would exceed `max_order`, which usually signals a continuous group.
pub fn close_group(generators: &[Operator], max_order: usize) -> Result<GroupRep> {
    let first = generators
        .first()
        .ok_or(NsError::EmptyInput("group generator list"))?;
    let dim = first.dim();
    for (i, g) in generators.iter().enumerate() {
        if g.dim() != dim {
            return Err(NsError::DimensionMismatch {
                expected: dim,
                got: g.dim(),
            });
        }
        let r = g.unitarity_residual();
        if r > 1e-10 {
            return Err(NsError::InvalidInput(format!(
                "generator {i} is not unitary (residual {r:.3e})"
            )));
        }
    }
    let mut elements = vec![Operator::identity(dim)];
    let mut frontier = vec![0usize];
    while let Some(idx) = frontier.pop() {
        for g in generators {
            let p = elements[idx].mul(g)?;
            let known = elements
                .iter()
                .any(|e| e.sub(&p).unwrap().hs_norm() < 1e-8);
            if !known {
                elements.push(p);
                frontier.push(elements.len() - 1);
                if elements.len() > max_order {
                    return Err(NsError::GroupOrderOverflow { max_order });
                }
            }
        }
    }
    GroupRep::new(dim, elements, None)
}

/// The symmetrizing projector pi(X) = |G|^-1 sum_g U_g X U_g'. The sum runs
/// in element order, so results are reproducible.
pub fn twirl(x: &Operator, group: &GroupRep) -> Result<Operator> {
    if x.dim() != group.dim() {
        return Err(NsError::DimensionMismatch {
            expected: group.dim(),
            got: x.dim(),
        });
    }
    let mut acc = CMatrix::zeros(group.dim(), group.dim());
    for g in group.elements() {
        acc += g.matrix() * x.matrix() * g.matrix().adjoint();
    }
    Ok(Operator::from_matrix_unchecked(
        acc / C64::new(group.order() as f64, 0.0),
    ))
}

/// Outcome of the noise-suppression conditions: (i) the system Hamiltonian
/// is invariant under the group, (ii) every coupling operator is averaged
/// away by the twirl.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuppressionReport {
    /// ||twirl(H_S) - H_S||; condition (i) holds iff below tolerance.
    pub invariance_residual: f64,
    pub condition_i: bool,
    /// Per coupling: ||twirl(S)|| and whether it vanished.
    pub coupling_norms: Vec<f64>,
    pub suppressed: Vec<bool>,
    pub tol: f64,
    /// True iff (i) holds and every coupling is suppressed: the effective
    /// dynamics is unitary.
    pub verdict: bool,
}

pub fn check_suppression(
    h_s: &Operator,
    couplings: &[Operator],
    group: &GroupRep,
    tol: f64,
) -> Result<SuppressionReport> {
    let twirled_h = twirl(h_s, group)?;
    let invariance_residual = twirled_h.sub(h_s)?.hs_norm();
    let condition_i = invariance_residual < tol;
    let mut coupling_norms = Vec::with_capacity(couplings.len());
    let mut suppressed = Vec::with_capacity(couplings.len());
    for s in couplings {
        let norm = twirl(s, group)?.hs_norm();
        coupling_norms.push(norm);
        suppressed.push(norm < tol);
    }
    let verdict = condition_i && suppressed.iter().all(|&b| b);
    Ok(SuppressionReport {
        invariance_residual,
        condition_i,
        coupling_norms,
        suppressed,
        tol,
        verdict,
    })
}

/// Containment of an operator set inside the group-algebra span.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContainmentReport {
    /// Residual of each generator after projection onto span(G), relative
    /// to its norm.
    pub residuals: Vec<f64>,
    pub contained: bool,
    pub tol: f64,
}

/// Check A inside span(CG) and decompose the group algebra. When the
/// containment holds, the true interaction algebra supports at least the
/// noiseless subsystems of the returned structure (multiplicity factors
/// n_J); containment is reported, never assumed.
pub fn ns_from_group(
    alg_gens: &[Operator],
    group: &GroupRep,
    seed: u64,
    tol: f64,
) -> Result<(BlockStructure, ContainmentReport)> {
    let span = orthonormal_span(group.elements(), 1e-12);
    let mut residuals = Vec::with_capacity(alg_gens.len());
    for g in alg_gens {
        if g.dim() != group.dim() {
            return Err(NsError::DimensionMismatch {
                expected: group.dim(),
                got: g.dim(),
            });
        }
        let norm = g.hs_norm();
        let r = residual_against(&span, g).hs_norm();
        residuals.push(if norm > 0.0 { r / norm } else { 0.0 });
    }
    let contained = residuals.iter().all(|&r| r < tol.max(1e-10));
    // The span of a group is automatically a dagger-closed unital algebra.
    let group_algebra = OperatorAlgebra::from_orthonormal_basis(group.dim(), span, true)?;
    let bs = wedderburn::decompose(&group_algebra, seed, algebra::DEFAULT_TOL)?;
    Ok((
        bs,
        ContainmentReport {
            residuals,
            contained,
            tol: tol.max(1e-10),
        },
    ))
}

/// Real Lie algebra generated by antihermitian seeds under iterated
/// commutators, orthonormalized in the Hilbert-Schmidt geometry. Terminates
/// when a full round of pairwise commutators adds nothing.
pub fn lie_closure(seeds: &[Operator], rel_tol: f64) -> Result<Vec<Operator>> {
    let first = seeds.first().ok_or(NsError::EmptyInput("Lie seeds"))?;
    let dim = first.dim();
    let mut span = HsSpan::new(dim, rel_tol);
    for s in seeds {
        if s.dim() != dim {
            return Err(NsError::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        span.try_add(s);
    }
    let max_rounds = 2 * dim * dim + 2;
    for _ in 0..max_rounds {
        let prev = span.len();
        let mut commutators = Vec::new();
        {
            let basis = span.basis();
            for i in 0..prev {
                for j in (i + 1)..prev {
                    commutators.push(basis[i].commutator(&basis[j])?);
                }
            }
        }
        for c in &commutators {
            span.try_add(c);
        }
        if span.len() == prev {
            return Ok(span.into_basis());
        }
    }
    Err(NsError::ClosureOverflow { max_rounds })
}

/// Universality of a symmetrized Hamiltonian pair over the noiseless
/// subsystem of one sector of the group-algebra decomposition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniversalityReport {
    /// Dimension of the real Lie algebra generated by the twirled pair.
    pub lie_dimension: usize,
    /// Dimension of its projection onto the multiplicity factor of the
    /// chosen sector.
    pub projected_dimension: usize,
    pub ns_dim: usize,
    /// Reached u(n): projected dimension >= n^2.
    pub universal_u: bool,
    /// Reached at least su(n): projected dimension >= n^2 - 1.
    pub universal_su: bool,
    pub sector_index: usize,
    pub tol: f64,
}

/// Twirl two hermitian Hamiltonians, close {iK1, iK2} into a real Lie
/// algebra, project it onto the multiplicity factor of sector `sector_idx`
/// of `bs` (the block structure of the group algebra), and report the
/// dimension of the projected span against n_J^2 and n_J^2 - 1.
pub fn symmetrized_universality(
    h1: &Operator,
    h2: &Operator,
    group: &GroupRep,
    bs: &BlockStructure,
    sector_idx: usize,
    tol: f64,
) -> Result<UniversalityReport> {
    for h in [h1, h2] {
        if !h.is_hermitian(1e-10) {
            return Err(NsError::NotHermitian {
                residual: h.hermiticity_residual(),
            });
        }
        if h.dim() != group.dim() {
            return Err(NsError::DimensionMismatch {
                expected: group.dim(),
                got: h.dim(),
            });
        }
    }
    let sector = bs.sector(sector_idx)?.clone();
    let k1 = twirl(h1, group)?;
    let k2 = twirl(h2, group)?;
    let i = C64::new(0.0, 1.0);
    let closure = lie_closure(&[k1.scaled(i), k2.scaled(i)], tol.max(1e-10))?;

    // Project each closure element to its multiplicity-factor component on
    // the sector: partial trace over the gauge factor. Twirled operators
    // lie in the commutant of the group algebra, so they act as M (x) 1.
    let n = sector.n;
    let mut rows = nalgebra::DMatrix::<f64>::zeros(closure.len(), 2 * n * n);
    for (r, l) in closure.iter().enumerate() {
        let blk = bs.sector_block(l, sector_idx)?;
        let m = crate::linalg::ptrace_gauge(&blk, sector.n, sector.d);
        for a in 0..n {
            for b in 0..n {
                rows[(r, 2 * (a * n + b))] = m[(a, b)].re;
                rows[(r, 2 * (a * n + b) + 1)] = m[(a, b)].im;
            }
        }
    }
    // The projected span is a real vector space: rank over R.
    let projected_dimension = real_matrix_rank(&rows, 1e-9);
    Ok(UniversalityReport {
        lie_dimension: closure.len(),
        projected_dimension,
        ns_dim: n,
        universal_u: projected_dimension >= n * n,
        universal_su: projected_dimension + 1 >= n * n,
        sector_index: sector_idx,
        tol,
    })
}
