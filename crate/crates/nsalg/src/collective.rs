//! Collective decoherence on N qubits: the collective su(2) operators
//! S_a = sum_i sigma_a^(i), the natural symmetric-group representation
//! (exchange errors), the closed-form total-spin multiplicities, and the
//! clustered-decoherence generalization.
//!
//! Schur-Weyl duality pins the block structure of the collective algebra:
//! sectors are labeled by total spin J with gauge dimension 2J+1 and
//! multiplicity n_J = (2J+1) N! / ((N/2+J+1)! (N/2-J)!).

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algebra::{generate_algebra, OperatorAlgebra, DEFAULT_TOL};
use crate::error::{NsError, Result};
use crate::operator::qubits::{embed_single, sigma_x, sigma_y, sigma_z};
use crate::operator::{C64, CMatrix, CVector, Operator};
use crate::wedderburn::{self, BlockStructure};

/// Half-integer spin value stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfInt {
    twice: u32,
}

impl HalfInt {
    pub fn from_twice(twice: u32) -> Self {
        Self { twice }
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// Gauge dimension of the spin-J irrep.
    pub fn irrep_dim(self) -> usize {
        self.twice as usize + 1
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInt {
    type Err = NsError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            if den.trim() != "2" {
                return Err(NsError::InvalidInput(format!(
                    "spin values use halves, got '{s}'"
                )));
            }
            let n: u32 = num
                .trim()
                .parse()
                .map_err(|_| NsError::InvalidInput(format!("bad spin '{s}'")))?;
            Ok(Self { twice: n })
        } else {
            let n: u32 = t
                .parse()
                .map_err(|_| NsError::InvalidInput(format!("bad spin '{s}'")))?;
            Ok(Self { twice: 2 * n })
        }
    }
}

/// The collective operators of an N-qubit register.
#[derive(Clone, Debug)]
pub struct CollectiveSystem {
    pub n: usize,
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
}

impl CollectiveSystem {
    pub fn ops(&self) -> [&Operator; 3] {
        [&self.sx, &self.sy, &self.sz]
    }

    pub fn ops_vec(&self) -> Vec<Operator> {
        vec![self.sx.clone(), self.sy.clone(), self.sz.clone()]
    }

    /// Casimir sum_a S_a^2; eigenvalue 4 J (J + 1) on the spin-J sector
    /// (the S_a are sums of Pauli matrices, twice the spin operators).
    pub fn casimir(&self) -> Operator {
        let mut acc = Operator::zeros(self.sx.dim());
        for s in self.ops() {
            acc = acc.add(&s.mul(s).unwrap()).unwrap();
        }
        acc
    }
}

/// Collective operators S_a = sum_i sigma_a^(i) on dimension 2^N.
pub fn collective_ops(n: usize) -> Result<CollectiveSystem> {
    if n == 0 || n > 12 {
        return Err(NsError::InvalidInput(format!(
            "qubit count {n} out of supported range 1..=12"
        )));
    }
    let build = |s: &Operator| {
        let mut acc = Operator::zeros(1 << n);
        for i in 0..n {
            acc = acc.add(&embed_single(n, i, s)).unwrap();
        }
        acc
    };
    Ok(CollectiveSystem {
        n,
        sx: build(&sigma_x()),
        sy: build(&sigma_y()),
        sz: build(&sigma_z()),
    })
}

/// A permutation of {1..N}, stored 0-based: position i maps to map[i].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// From a 0-based image list.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &t in &map {
            if t >= n || seen[t] {
                return Err(NsError::InvalidPermutation(format!(
                    "not a bijection on 0..{n}"
                )));
            }
            seen[t] = true;
        }
        Ok(Self { map })
    }

    /// Transposition of 1-based positions a and b.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 || a > n || b > n {
            return Err(NsError::InvalidPermutation(format!(
                "transposition ({a} {b}) out of range 1..={n}"
            )));
        }
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a - 1, b - 1);
        Ok(Self { map })
    }

    /// Parse cycle notation over 1-based labels, e.g. "(1 2)(3)".
    pub fn from_cycles(n: usize, s: &str) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        let trimmed = s.trim();
        if trimmed.is_empty() || trimmed == "()" || trimmed == "e" {
            return Ok(Self { map });
        }
        let mut rest = trimmed;
        while !rest.is_empty() {
            let open = rest
                .find('(')
                .ok_or_else(|| NsError::InvalidPermutation(format!("expected '(' in '{s}'")))?;
            let close = rest[open..]
                .find(')')
                .ok_or_else(|| NsError::InvalidPermutation(format!("unclosed cycle in '{s}'")))?
                + open;
            let cycle: Vec<usize> = rest[open + 1..close]
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| NsError::InvalidPermutation(format!("bad label '{tok}'")))
                })
                .collect::<Result<_>>()?;
            for &v in &cycle {
                if v == 0 || v > n {
                    return Err(NsError::InvalidPermutation(format!(
                        "label {v} out of range 1..={n}"
                    )));
                }
                if used[v - 1] {
                    return Err(NsError::InvalidPermutation(format!(
                        "label {v} repeated in '{s}'"
                    )));
                }
                used[v - 1] = true;
            }
            for w in cycle.windows(2) {
                map[w[0] - 1] = w[1] - 1;
            }
            if cycle.len() > 1 {
                map[cycle[cycle.len() - 1] - 1] = cycle[0] - 1;
            }
            rest = rest[close + 1..].trim_start();
        }
        Self::from_map(map)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    /// self after other: (self * other)(i) = self(other(i)).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(NsError::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self {
            map: (0..self.len()).map(|i| self.map[other.map[i]]).collect(),
        })
    }
}

/// The natural representation of a qubit permutation: tensor factors move,
/// nu(pi) |b_1 ... b_N> places the qubit at slot j onto slot pi(j).
/// Transpositions are the exchange errors.
pub fn perm_rep(n: usize, perm: &Permutation) -> Result<Operator> {
    if perm.len() != n {
        return Err(NsError::InvalidPermutation(format!(
            "permutation of {} elements on {n} qubits",
            perm.len()
        )));
    }
    if n == 0 || n > 20 {
        return Err(NsError::InvalidInput(format!(
            "qubit count {n} out of supported range 1..=20"
        )));
    }
    let dim = 1usize << n;
    let mut mat = CMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut r = 0usize;
        for j in 0..n {
            let bit = (c >> (n - 1 - j)) & 1;
            r |= bit << (n - 1 - perm.apply(j));
        }
        mat[(r, c)] = C64::new(1.0, 0.0);
    }
    Ok(Operator::from_matrix_unchecked(mat))
}

/// Closed-form multiplicity of the total-spin-J sector of N qubits,
/// n_J = (2J+1) N! / ((N/2+J+1)! (N/2-J)!), in exact integer arithmetic.
pub fn predicted_multiplicity(n: usize, j: HalfInt) -> Result<u128> {
    if n == 0 || n > 34 {
        return Err(NsError::InvalidInput(format!(
            "qubit count {n} out of supported range 1..=34"
        )));
    }
    let twice = j.twice() as usize;
    if twice > n || (n - twice) % 2 != 0 {
        return Err(NsError::InvalidInput(format!(
            "spin {j} unreachable for {n} qubits"
        )));
    }
    let a = (n + twice) / 2 + 1; // N/2 + J + 1
    let b = (n - twice) / 2; // N/2 - J
    let numer = (twice as u128 + 1) * factorial(n);
    Ok(numer / (factorial(a) * factorial(b)))
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product::<u128>().max(1)
}

/// All spin values reachable on N qubits, ascending.
pub fn spin_values(n: usize) -> Vec<HalfInt> {
    let start = (n % 2) as u32;
    (0..)
        .map(|k| start + 2 * k)
        .take_while(|&t| t as usize <= n)
        .map(HalfInt::from_twice)
        .collect()
}

/// Decompose the collective algebra of N qubits and relabel the sectors by
/// total spin (inferred from the gauge dimension d = 2J+1). Fails hard if
/// any multiplicity disagrees with the closed form.
pub fn schur_weyl_decompose(n: usize, seed: u64) -> Result<BlockStructure> {
    if n == 0 || n > 10 {
        return Err(NsError::InvalidInput(format!(
            "dense decomposition supported for 1..=10 qubits, got {n}"
        )));
    }
    let sys = collective_ops(n)?;
    let alg = generate_algebra(&sys.ops_vec(), true, DEFAULT_TOL)?;
    let mut bs = wedderburn::decompose(&alg, seed, DEFAULT_TOL)?;
    for idx in 0..bs.sectors().len() {
        let s = &bs.sectors()[idx];
        let two_j = (s.d - 1) as u32;
        let j = HalfInt::from_twice(two_j);
        let expected = predicted_multiplicity(n, j)?;
        if expected != s.n as u128 {
            return Err(NsError::DecompositionFailed {
                attempts: 1,
                diagnostics: format!(
                    "sector J={j}: multiplicity {} disagrees with the closed form {expected}",
                    s.n
                ),
            });
        }
        bs.set_sector_tag(idx, format!("J={j}"));
    }
    Ok(bs)
}

/// One of the four explicit J=1/2 basis states of three qubits, labeled by
/// (alpha, beta): alpha indexes the multiplicity (code) factor, beta the
/// gauge (spin projection) factor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledState {
    pub alpha: usize,
    pub beta: usize,
    pub vector: Vec<(f64, f64)>,
}

impl LabeledState {
    pub fn to_vector(&self) -> CVector {
        DVector::from_iterator(
            self.vector.len(),
            self.vector.iter().map(|&(re, im)| C64::new(re, im)),
        )
    }
}

/// The four explicit three-qubit states spanning the J = 1/2 sector:
///   psi^1_1 = (|010> - |100>)/sqrt(2)
///   psi^1_2 = (|011> - |101>)/sqrt(2)
///   psi^2_1 = (|010> + |100> - 2|001>)/sqrt(6)
///   psi^2_2 = (2|110> - |011> - |101>)/sqrt(6)
/// Fixed beta spans a collective-algebra code (alpha = lambda varies);
/// fixed alpha spans a commutant code.
pub fn paper_three_qubit_states() -> Vec<LabeledState> {
    let s2 = 1.0 / 2.0f64.sqrt();
    let s6 = 1.0 / 6.0f64.sqrt();
    let mut states = Vec::new();
    let mut push = |alpha: usize, beta: usize, amps: Vec<(usize, f64)>| {
        let mut v = vec![(0.0, 0.0); 8];
        for (idx, a) in amps {
            v[idx] = (a, 0.0);
        }
        states.push(LabeledState {
            alpha,
            beta,
            vector: v,
        });
    };
    // Basis index of |abc> is a*4 + b*2 + c.
    push(1, 1, vec![(0b010, s2), (0b100, -s2)]);
    push(1, 2, vec![(0b011, s2), (0b101, -s2)]);
    push(2, 1, vec![(0b010, s6), (0b100, s6), (0b001, -2.0 * s6)]);
    push(2, 2, vec![(0b110, 2.0 * s6), (0b011, -s6), (0b101, -s6)]);
    states
}

/// Clustered decoherence: each cluster couples collectively, different
/// clusters independently. The interaction algebra is the tensor product of
/// the per-cluster collective algebras.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterReport {
    pub cluster_sizes: Vec<usize>,
    /// (multiplicity, gauge dim) per sector, sorted.
    pub computed_sectors: Vec<(usize, usize)>,
    /// Products of per-cluster multiplicities over all spin tuples, sorted.
    pub predicted_sectors: Vec<(usize, usize)>,
    pub ns_dims: Vec<usize>,
    pub max_ns_dim: usize,
    #[serde(skip)]
    pub structure: Option<BlockStructure>,
}

/// Generators S_a restricted to each cluster, and the block structure of
/// the algebra they generate. The per-cluster bases are combined by tensor
/// product (the generated algebra factorizes over clusters), which keeps
/// the closure tractable; sector dimensions are verified against the
/// products of per-cluster multiplicities and the call fails hard on any
/// mismatch.
pub fn cluster_decompose(cluster_sizes: &[usize], seed: u64) -> Result<ClusterReport> {
    if cluster_sizes.is_empty() {
        return Err(NsError::EmptyInput("cluster sizes"));
    }
    let n: usize = cluster_sizes.iter().sum();
    if n == 0 || n > 10 {
        return Err(NsError::InvalidInput(format!(
            "total qubit count {n} out of supported range 1..=10"
        )));
    }
    if cluster_sizes.iter().any(|&c| c == 0) {
        return Err(NsError::InvalidInput("empty cluster".into()));
    }

    // Tensor the per-cluster algebra bases; orthonormality is preserved by
    // the Kronecker product under the HS inner product.
    let mut basis: Vec<Operator> = vec![Operator::identity(1)];
    for &c in cluster_sizes {
        let sys = collective_ops(c)?;
        let sub = generate_algebra(&sys.ops_vec(), true, DEFAULT_TOL)?;
        let mut next = Vec::with_capacity(basis.len() * sub.basis_len());
        for b in &basis {
            for s in sub.basis() {
                next.push(b.kron(s));
            }
        }
        basis = next;
    }
    let alg = OperatorAlgebra::from_orthonormal_basis(1 << n, basis, true)?;
    let bs = wedderburn::decompose(&alg, seed, DEFAULT_TOL)?;

    let mut computed: Vec<(usize, usize)> = bs.sectors().iter().map(|s| (s.n, s.d)).collect();
    computed.sort_unstable();
    let mut predicted: Vec<(usize, usize)> = vec![(1, 1)];
    for &c in cluster_sizes {
        let mut next = Vec::new();
        for j in spin_values(c) {
            let mult = predicted_multiplicity(c, j)? as usize;
            for &(pn, pd) in &predicted {
                next.push((pn * mult, pd * j.irrep_dim()));
            }
        }
        predicted = next;
    }
    predicted.sort_unstable();
    if computed != predicted {
        return Err(NsError::DecompositionFailed {
            attempts: 1,
            diagnostics: format!(
                "cluster sectors {computed:?} disagree with per-cluster products {predicted:?}"
            ),
        });
    }
    let ns_dims: Vec<usize> = wedderburn::noiseless_subsystems(&bs)
        .iter()
        .map(|d| d.ns_dim)
        .collect();
    let max_ns_dim = ns_dims.iter().copied().max().unwrap_or(1);
    Ok(ClusterReport {
        cluster_sizes: cluster_sizes.to_vec(),
        computed_sectors: computed,
        predicted_sectors: predicted,
        ns_dims,
        max_ns_dim,
        structure: Some(bs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::commutant;
    use crate::linalg::{hermitian_eigen, orthonormal_span, residual_against};
    use crate::operator::hs_inner;

    #[test]
    fn single_qubit_collective_ops_are_paulis() {
        let sys = collective_ops(1).unwrap();
        assert!(sys.sx.sub(&sigma_x()).unwrap().hs_norm() == 0.0);
        assert!(sys.sz.sub(&sigma_z()).unwrap().hs_norm() == 0.0);
    }

    #[test]
    fn two_qubit_sz_is_the_magnetization() {
        let sys = collective_ops(2).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| sys.sz.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![2.0, 0.0, 0.0, -2.0]);
    }

    #[test]
    fn su2_commutation_relations_hold_exactly() {
        for n in [1usize, 2, 3] {
            let sys = collective_ops(n).unwrap();
            let c = sys.sx.commutator(&sys.sy).unwrap();
            let expect = sys.sz.scaled(C64::new(0.0, 2.0));
            assert!(c.sub(&expect).unwrap().hs_norm() < 1e-12);
        }
    }

    #[test]
    fn two_qubit_casimir_eigenvalues() {
        // Direct diagonalization oracle: eigenvalues must be 4 J (J + 1).
        let sys = collective_ops(2).unwrap();
        let (vals, _) = hermitian_eigen(sys.casimir().matrix());
        let rounded: Vec<i64> = vals.iter().map(|v| v.round() as i64).collect();
        assert_eq!(rounded, vec![0, 8, 8, 8]);
    }

    #[test]
    fn permutation_rep_basics() {
        let id = perm_rep(2, &Permutation::identity(2)).unwrap();
        assert!(id.sub(&Operator::identity(4)).unwrap().hs_norm() == 0.0);
        let swap = perm_rep(2, &Permutation::transposition(2, 1, 2).unwrap()).unwrap();
        let expect = Operator::from_fn(4, |i, j| {
            let map = [0usize, 2, 1, 3];
            if map[i] == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert!(swap.sub(&expect).unwrap().hs_norm() == 0.0);
    }

    #[test]
    fn three_cycle_has_order_three_and_respects_composition() {
        let c3 = Permutation::from_cycles(3, "(1 2 3)").unwrap();
        let nu = perm_rep(3, &c3).unwrap();
        let cubed = nu.mul(&nu).unwrap().mul(&nu).unwrap();
        assert!(cubed.sub(&Operator::identity(8)).unwrap().hs_norm() < 1e-14);
        let t = Permutation::transposition(3, 1, 2).unwrap();
        let lhs = perm_rep(3, &c3.compose(&t).unwrap()).unwrap();
        let rhs = perm_rep(3, &c3).unwrap().mul(&perm_rep(3, &t).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().hs_norm() < 1e-14);
    }

    #[test]
    fn cycle_parsing_rejects_malformed_words() {
        assert!(Permutation::from_cycles(3, "(1 2").is_err());
        assert!(Permutation::from_cycles(3, "(1 2)(2 3)").is_err());
        assert!(Permutation::from_cycles(3, "(1 4)").is_err());
        let p = Permutation::from_cycles(3, "(1 2)(3)").unwrap();
        assert_eq!(p, Permutation::transposition(3, 1, 2).unwrap());
    }

    #[test]
    fn closed_form_multiplicities_match_the_known_values() {
        let half = |t: u32| HalfInt::from_twice(t);
        assert_eq!(predicted_multiplicity(3, half(1)).unwrap(), 2);
        assert_eq!(predicted_multiplicity(3, half(3)).unwrap(), 1);
        assert_eq!(predicted_multiplicity(4, half(0)).unwrap(), 2);
        assert_eq!(predicted_multiplicity(5, half(1)).unwrap(), 5);
        assert!(predicted_multiplicity(4, half(1)).is_err());
    }

    #[test]
    fn multiplicities_resolve_the_identity_dimension() {
        for n in 1..=20usize {
            let total: u128 = spin_values(n)
                .iter()
                .map(|&j| predicted_multiplicity(n, j).unwrap() * j.irrep_dim() as u128)
                .sum();
            assert_eq!(total, 1u128 << n, "N = {n}");
        }
    }

    #[test]
    fn schur_weyl_matches_the_paper_for_small_n() {
        let bs = schur_weyl_decompose(2, 1).unwrap();
        let dims: Vec<(usize, usize)> = bs.sectors().iter().map(|s| (s.n, s.d)).collect();
        assert_eq!(dims, vec![(1, 1), (1, 3)]);
        assert_eq!(bs.sectors()[0].label.tag.as_deref(), Some("J=0"));
        assert_eq!(bs.sectors()[1].label.tag.as_deref(), Some("J=1"));

        let bs = schur_weyl_decompose(3, 7).unwrap();
        let dims: Vec<(usize, usize)> = bs.sectors().iter().map(|s| (s.n, s.d)).collect();
        assert_eq!(dims, vec![(2, 2), (1, 4)]);
        assert_eq!(bs.sectors()[0].label.tag.as_deref(), Some("J=1/2"));

        let bs = schur_weyl_decompose(4, 3).unwrap();
        let dims: Vec<(usize, usize)> = bs.sectors().iter().map(|s| (s.n, s.d)).collect();
        assert_eq!(dims, vec![(2, 1), (3, 3), (1, 5)]);
    }

    #[test]
    fn paper_states_are_orthonormal_and_sit_in_the_spin_half_sector() {
        let states = paper_three_qubit_states();
        assert_eq!(states.len(), 4);
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let inner = a.to_vector().dotc(&b.to_vector());
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((inner - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
        let bs = schur_weyl_decompose(3, 7).unwrap();
        let q = bs.sector_projector(0).unwrap(); // J = 1/2
        for s in &states {
            let v = s.to_vector();
            assert!((q.matrix() * &v - &v).norm() < 1e-10);
        }
    }

    #[test]
    fn collective_action_is_identical_on_both_multiplicity_copies() {
        // S_x maps beta=1 to beta=2 with the same amplitude for alpha=1,2:
        // the gauge action does not see the multiplicity label.
        let states = paper_three_qubit_states();
        let by_label = |a: usize, b: usize| {
            states
                .iter()
                .find(|s| s.alpha == a && s.beta == b)
                .unwrap()
                .to_vector()
        };
        let sys = collective_ops(3).unwrap();
        let m1 = by_label(1, 2).dotc(&(sys.sx.matrix() * by_label(1, 1)));
        let m2 = by_label(2, 2).dotc(&(sys.sx.matrix() * by_label(2, 1)));
        assert!((m1 - m2).norm() < 1e-12);
        let cross = by_label(2, 2).dotc(&(sys.sx.matrix() * by_label(1, 1)));
        assert!(cross.norm() < 1e-12);
    }

    #[test]
    fn commutant_equals_the_permutation_span() {
        for n in [2usize, 3, 4] {
            let sys = collective_ops(n).unwrap();
            let comm = commutant(&sys.ops_vec(), DEFAULT_TOL).unwrap();
            // Span of all nu(pi).
            let mut perms: Vec<Operator> = Vec::new();
            let mut maps = vec![(0..n).collect::<Vec<usize>>()];
            // All permutations by repeated transposition expansion.
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut next = maps.clone();
                    for m in &maps {
                        let mut sw = m.clone();
                        sw.swap(i, j);
                        next.push(sw);
                    }
                    maps = next;
                }
            }
            maps.sort();
            maps.dedup();
            for m in &maps {
                let p = Permutation::from_map(m.clone()).unwrap();
                perms.push(perm_rep(n, &p).unwrap());
            }
            // Every permutation commutes with every collective operator.
            for p in &perms {
                for s in sys.ops() {
                    assert!(p.commutator(s).unwrap().hs_norm() < 1e-12);
                }
            }
            let span = orthonormal_span(&perms, 1e-10);
            assert_eq!(span.len(), comm.basis_len(), "N = {n}");
            for b in comm.basis() {
                assert!(residual_against(&span, b).hs_norm() < 1e-8);
            }
            for b in &span {
                let mut r = b.clone();
                for c in comm.basis() {
                    let coef = hs_inner(c, &r).unwrap();
                    r = r.sub(&c.scaled(coef)).unwrap();
                }
                assert!(r.hs_norm() < 1e-8);
            }
        }
    }

    #[test]
    fn collective_algebra_is_the_symmetric_operator_space() {
        // Oracle: twirl the full matrix-unit basis over all of S_N and
        // measure the dimension of the symmetric span.
        for n in [2usize, 3] {
            let dim = 1 << n;
            let sys = collective_ops(n).unwrap();
            let alg = generate_algebra(&sys.ops_vec(), true, DEFAULT_TOL).unwrap();
            let mut perm_ops = Vec::new();
            let mut maps: Vec<Vec<usize>> = vec![(0..n).collect()];
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut next = maps.clone();
                    for m in &maps {
                        let mut sw = m.clone();
                        sw.swap(i, j);
                        next.push(sw);
                    }
                    maps = next;
                }
            }
            maps.sort();
            maps.dedup();
            for m in maps {
                perm_ops.push(perm_rep(n, &Permutation::from_map(m).unwrap()).unwrap());
            }
            let mut symmetrized = Vec::new();
            for a in 0..dim {
                for b in 0..dim {
                    let unit = Operator::from_fn(dim, |r, c| {
                        if (r, c) == (a, b) {
                            C64::new(1.0, 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    });
                    let mut acc = Operator::zeros(dim);
                    for p in &perm_ops {
                        acc = acc
                            .add(&Operator::from_matrix_unchecked(
                                p.matrix() * unit.matrix() * p.matrix().adjoint(),
                            ))
                            .unwrap();
                    }
                    symmetrized.push(acc);
                }
            }
            let sym_span = orthonormal_span(&symmetrized, 1e-10);
            assert_eq!(sym_span.len(), alg.basis_len(), "N = {n}");
        }
    }

    #[test]
    fn single_cluster_reduces_to_schur_weyl() {
        let report = cluster_decompose(&[3], 7).unwrap();
        assert_eq!(report.computed_sectors, vec![(1, 4), (2, 2)]);
        assert_eq!(report.ns_dims, vec![2]);
    }

    #[test]
    fn independent_qubits_have_no_noiseless_subsystem() {
        let report = cluster_decompose(&[1, 1], 5).unwrap();
        assert_eq!(report.computed_sectors, vec![(1, 4)]);
        assert!(report.ns_dims.is_empty());
        assert_eq!(report.max_ns_dim, 1);
    }

    #[test]
    fn two_by_two_clusters_have_trivial_multiplicities() {
        let report = cluster_decompose(&[2, 2], 5).unwrap();
        assert_eq!(report.max_ns_dim, 1);
        assert!(report.ns_dims.is_empty());
        assert_eq!(
            report.computed_sectors,
            vec![(1, 1), (1, 3), (1, 3), (1, 9)]
        );
    }

    #[test]
    fn cluster_basis_matches_generated_algebra() {
        // The tensor-product basis spans the same algebra as brute-force
        // closure of the cluster generators.
        let sizes = [1usize, 2];
        let n: usize = sizes.iter().sum();
        let mut gens = Vec::new();
        let mut start = 0;
        for &c in &sizes {
            for s in [sigma_x(), sigma_y(), sigma_z()] {
                let mut acc = Operator::zeros(1 << n);
                for q in start..start + c {
                    acc = acc.add(&embed_single(n, q, &s)).unwrap();
                }
                gens.push(acc);
            }
            start += c;
        }
        let brute = generate_algebra(&gens, true, DEFAULT_TOL).unwrap();
        let report = cluster_decompose(&sizes, 3).unwrap();
        let total: usize = report
            .computed_sectors
            .iter()
            .map(|&(_, d)| d * d)
            .sum();
        assert_eq!(brute.basis_len(), total);
        assert_eq!(brute.basis_len(), 4 * 10); // M(2) (x) A_2
    }

    #[test]
    fn spin_label_round_trips() {
        for s in ["0", "1/2", "1", "3/2", "5"] {
            let h: HalfInt = s.parse().unwrap();
            assert_eq!(h.to_string(), s);
        }
        assert!("2/3".parse::<HalfInt>().is_err());
    }
}
