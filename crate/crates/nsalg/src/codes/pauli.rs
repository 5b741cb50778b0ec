//! Pauli strings with exact symplectic (GF(2)) arithmetic, stabilizer
//! sector decomposition, and the group-theoretic error-pair classification.
//!
//! A string is stored as x/z bit vectors plus a power of i, representing
//! i^phase * prod_j X_j^{x_j} Z_j^{z_j} with qubit 1 the most significant
//! tensor factor. Products, adjoints and commutation are computed from the
//! bits alone; the dense operator is only materialized on demand.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{NsError, Result};
use crate::linalg::orthonormalize_columns;
use crate::operator::{C64, CMatrix, Operator};
use crate::wedderburn::{BlockStructure, Sector, SectorLabel};

/// A power of i: the phase of a Pauli string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliPhase(u8);

impl PauliPhase {
    pub fn exponent(self) -> u8 {
        self.0 & 3
    }

    pub fn value(self) -> C64 {
        match self.0 & 3 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }
}

impl fmt::Display for PauliPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 & 3 {
            0 => write!(f, "+1"),
            1 => write!(f, "+i"),
            2 => write!(f, "-1"),
            _ => write!(f, "-i"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliString {
    n: usize,
    x: Vec<bool>,
    z: Vec<bool>,
    /// Power of i multiplying the X^x Z^z bit form.
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: vec![false; n],
            z: vec![false; n],
            phase: 0,
        }
    }

    pub fn from_bits(x: Vec<bool>, z: Vec<bool>, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(NsError::DimensionMismatch {
                expected: x.len(),
                got: z.len(),
            });
        }
        Ok(Self {
            n: x.len(),
            x,
            z,
            phase: phase & 3,
        })
    }

    /// Single-qubit letter at `pos` (0-based) on an `n`-qubit register.
    pub fn single(n: usize, pos: usize, letter: char) -> Result<Self> {
        let mut s = Self::identity(n);
        if pos >= n {
            return Err(NsError::IndexOutOfRange {
                index: pos + 1,
                max: n,
            });
        }
        match letter {
            'I' => {}
            'X' => s.x[pos] = true,
            'Z' => s.z[pos] = true,
            'Y' => {
                // Y = i X Z.
                s.x[pos] = true;
                s.z[pos] = true;
                s.phase = 1;
            }
            other => {
                return Err(NsError::InvalidPauli(format!(
                    "unknown Pauli letter '{other}'"
                )))
            }
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> PauliPhase {
        PauliPhase(self.phase)
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z
    }

    pub fn is_identity_bits(&self) -> bool {
        !self.x.iter().chain(self.z.iter()).any(|&b| b)
    }

    pub fn weight(&self) -> usize {
        (0..self.n).filter(|&j| self.x[j] || self.z[j]).count()
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(NsError::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    /// Product, with the phase tracked exactly: per site, Z^b X^c =
    /// (-1)^{bc} X^c Z^b.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let mut flips = 0usize;
        let mut x = vec![false; self.n];
        let mut z = vec![false; self.n];
        for j in 0..self.n {
            if self.z[j] && other.x[j] {
                flips += 1;
            }
            x[j] = self.x[j] ^ other.x[j];
            z[j] = self.z[j] ^ other.z[j];
        }
        Ok(Self {
            n: self.n,
            x,
            z,
            phase: (self.phase + other.phase + 2 * (flips as u8 & 1)) & 3,
        })
    }

    pub fn dagger(&self) -> Self {
        let both = (0..self.n).filter(|&j| self.x[j] && self.z[j]).count();
        Self {
            n: self.n,
            x: self.x.clone(),
            z: self.z.clone(),
            phase: (4 - self.phase + 2 * (both as u8 & 1)) & 3,
        }
    }

    /// Symplectic form: 0 when the strings commute, 1 when they anticommute.
    pub fn symplectic(&self, other: &Self) -> Result<u8> {
        self.check_n(other)?;
        let mut acc = 0usize;
        for j in 0..self.n {
            if self.x[j] && other.z[j] {
                acc += 1;
            }
            if self.z[j] && other.x[j] {
                acc += 1;
            }
        }
        Ok((acc & 1) as u8)
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        Ok(self.symplectic(other)? == 0)
    }

    /// True when the string squares to the identity (equivalently, is
    /// hermitian), as every stabilizer element must.
    pub fn is_involution(&self) -> bool {
        let both = (0..self.n).filter(|&j| self.x[j] && self.z[j]).count();
        (self.phase as usize + both) % 2 == 0
    }

    /// Dense operator on dimension 2^n; qubit 1 is the most significant
    /// factor.
    pub fn to_operator(&self) -> Operator {
        let dim = 1usize << self.n;
        let mut mat = CMatrix::zeros(dim, dim);
        // Column c maps to row c ^ xmask with a sign from the Z bits of c.
        let mut xmask = 0usize;
        let mut zmask = 0usize;
        for j in 0..self.n {
            let bit = 1usize << (self.n - 1 - j);
            if self.x[j] {
                xmask |= bit;
            }
            if self.z[j] {
                zmask |= bit;
            }
        }
        let phase = PauliPhase(self.phase).value();
        for c in 0..dim {
            let sign = if (c & zmask).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            mat[(c ^ xmask, c)] = phase * C64::new(sign, 0.0);
        }
        Operator::from_matrix_unchecked(mat)
    }
}

impl FromStr for PauliString {
    type Err = NsError;

    /// Parse strings like "XZI", "-iXZ", "+YY". The letter Y contributes a
    /// factor i per site to the bit-form phase, so parse and print
    /// round-trip exactly.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim();
        let (sign, rest) = if let Some(r) = body.strip_prefix("-i") {
            (3u8, r)
        } else if let Some(r) = body.strip_prefix("+i") {
            (1u8, r)
        } else if let Some(r) = body.strip_prefix('i') {
            (1u8, r)
        } else if let Some(r) = body.strip_prefix('-') {
            (2u8, r)
        } else if let Some(r) = body.strip_prefix('+') {
            (0u8, r)
        } else {
            (0u8, body)
        };
        if rest.is_empty() {
            return Err(NsError::InvalidPauli(format!(
                "no Pauli letters in '{s}'"
            )));
        }
        let n = rest.chars().count();
        let mut x = vec![false; n];
        let mut z = vec![false; n];
        let mut phase = sign;
        for (j, ch) in rest.chars().enumerate() {
            match ch {
                'I' => {}
                'X' => x[j] = true,
                'Z' => z[j] = true,
                'Y' => {
                    x[j] = true;
                    z[j] = true;
                    phase = (phase + 1) & 3;
                }
                other => {
                    return Err(NsError::InvalidPauli(format!(
                        "unknown Pauli letter '{other}' in '{s}'"
                    )))
                }
            }
        }
        Ok(Self { n, x, z, phase })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut phase = self.phase;
        let mut body = String::with_capacity(self.n);
        for j in 0..self.n {
            body.push(match (self.x[j], self.z[j]) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => {
                    phase = (phase + 3) & 3;
                    'Y'
                }
            });
        }
        let prefix = match phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{body}")
    }
}

/// GF(2) row reduction over [x|z] bit rows; returns the rank.
fn gf2_rank(rows: &mut Vec<Vec<bool>>) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] {
                let (a, b) = if r < rank {
                    let (lo, hi) = rows.split_at_mut(rank);
                    (&mut lo[r], &hi[0])
                } else {
                    let (lo, hi) = rows.split_at_mut(r);
                    (&mut hi[0], &lo[rank])
                };
                for c in 0..width {
                    a[c] ^= b[c];
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn sym_row(p: &PauliString) -> Vec<bool> {
    p.x.iter().chain(p.z.iter()).copied().collect()
}

/// Solve sum_{j in S} row_j = target over GF(2); returns the subset mask.
fn gf2_solve(rows: &[Vec<bool>], target: &[bool]) -> Option<Vec<bool>> {
    let width = target.len();
    // Augmented elimination tracking the combination of original rows.
    let mut work: Vec<(Vec<bool>, Vec<bool>)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut tag = vec![false; rows.len()];
            tag[i] = true;
            (r.clone(), tag)
        })
        .collect();
    let mut t = target.to_vec();
    let mut t_tag = vec![false; rows.len()];
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..work.len()).find(|&r| work[r].0[col]) else {
            continue;
        };
        work.swap(rank, pivot);
        let (pivot_row, pivot_tag) = (work[rank].0.clone(), work[rank].1.clone());
        for (row, tag) in work.iter_mut() {
            if row[col] && *row != pivot_row {
                for c in 0..width {
                    row[c] ^= pivot_row[c];
                }
                for c in 0..rows.len() {
                    tag[c] ^= pivot_tag[c];
                }
            }
        }
        if t[col] {
            for c in 0..width {
                t[c] ^= pivot_row[c];
            }
            for c in 0..rows.len() {
                t_tag[c] ^= pivot_tag[c];
            }
        }
        rank += 1;
    }
    if t.iter().any(|&b| b) {
        None
    } else {
        Some(t_tag)
    }
}

fn validate_stabilizer_generators(n: usize, gens: &[PauliString]) -> Result<()> {
    for (i, g) in gens.iter().enumerate() {
        if g.num_qubits() != n {
            return Err(NsError::DimensionMismatch {
                expected: n,
                got: g.num_qubits(),
            });
        }
        if !g.is_involution() {
            return Err(NsError::InvalidStabilizer(format!(
                "generator {i} ({g}) does not square to the identity"
            )));
        }
        if g.is_identity_bits() {
            return Err(NsError::InvalidStabilizer(format!(
                "generator {i} ({g}) is proportional to the identity"
            )));
        }
    }
    for i in 0..gens.len() {
        for j in (i + 1)..gens.len() {
            if !gens[i].commutes_with(&gens[j])? {
                return Err(NsError::InvalidStabilizer(format!(
                    "generators {i} and {j} anticommute"
                )));
            }
        }
    }
    let mut rows: Vec<Vec<bool>> = gens.iter().map(sym_row).collect();
    if gf2_rank(&mut rows) != gens.len() {
        return Err(NsError::InvalidStabilizer(
            "generators are dependent over GF(2)".into(),
        ));
    }
    Ok(())
}

/// Decompose the register into the 2^k joint eigenspaces of an abelian
/// stabilizer group with k independent generators. Every sector has
/// multiplicity 2^{N-k} and a one-dimensional irrep; the sector label is
/// the syndrome integer (bit j set means generator j has eigenvalue -1,
/// with generator 0 the least significant bit), and sectors are listed in
/// syndrome order.
pub fn stabilizer_decompose(n: usize, gens: &[PauliString]) -> Result<BlockStructure> {
    validate_stabilizer_generators(n, gens)?;
    let k = gens.len();
    if n == 0 || n > 20 {
        return Err(NsError::InvalidInput(format!(
            "qubit count {n} out of supported range 1..=20"
        )));
    }
    let dim = 1usize << n;
    let block = 1usize << (n - k);
    let dense: Vec<Operator> = gens.iter().map(PauliString::to_operator).collect();
    let mut u = CMatrix::zeros(dim, dim);
    let mut sectors = Vec::with_capacity(1 << k);
    let mut offset = 0usize;
    for s in 0..(1usize << k) {
        let mut proj = CMatrix::identity(dim, dim);
        for (j, g) in dense.iter().enumerate() {
            let sign = if (s >> j) & 1 == 0 { 1.0 } else { -1.0 };
            let half = (CMatrix::identity(dim, dim) + g.matrix() * C64::new(sign, 0.0))
                .scale(0.5);
            proj = half * proj;
        }
        let basis = orthonormalize_columns(&proj, 1e-8);
        if basis.ncols() != block {
            return Err(NsError::InvalidStabilizer(format!(
                "syndrome {s} eigenspace has dimension {} instead of {block}",
                basis.ncols()
            )));
        }
        for c in 0..block {
            u.set_column(offset + c, &basis.column(c));
        }
        sectors.push(Sector {
            label: SectorLabel {
                index: s,
                tag: Some(format!("s={s:0k$b}", k = k.max(1))),
            },
            n: block,
            d: 1,
            offset,
        });
        offset += block;
    }
    BlockStructure::new(dim, sectors, Operator::from_matrix_unchecked(u))
}

/// Outcome of the correctability test for a pair of Pauli errors against a
/// stabilizer group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum ErrorPairClass {
    /// e_i' e_j lies in the group up to the reported phase.
    InGroup { phase: PauliPhase },
    /// e_i' e_j anticommutes with at least one group element.
    Anticommutes,
    /// Neither: the pair violates the correctability condition.
    Undetectable,
}

/// Classify e_i' e_j against the stabilizer group: membership is decided by
/// a GF(2) solve over the generators (phases surfaced separately), and the
/// anticommutation test reduces to the symplectic form against the
/// generators.
pub fn classify_error_pair(
    e_i: &PauliString,
    e_j: &PauliString,
    gens: &[PauliString],
) -> Result<ErrorPairClass> {
    e_i.check_n(e_j)?;
    if !gens.is_empty() {
        validate_stabilizer_generators(e_i.num_qubits(), gens)?;
    }
    let p = e_i.dagger().mul(e_j)?;
    // A product anticommutes with some group element iff it anticommutes
    // with some generator.
    for g in gens {
        if !p.commutes_with(g)? {
            return Ok(ErrorPairClass::Anticommutes);
        }
    }
    let rows: Vec<Vec<bool>> = gens.iter().map(sym_row).collect();
    match gf2_solve(&rows, &sym_row(&p)) {
        Some(mask) => {
            let mut prod = PauliString::identity(p.num_qubits());
            for (j, &take) in mask.iter().enumerate() {
                if take {
                    prod = prod.mul(&gens[j])?;
                }
            }
            let ratio = (p.phase + 4 - prod.phase) & 3;
            Ok(ErrorPairClass::InGroup {
                phase: PauliPhase(ratio),
            })
        }
        None => Ok(ErrorPairClass::Undetectable),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print_round_trip() {
        for s in ["XZI", "-iXZ", "YY", "iZ", "-III", "+XY"] {
            let p = ps(s);
            let printed = p.to_string();
            let again: PauliString = printed.parse().unwrap();
            assert_eq!(p, again, "via {printed}");
        }
        assert_eq!(ps("+XY").to_string(), "XY");
        assert_eq!(ps("-iXZ").to_string(), "-iXZ");
    }

    #[test]
    fn products_match_dense_operators() {
        let cases = [("XI", "ZI"), ("YY", "XZ"), ("-iXZ", "iYI"), ("ZZ", "XX")];
        for (a, b) in cases {
            let (pa, pb) = (ps(a), ps(b));
            let dense = pa.to_operator().mul(&pb.to_operator()).unwrap();
            let sym = pa.mul(&pb).unwrap().to_operator();
            assert!(
                dense.sub(&sym).unwrap().hs_norm() < 1e-14,
                "{a} * {b}"
            );
        }
    }

    #[test]
    fn dagger_matches_dense() {
        for s in ["Y", "iX", "-iYZ", "XYZ"] {
            let p = ps(s);
            let dense = p.to_operator().dagger();
            let sym = p.dagger().to_operator();
            assert!(dense.sub(&sym).unwrap().hs_norm() < 1e-14, "{s}");
        }
    }

    #[test]
    fn commutation_matches_dense() {
        let cases = [("X", "Z", false), ("XX", "ZZ", true), ("XI", "IZ", true)];
        for (a, b, expect) in cases {
            assert_eq!(ps(a).commutes_with(&ps(b)).unwrap(), expect);
            let com = ps(a)
                .to_operator()
                .commutator(&ps(b).to_operator())
                .unwrap();
            assert_eq!(com.hs_norm() < 1e-14, expect);
        }
    }

    #[test]
    fn single_parity_check_splits_into_two_sectors() {
        let bs = stabilizer_decompose(2, &[ps("ZZ")]).unwrap();
        let dims: Vec<(usize, usize)> =
            bs.sectors().iter().map(|s| (s.n, s.d)).collect();
        assert_eq!(dims, vec![(2, 1), (2, 1)]);
    }

    #[test]
    fn bit_flip_code_has_four_syndrome_sectors() {
        let bs = stabilizer_decompose(3, &[ps("ZZI"), ps("IZZ")]).unwrap();
        assert_eq!(bs.sectors().len(), 4);
        assert!(bs.sectors().iter().all(|s| s.n == 2 && s.d == 1));
        // Every generator is diagonal with +-1 entries in the block basis.
        for g in [ps("ZZI"), ps("IZZ")] {
            let b = bs.to_block_basis(&g.to_operator()).unwrap();
            for i in 0..8 {
                for j in 0..8 {
                    let v = b.matrix()[(i, j)];
                    if i == j {
                        assert!((v.norm() - 1.0).abs() < 1e-10);
                        assert!(v.im.abs() < 1e-10);
                    } else {
                        assert!(v.norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn empty_generator_set_is_one_big_sector() {
        let bs = stabilizer_decompose(3, &[]).unwrap();
        assert_eq!(bs.sectors().len(), 1);
        assert_eq!(bs.sectors()[0].n, 8);
        assert_eq!(bs.sectors()[0].d, 1);
    }

    #[test]
    fn rejects_bad_generator_sets() {
        // Anticommuting pair.
        assert!(matches!(
            stabilizer_decompose(2, &[ps("XI"), ps("ZI")]),
            Err(NsError::InvalidStabilizer(_))
        ));
        // Dependent set: ZZ = (ZI)(IZ).
        assert!(matches!(
            stabilizer_decompose(2, &[ps("ZI"), ps("IZ"), ps("ZZ")]),
            Err(NsError::InvalidStabilizer(_))
        ));
        // -I is not allowed (and iX does not square to the identity).
        assert!(matches!(
            stabilizer_decompose(2, &[ps("-II")]),
            Err(NsError::InvalidStabilizer(_))
        ));
        assert!(matches!(
            stabilizer_decompose(2, &[ps("iXI")]),
            Err(NsError::InvalidStabilizer(_))
        ));
    }

    #[test]
    fn classification_of_bit_flip_pairs() {
        let gens = [ps("ZZI"), ps("IZZ")];
        // Same error: product is the identity, trivially in the group.
        assert_eq!(
            classify_error_pair(&ps("XII"), &ps("XII"), &gens).unwrap(),
            ErrorPairClass::InGroup {
                phase: PauliPhase(0)
            }
        );
        // Distinct single-qubit flips anticommute with a generator.
        assert_eq!(
            classify_error_pair(&ps("III"), &ps("XII"), &gens).unwrap(),
            ErrorPairClass::Anticommutes
        );
        assert_eq!(
            classify_error_pair(&ps("XII"), &ps("IXI"), &gens).unwrap(),
            ErrorPairClass::Anticommutes
        );
    }

    #[test]
    fn logical_operators_are_undetectable() {
        // X1 X2 commutes with Z1 Z2 but is not in the group.
        let gens = [ps("ZZ")];
        assert_eq!(
            classify_error_pair(&ps("II"), &ps("XX"), &gens).unwrap(),
            ErrorPairClass::Undetectable
        );
    }

    #[test]
    fn in_group_membership_reports_phases() {
        let gens = [ps("ZZI"), ps("IZZ")];
        // ZIZ = (ZZI)(IZZ): in the group with phase +1.
        assert_eq!(
            classify_error_pair(&ps("III"), &ps("ZIZ"), &gens).unwrap(),
            ErrorPairClass::InGroup {
                phase: PauliPhase(0)
            }
        );
        // -ZIZ differs by a sign.
        assert_eq!(
            classify_error_pair(&ps("III"), &ps("-ZIZ"), &gens).unwrap(),
            ErrorPairClass::InGroup {
                phase: PauliPhase(2)
            }
        );
    }
}
