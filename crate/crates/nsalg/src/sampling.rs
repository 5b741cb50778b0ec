//! Seeded random draws used by the randomized decomposition and by tests.
//!
//! Everything here is deterministic given the seed; reports that depend on
//! random draws always carry the seed that produced them.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operator::{C64, CMatrix, CVector, Operator};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn standard_complex(rng: &mut impl Rng) -> C64 {
    C64::new(standard_normal(rng), standard_normal(rng))
}

/// Random complex-linear combination of the given operators.
pub fn random_element_in_span(basis: &[Operator], rng: &mut impl Rng) -> Operator {
    assert!(!basis.is_empty());
    let dim = basis[0].dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for b in basis {
        acc += b.matrix() * standard_complex(rng);
    }
    Operator::from_matrix_unchecked(acc)
}

/// Random hermitian element of the real span of {B, B', i(B - B')}.
/// Always hermitian; commutes with anything commuting with every B and B'.
pub fn random_hermitian_in_span(basis: &[Operator], rng: &mut impl Rng) -> Operator {
    assert!(!basis.is_empty());
    let dim = basis[0].dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for b in basis {
        let a: f64 = standard_normal(rng);
        let c: f64 = standard_normal(rng);
        let bd = b.matrix().adjoint();
        acc += (b.matrix() + &bd) * C64::new(a, 0.0);
        acc += (b.matrix() - &bd) * C64::new(0.0, c);
    }
    Operator::from_matrix_unchecked(acc)
}

pub fn random_operator(dim: usize, rng: &mut impl Rng) -> Operator {
    Operator::from_fn(dim, |_, _| standard_complex(rng))
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Operator {
    random_operator(dim, rng).hermitized()
}

/// Haar-ish random unitary from the QR decomposition of a Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Operator {
    let g = random_operator(dim, rng);
    let qr = g.into_matrix().qr();
    let q = qr.q();
    Operator::from_matrix_unchecked(q)
}

/// Random normalized state vector.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> CVector {
    let v = DVector::from_fn(dim, |_, _| standard_complex(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// A dagger-closed generator set with a known block structure, for tests:
/// picks random elements of U (sum_J 1_{n_J} x M(d_J)) U' for a random U.
/// Returns the generators together with the planted (n_J, d_J) list.
pub fn random_structured_generators(
    sector_dims: &[(usize, usize)],
    gens_per_sector_draw: usize,
    rng: &mut impl Rng,
) -> (Vec<Operator>, Vec<(usize, usize)>) {
    let dim: usize = sector_dims.iter().map(|&(n, d)| n * d).sum();
    assert!(dim > 0);
    let u = random_unitary(dim, rng);
    let mut gens = Vec::new();
    for _ in 0..gens_per_sector_draw {
        let mut block = CMatrix::zeros(dim, dim);
        let mut offset = 0;
        for &(n, d) in sector_dims {
            let m = Operator::from_fn(d, |_, _| standard_complex(rng));
            for l in 0..n {
                for a in 0..d {
                    for b in 0..d {
                        block[(offset + l * d + a, offset + l * d + b)] = m.matrix()[(a, b)];
                    }
                }
            }
            offset += n * d;
        }
        let g = Operator::from_matrix_unchecked(u.matrix() * block * u.matrix().adjoint());
        gens.push(g.dagger());
        gens.push(g);
    }
    (gens, sector_dims.to_vec())
}
