//! Operator-algebra toolkit for noiseless subsystems.
//!
//! Given the system-side operators coupling a finite-dimensional quantum
//! system to its environment, this crate computes the interaction algebra,
//! its commutant and the block (Wedderburn) structure
//!
//! ```text
//! A  ~  sum_J  1_{n_J} (x) M(d_J, C),      H  ~  sum_J  C^{n_J} (x) C^{d_J}
//! ```
//!
//! and from that structure discovers noiseless subsystems, extracts and
//! verifies error-correcting codes (Knill-Laflamme), performs group
//! symmetrization/twirling, specializes to collective decoherence via
//! Schur-Weyl duality, and demonstrates noise protection dynamically with
//! Lindblad / CP-map simulations.

pub mod algebra;
pub mod codes;
pub mod collective;
pub mod dynamics;
pub mod error;
mod linalg;
pub mod operator;
pub mod wedderburn;
pub mod sampling;
pub mod symmetry;

pub use error::{NsError, Result};
pub use operator::{hs_inner, C64, CMatrix, CVector, Operator};
