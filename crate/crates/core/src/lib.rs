//! Exact-arithmetic workbench for word-indexed knapsack polynomials,
//! Boolean-cube inverses, set-multilinear coefficient matrices and
//! Ideal Proof System refutations.

pub mod circuit;
pub mod experiment;
pub mod inverse;
pub mod ips;
pub mod knapsack;
pub mod monomial;
mod packed;
pub mod poly;
pub mod rank;
pub mod scalar;
pub mod var;
pub mod word;

pub use monomial::{Monomial, MonomialOrder};
pub use poly::{Assignment, Degree, Polynomial};
pub use scalar::Scalar;
pub use var::{Bits, VarId};
pub use word::Word;

/// Default limit on the number of variables of any enumerated cube.
pub const DEFAULT_VAR_CAP: usize = 24;
