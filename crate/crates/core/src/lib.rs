//! Exact arithmetic for the generalized Menon identity over `Z_n`.
//!
//! The crate is split the same way the verification work is split:
//!
//! * [`arith`]: gcd conventions, factorization, `φ`, `τ`, Dirichlet
//!   convolution and the iterated divisor function `τ_r`.
//! * [`group_action`]: the group of invertible upper-triangular matrices over
//!   `Z_n`, its action on `Z_n^r`, fixed points, Burnside orbit counting and
//!   divisor-chain orbit invariants.
//! * [`identity`]: the gcd tower `d_k`, both sides of the identity and
//!   verification reports.
//!
//! Every value is an exact integer. Anything that could exceed `u128` is
//! computed with checked arithmetic and surfaces [`Error::Overflow`].

pub mod arith;
pub mod budget;
pub mod error;
pub mod group_action;
pub mod identity;
pub mod sweep;
pub mod union_find;

pub use budget::Budget;
pub use error::{Error, Result};
