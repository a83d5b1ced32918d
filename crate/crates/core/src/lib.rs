//! Numerical verification of refined AM-GM inequalities.
//!
//! The crate evaluates two-sided (sandwich) bounds on the weighted AM-GM gap
//! and on the gaps in Young's, Bernoulli's, the power-mean, Hölder's,
//! Cauchy's and Bergström's inequalities, the divisor-mean inequality for
//! `σ_k/τ`, and the operator AM-GM inequality for positive definite
//! matrices, and checks each ordering under an explicit tolerance policy.
//!
//! - [`scalar_cf`]: two-point and n-point bounds, reverse Young bounds, Bernoulli.
//! - [`sum_refine`]: power means, Hölder, Cauchy, Bergström.
//! - [`arith_fn`]: divisor functions and divisor-mean bounds (exact for integer `k`).
//! - [`symker`]: symmetric matrix kernel (Jacobi, fractional powers, means, Loewner order).
//! - [`op_ineq`]: matrix sandwiches and their corollaries.
//! - [`refcheck`]: 256-bit reference evaluation and brute-force divisors.
//! - [`verify`]: seeded randomized verification suites.

pub mod arith_fn;
pub mod error;
pub mod op_ineq;
pub mod refcheck;
pub mod scalar_cf;
pub mod sum_refine;
pub mod symker;
pub mod tolerance;
pub mod verify;

pub use error::{CfError, Result};
pub use tolerance::{ScalarSandwich, Tolerance};
