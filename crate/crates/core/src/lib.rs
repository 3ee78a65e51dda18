//! Smoothed counts of integer points on the determinant surface `ad − bc = r`
//! and of the congruence `ad − bc ≡ 1 (mod p)`, their explicit main terms, and
//! the exponential sums and Bessel transforms that control the error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod cli;
pub mod counting;
pub mod error;
pub mod expsums;
pub mod mainterm;
pub mod modp;
pub mod quad;
pub mod scan;
pub mod special;
pub mod spectral;
pub mod sum;
pub mod weights;

pub use counting::{count_fast, count_naive, enumerate_range, CountQuery, CountResult};
pub use error::{Error, Result};
pub use mainterm::{k_constant, main_term_closed, main_term_truncated, reduced_integral, MainTermBreakdown};
pub use quad::QuadratureSpec;
pub use weights::{WeightKind, WeightSpec};
