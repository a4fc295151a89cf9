//! Smooth integers with few non-zero binary digits.
//!
//! The crate builds explicit sparse smooth numbers from the factorisation of
//! `2^k + 1` into cyclotomic values at `-2`, certifies their smoothness and
//! digit counts by direct computation, and provides exhaustive desk-scale
//! checks for the counting machinery behind them:
//!
//! - [`digits`]: binary digit profiles, binary entropy and the `θ₀(A)` threshold.
//! - [`arith`]: primality, factorisation, Euler and divisor functions, primorials.
//! - [`smoothcount`]: exact `Ψ(x, y)` counting and smooth-number enumeration.
//! - [`cyclotomic`]: cyclotomic polynomials and the factorisation of `2^k ± 1`.
//! - [`construct`]: the primorial power constructions and the balanced numbers.
//! - [`characters`]: exact Dirichlet characters modulo `2^j` and the `T(k)` oracle.
//! - [`survey`]: exhaustive smooth-number surveys and the lemma battery.

pub mod arith;
pub mod characters;
pub mod construct;
pub mod cyclotomic;
pub mod digits;
mod error;
pub mod smoothcount;
pub mod survey;

pub use error::{Error, Result};
