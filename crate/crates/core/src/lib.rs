//! Computational lab for primes represented by binary quadratic forms of
//! negative discriminant.
//!
//! The crate is organized around exact arithmetic: class groups and local
//! densities are computed as integers and rationals, and every analytic
//! quantity (`L(1,chi_D)`, archimedean densities, sieve bounds) is exposed
//! together with an independent brute-force oracle so that experiments can
//! cross-validate the closed forms.
//!
//! Module map:
//! - [`arith`]: prime windows, Kronecker symbol, modular square roots,
//!   multiplicative functions.
//! - [`qforms`]: reduced binary quadratic forms, class enumeration,
//!   prime-to-class resolution, Heegner points.
//! - [`dirichlet`]: the character side — `w_D`, Dirichlet's representation
//!   formula, `L(1,chi_D)` by two routes, split-prime counts.
//! - [`localdens`]: exact p-adic densities of `z^2 - 4kxy = m`, Gauss sums,
//!   and the rearranged global density product.
//! - [`archimedean`]: the smooth window weight and the archimedean density
//!   integral.
//! - [`scan`]: windowed lattice scans over `z^2 - 4xy = m` shared by the
//!   sieve and the counting experiments.
//! - [`sieve`]: Selberg upper-bound sieve tables and the sifted-count
//!   inequality.
//! - [`correlate`]: the counting experiments (density main terms, pair
//!   correlation, mass-formula calibration, the main inequality scan).

pub mod arith;
pub mod archimedean;
pub mod correlate;
pub mod dirichlet;
pub mod error;
pub mod localdens;
pub mod qforms;
pub mod scan;
pub mod sieve;

pub use error::{Error, Result};

/// Exact rational scalar used for all local-density and sieve arithmetic.
pub type Rat = num_rational::BigRational;

/// Build a [`Rat`] from an integer pair.
pub fn rat(num: i128, den: i128) -> Rat {
    Rat::new(num.into(), den.into())
}
