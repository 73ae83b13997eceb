//! Character-side quantities: the unit count `w_D`, Dirichlet's
//! representation formula, `L(1, chi_D)` by two independent routes, and
//! split-prime window counts.

use crate::arith::{self, kronecker, PrimeWindow};
use crate::error::{Error, Result};
use crate::qforms::{self, FundamentalConvention};

/// How a cached `L(1, chi_D)` value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1Method {
    /// Inverted class number formula `2 pi h / (w sqrt(|D|))`.
    ClassNumber,
    /// Exact finite character sum `-pi |D|^{-3/2} sum_a chi(a) a`.
    CharacterSum,
}

/// A negative discriminant with its cached character data.
#[derive(Debug, Clone)]
pub struct Discriminant {
    pub d: i64,
    /// Squarefree and `D = 1 mod 4`.
    pub fundamental_paper: bool,
    /// Field discriminant in the usual sense.
    pub fundamental_standard: bool,
    pub w: u32,
    pub l1: f64,
    pub l1_method: L1Method,
}

impl Discriminant {
    /// Build the record with `L(1, chi_D)` from the character-sum route.
    pub fn new(d: i64) -> Result<Discriminant> {
        Ok(Discriminant {
            d,
            fundamental_paper: qforms::is_fundamental(d, FundamentalConvention::Paper),
            fundamental_standard: qforms::is_fundamental(d, FundamentalConvention::Standard),
            w: w_d(d)?,
            l1: l1_from_character_sum(d, 4 * (-d) as u64)?,
            l1_method: L1Method::CharacterSum,
        })
    }

    pub fn chi(&self, n: i128) -> i32 {
        kronecker(self.d as i128, n)
    }
}

/// Unit count `w_D`: 6 at `D = -3`, 4 at `D = -4`, 2 below.
pub fn w_d(d: i64) -> Result<u32> {
    match d {
        -3 => Ok(6),
        -4 => Ok(4),
        _ if d < -4 => Ok(2),
        _ => Err(Error::Domain(format!("w_d: D={d} must be <= -3"))),
    }
}

/// Dirichlet's formula `r(n, D) = w_D sum_{e | n} chi_D(e)`, evaluated
/// exactly in integer arithmetic.
pub fn r_total(n: u64, d: i64) -> Result<i64> {
    let w = w_d(d)? as i64;
    let mut sum = 0i64;
    for e in arith::divisors(n)? {
        sum += kronecker(d as i128, e as i128) as i64;
    }
    Ok(w * sum)
}

/// `L(1, chi_D)` from the class number formula: `2 pi h(D) / (w_D sqrt(|D|))`.
pub fn l1_from_class_number(d: i64) -> Result<f64> {
    if !qforms::is_fundamental(d, FundamentalConvention::Standard) {
        return Err(Error::Domain(format!("l1_from_class_number: D={d} not fundamental")));
    }
    let h = qforms::enumerate_classes(d)?.h as f64;
    let w = w_d(d)? as f64;
    Ok(2.0 * std::f64::consts::PI * h / (w * ((-d) as f64).sqrt()))
}

/// Largest absolute partial sum of `chi_D` over one period.
fn max_partial_character_sum(d: i64) -> i64 {
    let q = (-d) as i128;
    let mut s = 0i64;
    let mut best = 0i64;
    for a in 1..q {
        s += kronecker(d as i128, a) as i64;
        best = best.max(s.abs());
    }
    best
}

/// `L(1, chi_D)` by the exact finite sum for odd primitive characters,
/// `L(1, chi_D) = -pi |D|^{-3/2} sum_{a=1}^{|D|-1} chi_D(a) a`,
/// cross-validated against direct partial summation of `sum chi(n)/n`
/// over `terms` terms with an Abel-summation tail bound.
///
/// The partial-sum route is independent of the closed sum; disagreement
/// beyond the tail bound is a hard consistency error, never ignored.
pub fn l1_from_character_sum(d: i64, terms: u64) -> Result<f64> {
    if !qforms::is_fundamental(d, FundamentalConvention::Standard) {
        return Err(Error::Domain(format!("l1_from_character_sum: D={d} not fundamental")));
    }
    let q = (-d) as u64;
    if terms < q {
        return Err(Error::Range(format!("l1_from_character_sum: terms={terms} < |D|={q}")));
    }
    // chi is periodic mod |D|; tabulate one period
    let chi: Vec<i32> = (0..q).map(|a| kronecker(d as i128, a as i128)).collect();
    let closed = {
        let mut s = 0i128;
        for (a, &c) in chi.iter().enumerate() {
            s += c as i128 * a as i128;
        }
        -std::f64::consts::PI * s as f64 / ((q as f64).powi(3) .sqrt())
    };
    let partial: f64 = (1..=terms)
        .map(|n| chi[(n % q) as usize] as f64 / n as f64)
        .sum();
    // |sum_{n>N} chi(n)/n| <= 2 M / N by Abel summation, M the period max
    let tail = 2.0 * max_partial_character_sum(d) as f64 / terms as f64;
    if (closed - partial).abs() > tail + 1e-9 {
        return Err(Error::Consistency(format!(
            "l1_from_character_sum: closed sum {closed} vs partial sum {partial} \
             differ beyond tail bound {tail} for D={d}"
        )));
    }
    Ok(closed)
}

/// `(pi_D, pi)` over the window `[X, 2X)`: split primes (`chi_D = +1`)
/// and all primes. Ramified primes are not counted in `pi_D`.
pub fn split_prime_count(d: i64, x: u64) -> Result<(u64, u64)> {
    let window = arith::primes_in_window(x)?;
    Ok(split_count_in(d, &window))
}

/// Split/total counts over an explicit window.
pub fn split_count_in(d: i64, window: &PrimeWindow) -> (u64, u64) {
    let split = window
        .primes
        .iter()
        .filter(|&&p| kronecker(d as i128, p as i128) == 1)
        .count() as u64;
    (split, window.count())
}
