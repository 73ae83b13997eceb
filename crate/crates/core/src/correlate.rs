//! The counting experiments: weighted lattice counts against the density
//! main term, same-class pair correlation, the product-equation witness
//! check, double counting, the mass-formula calibration and the main
//! inequality scan.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::archimedean::{sigma_inf_weighted_tol, SmoothWeight, DEFAULT_QUAD_TOL};
use crate::arith::{self, exact_sqrt, kronecker, PrimeWindow};
use crate::dirichlet::{self, r_total};
use crate::error::{Error, Result};
use crate::localdens::global_sigma_product;
use crate::qforms::{self, ClassGroupTable, FormClass};
use crate::scan::weighted_count;

/// Direct weighted lattice count against the density-product main term.
#[derive(Debug, Clone, Copy)]
pub struct LatticeCountReport {
    pub m: i128,
    pub x: u64,
    pub d1: u64,
    pub d2: u64,
    pub direct_count: f64,
    pub main_term: f64,
    /// `direct/main - 1` when the main term is positive, else 0.
    pub relative_error: f64,
}

/// `#_{w_X} A_{d1,d2}(m)` for `m = D v0^2`, with the singular-series main
/// term.
///
/// The main term is `2 sigma_{inf,w_X} prod_p sigma_p`: the slice integral
/// behind `sigma_inf_weighted` covers one sign of `z`, and every positive
/// slice value is hit by both `z` and `-z`.
pub fn count_a(d: i64, v0: u64, x: u64, d1: u64, d2: u64) -> Result<LatticeCountReport> {
    count_a_tol(d, v0, x, d1, d2, DEFAULT_QUAD_TOL)
}

pub fn count_a_tol(
    d: i64,
    v0: u64,
    x: u64,
    d1: u64,
    d2: u64,
    quad_tol: f64,
) -> Result<LatticeCountReport> {
    let m = d as i128 * (v0 as i128) * (v0 as i128);
    let w = SmoothWeight::standard();
    let direct = weighted_count(m, x, d1, d2, &w)?;
    let sigma_inf = sigma_inf_weighted_tol(x, d1, d2, m, quad_tol)?.sigma_inf;
    let product = global_sigma_product(m, d1 * d2, d)?.value;
    let main = 2.0 * sigma_inf * product;
    let relative_error = if main > 0.0 { direct / main - 1.0 } else { 0.0 };
    Ok(LatticeCountReport {
        m,
        x,
        d1,
        d2,
        direct_count: direct,
        main_term: main,
        relative_error,
    })
}

/// Which prime counter a pair-correlation run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountWeight {
    /// Indicator of the window (the counters of the main inequality).
    Sharp,
    /// The smooth window weight `w(p/X)`.
    Smooth,
}

/// Class resolution of every non-inert prime in a window.
pub fn resolve_window_classes(
    d: i64,
    window: &PrimeWindow,
) -> Result<Vec<(u64, Vec<FormClass>)>> {
    let mut out = Vec::new();
    for &p in &window.primes {
        if kronecker(d as i128, p as i128) >= 0 {
            let set = qforms::prime_to_classes(p, d)?;
            if !set.is_empty() {
                out.push((p, set));
            }
        }
    }
    Ok(out)
}

/// Same-class pair-correlation data for one `(D, X)`.
#[derive(Debug, Clone)]
pub struct PairCorrelation {
    pub d: i64,
    pub x: u64,
    pub weight: CountWeight,
    /// `pi(Q, w, X)` per reduced class.
    pub per_class: Vec<(FormClass, f64)>,
    pub sum_pi: f64,
    pub sum_pi_sq: f64,
    pub pi: u64,
    pub pi_d: u64,
    pub ramified: u64,
    /// `sum_p |class_set(p)|` over non-inert window primes: the exact
    /// bookkeeping identity gives `sum_Q pi(Q, sharp, X)` equal to this.
    pub sum_class_set_sizes: u64,
}

/// Per-class weighted prime counts and their square sum.
pub fn same_class_pair_count(d: i64, x: u64, weight: CountWeight) -> Result<PairCorrelation> {
    let window = arith::primes_in_window(x)?;
    let table = qforms::enumerate_classes(d)?;
    let resolved = resolve_window_classes(d, &window)?;
    let w = SmoothWeight::standard();
    let mut counts: BTreeMap<FormClass, f64> = table.classes.iter().map(|&q| (q, 0.0)).collect();
    let mut sum_class_set_sizes = 0u64;
    let mut ramified = 0u64;
    for (p, set) in &resolved {
        let pw = match weight {
            CountWeight::Sharp => 1.0,
            CountWeight::Smooth => w.eval(*p as f64 / x as f64),
        };
        sum_class_set_sizes += set.len() as u64;
        if kronecker(d as i128, *p as i128) == 0 {
            ramified += 1;
        }
        for q in set {
            *counts.get_mut(q).expect("resolved class is reduced") += pw;
        }
    }
    let per_class: Vec<(FormClass, f64)> = counts.into_iter().collect();
    let sum_pi = per_class.iter().map(|(_, c)| c).sum();
    let sum_pi_sq = per_class.iter().map(|(_, c)| c * c).sum();
    let (pi_d, pi) = dirichlet::split_count_in(d, &window);
    Ok(PairCorrelation {
        d,
        x,
        weight,
        per_class,
        sum_pi,
        sum_pi_sq,
        pi,
        pi_d,
        ramified,
        sum_class_set_sizes,
    })
}

/// Outcome of the product-equation witness search for one `(D, X)`.
#[derive(Debug, Clone)]
pub struct ProdEquationReport {
    pub d: i64,
    pub x: u64,
    /// Same-class pairs `(p1, p2)`, `p1 <= p2`, checked for a witness.
    pub pairs_checked: u64,
    /// Same-class pairs with no `(s, v)` witness inside the bounds.
    /// The forward implication says this stays empty.
    pub missing: Vec<(u64, u64)>,
    /// Diagnostic converse: pairs that admit a witness but whose class
    /// sets do not intersect (logged, not failed).
    pub converse_mismatches: Vec<(u64, u64)>,
}

fn witness_exists(d: i64, x: u64, p1: u64, p2: u64) -> bool {
    // search v with |v| <= 4X/sqrt(|D|), s^2 = 4 p1 p2 + D v^2, |s| <= 4X
    let four_p1p2 = 4 * p1 as i128 * p2 as i128;
    let s_cap = 4 * x as i128;
    let v_cap_sq = (16 * (x as i128) * (x as i128)) / (-d) as i128;
    let mut v = 0i128;
    loop {
        let s_sq = four_p1p2 + d as i128 * v * v;
        if s_sq < 0 {
            return false;
        }
        if v * v > v_cap_sq {
            return false;
        }
        if let Some(s) = exact_sqrt(s_sq as u64) {
            if (s as i128) <= s_cap {
                return true;
            }
        }
        v += 1;
    }
}

/// Forward witness check for every same-class prime pair in the window;
/// converse direction scanned only up to a bounded number of pairs (it is
/// diagnostic, not an assertion).
pub fn prod_equation_check(d: i64, x: u64) -> Result<ProdEquationReport> {
    let window = arith::primes_in_window(x)?;
    let resolved = resolve_window_classes(d, &window)?;
    let mut missing = Vec::new();
    let mut pairs_checked = 0u64;
    for (i, (p1, set1)) in resolved.iter().enumerate() {
        for (p2, set2) in resolved.iter().skip(i) {
            let same_class = set1.iter().any(|q| set2.contains(q));
            if !same_class {
                continue;
            }
            pairs_checked += 1;
            if !witness_exists(d, x, *p1, *p2) {
                missing.push((*p1, *p2));
            }
        }
    }
    // converse diagnostic on a small prefix of all prime pairs
    let mut converse_mismatches = Vec::new();
    let diag: Vec<u64> = window.primes.iter().copied().take(40).collect();
    for (i, &p1) in diag.iter().enumerate() {
        for &p2 in diag.iter().skip(i) {
            if witness_exists(d, x, p1, p2) {
                let s1 = qforms::prime_to_classes(p1, d)?;
                let s2 = qforms::prime_to_classes(p2, d)?;
                if !s1.iter().any(|q| s2.contains(q)) {
                    converse_mismatches.push((p1, p2));
                }
            }
        }
    }
    Ok(ProdEquationReport {
        d,
        x,
        pairs_checked,
        missing,
        converse_mismatches,
    })
}

/// `N(X, D) = sum_{p in window} r(p, D)` with its multiplicity bound
/// `2 w_D (pi_D + #ramified)`, which is `4 pi_D + 4 #ramified` for
/// `D < -4` and stays valid at `D = -3, -4` where `r(p, D)` can reach
/// `2 w_D > 4`.
pub fn double_count_n(d: i64, x: u64) -> Result<(u64, u64)> {
    let window = arith::primes_in_window(x)?;
    let mut n = 0i64;
    let mut ramified = 0u64;
    for &p in &window.primes {
        n += r_total(p, d)?;
        if kronecker(d as i128, p as i128) == 0 {
            ramified += 1;
        }
    }
    let (pi_d, _) = dirichlet::split_count_in(d, &window);
    let w = dirichlet::w_d(d)? as u64;
    Ok((n as u64, 2 * w * (pi_d + ramified)))
}

/// One row of the mass-formula calibration.
#[derive(Debug, Clone, Copy)]
pub struct MassRow {
    pub d: i64,
    /// `2 sum_Q 1/aut_weight(Q)`: both definite sheets, Hurwitz-weighted.
    pub weighted_orbits: f64,
    /// `sqrt(|D|) * prod_p sigma_p(V_{D,1})` via the rearranged product.
    pub volume_side: f64,
    pub ratio: f64,
    /// `D` in `{-3, -4}`: extra-weight rows reported alongside the scan.
    pub special: bool,
}

/// Calibration summary: the ratio must be constant across `D`.
#[derive(Debug, Clone)]
pub struct MassReport {
    pub rows: Vec<MassRow>,
    /// Mean ratio over the non-special rows: the calibration constant.
    pub kappa: f64,
    /// Coefficient of variation over the non-special rows.
    pub cv: f64,
}

/// Hurwitz-weighted orbit count against the local-density product over a
/// list of fundamental discriminants.
pub fn mass_formula_check(d_list: &[i64]) -> Result<MassReport> {
    if d_list.is_empty() {
        return Err(Error::Domain("mass_formula_check: empty discriminant list".into()));
    }
    let mut rows = Vec::new();
    for &d in d_list {
        let table = qforms::enumerate_classes(d)?;
        let weighted = 2.0 * table.hurwitz_weight().to_f64().expect("finite weight");
        let product = global_sigma_product(d as i128, 1, d)?.value;
        let volume_side = ((-d) as f64).sqrt() * product;
        rows.push(MassRow {
            d,
            weighted_orbits: weighted,
            volume_side,
            ratio: weighted / volume_side,
            special: d == -3 || d == -4,
        });
    }
    let plain: Vec<f64> = rows.iter().filter(|r| !r.special).map(|r| r.ratio).collect();
    if plain.is_empty() {
        return Err(Error::Domain("mass_formula_check: need non-special discriminants".into()));
    }
    let mean = plain.iter().sum::<f64>() / plain.len() as f64;
    let var = plain.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / plain.len() as f64;
    Ok(MassReport {
        rows,
        kappa: mean,
        cv: var.sqrt() / mean,
    })
}

/// How the window start is chosen per discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XRule {
    Fixed(u64),
    /// `X = ceil(h(D) log|D|)`, the optimal scale of the main theorem.
    HLogD,
}

impl XRule {
    pub fn apply(&self, h: usize, d: i64) -> u64 {
        match self {
            XRule::Fixed(x) => *x,
            XRule::HLogD => (h as f64 * ((-d) as f64).ln()).ceil().max(2.0) as u64,
        }
    }
}

/// One row of the main-inequality scan.
#[derive(Debug, Clone, Copy)]
pub struct TheoremOneReport {
    pub d: i64,
    pub x: u64,
    pub pi: u64,
    pub pi_d: u64,
    pub h: usize,
    /// Classes hit by some window prime's class set.
    pub r_set: usize,
    /// Inversion orbits `{Q, Q^{-1}}` hit (a class and its inverse
    /// conflated).
    pub r_strict: usize,
    /// `(pi_D / pi)^2`.
    pub lhs: f64,
    /// `(R/h)(1 + h/pi)` with `R = r_set`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Evaluate the main inequality for one discriminant.
pub fn theorem_one_report(d: i64, rule: XRule) -> Result<TheoremOneReport> {
    let table: ClassGroupTable = qforms::enumerate_classes(d)?;
    let x = rule.apply(table.h, d);
    let window = arith::primes_in_window(x)?;
    let resolved = resolve_window_classes(d, &window)?;
    let mut hit: Vec<FormClass> = Vec::new();
    for (_, set) in &resolved {
        for q in set {
            if !hit.contains(q) {
                hit.push(*q);
            }
        }
    }
    let r_set = hit.len();
    let mut orbits: Vec<FormClass> = Vec::new();
    for q in &hit {
        let rep = (*q).min(q.inverse());
        if !orbits.contains(&rep) {
            orbits.push(rep);
        }
    }
    let r_strict = orbits.len();
    let (pi_d, pi) = dirichlet::split_count_in(d, &window);
    debug_assert!(r_set <= table.h && pi_d <= pi);
    let lhs = if pi == 0 {
        0.0
    } else {
        (pi_d as f64 / pi as f64).powi(2)
    };
    let rhs = (r_set as f64 / table.h as f64) * (1.0 + table.h as f64 / pi as f64);
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(TheoremOneReport {
        d,
        x,
        pi,
        pi_d,
        h: table.h,
        r_set,
        r_strict,
        lhs,
        rhs,
        ratio,
    })
}

/// The scan over a family of fundamental discriminants.
pub fn theorem_one_scan(
    d_list: &[i64],
    rule: XRule,
) -> Result<Vec<TheoremOneReport>> {
    d_list.iter().map(|&d| theorem_one_report(d, rule)).collect()
}
