//! Reduced binary quadratic forms of negative discriminant: class
//! enumeration, Gauss reduction, representation tests, prime-to-class
//! resolution and Heegner points.
//!
//! Forms are positive definite representatives `(A, B, C)` of
//! `Ax^2 + Bxy + Cy^2` with `D = B^2 - 4AC < 0`; the reduced representative
//! satisfies `|B| <= A <= C` with `B >= 0` whenever `|B| = A` or `A = C`.

use num_rational::Ratio;

use crate::arith::{self, is_prime, kronecker, sqrt_mod};
use crate::error::{Error, Result};

/// A positive definite integral binary quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormClass {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl FormClass {
    pub fn discriminant(&self) -> i64 {
        debug_assert!(
            (self.b as i128 * self.b as i128 - 4 * self.a as i128 * self.c as i128).abs()
                <= i64::MAX as i128
        );
        self.b * self.b - 4 * self.a * self.c
    }

    /// `Q(x, y)` in 128-bit arithmetic.
    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        a > 0 && b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn is_primitive(&self) -> bool {
        num_integer::gcd(num_integer::gcd(self.a, self.b), self.c) == 1
    }

    /// Order of the proper automorphism group: 6 for forms equivalent to a
    /// scaled `x^2 + xy + y^2`, 4 for a scaled `x^2 + y^2`, else 2.
    ///
    /// Only valid on reduced forms, where those shapes are `A = B = C` and
    /// `B = 0, A = C`.
    pub fn aut_weight(&self) -> u32 {
        debug_assert!(self.is_reduced());
        if self.a == self.b && self.b == self.c {
            6
        } else if self.b == 0 && self.a == self.c {
            4
        } else {
            2
        }
    }

    /// The inverse class representative `(A, -B, C)`, reduced.
    pub fn inverse(&self) -> FormClass {
        reduce(self.a, -self.b, self.c).expect("inverse of a valid form")
    }

    /// Heegner point `(-B + i sqrt(|D|)) / (2A)` as `(a, b)` with `a` exact.
    pub fn heegner_point(&self) -> (Ratio<i64>, f64) {
        let re = Ratio::new(-self.b, 2 * self.a);
        let im = ((-self.discriminant()) as f64).sqrt() / (2.0 * self.a as f64);
        (re, im)
    }
}

/// All reduced classes of one discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGroupTable {
    pub d: i64,
    /// Sorted reduced representatives, one per proper equivalence class.
    pub classes: Vec<FormClass>,
    pub h: usize,
}

impl ClassGroupTable {
    /// Hurwitz-weighted class count `sum_Q 1/aut_weight(Q)` as an exact
    /// rational over 2·3.
    pub fn hurwitz_weight(&self) -> Ratio<i64> {
        self.classes
            .iter()
            .map(|q| Ratio::new(1, q.aut_weight() as i64))
            .sum()
    }
}

/// Gauss reduction to the unique reduced representative.
pub fn reduce(a: i64, b: i64, c: i64) -> Result<FormClass> {
    let disc = b as i128 * b as i128 - 4 * a as i128 * c as i128;
    if disc >= 0 {
        return Err(Error::Domain(format!(
            "reduce: ({a},{b},{c}) has non-negative discriminant {disc}"
        )));
    }
    if a <= 0 {
        return Err(Error::Domain(format!(
            "reduce: ({a},{b},{c}) is not positive definite"
        )));
    }
    let (mut a, mut b, mut c) = (a as i128, b as i128, c as i128);
    loop {
        if b > a || b <= -a {
            // translate B into (-A, A]
            let two_a = 2 * a;
            let mut r = b.rem_euclid(two_a);
            if r > a {
                r -= two_a;
            }
            c = (r * r - disc) / (4 * a);
            b = r;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        break;
    }
    if a == c && b < 0 {
        b = -b;
    }
    let form = FormClass {
        a: a as i64,
        b: b as i64,
        c: c as i64,
    };
    debug_assert!(form.is_reduced());
    debug_assert_eq!(form.discriminant() as i128, disc);
    Ok(form)
}

/// Enumerate all reduced forms of discriminant `d` (including imprimitive
/// ones when `d` is not fundamental).
pub fn enumerate_classes(d: i64) -> Result<ClassGroupTable> {
    if d >= 0 || d < -100_000_000 {
        return Err(Error::Range(format!("enumerate_classes: D={d} outside [-1e8, -1)")));
    }
    if !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::Domain(format!("enumerate_classes: D={d} not 0 or 1 mod 4")));
    }
    let abs_d = (-d) as u64;
    let mut classes = Vec::new();
    let b_max = (abs_d / 3).isqrt() as i64;
    let mut b = d.rem_euclid(2); // B has the parity of D
    while b <= b_max {
        // 4AC = B^2 + |D|
        let n = (b * b + abs_d as i64) as u64;
        debug_assert_eq!(n % 4, 0);
        let n = n / 4;
        let mut a = b.max(1) as u64;
        while a * a <= n {
            if n % a == 0 {
                let c = n / a;
                classes.push(FormClass {
                    a: a as i64,
                    b,
                    c: c as i64,
                });
                if b > 0 && (b as u64) < a && a < c {
                    classes.push(FormClass {
                        a: a as i64,
                        b: -b,
                        c: c as i64,
                    });
                }
            }
            a += 1;
        }
        b += 2;
    }
    classes.sort_unstable();
    debug_assert!(classes.iter().any(|q| q.a == 1), "principal class missing for D={d}");
    let h = classes.len();
    Ok(ClassGroupTable { d, classes, h })
}

/// Convention for which `D` count as fundamental discriminants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FundamentalConvention {
    /// Squarefree and `D = 1 mod 4` (the convention used throughout the
    /// experiments here).
    Paper,
    /// Field discriminants: `D = 1 mod 4` squarefree, or `D = 4m` with
    /// `m = 2, 3 mod 4` squarefree.
    Standard,
}

pub fn is_fundamental(d: i64, conv: FundamentalConvention) -> bool {
    if d >= 0 {
        return false;
    }
    let squarefree = |n: u64| arith::factorize(n).map(|f| f.is_squarefree()).unwrap_or(false);
    match conv {
        FundamentalConvention::Paper => d.rem_euclid(4) == 1 && squarefree((-d) as u64),
        FundamentalConvention::Standard => {
            if d.rem_euclid(4) == 1 {
                squarefree((-d) as u64)
            } else if d % 4 == 0 {
                let m = d / 4;
                matches!(m.rem_euclid(4), 2 | 3) && squarefree((-m) as u64)
            } else {
                false
            }
        }
    }
}

/// Fundamental discriminants `lo < D < hi`, in increasing `|D|`.
pub fn fundamental_range(lo: i64, hi: i64, conv: FundamentalConvention) -> Vec<i64> {
    assert!(lo < hi && hi <= 0);
    let mut out: Vec<i64> = (lo + 1..hi).filter(|&d| is_fundamental(d, conv)).collect();
    out.sort_unstable_by_key(|&d| -d);
    out
}

/// The set of reduced classes representing the prime `p` (empty iff `p` is
/// inert, one class for ramified `p`, a class and its inverse otherwise).
pub fn prime_to_classes(p: u64, d: i64) -> Result<Vec<FormClass>> {
    if d >= 0 || !is_prime(p) {
        return Err(Error::Domain(format!("prime_to_classes: need prime p (got {p}) and D<0 (got {d})")));
    }
    if kronecker(d as i128, p as i128) == -1 {
        return Ok(Vec::new());
    }
    let forms = if p == 2 {
        // solve z^2 = D mod 8 directly
        match d.rem_euclid(8) {
            1 => vec![(2i64, 1i64), (2, -1)],
            0 => vec![(2, 0)],
            4 => vec![(2, 2), (2, -2)],
            r => {
                return Err(Error::Consistency(format!(
                    "prime_to_classes: chi_D(2) >= 0 but D = {r} mod 8 has no z with z^2 = D"
                )))
            }
        }
    } else {
        let r = sqrt_mod(d as i128, p)?.ok_or_else(|| {
            Error::Consistency(format!("prime_to_classes: chi_D({p}) >= 0 but D={d} has no sqrt mod {p}"))
        })?;
        // lift to z^2 = D mod 4p: fix the parity of z to match D
        let z = if (r as i64).rem_euclid(2) == d.rem_euclid(2) {
            r as i64
        } else {
            (r + p) as i64
        };
        vec![(p as i64, z), (p as i64, -z)]
    };
    let mut out = Vec::new();
    for (a, z) in forms {
        let num = z as i128 * z as i128 - d as i128;
        debug_assert_eq!(num.rem_euclid(4 * a as i128), 0);
        let c = (num / (4 * a as i128)) as i64;
        let q = reduce(a, z, c)?;
        if !out.contains(&q) {
            out.push(q);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Number of integer pairs `(x, y)` with `Q(x, y) = n`, automorphism copies
/// included.
pub fn representation_count(n: u64, q: &FormClass) -> u64 {
    // for fixed y the x-equation has discriminant D y^2 + 4 A n
    let d = q.discriminant() as i128;
    let a = q.a as i128;
    let b = q.b as i128;
    let y_bound = ((4 * a * n as i128) / -d) as u64;
    let y_max = y_bound.isqrt() as i64;
    let mut count = 0u64;
    for y in -y_max..=y_max {
        let disc = d * (y as i128) * (y as i128) + 4 * a * n as i128;
        if disc < 0 {
            continue;
        }
        debug_assert!(disc <= u64::MAX as i128);
        if let Some(s) = arith::exact_sqrt(disc as u64) {
            let s = s as i128;
            for root in [s, -s] {
                let num = -b * y as i128 + root;
                if num.rem_euclid(2 * a) == 0 {
                    count += 1;
                }
                if s == 0 {
                    break;
                }
            }
        }
    }
    count
}

/// Minimal prime value of `Q` up to `bound`: ascending-value search with a
/// lattice representation test per candidate.
pub fn least_prime_represented(q: &FormClass, bound: u64) -> Result<Option<u64>> {
    if bound > 100_000_000 {
        return Err(Error::Range(format!("least_prime_represented: bound={bound} > 1e8")));
    }
    for v in 2..=bound {
        if is_prime(v) && representation_count(v, q) > 0 {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// Fraction of classes of `table` whose reduced coefficients satisfy
/// `max(|A|,|B|,|C|) < sqrt(|D|) * psi`.
pub fn coefficient_bound_fraction(table: &ClassGroupTable, psi: f64) -> f64 {
    assert!(psi > 0.0);
    let bound = ((-table.d) as f64).sqrt() * psi;
    let hits = table
        .classes
        .iter()
        .filter(|q| (q.a.abs().max(q.b.abs()).max(q.c.abs()) as f64) < bound)
        .count();
    hits as f64 / table.h as f64
}
