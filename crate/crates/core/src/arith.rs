//! Integer and prime primitives shared by all modules: segmented prime
//! sieving, the Kronecker symbol, factorization, multiplicative functions
//! and modular square roots.
//!
//! All operations are pure; the supported ranges (window start up to 1e9,
//! factorization up to 1e12) are enforced with [`Error::Range`].

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Upper bound accepted by [`primes_in_window`].
pub const MAX_WINDOW_START: u64 = 1_000_000_000;

/// Upper bound accepted by [`factorize`] and friends.
pub const MAX_FACTOR_ARG: u64 = 1_000_000_000_000;

/// The primes in a dyadic window `[X, 2X)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeWindow {
    pub x: u64,
    /// Strictly increasing, complete list of primes `p` with `X <= p < 2X`.
    pub primes: Vec<u64>,
}

impl PrimeWindow {
    /// `pi(X)`: the number of primes in the window.
    pub fn count(&self) -> u64 {
        self.primes.len() as u64
    }
}

/// A positive integer together with its sorted prime factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

/// Simple sieve of Eratosthenes, `primes <= n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            out.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    out
}

fn small_primes() -> &'static [u64] {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    CACHE.get_or_init(|| primes_up_to(1_000_000))
}

/// Complete sorted prime list for `[X, 2X)`, by segmented sieve.
pub fn primes_in_window(x: u64) -> Result<PrimeWindow> {
    if !(2..=MAX_WINDOW_START).contains(&x) {
        return Err(Error::Range(format!(
            "primes_in_window: X={x} outside [2, {MAX_WINDOW_START}]"
        )));
    }
    let hi = 2 * x; // exclusive
    let base = primes_up_to((hi - 1).isqrt());
    let mut primes = Vec::new();
    const CHUNK: u64 = 1 << 20;
    let mut lo = x;
    while lo < hi {
        let end = (lo + CHUNK).min(hi);
        let len = (end - lo) as usize;
        let mut composite = vec![false; len];
        for &p in &base {
            let mut start = lo.div_ceil(p) * p;
            if start < p * p {
                start = p * p;
            }
            let mut q = start;
            while q < end {
                composite[(q - lo) as usize] = true;
                q += p;
            }
        }
        for (i, &c) in composite.iter().enumerate() {
            let n = lo + i as u64;
            if !c && n >= 2 {
                primes.push(n);
            }
        }
        lo = end;
    }
    Ok(PrimeWindow { x, primes })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for `u64` (fixed witness set, no false
/// positives below 3.3e24).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The Kronecker symbol `(a | n)`, defined for all integers.
pub fn kronecker(a: i128, n: i128) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut a = a;
    let mut n = n;
    let mut result = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    // factor 2^t out of n; each factor of 2 contributes (a|2) = chi_8(a)
    let mut t = 0u32;
    while n % 2 == 0 {
        n /= 2;
        t += 1;
    }
    if t % 2 == 1 {
        match a.rem_euclid(8) {
            1 | 7 => {}
            3 | 5 => result = -result,
            _ => return 0, // a even
        }
    }
    // n now odd and positive: Jacobi symbol with quadratic reciprocity
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let nm8 = n % 8;
            if nm8 == 3 || nm8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// A square root of `a` modulo an odd prime `p`, deterministic tie-break:
/// the returned root lies in `[0, p/2]`. `None` when `a` is a non-residue.
pub fn sqrt_mod(a: i128, p: u64) -> Result<Option<u64>> {
    if p < 3 || p % 2 == 0 || !is_prime(p) {
        return Err(Error::Domain(format!("sqrt_mod: p={p} is not an odd prime")));
    }
    let a = a.rem_euclid(p as i128) as u64;
    if a == 0 {
        return Ok(Some(0));
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return Ok(None);
    }
    let r = if p % 4 == 3 {
        pow_mod(a, (p + 1) / 4, p)
    } else {
        // Tonelli–Shanks with the least non-residue as generator
        let mut q = p - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let mut z = 2u64;
        while pow_mod(z, (p - 1) / 2, p) != p - 1 {
            z += 1;
        }
        let mut m = s;
        let mut c = pow_mod(z, q, p);
        let mut t = pow_mod(a, q, p);
        let mut r = pow_mod(a, (q + 1) / 2, p);
        while t != 1 {
            let mut i = 0u32;
            let mut t2 = t;
            while t2 != 1 {
                t2 = mul_mod(t2, t2, p);
                i += 1;
            }
            let b = pow_mod(c, 1 << (m - i - 1), p);
            m = i;
            c = mul_mod(b, b, p);
            t = mul_mod(t, c, p);
            r = mul_mod(r, b, p);
        }
        r
    };
    Ok(Some(r.min(p - r)))
}

/// Prime factorization by trial division; `1 <= n <= 1e12`.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 || n > MAX_FACTOR_ARG {
        return Err(Error::Range(format!(
            "factorize: n={n} outside [1, {MAX_FACTOR_ARG}]"
        )));
    }
    let mut rest = n;
    let mut factors = Vec::new();
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        if rest % p == 0 {
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        // no factor <= 1e6 and n <= 1e12, so the cofactor is prime
        debug_assert!(is_prime(rest));
        factors.push((rest, 1));
    }
    Ok(Factorization { n, factors })
}

/// Moebius function; 0 iff `n` is not squarefree.
pub fn mobius(n: u64) -> Result<i32> {
    let f = factorize(n)?;
    if !f.is_squarefree() {
        return Ok(0);
    }
    Ok(if f.factors.len() % 2 == 0 { 1 } else { -1 })
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> Result<u64> {
    let f = factorize(n)?;
    let mut out = n;
    for &(p, _) in &f.factors {
        out = out / p * (p - 1);
    }
    Ok(out)
}

/// All divisors of `n`, sorted.
pub fn divisors(n: u64) -> Result<Vec<u64>> {
    let f = factorize(n)?;
    let mut out = vec![1u64];
    for &(p, e) in &f.factors {
        let prev = out.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            out.extend(prev.iter().map(|d| d * pk));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// `Ord_p(n)` for `n != 0`.
pub fn ord_p(mut n: u128, p: u64) -> u32 {
    assert!(n != 0, "ord_p of zero");
    let p = p as u128;
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

/// `Some(r)` with `r*r == n`, if `n` is a perfect square.
pub fn exact_sqrt(n: u64) -> Option<u64> {
    // squares mod 64 prefilter, then f64 hint with correction
    static TABLE: OnceLock<[bool; 64]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [false; 64];
        for i in 0u64..64 {
            t[((i * i) % 64) as usize] = true;
        }
        t
    });
    if !table[(n % 64) as usize] {
        return None;
    }
    let r = (n as f64).sqrt().round() as u64;
    for c in r.saturating_sub(1)..=r + 1 {
        if c * c == n {
            return Some(c);
        }
    }
    None
}
