//! Windowed lattice scans over `z^2 - 4xy = m`: the shared oracle behind
//! the sieve counts and the density experiments.

use crate::archimedean::SmoothWeight;
use crate::arith::exact_sqrt;
use crate::error::{Error, Result};

/// Largest window start the direct scans accept.
pub const MAX_SCAN_X: u64 = 100_000;

/// One solution `(x, y, |z|)` with its total weight: `w(x/X) w(y/X)` once
/// for `z = 0` and doubled otherwise (both signs of `z` solve the
/// equation).
#[derive(Debug, Clone, Copy)]
pub struct LatticeSolution {
    pub x: u64,
    pub y: u64,
    pub z: u64,
    pub weight: f64,
}

/// All solutions of `z^2 - 4xy = m` with `x in [X, 2X] . d1Z`,
/// `y in [X, 2X] . d2Z`, weighted by `w(x/X) w(y/X)`.
///
/// The weight vanishes at the window endpoints, so the closed window is the
/// full support. Solutions are emitted in lexicographic `(x, y)` order.
pub fn weighted_solutions(
    m: i128,
    x_window: u64,
    d1: u64,
    d2: u64,
    weight: &SmoothWeight,
) -> Result<Vec<LatticeSolution>> {
    if x_window == 0 || x_window > MAX_SCAN_X {
        return Err(Error::Range(format!(
            "weighted_solutions: X={x_window} outside [1, {MAX_SCAN_X}]"
        )));
    }
    if d1 == 0 || d2 == 0 {
        return Err(Error::Domain("weighted_solutions: d1, d2 must be positive".into()));
    }
    let xf = x_window as f64;
    let lo = x_window;
    let hi = 2 * x_window;
    let ys: Vec<u64> = (lo.div_ceil(d2) * d2..=hi).step_by(d2 as usize).collect();
    let wy: Vec<f64> = ys.iter().map(|&y| weight.eval(y as f64 / xf)).collect();
    let mut out = Vec::new();
    let mut x = lo.div_ceil(d1) * d1;
    while x <= hi {
        let wx = weight.eval(x as f64 / xf);
        for (i, &y) in ys.iter().enumerate() {
            let u = m + 4 * x as i128 * y as i128;
            if u < 0 {
                continue;
            }
            debug_assert!(u <= u64::MAX as i128);
            if let Some(z) = exact_sqrt(u as u64) {
                let mult = if z == 0 { 1.0 } else { 2.0 };
                out.push(LatticeSolution {
                    x,
                    y,
                    z,
                    weight: mult * wx * wy[i],
                });
            }
        }
        x += d1;
    }
    Ok(out)
}

/// Total weighted count `#_{w_X} A_{d1, d2}(m)`.
pub fn weighted_count(m: i128, x_window: u64, d1: u64, d2: u64, w: &SmoothWeight) -> Result<f64> {
    Ok(weighted_solutions(m, x_window, d1, d2, w)?
        .iter()
        .map(|s| s.weight)
        .sum())
}
