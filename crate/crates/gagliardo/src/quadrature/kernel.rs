//! Periodic lattice sums of |x|^{-sigma} with certified Euler-Maclaurin tails.

use serde::{Deserialize, Serialize};

use crate::error::{GagliardoError, Result};

/// B_{2j} / (2j)! for j = 1..8.
const BERNOULLI_OVER_FACT: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
];

/// Number of correction terms before the bracketing pair.
const EM_TERMS: usize = 6;

/// Default number of explicitly summed images.
pub const DEFAULT_TERMS: usize = 4;

/// Partial sum plus a certified bracket on the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub partial: f64,
    pub tail_lower: f64,
    pub tail_upper: f64,
    /// partial + midpoint of the tail bracket
    pub value: f64,
    pub terms_used: usize,
}

impl KernelValue {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.tail_upper - self.tail_lower)
    }
}

/// Bracket for sum_{k >= k0} (t + k T)^{-sigma}, sigma > 1, t + k0 T > 0.
///
/// The summand is completely monotone, so consecutive Euler-Maclaurin truncations
/// enclose the remainder.
fn em_tail(t: f64, period: f64, sigma: f64, k0: usize) -> (f64, f64) {
    let x0 = t + k0 as f64 * period;
    let f0 = x0.powf(-sigma);
    let integral = x0 * f0 / ((sigma - 1.0) * period);
    let mut s = integral + 0.5 * f0;
    // term_j = B_{2j}/(2j)! T^{2j-1} (sigma)_{2j-1} x0^{-sigma-2j+1}
    let r = period / x0;
    let mut rising = sigma; // (sigma)_{1}
    let mut pow = f0 * r; // f0 * (T/x0)^{1}
    let mut prev = s;
    for (j, c) in BERNOULLI_OVER_FACT.iter().enumerate().take(EM_TERMS + 1) {
        let term = c * rising * pow;
        prev = s;
        s += term;
        // advance (sigma)_{2j-1} -> (sigma)_{2j+1} and the power by two
        rising = rising_factorial(sigma, 2 * j + 3);
        pow *= r * r;
    }
    (prev.min(s), prev.max(s))
}

fn rising_factorial(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// sum_{k>=0} (t + kT)^{-sigma} with k < `terms` summed explicitly.
pub(crate) fn lattice_sum(t: f64, period: f64, sigma: f64, terms: usize) -> KernelValue {
    let mut partial = 0.0;
    for k in 0..terms {
        partial += (t + k as f64 * period).powf(-sigma);
    }
    let (lo, hi) = em_tail(t, period, sigma, terms);
    KernelValue {
        partial,
        tail_lower: lo,
        tail_upper: hi,
        value: partial + 0.5 * (lo + hi),
        terms_used: terms,
    }
}

/// sum_{k>=0} (t + kT)^{-1-sp}: `k_terms` images summed, the rest bracketed.
pub fn periodic_kernel(t: f64, period: u32, sp: f64, k_terms: usize) -> Result<KernelValue> {
    if !(t > 0.0) {
        return Err(GagliardoError::SingularArgument(t));
    }
    if !(sp > 0.0) || k_terms < 1 || period < 1 {
        return Err(GagliardoError::InvalidParams(
            "periodic_kernel needs sp > 0, K >= 1, T >= 1".into(),
        ));
    }
    Ok(lattice_sum(t, period as f64, 1.0 + sp, k_terms))
}

/// Like [`periodic_kernel`] but grows K until the bracket width is below `tol`.
pub fn periodic_kernel_adaptive(t: f64, period: u32, sp: f64, tol: f64) -> Result<KernelValue> {
    let mut k = DEFAULT_TERMS;
    loop {
        let v = periodic_kernel(t, period, sp, k)?;
        if v.tail_upper - v.tail_lower <= tol || k >= 1 << 20 {
            return Ok(v);
        }
        k *= 2;
    }
}

/// Hurwitz zeta sum_{n>=0} (a+n)^{-sigma}, sigma > 1, a > 0.
pub fn hurwitz_zeta(sigma: f64, a: f64) -> f64 {
    lattice_sum(a, 1.0, sigma, 8).value
}

/// Two-sided lattice sum sum_{k in Z} |d - kT|^{-sigma} and its bracket half-width.
pub fn two_sided(d: f64, period: f64, sigma: f64) -> (f64, f64) {
    let mut r = d.rem_euclid(period);
    if r >= period {
        r = 0.0;
    }
    let a = lattice_sum(r, period, sigma, DEFAULT_TERMS);
    let b = lattice_sum(period - r, period, sigma, DEFAULT_TERMS);
    (a.value + b.value, a.half_width() + b.half_width())
}

/// sum_{k>=1} (t + kT)^{-sigma}: the periodic images folded onto the first cell.
pub fn images(t: f64, period: f64, sigma: f64) -> (f64, f64) {
    let v = lattice_sum(t + period, period, sigma, DEFAULT_TERMS);
    (v.value, v.half_width())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn long_sum(t: f64, period: f64, sigma: f64, from: usize, n: usize) -> f64 {
        // sum from the far end for accuracy
        let mut s = 0.0;
        for k in (from..from + n).rev() {
            s += (t + k as f64 * period).powf(-sigma);
        }
        s
    }

    #[test]
    fn bracket_contains_remainder() {
        let v = periodic_kernel(0.3, 2, 0.7, 5).unwrap();
        let far = long_sum(0.3, 2.0, 1.7, 5, 1_000_000);
        // remainder past the long sum, itself bracketed
        let (l2, h2) = em_tail(0.3, 2.0, 1.7, 1_000_005);
        assert!(v.tail_lower <= far + h2 && far + l2 <= v.tail_upper);
    }

    #[test]
    fn first_term() {
        let v = periodic_kernel(1.0, 2, 0.5, 1).unwrap();
        assert_eq!(v.partial, 1.0);
        assert!(v.tail_lower > 0.0);
    }
}
