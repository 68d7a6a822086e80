//! The s -> 0 limit energy F^0_p = int_0^T int_0^T |u(x)-u(y)|^p, split over segment pairs.

use crate::domain::Configuration;
use crate::quadrature::gauss;

/// Psi with Psi'' = |z|^p.
fn psi(z: f64, p: f64) -> f64 {
    z.abs().powf(p + 2.0) / ((p + 1.0) * (p + 2.0))
}

/// int_{-l}^{l} int_{-l'}^{l'} |x - y - c|^p dy dx.
pub fn segment_pair_integral(l: f64, lp: f64, c: f64, p: f64) -> f64 {
    if l <= 0.0 || lp <= 0.0 {
        return 0.0;
    }
    if l + lp < 1e-3 * c.abs() {
        // the corner formula cancels badly here; the integrand has no root
        let n = 8;
        return gauss::integrate(
            |x| gauss::integrate(|y| (x - y - c).abs().powf(p), -lp, lp, n),
            -l,
            l,
            n,
        );
    }
    psi(l + lp - c, p) + psi(-l - lp - c, p) - psi(l - lp - c, p) - psi(lp - l - c, p)
}

/// Closed form at c = 0: 2/((p+1)(p+2)) [(l+l')^{p+2} - |l-l'|^{p+2}].
pub fn segment_pair_centered(l: f64, lp: f64, p: f64) -> f64 {
    2.0 / ((p + 1.0) * (p + 2.0)) * ((l + lp).powf(p + 2.0) - (l - lp).abs().powf(p + 2.0))
}

/// Half-lengths and midpoint values of the segments between consecutive jumps.
pub fn segments(config: &Configuration) -> Vec<(f64, f64)> {
    let t = config.t();
    let pts = config.points();
    let n = pts.len();
    (0..n)
        .filter_map(|i| {
            let a = pts[i];
            let b = if i + 1 < n { pts[i + 1] } else { pts[0] + t };
            let half = 0.5 * (b - a);
            (half > 0.0).then(|| (half, config.evaluate_u(a + half)))
        })
        .collect()
}

/// F^0_p of a configuration.
pub fn energy_zero(config: &Configuration, p: f64) -> f64 {
    let seg = segments(config);
    let mut total = 0.0;
    for &(li, vi) in &seg {
        for &(lj, vj) in &seg {
            total += segment_pair_integral(li, lj, vj - vi, p);
        }
    }
    total
}

/// Value at the equispaced minimiser, T^2 2/((p+1)(p+2)).
pub fn energy_zero_min(period: u32, p: f64) -> f64 {
    let t = period as f64;
    t * t * 2.0 / ((p + 1.0) * (p + 2.0))
}
