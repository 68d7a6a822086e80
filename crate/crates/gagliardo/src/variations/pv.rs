//! Principal values 2 P.V. int_R f(tau) |tau|^{-sigma} d tau for
//! f(tau) = sum_k c_k |z(tau) - r_k|^p, z(tau) = u(x_i + tau) - u(x_i+).
//!
//! z has slope one between jumps and is T-periodic, so the integral folds onto
//! (0, T) as 2 int_0^T [f(tau) + f(-tau)] (tau^{-sigma} + K_1(tau)) d tau. The symmetric
//! combination is O(tau) at the origin whenever the P.V. exists; it is integrated
//! with weight tau^{1-sigma} there.

use crate::domain::Configuration;
use crate::quadrature::kernel::{lattice_sum, DEFAULT_TERMS};
use crate::quadrature::singular::{grade, mapped_rule};

/// One term c |z - r|^p of the integrand.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PvTerm {
    pub coef: f64,
    pub r: f64,
}

pub(crate) const PV_ORDER: usize = 32;

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

/// z(tau) and z(-tau) are affine on each panel: z(+) = zp + (tau - mid), z(-) = zm - (tau - mid).
struct Panel {
    a: f64,
    b: f64,
    mid: f64,
    zp: f64,
    zm: f64,
}

fn panels(config: &Configuration, i: usize, terms: &[PvTerm]) -> Vec<Panel> {
    let t = config.t();
    let xi = config.points()[i];
    let mut cuts = vec![0.0, t];
    for &xj in config.points() {
        for o in [(xj - xi).rem_euclid(t), (xi - xj).rem_euclid(t)] {
            if o > 0.0 && o < t {
                cuts.push(o);
            }
        }
    }
    let cuts = sorted_unique(cuts);
    let z = |a: f64, b: f64| {
        let mid = 0.5 * (a + b);
        let zp = mid - config.jumps_in(xi, xi + mid) as f64;
        let zm = -mid + config.jumps_in(xi - mid, xi) as f64;
        (mid, zp, zm)
    };
    let mut fine = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (mid, zp, zm) = z(a, b);
        let mut sub = vec![a, b];
        for term in terms {
            for root in [mid - (zp - term.r), mid + (zm - term.r)] {
                if root > a && root < b {
                    sub.push(root);
                }
            }
        }
        for q in sorted_unique(sub).windows(2) {
            if q[1] > q[0] {
                fine.push(Panel {
                    a: q[0],
                    b: q[1],
                    mid,
                    zp,
                    zm,
                });
            }
        }
    }
    fine
}

/// Value and an error estimate from a lower-order companion.
pub(crate) fn pv_integral(
    config: &Configuration,
    i: usize,
    terms: &[PvTerm],
    p: f64,
    sigma: f64,
) -> (f64, f64) {
    let pans = panels(config, i, terms);
    let hi = pv_sum(config, &pans, terms, p, sigma, PV_ORDER);
    let lo = pv_sum(config, &pans, terms, p, sigma, PV_ORDER * 3 / 5);
    (hi, (hi - lo).abs())
}

fn pv_sum(
    config: &Configuration,
    pans: &[Panel],
    terms: &[PvTerm],
    p: f64,
    sigma: f64,
    n: usize,
) -> f64 {
    let t = config.t();
    let k1 = |tau: f64| lattice_sum(tau + t, t, sigma, DEFAULT_TERMS).value;
    let mut total = 0.0;
    for pan in pans {
        let lp = |tau: f64, r: f64| pan.zp + (tau - pan.mid) - r;
        let lm = |tau: f64, r: f64| pan.zm - (tau - pan.mid) - r;
        let f = |tau: f64| -> f64 {
            terms
                .iter()
                .map(|k| k.coef * (lp(tau, k.r).abs().powf(p) + lm(tau, k.r).abs().powf(p)))
                .sum()
        };
        if pan.a == 0.0 {
            // f is O(tau) here
            for (tau, w) in mapped_rule(0.0, pan.b, n, 0.0, 1.0 - sigma) {
                total += w * f(tau) / tau;
            }
            for (tau, w) in mapped_rule(0.0, pan.b, n, 0.0, 0.0) {
                total += w * f(tau) * k1(tau);
            }
            continue;
        }
        let mut subs = Vec::new();
        grade(pan.a, pan.b, &[0.0], &mut subs);
        for (c, d) in subs {
            let tiny = 1e-12 * (1.0 + d);
            for k in terms {
                for side in [&lp as &dyn Fn(f64, f64) -> f64, &lm] {
                    let (la, lb) = (side(c, k.r), side(d, k.r));
                    let kern = |tau: f64| tau.powf(-sigma) + k1(tau);
                    if la.abs() <= tiny {
                        for (tau, w) in mapped_rule(c, d, n, 0.0, p) {
                            total += w * k.coef * kern(tau);
                        }
                    } else if lb.abs() <= tiny {
                        for (tau, w) in mapped_rule(c, d, n, p, 0.0) {
                            total += w * k.coef * kern(tau);
                        }
                    } else {
                        for (tau, w) in mapped_rule(c, d, n, 0.0, 0.0) {
                            total += w * k.coef * side(tau, k.r).abs().powf(p) * kern(tau);
                        }
                    }
                }
            }
        }
    }
    2.0 * total
}
