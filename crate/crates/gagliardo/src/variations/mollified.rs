//! Variations of the mollified energy F(u^eps[X]).
//!
//! d u^eps / d x_i = rho_eps(. - x_i), so with delta = u^eps(x+t) - u^eps(x) and
//! r_i = rho_i(x+t) - rho_i(x) the first variation is p int int |delta|^{p-2} delta r_i
//! and the mixed second variation is p(p-1) int int |delta|^{p-2} r_i r_j, both against
//! |t|^{-1-sp}.

use super::hessian::VariationReport;
use crate::domain::{Configuration, FractionalParams};
use crate::energy::config::check_params;
use crate::energy::mollifier::{MollifiedConfiguration, MollifierSpec};
use rayon::prelude::*;

use crate::energy::smooth::{graded_points, is_even_integer, Engine, PeriodicFunction, Resolution};
use crate::error::{GagliardoError, Result};
use crate::quadrature::kernel::two_sided;
use crate::quadrature::singular::mapped_rule;

fn check(config: &Configuration, params: &FractionalParams) -> Result<()> {
    check_params(config, params)?;
    if params.p == 1.0 {
        return Err(GagliardoError::WrongRegime(
            "mollified variations need p > 1".into(),
        ));
    }
    Ok(())
}

/// The bump is not analytic at the ends of its support, so the x-rule needs a higher
/// order than the energy uses; this keeps the gradient near 1e-10 at equispaced points.
fn resolution() -> Resolution {
    Resolution {
        x_order: 32,
        ..Resolution::default()
    }
    .finer()
}

/// Calls `f` with rho_i(x+t) - rho_i(x) for every i, on the stack when that fits.
fn with_rho_diffs(m: &MollifiedConfiguration, x: f64, t: f64, n: usize, f: impl FnOnce(&[f64])) {
    let fill = |r: &mut [f64]| {
        for (i, v) in r.iter_mut().enumerate() {
            *v = m.rho_i(i, x + t) - m.rho_i(i, x);
        }
    };
    if n <= 32 {
        let mut buf = [0.0; 32];
        fill(&mut buf[..n]);
        f(&buf[..n]);
    } else {
        let mut buf = vec![0.0; n];
        fill(&mut buf);
        f(&buf);
    }
}

/// Gradient of the mollified energy in the jump positions.
pub fn mollified_gradient(
    config: &Configuration,
    params: &FractionalParams,
    eps: f64,
) -> Result<Vec<f64>> {
    mollified_gradient_at(config, params, eps, resolution())
}

/// [`mollified_gradient`] at an explicit quadrature resolution.
pub fn mollified_gradient_at(
    config: &Configuration,
    params: &FractionalParams,
    eps: f64,
    res: Resolution,
) -> Result<Vec<f64>> {
    check(config, params)?;
    let m = MollifiedConfiguration::new(config, eps)?;
    let p = params.p;
    let mut engine = Engine::new(&m, p, params.sigma(), res);
    engine.root_pow = if is_even_integer(p) {
        None
    } else {
        Some(p - 1.0)
    };
    let out = engine.t_integral(config.len(), &|x, t, d, sc, out: &mut [f64]| {
        let phi = p * (d / sc).abs().powf(p - 1.0) * d.signum();
        if phi == 0.0 {
            return;
        }
        general_rho(&m, x, t, phi, out);
    });
    Ok(out.value)
}

fn general_rho(m: &MollifiedConfiguration, x: f64, t: f64, phi: f64, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o += phi * (m.rho_i(i, x + t) - m.rho_i(i, x));
    }
}

/// Off-diagonal entries from the general symmetric-difference formula.
fn general_off_diagonal(m: &MollifiedConfiguration, params: &FractionalParams) -> Vec<Vec<f64>> {
    let p = params.p;
    let n = m.config().len();
    let mut engine = Engine::new(m, p, params.sigma(), resolution());
    engine.root_pow = if is_even_integer(p) {
        None
    } else {
        Some(p - 2.0)
    };
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let out = engine.t_integral(pairs.len(), &|x, t, d, sc, out: &mut [f64]| {
        let w = p * (p - 1.0) * (d / sc).abs().powf(p - 2.0);
        if !w.is_finite() {
            return;
        }
        with_rho_diffs(m, x, t, n, |r| {
            for (o, &(i, j)) in out.iter_mut().zip(&pairs) {
                *o += w * r[i] * r[j];
            }
        });
    });
    let mut h = vec![vec![0.0; n]; n];
    for (v, &(i, j)) in out.value.iter().zip(&pairs) {
        h[i][j] = *v;
        h[j][i] = *v;
    }
    h
}

/// Sign changes of g on (a, b), by sampling and bisection.
fn sign_changes(g: &dyn Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x0 = a;
    let mut g0 = g(a);
    for k in 1..=samples {
        let x1 = a + (b - a) * k as f64 / samples as f64;
        let g1 = g(x1);
        if g0 != 0.0 && g1 != 0.0 && g0.signum() != g1.signum() {
            let (mut lo, mut hi, mut glo) = (x0, x1, g0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if gm.signum() == glo.signum() {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        x0 = x1;
        g0 = g1;
    }
    out
}

/// z* in (0, 1) with rho(z*) = eps: u^eps' = 1 - rho_eps vanishes at x_j +- eps z*.
fn slope_roots(eps: f64) -> Option<f64> {
    let spec = MollifierSpec::global();
    if spec.rho(0.0) <= eps {
        return None;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spec.rho(mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Knots of the ball around `centre`: its ends and the extrema of u^eps inside.
fn ball_knots(centre: f64, eps: f64, zstar: Option<f64>) -> Vec<f64> {
    match zstar {
        Some(z) => vec![
            centre - eps,
            centre - eps * z,
            centre + eps * z,
            centre + eps,
        ],
        None => vec![centre - eps, centre + eps],
    }
}

const INNER_ORDER: usize = 10;
const OUTER_ORDER: usize = 12;

/// Weights on [a, b] with Jacobi exponent `e` at the ends flagged as roots; returns
/// (node, weight, distance product) triples, refined geometrically towards both ends.
fn root_rule(
    a: f64,
    b: f64,
    left: bool,
    right: bool,
    e: f64,
    n: usize,
    w0: f64,
) -> Vec<(f64, f64, f64)> {
    let pts = graded_points(a, b, w0, 0.25 * (b - a));
    let mut out = Vec::new();
    for q in pts.windows(2) {
        let (c, d) = (q[0], q[1]);
        if d <= c {
            continue;
        }
        let l = left && c == a;
        let r = right && d == b;
        let rule = mapped_rule(c, d, n, if r { e } else { 0.0 }, if l { e } else { 0.0 });
        for (y, w) in rule {
            let mut sc = 1.0;
            if l {
                sc *= y - a;
            }
            if r {
                sc *= b - y;
            }
            out.push((y, w, sc));
        }
    }
    out
}

/// -2p(p-1) int_{B_eps(x_i)} int_{B_eps(x_j)} |u^eps(x)-u^eps(y)|^{p-2} rho_i rho_j Z(x-y),
/// valid when the supports are disjoint.
///
/// For fixed x the inner integrand is singular at the roots of u(x) - u(y); those
/// become panel ends with Gauss-Jacobi weights. The inner integral is in turn
/// singular where u(x) meets an extremal value of u on the other ball, and the outer
/// panels are graded towards those x.
fn disjoint_off_diagonal(m: &MollifiedConfiguration, params: &FractionalParams) -> Vec<Vec<f64>> {
    let p = params.p;
    let e = p - 2.0;
    let eps = m.eps();
    let spec = MollifierSpec::global();
    let x = m.config().points();
    let n = x.len();
    let period = m.config().t();
    let sigma = params.sigma();
    let zstar = slope_roots(eps);
    let smooth = is_even_integer(p);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let inner = |xv: f64, c: f64| -> f64 {
                let g = |y: f64| c - m.value(y);
                let knots = ball_knots(x[j], eps, zstar);
                let mut cuts = knots.clone();
                let mut roots = Vec::new();
                if !smooth {
                    for w in knots.windows(2) {
                        roots.extend(sign_changes(&g, w[0], w[1], 1));
                    }
                }
                cuts.extend(roots.iter().copied());
                cuts.sort_by(|a, b| a.total_cmp(b));
                let mut acc = 0.0;
                for w in cuts.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if b <= a {
                        continue;
                    }
                    let left = roots.contains(&a);
                    let right = roots.contains(&b);
                    for (y, wt, sc) in root_rule(a, b, left, right, e, INNER_ORDER, 1e-4 * (b - a))
                    {
                        let r = spec.rho((y - x[j]) / eps) / eps;
                        if r == 0.0 {
                            continue;
                        }
                        let (z, _) = two_sided(xv - y, period, sigma);
                        let v = if smooth {
                            g(y).abs().powf(e)
                        } else {
                            (g(y) / sc).abs().powf(e)
                        };
                        acc += wt * r * z * v;
                    }
                }
                acc
            };
            // outer cuts: extrema of u on ball i and the x where u meets an extremal value on ball j
            let knots_i = ball_knots(x[i], eps, zstar);
            let mut cuts = knots_i.clone();
            if !smooth {
                let ext: Vec<f64> = ball_knots(x[j], eps, zstar)
                    .iter()
                    .map(|&y| m.value(y))
                    .collect();
                for v in ext {
                    let g = |xv: f64| m.value(xv) - v;
                    for w in knots_i.windows(2) {
                        cuts.extend(sign_changes(&g, w[0], w[1], 16));
                    }
                }
            }
            cuts.sort_by(|a, b| a.total_cmp(b));
            cuts.dedup();
            let mut acc = 0.0;
            for w in cuts.windows(2) {
                let (a, b) = (w[0], w[1]);
                if b <= a {
                    continue;
                }
                let w0 = if smooth { 0.25 * (b - a) } else { 1e-7 * eps };
                for (xv, wt, _) in root_rule(a, b, false, false, 0.0, OUTER_ORDER, w0) {
                    let r = spec.rho((xv - x[i]) / eps) / eps;
                    if r == 0.0 {
                        continue;
                    }
                    acc += wt * r * inner(xv, m.value(xv));
                }
            }
            -2.0 * p * (p - 1.0) * acc
        })
        .collect();
    let mut h = vec![vec![0.0; n]; n];
    for (v, &(i, j)) in vals.iter().zip(&pairs) {
        h[i][j] = *v;
        h[j][i] = *v;
    }
    h
}

/// Hessian of the mollified energy. Uses the disjoint-support formula when every gap is
/// at least 4 eps and the general formula otherwise.
pub fn mollified_hessian(
    config: &Configuration,
    params: &FractionalParams,
    eps: f64,
) -> Result<VariationReport> {
    check(config, params)?;
    let m = MollifiedConfiguration::new(config, eps)?;
    let grad = mollified_gradient(config, params, eps)?;
    let h = if config.min_gap() >= 4.0 * eps {
        disjoint_off_diagonal(&m, params)
    } else {
        general_off_diagonal(&m, params)
    };
    Ok(VariationReport::from_off_diagonal(grad, h))
}

/// The general formula regardless of the gaps; for cross-checks.
pub fn mollified_hessian_general(
    config: &Configuration,
    params: &FractionalParams,
    eps: f64,
) -> Result<VariationReport> {
    check(config, params)?;
    let m = MollifiedConfiguration::new(config, eps)?;
    let grad = mollified_gradient(config, params, eps)?;
    Ok(VariationReport::from_off_diagonal(
        grad,
        general_off_diagonal(&m, params),
    ))
}
