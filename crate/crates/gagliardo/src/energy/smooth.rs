//! Energies of smooth periodic functions.
//!
//! F = int g(t) |t|^{-1-sp} dt with g(t) = int_0^T |u(x+t)-u(x)|^p dx. Since g is even
//! and T-periodic, F = 2 int_0^{T/2} g(t) Z(t) dt with Z the two-sided lattice sum of
//! |t - kT|^{-1-sp}. Near t = 0 we have g(t) = O(t^p), and the first piece is integrated
//! with Gauss-Jacobi weight t^{p-1-sp} applied to g(t)/t^p.

use rayon::prelude::*;

use crate::domain::FractionalParams;
use crate::error::Result;
use crate::quadrature::gauss;
use crate::quadrature::kernel::{lattice_sum, DEFAULT_TERMS};
use crate::quadrature::EnergyReport;

/// A smooth T-periodic function with hints about where it varies quickly.
pub trait PeriodicFunction: Sync {
    fn period(&self) -> f64;
    fn value(&self, x: f64) -> f64;
    /// u(x+t) - u(x); override when cancellation matters for small t.
    fn increment(&self, x: f64, t: f64) -> f64 {
        self.value(x + t) - self.value(x)
    }
    fn derivative(&self, x: f64) -> f64;
    /// Points in [0, T) around which u changes on the scale `feature_width`.
    fn x_features(&self) -> Vec<f64> {
        Vec::new()
    }
    /// Shifts in (0, T/2] where g changes on the scale `feature_width`.
    fn t_features(&self) -> Vec<f64> {
        Vec::new()
    }
    fn feature_width(&self) -> f64 {
        self.period() / 8.0
    }
    fn label(&self) -> String;
}

/// u(x) = A sin(2 pi n x / T).
#[derive(Debug, Clone, Copy)]
pub struct Sine {
    pub period: f64,
    pub freq: u32,
    pub amplitude: f64,
}

impl Sine {
    pub fn new(period: f64, freq: u32) -> Self {
        Self {
            period,
            freq,
            amplitude: 1.0,
        }
    }

    /// sin(2 pi x) on the unit period.
    pub fn unit() -> Self {
        Self::new(1.0, 1)
    }

    fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.freq as f64 / self.period
    }
}

impl PeriodicFunction for Sine {
    fn period(&self) -> f64 {
        self.period
    }
    fn value(&self, x: f64) -> f64 {
        self.amplitude * (self.omega() * x).sin()
    }
    fn increment(&self, x: f64, t: f64) -> f64 {
        let w = self.omega();
        2.0 * self.amplitude * (w * (x + 0.5 * t)).cos() * (0.5 * w * t).sin()
    }
    fn derivative(&self, x: f64) -> f64 {
        self.amplitude * self.omega() * (self.omega() * x).cos()
    }
    fn feature_width(&self) -> f64 {
        self.period / (8.0 * self.freq.max(1) as f64)
    }
    fn label(&self) -> String {
        format!("sin(2pi*{}x/{})", self.freq, self.period)
    }
}

/// A constant function.
#[derive(Debug, Clone, Copy)]
pub struct Constant {
    pub period: f64,
    pub c: f64,
}

impl PeriodicFunction for Constant {
    fn period(&self) -> f64 {
        self.period
    }
    fn value(&self, _x: f64) -> f64 {
        self.c
    }
    fn increment(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }
    fn derivative(&self, _x: f64) -> f64 {
        0.0
    }
    fn label(&self) -> String {
        format!("const({})", self.c)
    }
}

/// Quadrature orders and refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub t_order: usize,
    pub x_order: usize,
    /// panels are halved this many times
    pub refine: u32,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            t_order: 20,
            x_order: 16,
            refine: 0,
        }
    }
}

impl Resolution {
    /// The companion rule used for error estimates.
    pub fn coarse(&self) -> Self {
        Self {
            t_order: (self.t_order * 3 / 5).max(6),
            x_order: (self.x_order * 3 / 5).max(6),
            refine: self.refine,
        }
    }

    pub fn finer(&self) -> Self {
        Self {
            refine: self.refine + 1,
            ..*self
        }
    }

    fn scale(&self) -> f64 {
        0.5f64.powi(self.refine as i32)
    }
}

/// One t-node: h(t) enters as value += coef h, tail bracket += [lo, hi] h.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TNode {
    pub t: f64,
    pub coef: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Vector-valued result of a t-integration.
#[derive(Debug, Clone)]
pub(crate) struct TOut {
    pub value: Vec<f64>,
    pub tail_lo: Vec<f64>,
    pub tail_hi: Vec<f64>,
    pub nodes: usize,
}

pub(crate) fn is_even_integer(p: f64) -> bool {
    p.fract() == 0.0 && (p as i64) % 2 == 0
}

/// Points of [c, d] refined geometrically towards both ends: first step `w0`, steps
/// doubling up to `max_len`.
pub(crate) fn graded_points(c: f64, d: f64, w0: f64, max_len: f64) -> Vec<f64> {
    let mid = 0.5 * (c + d);
    let mut left = vec![c];
    let mut step = w0.min(max_len);
    let mut pos = c;
    while pos + step < mid {
        pos += step;
        left.push(pos);
        step = (2.0 * step).min(max_len);
    }
    let mut right = vec![d];
    let mut step = w0.min(max_len);
    let mut pos = d;
    while pos - step > mid {
        pos -= step;
        right.push(pos);
        step = (2.0 * step).min(max_len);
    }
    // the two sweeps meet somewhere around the middle
    let gap_l = *left.last().unwrap();
    let gap_r = *right.last().unwrap();
    if gap_r - gap_l > 1e-14 * (d - c) {
        if gap_r - gap_l > max_len {
            left.push(mid);
        }
    } else {
        right.pop();
    }
    left.extend(right.into_iter().rev());
    left.dedup();
    left
}

/// The quadrature engine for one function and one exponent pair.
pub(crate) struct Engine<'a, U: PeriodicFunction + ?Sized> {
    pub u: &'a U,
    pub p: f64,
    pub sigma: f64,
    /// weight exponent at roots of the increment, None when the integrand is smooth there
    pub root_pow: Option<f64>,
    pub res: Resolution,
}

impl<'a, U: PeriodicFunction + ?Sized> Engine<'a, U> {
    pub fn new(u: &'a U, p: f64, sigma: f64, res: Resolution) -> Self {
        let root_pow = if is_even_integer(p) { None } else { Some(p) };
        Self {
            u,
            p,
            sigma,
            root_pow,
            res,
        }
    }

    fn width(&self) -> f64 {
        self.u.feature_width().min(self.u.period() / 8.0)
    }

    /// x-panels of [a, b] for shift t.
    pub fn x_panels(&self, t: f64, a: f64, b: f64) -> Vec<(f64, f64)> {
        let period = self.u.period();
        let feats = self.u.x_features();
        let mut cuts = vec![a, b];
        for &f in &feats {
            for base in [f, f - t] {
                let r = base.rem_euclid(period);
                for c in [r - period, r, r + period] {
                    if c > a && c < b {
                        cuts.push(c);
                    }
                }
            }
        }
        cuts.sort_by(|x, y| x.total_cmp(y));
        cuts.dedup();
        let max_len = self.width() * self.res.scale();
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let (c, d) = (w[0], w[1]);
            if d <= c {
                continue;
            }
            let k = ((d - c) / max_len).ceil().max(1.0) as usize;
            let h = (d - c) / k as f64;
            for i in 0..k {
                let lo = c + i as f64 * h;
                let hi = if i + 1 == k { d } else { lo + h };
                out.push((lo, hi));
            }
        }
        out
    }

    /// int_a^b f(x, t, delta(x,t), scale) dx, vector valued; `scale` is the distance
    /// to adjacent roots of the increment (1 away from them) and the rule carries the
    /// weight scale^root_pow.
    pub fn x_integral<F>(&self, t: f64, a: f64, b: f64, f: &F, out: &mut [f64])
    where
        F: Fn(f64, f64, f64, f64, &mut [f64]),
    {
        let n = self.res.x_order;
        let m = out.len();
        let mut buf = vec![0.0; m];
        for (c, d) in self.x_panels(t, a, b) {
            match self.root_pow {
                None => {
                    let r = gauss::legendre(n);
                    let half = 0.5 * (d - c);
                    for (xi, wi) in r.nodes.iter().zip(&r.weights) {
                        let x = c + half * (1.0 + xi);
                        buf.iter_mut().for_each(|v| *v = 0.0);
                        f(x, t, self.u.increment(x, t), 1.0, &mut buf);
                        for k in 0..m {
                            out[k] += half * wi * buf[k];
                        }
                    }
                }
                Some(beta) => self.x_panel_with_roots(t, c, d, beta, f, out, &mut buf),
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn x_panel_with_roots<F>(
        &self,
        t: f64,
        c: f64,
        d: f64,
        beta: f64,
        f: &F,
        out: &mut [f64],
        buf: &mut [f64],
    ) where
        F: Fn(f64, f64, f64, f64, &mut [f64]),
    {
        let inc = |x: f64| self.u.increment(x, t);
        const SAMPLES: usize = 12;
        let mut xs = Vec::with_capacity(SAMPLES + 1);
        let mut vs = Vec::with_capacity(SAMPLES + 1);
        for i in 0..=SAMPLES {
            let x = c + (d - c) * i as f64 / SAMPLES as f64;
            xs.push(x);
            vs.push(inc(x));
        }
        let mut roots = Vec::new();
        for i in 0..SAMPLES {
            let (mut lo, mut hi) = (xs[i], xs[i + 1]);
            let (mut flo, fhi) = (vs[i], vs[i + 1]);
            if flo == 0.0 || fhi == 0.0 || flo.signum() == fhi.signum() {
                continue;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = inc(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        let end_root = |v: f64| v.abs() <= 1e-14;
        let mut pts = vec![c];
        pts.extend(roots.iter().copied());
        pts.push(d);
        let n = self.res.x_order;
        let m = out.len();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let left = a != c || end_root(vs[0]);
            let right = b != d || end_root(vs[SAMPLES]);
            let (alpha, bet) = (
                if right { beta } else { 0.0 },
                if left { beta } else { 0.0 },
            );
            let rule = crate::quadrature::singular::mapped_rule(a, b, n, alpha, bet);
            for (x, wt) in rule {
                let mut scale = 1.0;
                if left {
                    scale *= x - a;
                }
                if right {
                    scale *= b - x;
                }
                buf.iter_mut().for_each(|v| *v = 0.0);
                f(x, t, inc(x), scale, buf);
                for k in 0..m {
                    out[k] += wt * buf[k];
                }
            }
        }
    }

    /// t-nodes for 2 int_0^{T/2} h(t) Z(t) dt, where h(t)/t^p is smooth at 0.
    pub fn t_nodes(&self) -> Vec<TNode> {
        let period = self.u.period();
        let half = 0.5 * period;
        let p = self.p;
        let sigma = self.sigma;
        let n = self.res.t_order;
        let width = self.width() * self.res.scale();
        let mut feats: Vec<f64> = self
            .u
            .t_features()
            .into_iter()
            .filter(|&f| f > 0.0 && f < half)
            .collect();
        feats.sort_by(|a, b| a.total_cmp(b));
        feats.dedup();
        let t1 = feats.first().copied().unwrap_or(half).min(width).min(half);
        let rest = |t: f64| {
            let a = lattice_sum(period + t, period, sigma, DEFAULT_TERMS);
            let b = lattice_sum(period - t, period, sigma, DEFAULT_TERMS);
            (
                a.partial + b.partial,
                a.tail_lower + b.tail_lower,
                a.tail_upper + b.tail_upper,
            )
        };
        let mut nodes = Vec::new();
        // first piece: t^{p-sigma} and t^p weights for h / t^p
        let r = gauss::jacobi(n, 0.0, p - sigma);
        let sc = t1.powf(1.0 + p - sigma);
        for (u, w) in r.nodes.iter().zip(&r.weights) {
            let t = t1 * u;
            let c = 2.0 * sc * w * t.powf(-p);
            nodes.push(TNode {
                t,
                coef: c,
                lo: 0.0,
                hi: 0.0,
            });
        }
        let r = gauss::jacobi(n, 0.0, p);
        let sc = t1.powf(1.0 + p);
        for (u, w) in r.nodes.iter().zip(&r.weights) {
            let t = t1 * u;
            let (v, lo, hi) = rest(t);
            let c = 2.0 * sc * w * t.powf(-p);
            nodes.push(TNode {
                t,
                coef: c * (v + 0.5 * (lo + hi)),
                lo: c * lo,
                hi: c * hi,
            });
        }
        // the remaining pieces, refined towards each feature
        let mut cuts = vec![t1];
        cuts.extend(feats.iter().copied().filter(|&f| f > t1));
        cuts.push(half);
        cuts.dedup();
        let max_len = self.u.period() / 8.0 * self.res.scale();
        let gl = gauss::legendre(n);
        for w in cuts.windows(2) {
            let (c, d) = (w[0], w[1]);
            if d <= c {
                continue;
            }
            let pts = graded_points(c, d, width, max_len.max(width));
            for q in pts.windows(2) {
                let (a, b) = (q[0], q[1]);
                let hl = 0.5 * (b - a);
                for (xi, wi) in gl.nodes.iter().zip(&gl.weights) {
                    let t = a + hl * (1.0 + xi);
                    let (v, lo, hi) = rest(t);
                    let c = 2.0 * hl * wi;
                    nodes.push(TNode {
                        t,
                        coef: c * (t.powf(-sigma) + v + 0.5 * (lo + hi)),
                        lo: c * lo,
                        hi: c * hi,
                    });
                }
            }
        }
        nodes
    }

    /// Integrates h(t) = int_0^T f dx against the full kernel.
    pub fn t_integral<F>(&self, m: usize, f: &F) -> TOut
    where
        F: Fn(f64, f64, f64, f64, &mut [f64]) + Sync,
    {
        let period = self.u.period();
        let nodes = self.t_nodes();
        let hs: Vec<Vec<f64>> = nodes
            .par_iter()
            .map(|nd| {
                let mut h = vec![0.0; m];
                self.x_integral(nd.t, 0.0, period, f, &mut h);
                h
            })
            .collect();
        let mut out = TOut {
            value: vec![0.0; m],
            tail_lo: vec![0.0; m],
            tail_hi: vec![0.0; m],
            nodes: nodes.len(),
        };
        for (nd, h) in nodes.iter().zip(&hs) {
            for k in 0..m {
                out.value[k] += nd.coef * h[k];
                let (a, b) = (nd.lo * h[k], nd.hi * h[k]);
                out.tail_lo[k] += a.min(b);
                out.tail_hi[k] += a.max(b);
            }
        }
        out
    }
}

/// |delta|^p with the root scaling used by the engine.
#[inline]
pub(crate) fn pow_scaled(delta: f64, scale: f64, p: f64) -> f64 {
    (delta / scale).abs().powf(p)
}

fn energy_at<U: PeriodicFunction + ?Sized>(u: &U, p: f64, sigma: f64, res: Resolution) -> TOut {
    let engine = Engine::new(u, p, sigma, res);
    engine.t_integral(1, &|_x, _t, d, sc, out: &mut [f64]| {
        out[0] += pow_scaled(d, sc, p)
    })
}

/// Energy of a smooth function at a fixed resolution, error from the coarse companion.
pub fn energy_smooth_at<U: PeriodicFunction + ?Sized>(
    u: &U,
    s: f64,
    p: f64,
    res: Resolution,
) -> EnergyReport {
    let sigma = 1.0 + s * p;
    let hi = energy_at(u, p, sigma, res);
    let lo = energy_at(u, p, sigma, res.coarse());
    let width = 0.5 * (hi.tail_hi[0] - hi.tail_lo[0]);
    EnergyReport {
        value: hi.value[0],
        tail_lower: hi.tail_lo[0],
        tail_upper: hi.tail_hi[0],
        abs_err_est: (hi.value[0] - lo.value[0]).abs() + width,
        nodes: hi.nodes + lo.nodes,
    }
}

/// F^s_p(u) for a smooth periodic u, refined until the error estimate is below `tol`
/// (relative to the value, with `tol` as an absolute floor).
pub fn energy_smooth<U: PeriodicFunction + ?Sized>(
    u: &U,
    params: &FractionalParams,
    tol: f64,
) -> Result<EnergyReport> {
    params.require_1d()?;
    let mut res = Resolution::default();
    loop {
        let rep = energy_smooth_at(u, params.s, params.p, res);
        if rep.abs_err_est <= tol.max(tol * rep.value.abs()) || res.refine >= 4 {
            return Ok(rep);
        }
        res = res.finer();
    }
}

/// F^0_p(u) = int_0^T int_0^T |u(x)-u(y)|^p = int_0^T g(t) dt.
pub fn energy_zero_smooth<U: PeriodicFunction + ?Sized>(u: &U, p: f64) -> f64 {
    let res = Resolution::default().finer();
    let engine = Engine::new(u, p, 1.0, res);
    let period = u.period();
    let k = 64;
    let h = period / k as f64;
    let r = gauss::legendre(res.t_order);
    let mut total = 0.0;
    for i in 0..k {
        let a = i as f64 * h;
        for (xi, wi) in r.nodes.iter().zip(&r.weights) {
            let t = a + 0.5 * h * (1.0 + xi);
            let mut g = [0.0];
            engine.x_integral(
                t,
                0.0,
                period,
                &|_x, _t, d, sc, out: &mut [f64]| out[0] += pow_scaled(d, sc, p),
                &mut g,
            );
            total += 0.5 * h * wi * g[0];
        }
    }
    total
}

/// int_0^T |u'|^p.
pub fn dirichlet_energy<U: PeriodicFunction + ?Sized>(u: &U, p: f64) -> f64 {
    let period = u.period();
    let feats = {
        let mut f = u.x_features();
        f.push(0.0);
        f.push(period);
        f.sort_by(|a, b| a.total_cmp(b));
        f.dedup();
        f
    };
    let max_len = u.feature_width().min(period / 8.0) / 4.0;
    let mut total = 0.0;
    for w in feats.windows(2) {
        let (c, d) = (w[0], w[1]);
        let k = ((d - c) / max_len).ceil().max(1.0) as usize;
        let h = (d - c) / k as f64;
        for i in 0..k {
            let a = c + i as f64 * h;
            let b = a + h;
            let f = |x: f64| u.derivative(x).abs().powf(p);
            // |u'|^p has a kink where u' changes sign
            let (da, db) = (u.derivative(a), u.derivative(b));
            if da * db < 0.0 {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if u.derivative(mid) * da > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let r = 0.5 * (lo + hi);
                total += gauss::integrate(f, a, r, 24) + gauss::integrate(f, r, b, 24);
            } else {
                total += gauss::integrate(f, a, b, 24);
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_points_cover() {
        let p = graded_points(0.0, 1.0, 0.01, 0.2);
        assert_eq!(p[0], 0.0);
        assert_eq!(*p.last().unwrap(), 1.0);
        assert!(p
            .windows(2)
            .all(|w| w[1] > w[0] && w[1] - w[0] <= 0.2 + 1e-12));
        assert!((p[1] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn constant_has_zero_energy() {
        let u = Constant {
            period: 1.0,
            c: 1.0,
        };
        let e = energy_smooth_at(&u, 0.3, 2.0, Resolution::default());
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn sine_zero_energy() {
        // 2 int sin^2 - 2 (int sin)^2 = 1
        let f0 = energy_zero_smooth(&Sine::unit(), 2.0);
        assert!((f0 - 1.0).abs() < 1e-12, "{f0}");
    }
}
