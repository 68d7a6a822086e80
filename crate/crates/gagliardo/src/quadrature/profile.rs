//! Exact correlation profile g(t) = int_0^T |u(x+t) - u(x)|^p dx of a configuration.
//!
//! With N(x,t) the number of jumps in (x, x+t] we have u(x+t) - u(x) = t - N(x,t), so
//! g(t) = sum_k |t-k|^p |A_t(k)| where A_t(k) = {x : N(x,t) = k}. Each |A_t(k)| is
//! affine in t between consecutive circular differences of jump positions.

use crate::domain::Configuration;

/// Breakpoints closer than this multiple of T are merged.
const SNAP: f64 = 64.0 * f64::EPSILON;

/// One power term A(t) |t - k|^p with A affine on the piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub k: i64,
    pub at_a: f64,
    pub at_b: f64,
}

impl Term {
    /// Linear interpolation of the coefficient on [a, b].
    #[inline]
    pub fn coef(&self, a: f64, b: f64, t: f64) -> f64 {
        let w = (t - a) / (b - a);
        self.at_a + (self.at_b - self.at_a) * w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub terms: Vec<Term>,
}

/// Piecewise representation of g on [0, T].
#[derive(Debug, Clone)]
pub struct CorrelationProfile {
    period: u32,
    p: f64,
    breakpoints: Vec<f64>,
    /// level measures |A_t(k)|, k = 0..len-1, at each breakpoint
    levels: Vec<Vec<f64>>,
    pieces: Vec<Piece>,
}

/// Sorted, merged breakpoints in [0, T], exact at integers.
pub(crate) fn merge_breakpoints(mut cand: Vec<f64>, period: f64) -> Vec<f64> {
    let snap = SNAP * period.max(1.0);
    cand.retain(|t| *t >= 0.0 && *t <= period);
    cand.push(0.0);
    cand.push(period);
    cand.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(cand.len());
    for t in cand {
        match out.last_mut() {
            Some(last) if t - *last < snap => {
                // keep integers exact
                if t.fract() == 0.0 {
                    *last = t;
                }
            }
            _ => out.push(t),
        }
    }
    // the snapping may have moved the first entry off 0 or the last off T
    if let Some(f) = out.first_mut() {
        *f = 0.0;
    }
    if let Some(l) = out.last_mut() {
        *l = period;
    }
    if out.len() == 1 {
        out.push(period);
    }
    out
}

/// Measures of {x in window : N(x,t) = k} for k = 0, 1, ...; `window` is a list of
/// disjoint intervals inside [0, T]. t must lie in [0, T].
pub(crate) fn level_measures(config: &Configuration, t: f64, window: &[(f64, f64)]) -> Vec<f64> {
    let period = config.t();
    let pts = config.points();
    let n = pts.len();
    // (position, delta): N drops just after x_j and rises just after x_j - t
    let mut events: Vec<(f64, i64)> = Vec::with_capacity(2 * n);
    for &x in pts {
        events.push((x, -1));
        let mut y = (x - t).rem_euclid(period);
        if y >= period {
            y = 0.0;
        }
        events.push((y, 1));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let m = events.len();
    // start from the longest segment, where a direct count is unambiguous
    let mut start = m - 1;
    let mut best = events[0].0 + period - events[m - 1].0;
    for i in 0..m - 1 {
        let len = events[i + 1].0 - events[i].0;
        if len > best {
            best = len;
            start = i;
        }
    }
    let seg = |i: usize| -> (f64, f64) {
        if i + 1 < m {
            (events[i].0, events[i + 1].0)
        } else {
            (events[m - 1].0, events[0].0 + period)
        }
    };
    let (s0, s1) = seg(start);
    let xm = 0.5 * (s0 + s1);
    let mut cur = config.jumps_in(xm, xm + t);
    let mut levels = vec![0.0; n + 2];
    for step in 0..m {
        let i = (start + step) % m;
        let (lo, hi) = seg(i);
        let len = overlap(lo, hi, window, period);
        if len > 0.0 {
            let k = cur.clamp(0, levels.len() as i64 - 1) as usize;
            levels[k] += len;
        }
        // crossing the event that ends this segment
        let next = (i + 1) % m;
        cur += events[next].1;
    }
    levels
}

fn overlap(lo: f64, hi: f64, window: &[(f64, f64)], period: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut s = 0.0;
    for &(a, b) in window {
        for shift in [0.0, period] {
            let l = lo.max(a + shift);
            let h = hi.min(b + shift);
            if h > l {
                s += h - l;
            }
        }
    }
    s
}

impl CorrelationProfile {
    pub fn new(config: &Configuration, p: f64) -> Self {
        let period = config.t();
        let pts = config.points();
        let mut cand: Vec<f64> = (1..config.period()).map(f64::from).collect();
        for &xi in pts {
            for &xj in pts {
                let mut d = (xj - xi).rem_euclid(period);
                if d >= period {
                    d = 0.0;
                }
                cand.push(d);
            }
        }
        let breakpoints = merge_breakpoints(cand, period);
        let full = [(0.0, period)];
        let mut levels: Vec<Vec<f64>> = breakpoints
            .iter()
            .map(|&t| level_measures(config, t, &full))
            .collect();
        // exact values at t = 0: every x has N = 0
        for v in levels[0].iter_mut() {
            *v = 0.0;
        }
        levels[0][0] = period;
        let mut pieces = Vec::with_capacity(breakpoints.len() - 1);
        for w in 0..breakpoints.len() - 1 {
            let (a, b) = (breakpoints[w], breakpoints[w + 1]);
            let la = &levels[w];
            let lb = &levels[w + 1];
            let terms = (0..la.len())
                .filter(|&k| la[k] != 0.0 || lb[k] != 0.0)
                .map(|k| Term {
                    k: k as i64,
                    at_a: la[k],
                    at_b: lb[k],
                })
                .collect();
            pieces.push(Piece { a, b, terms });
        }
        Self {
            period: config.period(),
            p,
            breakpoints,
            levels,
            pieces,
        }
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Level measures |A_t(k)| at breakpoint index i.
    pub fn levels_at_breakpoint(&self, i: usize) -> &[f64] {
        &self.levels[i]
    }

    /// g(t) for any real t (extended periodically, even in t).
    pub fn eval(&self, t: f64) -> f64 {
        let period = self.period as f64;
        let mut t = t.abs().rem_euclid(period);
        if t >= period {
            t = 0.0;
        }
        let i = match self.breakpoints.binary_search_by(|b| b.total_cmp(&t)) {
            Ok(i) => i.min(self.pieces.len() - 1),
            Err(i) => i - 1,
        };
        let piece = &self.pieces[i];
        piece
            .terms
            .iter()
            .map(|term| term.coef(piece.a, piece.b, t) * (t - term.k as f64).abs().powf(self.p))
            .sum()
    }

    /// Level measures at arbitrary t in [0, T] by interpolation.
    pub fn levels(&self, t: f64) -> Vec<f64> {
        let i = match self.breakpoints.binary_search_by(|b| b.total_cmp(&t)) {
            Ok(i) => return self.levels[i].clone(),
            Err(i) => i - 1,
        };
        let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
        let w = (t - a) / (b - a);
        self.levels[i]
            .iter()
            .zip(&self.levels[i + 1])
            .map(|(x, y)| x + (y - x) * w)
            .collect()
    }

    /// max over breakpoints of |sum_k k |A_t(k)| - T t|.
    pub fn mass_residual(&self) -> f64 {
        let period = self.period as f64;
        self.breakpoints
            .iter()
            .zip(&self.levels)
            .map(|(&t, lv)| {
                let m: f64 = lv.iter().enumerate().map(|(k, a)| k as f64 * a).sum();
                (m - period * t).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Free-function spelling of [`CorrelationProfile::new`].
pub fn correlation_profile(config: &Configuration, p: f64) -> CorrelationProfile {
    CorrelationProfile::new(config, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sawtooth() {
        let c = Configuration::equispaced(1).unwrap();
        let g = CorrelationProfile::new(&c, 2.0);
        assert!((g.eval(0.5) - 0.25).abs() < 1e-15);
        assert_eq!(g.eval(0.0), 0.0);
    }

    #[test]
    fn mass_identity() {
        let c = Configuration::random(4, 0.0, 3).unwrap();
        let g = CorrelationProfile::new(&c, 1.5);
        assert!(g.mass_residual() < 1e-12);
    }
}
