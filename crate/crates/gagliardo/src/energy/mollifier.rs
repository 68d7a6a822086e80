//! The standard bump mollifier and mollified sawtooth functions.

use std::sync::OnceLock;

use crate::domain::Configuration;
use crate::energy::smooth::PeriodicFunction;
use crate::error::{GagliardoError, Result};
use crate::quadrature::gauss;

/// Intervals of the cached smooth-step table on [-1, 1].
pub const TABLE_INTERVALS: usize = 4096;

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// rho(x) = exp(-1/(1-x^2)) / Z on (-1, 1) with its cumulative H.
#[derive(Debug)]
pub struct MollifierSpec {
    z: f64,
    /// H at the table nodes, exactly 0 and 1 at the ends
    table: Vec<f64>,
}

impl MollifierSpec {
    fn build() -> Self {
        let n = TABLE_INTERVALS;
        let h = 2.0 / n as f64;
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let a = -1.0 + i as f64 * h;
            acc += gauss::integrate(bump, a, a + h, 8);
            table.push(acc);
        }
        let z = acc;
        for v in table.iter_mut() {
            *v /= z;
        }
        table[n] = 1.0;
        Self { z, table }
    }

    /// Shared instance, built on first use.
    pub fn global() -> &'static Self {
        static SPEC: OnceLock<MollifierSpec> = OnceLock::new();
        SPEC.get_or_init(Self::build)
    }

    /// Normalisation constant int_{-1}^{1} exp(-1/(1-x^2)) dx.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Unit-radius density.
    #[inline]
    pub fn rho(&self, x: f64) -> f64 {
        bump(x) / self.z
    }

    /// rho'(x).
    #[inline]
    pub fn rho_prime(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - x * x;
        -2.0 * x / (q * q) * self.rho(x)
    }

    /// Unit-radius smooth step H(x) = int_{-1}^x rho, by cubic Hermite interpolation.
    #[inline]
    pub fn step(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let n = TABLE_INTERVALS;
        let h = 2.0 / n as f64;
        let pos = (x + 1.0) / h;
        let i = (pos.floor() as usize).min(n - 1);
        let a = -1.0 + i as f64 * h;
        let u = (x - a) / h;
        let (y0, y1) = (self.table[i], self.table[i + 1]);
        let (m0, m1) = (self.rho(a) * h, self.rho(a + h) * h);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1
    }

    /// H(b) - H(a), by direct quadrature of rho when the interval is short.
    #[inline]
    pub fn step_diff(&self, a: f64, b: f64) -> f64 {
        let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
        if hi <= -1.0 || lo >= 1.0 {
            return 0.0;
        }
        if lo <= -1.0 && hi >= 1.0 {
            return sign;
        }
        if hi - lo < 0.25 {
            let (c, d) = (lo.max(-1.0), hi.min(1.0));
            return sign * gauss::integrate(|x| self.rho(x), c, d, 10);
        }
        sign * (self.step(hi) - self.step(lo))
    }
}

/// u^eps = u * rho_eps for the sawtooth of a configuration.
#[derive(Debug, Clone)]
pub struct MollifiedConfiguration {
    config: Configuration,
    eps: f64,
    spec: &'static MollifierSpec,
}

impl MollifiedConfiguration {
    pub fn new(config: &Configuration, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(GagliardoError::InvalidParams(format!(
                "eps = {eps} must be positive"
            )));
        }
        if eps >= 0.5 * config.t() {
            return Err(GagliardoError::InvalidParams(format!(
                "eps = {eps} must be below T/2"
            )));
        }
        Ok(Self {
            config: config.clone(),
            eps,
            spec: MollifierSpec::global(),
        })
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Copies x_j + kT with x_j + kT in (lo, hi), as (j, position).
    fn copies_in(&self, lo: f64, hi: f64, mut visit: impl FnMut(usize, f64)) {
        let t = self.config.t();
        for (j, &xj) in self.config.points().iter().enumerate() {
            let k0 = ((lo - xj) / t).floor() as i64;
            let k1 = ((hi - xj) / t).ceil() as i64;
            for k in k0..=k1 {
                let y = xj + k as f64 * t;
                if y > lo && y < hi {
                    visit(j, y);
                }
            }
        }
    }

    /// rho_eps summed over the copies of jump i, at x.
    pub fn rho_i(&self, i: usize, x: f64) -> f64 {
        let t = self.config.t();
        let xi = self.config.points()[i];
        let mut d = (x - xi).rem_euclid(t);
        if d > 0.5 * t {
            d -= t;
        }
        self.spec.rho(d / self.eps) / self.eps
    }

    /// d/dx rho_eps summed over the copies of jump i.
    pub fn rho_i_prime(&self, i: usize, x: f64) -> f64 {
        let t = self.config.t();
        let xi = self.config.points()[i];
        let mut d = (x - xi).rem_euclid(t);
        if d > 0.5 * t {
            d -= t;
        }
        self.spec.rho_prime(d / self.eps) / (self.eps * self.eps)
    }
}

impl PeriodicFunction for MollifiedConfiguration {
    fn period(&self) -> f64 {
        self.config.t()
    }

    fn value(&self, x: f64) -> f64 {
        let eps = self.eps;
        let mut v = self.config.evaluate_u(x);
        self.copies_in(x - eps, x + eps, |_, y| {
            let ind = if y <= x { 1.0 } else { 0.0 };
            v += ind - self.spec.step((x - y) / eps);
        });
        v
    }

    fn increment(&self, x: f64, t: f64) -> f64 {
        let eps = self.eps;
        let (lo, hi) = if t >= 0.0 { (x, x + t) } else { (x + t, x) };
        let mut n = 0.0;
        self.copies_in(lo - eps, hi + eps, |_, y| {
            n += self.spec.step_diff((x - y) / eps, (x + t - y) / eps);
        });
        t - n
    }

    fn derivative(&self, x: f64) -> f64 {
        let mut d = 1.0;
        for i in 0..self.config.len() {
            d -= self.rho_i(i, x);
        }
        d
    }

    fn x_features(&self) -> Vec<f64> {
        let t = self.config.t();
        let mut f = Vec::with_capacity(3 * self.config.len());
        for &x in self.config.points() {
            for c in [x - self.eps, x, x + self.eps] {
                f.push(c.rem_euclid(t));
            }
        }
        f
    }

    fn t_features(&self) -> Vec<f64> {
        let t = self.config.t();
        let fold = |d: f64| {
            let r = d.rem_euclid(t);
            r.min(t - r)
        };
        let pts = self.config.points();
        let mut f = vec![2.0 * self.eps];
        for &a in pts {
            for &b in pts {
                let d = b - a;
                for c in [d - 2.0 * self.eps, d, d + 2.0 * self.eps] {
                    let r = fold(c);
                    if r > 0.0 {
                        f.push(r);
                    }
                }
            }
        }
        f
    }

    fn feature_width(&self) -> f64 {
        self.eps
    }

    fn label(&self) -> String {
        format!("mollified(T={}, eps={})", self.config.period(), self.eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalisation() {
        let m = MollifierSpec::global();
        assert!((m.z() - 0.443_993_816_168_079_4).abs() < 1e-12, "{}", m.z());
        let mass = gauss::integrate(|x| m.rho(x), -1.0, 0.0, 64)
            + gauss::integrate(|x| m.rho(x), 0.0, 1.0, 64);
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_is_monotone_and_symmetric() {
        let m = MollifierSpec::global();
        let mut prev = 0.0;
        for i in 0..=2000 {
            let x = -1.0 + i as f64 * 1e-3;
            let h = m.step(x);
            assert!(h >= prev - 1e-15);
            assert!((h + m.step(-x) - 1.0).abs() < 1e-12);
            prev = h;
        }
        assert_eq!(m.step(-1.5), 0.0);
        assert_eq!(m.step(1.0), 1.0);
    }

    #[test]
    fn mollified_mean_and_increment() {
        let c = Configuration::random(3, 0.2, 11).unwrap();
        let u = MollifiedConfiguration::new(&c, 0.05).unwrap();
        let mut mean = 0.0;
        let k = 3000;
        for i in 0..k {
            let a = 3.0 * i as f64 / k as f64;
            mean += gauss::integrate(|x| u.value(x), a, a + 3.0 / k as f64, 8);
        }
        assert!(mean.abs() < 1e-10, "{mean}");
        for &(x, t) in &[(0.3, 0.01), (1.1, 0.7), (2.9, -1.3), (0.0, 2.5)] {
            let a = u.increment(x, t);
            let b = u.value(x + t) - u.value(x);
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }
}
