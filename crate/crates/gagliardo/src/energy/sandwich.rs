//! Core/tail decomposition of the energy and the two-sided tail estimate.
//!
//! core(R) = int_0^T int_{-R}^{R} |u(x)-u(y)|^p |x-y|^{-d-sp} dy dx (ball centred at the
//! origin, not at x). The tail is bracketed by multiples of F^0_p(u).

use serde::{Deserialize, Serialize};

use crate::domain::{Configuration, FractionalParams};
use crate::energy::config::{check_params, energy_config};
use crate::energy::smooth::{
    energy_smooth, energy_zero_smooth, Engine, PeriodicFunction, Resolution,
};
use crate::energy::zero::energy_zero;
use crate::error::{GagliardoError, Result};
use crate::limits::sphere_area;
use crate::quadrature::gauss;
use crate::quadrature::kernel::{lattice_sum, DEFAULT_TERMS};
use crate::quadrature::profile::{level_measures, merge_breakpoints, CorrelationProfile};

/// Lower and upper tail bounds with their radius constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSandwich {
    pub lower: f64,
    pub upper: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Tail bounds for radius R, given F0 = F^0_p(u). Valid in any dimension.
pub fn tail_sandwich(f0: f64, r: f64, params: &FractionalParams) -> Result<TailSandwich> {
    let t = params.t();
    let d = params.d as f64;
    let sd = d.sqrt();
    if !(r > 2.0 * t * sd) {
        return Err(GagliardoError::InvalidRadius {
            r,
            min: 2.0 * t * sd,
        });
    }
    let sp = params.sp();
    let c1 = (r + 2.0 * t * sd) / (r + t * sd);
    let c2 = (r - 2.0 * t * sd) / (r - t * sd);
    let dw = d * sphere_area(params.d);
    let lower = dw * (r / t + 2.0 * sd).powf(-sp) / (sp * (t * c1).powf(d + sp)) * f0;
    let upper = dw * (r / t - 2.0 * sd).powf(-sp) / (sp * (t * c2).powf(d + sp)) * f0;
    Ok(TailSandwich {
        lower,
        upper,
        c1,
        c2,
    })
}

/// Full energy, its core at radius R and the bracket [core + lower, core + upper].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub r: f64,
    pub full: f64,
    pub core: f64,
    pub lower: f64,
    pub upper: f64,
    /// quadrature error estimate on full and core together
    pub err: f64,
}

impl SandwichReport {
    pub fn contains(&self) -> bool {
        self.full >= self.core + self.lower - self.err
            && self.full <= self.core + self.upper + self.err
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// GL over the panels between sorted cut points.
fn panels_integral<F: FnMut(f64) -> f64>(cuts: &[f64], n: usize, mut f: F) -> f64 {
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gauss::integrate(&mut f, w[0], w[1], n))
        .sum()
}

fn sorted(mut v: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    v.push(lo);
    v.push(hi);
    v.retain(|x| *x >= lo && *x <= hi);
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

/// Pieces of the decomposition that depend on R: returns (far, windowed) with
/// core = full - far + windowed.
fn core_parts<G, W>(
    period: f64,
    r: f64,
    sigma: f64,
    cuts: &[f64],
    n: usize,
    g: G,
    gw: W,
) -> (f64, f64)
where
    G: Fn(f64) -> f64,
    W: Fn(f64, f64, f64) -> f64,
{
    let a0 = r - period;
    let m = (a0 / period).ceil();
    let in_range = |lo: f64, hi: f64| -> Vec<f64> {
        let mut v = Vec::new();
        for &c in cuts {
            let k0 = ((lo - c) / period).floor() as i64;
            let k1 = ((hi - c) / period).ceil() as i64;
            for k in k0..=k1 {
                v.push(c + k as f64 * period);
            }
        }
        sorted(v, lo, hi)
    };
    // 2 int_{R-T}^inf g t^{-sigma}
    let mut far = 2.0 * panels_integral(&in_range(a0, m * period), n, |t| g(t) * t.powf(-sigma));
    far += 2.0
        * panels_integral(&in_range(0.0, period), n, |t| {
            g(t) * lattice_sum(t + m * period, period, sigma, DEFAULT_TERMS).value
        });
    // int_{R-T}^{R} [g_[0,R-t](t) + g(t)] t^{-sigma} + int_R^{R+T} g_[t-R,T](-t) t^{-sigma}
    let mut wcuts = in_range(a0, r);
    wcuts.extend(cuts.iter().map(|c| r - c));
    let wcuts = sorted(wcuts, a0, r);
    let mut windowed = panels_integral(&wcuts, n, |t| (gw(t, 0.0, r - t) + g(t)) * t.powf(-sigma));
    let mut wcuts = in_range(r, r + period);
    wcuts.extend(cuts.iter().map(|c| r + c));
    let wcuts = sorted(wcuts, r, r + period);
    windowed += panels_integral(&wcuts, n, |t| gw(-t, t - r, period) * t.powf(-sigma));
    (far, windowed)
}

/// Sandwich for a smooth periodic function.
pub fn sandwich_smooth<U: PeriodicFunction + ?Sized>(
    u: &U,
    params: &FractionalParams,
    r: f64,
) -> Result<SandwichReport> {
    params.require_1d()?;
    let period = u.period();
    let pr = FractionalParams {
        period: period.round().max(1.0) as u32,
        ..*params
    };
    let f0 = energy_zero_smooth(u, params.p);
    let bounds = tail_sandwich(f0, r, &pr)?;
    let full = energy_smooth(u, params, 1e-11)?;
    let res = Resolution::default();
    let engine = Engine::new(u, params.p, params.sigma(), res);
    let p = params.p;
    let gw = |t: f64, a: f64, b: f64| -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut out = [0.0];
        engine.x_integral(
            t,
            a,
            b,
            &|_x, _t, d, sc, o: &mut [f64]| o[0] += crate::energy::smooth::pow_scaled(d, sc, p),
            &mut out,
        );
        out[0]
    };
    let g = |t: f64| gw(t, 0.0, period);
    let k = 32;
    let cuts: Vec<f64> = (0..=k).map(|i| period * i as f64 / k as f64).collect();
    let (far, windowed) = core_parts(period, r, params.sigma(), &cuts, 20, g, gw);
    let core = full.value - far + windowed;
    Ok(SandwichReport {
        r,
        full: full.value,
        core,
        lower: bounds.lower,
        upper: bounds.upper,
        err: 2.0 * full.abs_err_est + 1e-9 * full.value.abs(),
    })
}

/// Sandwich for a configuration in the sub-critical regime.
pub fn sandwich_config(
    config: &Configuration,
    params: &FractionalParams,
    r: f64,
) -> Result<SandwichReport> {
    check_params(config, params)?;
    let f0 = energy_zero(config, params.p);
    let bounds = tail_sandwich(f0, r, params)?;
    let full = energy_config(config, params)?;
    let period = config.t();
    let p = params.p;
    let profile = CorrelationProfile::new(config, p);
    let g = |t: f64| profile.eval(t);
    let gw = |t: f64, a: f64, b: f64| -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut tau = t.rem_euclid(period);
        if tau >= period {
            tau = 0.0;
        }
        level_measures(config, tau, &[(a, b)])
            .iter()
            .enumerate()
            .map(|(k, m)| m * (tau - k as f64).abs().powf(p))
            .sum()
    };
    // kinks of g and of the windowed level measures
    let mut cand: Vec<f64> = profile.breakpoints().to_vec();
    for &x in config.points() {
        cand.push(x);
        cand.push(period - x);
    }
    let cuts = merge_breakpoints(cand, period);
    let (far, windowed) = core_parts(period, r, params.sigma(), &cuts, 24, g, gw);
    let core = full.value - far + windowed;
    Ok(SandwichReport {
        r,
        full: full.value,
        core,
        lower: bounds.lower,
        upper: bounds.upper,
        err: 2.0 * full.abs_err_est + 1e-9 * full.value.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_validation() {
        let prm = FractionalParams::one_d(0.3, 2.0, 2).unwrap();
        assert!(matches!(
            tail_sandwich(1.0, 4.0, &prm),
            Err(GagliardoError::InvalidRadius { .. })
        ));
        let b = tail_sandwich(1.0, 1e6 * 2.0, &prm).unwrap();
        assert!(b.lower < b.upper);
        assert!((b.c1 - 1.0).abs() < 2.0 * 2.0 / 2e6 && (1.0 - b.c2) < 2.0 * 2.0 / 2e6);
    }
}
