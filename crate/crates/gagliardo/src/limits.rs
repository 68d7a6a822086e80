//! Limit constants at both ends of the s range, convergence sweeps and the
//! logarithmic scan in the critical regime.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::domain::{Configuration, FractionalParams};
use crate::energy::mollified::mollified_energy;
use crate::energy::smooth::{
    dirichlet_energy, energy_smooth, energy_zero_smooth, PeriodicFunction,
};
use crate::error::{GagliardoError, Result};

/// Sweeps refuse s outside this range: the quadrature error would swamp the signal.
pub const S_MIN: f64 = 0.02;
pub const S_MAX: f64 = 0.99;

/// Surface area of the unit sphere in R^d.
pub fn sphere_area(d: u32) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// d * omega_d / (p T^d), with omega_d the area of the unit sphere in R^d.
pub fn limit_constant_s0(d: u32, p: f64, period: u32) -> f64 {
    d as f64 * sphere_area(d) / (p * (period as f64).powi(d as i32))
}

/// K_{d,p} = 2 pi^{(d-1)/2} Gamma((p+1)/2) / (p Gamma((d+p)/2)).
pub fn limit_constant_s1(d: u32, p: f64) -> f64 {
    if d == 1 {
        // the Gamma factors cancel
        return 2.0 / p;
    }
    let d = d as f64;
    2.0 * PI.powf((d - 1.0) / 2.0) * gamma((p + 1.0) / 2.0) / (p * gamma((d + p) / 2.0))
}

/// Value at 0 of the interpolating polynomial through (x_i, y_i).
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut q = ys.to_vec();
    let n = q.len();
    for m in 1..n {
        for i in 0..n - m {
            q[i] = (xs[i + m] * q[i] - xs[i] * q[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    q.first().copied().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    SZero,
    SOne,
    Critical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub kind: SweepKind,
    pub p: f64,
    pub period: f64,
    pub d: u32,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub raw: f64,
    pub scaled: f64,
    /// running extrapolant, or the fitted log-slope in a critical scan; None on
    /// the first row of a scan
    pub extrapolant: Option<f64>,
    pub abs_err_est: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub meta: SweepMeta,
    pub target: Option<f64>,
    pub rows: Vec<SweepRow>,
    /// critical scans only: compensated column stays above its start minus 0.5
    pub bounded_below: Option<bool>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl SweepTable {
    pub fn final_extrapolant(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.extrapolant)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("param,raw,scaled,extrapolant,target\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:?},{:?},{:?},{},{}\n",
                r.param,
                r.raw,
                r.scaled,
                fmt_opt(r.extrapolant),
                fmt_opt(self.target)
            ));
        }
        s
    }
}

fn check_schedule(schedule: &[f64], lo: f64, hi: f64, what: &str) -> Result<()> {
    if schedule.is_empty() {
        return Err(GagliardoError::InvalidParams(format!(
            "empty {what} schedule"
        )));
    }
    for &v in schedule {
        if !(v >= lo && v <= hi) {
            return Err(GagliardoError::InvalidParams(format!(
                "{what} = {v} outside [{lo}, {hi}]"
            )));
        }
    }
    let up = schedule.windows(2).all(|w| w[1] > w[0]);
    let down = schedule.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(GagliardoError::InvalidParams(format!(
            "{what} schedule must be strictly monotone"
        )));
    }
    Ok(())
}

fn sweep<U, W>(
    u: &U,
    p: f64,
    schedule: &[f64],
    tol: f64,
    kind: SweepKind,
    weight: W,
    target: f64,
) -> Result<SweepTable>
where
    U: PeriodicFunction + ?Sized,
    W: Fn(f64) -> f64 + Sync,
{
    check_schedule(schedule, S_MIN, S_MAX, "s")?;
    let period = u.period();
    let reports: Vec<_> = schedule
        .par_iter()
        .map(|&s| {
            let prm = FractionalParams {
                s,
                p,
                period: period.round().max(1.0) as u32,
                d: 1,
            };
            energy_smooth(u, &prm, tol)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(schedule.len());
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&s, rep) in schedule.iter().zip(&reports) {
        let w = weight(s);
        xs.push(w);
        ys.push(w * rep.value);
        rows.push(SweepRow {
            param: s,
            raw: rep.value,
            scaled: w * rep.value,
            extrapolant: Some(neville_at_zero(&xs, &ys)),
            abs_err_est: rep.abs_err_est,
        });
    }
    Ok(SweepTable {
        meta: SweepMeta {
            kind,
            p,
            period,
            d: 1,
            label: u.label(),
        },
        target: Some(target),
        rows,
        bounded_below: None,
    })
}

/// s F^s_p(u) along a schedule decreasing to 0, extrapolated linearly in s.
pub fn sweep_s0<U: PeriodicFunction + ?Sized>(
    u: &U,
    p: f64,
    schedule: &[f64],
    tol: f64,
) -> Result<SweepTable> {
    let period = u.period();
    let c = 1.0 * sphere_area(1) / (p * period);
    let target = c * energy_zero_smooth(u, p);
    sweep(u, p, schedule, tol, SweepKind::SZero, |s| s, target)
}

/// (1-s) F^s_p(u) along a schedule increasing to 1, extrapolated in 1-s.
pub fn sweep_s1<U: PeriodicFunction + ?Sized>(
    u: &U,
    p: f64,
    schedule: &[f64],
    tol: f64,
) -> Result<SweepTable> {
    let target = limit_constant_s1(1, p) * dirichlet_energy(u, p);
    sweep(u, p, schedule, tol, SweepKind::SOne, |s| 1.0 - s, target)
}

/// Least-squares slope of y against x.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Mollified energies at s = 1/p along a decreasing eps schedule. The scaled column is
/// F + 2^{2-p} T ln(eps); the extrapolant column holds the fitted slope of F against
/// ln(1/eps) over the rows so far.
pub fn critical_scan(
    config: &Configuration,
    p: f64,
    schedule: &[f64],
    tol: f64,
) -> Result<SweepTable> {
    if !(p > 1.0) {
        return Err(GagliardoError::WrongRegime(format!(
            "critical scan needs p > 1, got {p}"
        )));
    }
    check_schedule(schedule, f64::MIN_POSITIVE, 0.5 * config.t(), "eps")?;
    let params = FractionalParams::one_d(1.0 / p, p, config.period())?;
    let reports: Vec<_> = schedule
        .par_iter()
        .map(|&eps| mollified_energy(config, &params, eps, tol))
        .collect::<Result<_>>()?;
    let comp = 2f64.powf(2.0 - p) * config.t();
    let mut rows = Vec::with_capacity(schedule.len());
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&eps, rep) in schedule.iter().zip(&reports) {
        xs.push(-eps.ln());
        ys.push(rep.value);
        rows.push(SweepRow {
            param: eps,
            raw: rep.value,
            scaled: rep.value + comp * eps.ln(),
            extrapolant: (xs.len() > 1).then(|| fitted_slope(&xs, &ys)),
            abs_err_est: rep.abs_err_est,
        });
    }
    let start = rows
        .iter()
        .take(2)
        .map(|r| r.scaled)
        .fold(f64::INFINITY, f64::min);
    let err: f64 = rows.iter().map(|r| r.abs_err_est).fold(0.0, f64::max);
    let bounded = rows.iter().all(|r| r.scaled >= start - 0.5 - 2.0 * err);
    Ok(SweepTable {
        meta: SweepMeta {
            kind: SweepKind::Critical,
            p,
            period: config.t(),
            d: 1,
            label: format!("config(T={})", config.period()),
        },
        target: None,
        rows,
        bounded_below: Some(bounded),
    })
}
