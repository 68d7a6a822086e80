//! Behaviour of the energy when a jump of multiplicity m splits.

use super::pv::{pv_integral, PvTerm};
use super::rigid::check_subcritical;
use serde::{Deserialize, Serialize};

use crate::domain::{Configuration, FractionalParams};
use crate::energy::config::energy_config_tol;
use crate::error::{GagliardoError, Result};
use crate::limits::fitted_slope;

/// Leading term of E(X + h e_i) - E(X) = coefficient * h^exponent + ... at a jump of
/// multiplicity m; the coefficient is ((m-1)^p - m^p + 1) 2 / (sp (1-sp)).
pub fn cusp_expansion(m: usize, params: &FractionalParams) -> Result<(f64, f64)> {
    check_subcritical(params)?;
    if params.p == 1.0 {
        return Err(GagliardoError::WrongRegime(
            "p = 1: the leading term vanishes, use the separation functionals".into(),
        ));
    }
    if m < 2 {
        return Err(GagliardoError::InvalidParams(format!(
            "multiplicity {m} must be at least 2"
        )));
    }
    let (mf, p, sp) = (m as f64, params.p, params.sp());
    let coef = ((mf - 1.0).powf(p) - mf.powf(p) + 1.0) * 2.0 / (sp * (1.0 - sp));
    Ok((coef, 1.0 - sp))
}

/// One-sided derivatives (F+, F-) of the p = 1 energy when one jump of a multiple jump
/// at x_i moves right or left: E(X +- h e_i) - E(X) = h F+- + o(h).
pub fn separation_functionals_p1(config: &Configuration, i: usize, s: f64) -> Result<(f64, f64)> {
    if !(s > 0.0 && s < 1.0) {
        return Err(GagliardoError::InvalidParams(format!(
            "s = {s} must lie in (0, 1)"
        )));
    }
    if i >= config.len() {
        return Err(GagliardoError::InvalidParams(format!(
            "index {i} out of range"
        )));
    }
    let m = config.multiplicity(i);
    if m < 2 {
        return Err(GagliardoError::NotOverlapping { index: i });
    }
    let mf = m as f64;
    let sigma = 1.0 + s;
    let plus = [PvTerm { coef: 1.0, r: 1.0 }, PvTerm { coef: -1.0, r: 0.0 }];
    let minus = [
        PvTerm {
            coef: 1.0,
            r: mf - 1.0,
        },
        PvTerm { coef: -1.0, r: mf },
    ];
    let (fp, _) = pv_integral(config, i, &plus, 1.0, sigma);
    let (fm, _) = pv_integral(config, i, &minus, 1.0, sigma);
    Ok((fp, fm))
}

/// `n` log-spaced offsets from 1e-4 to 1e-2.
pub fn default_cusp_offsets(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|k| 10f64.powf(-4.0 + 2.0 * k as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspRow {
    pub h: f64,
    /// E(X + h e_i) - E(X)
    pub delta: f64,
    /// coefficient * h^exponent from the expansion
    pub predicted: f64,
}

/// Energy increments at a multiple jump with a log-log fit of their leading term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspScan {
    pub index: usize,
    pub multiplicity: usize,
    pub rows: Vec<CuspRow>,
    pub fitted_exponent: f64,
    pub fitted_coef: f64,
    pub predicted_exponent: f64,
    pub predicted_coef: f64,
}

impl CuspScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,delta,predicted\n");
        for r in &self.rows {
            s.push_str(&format!("{:?},{:?},{:?}\n", r.h, r.delta, r.predicted));
        }
        s
    }
}

/// Moves one jump of the multiple jump at `i` by each h > 0 and fits
/// log|delta| = log|c| + e log h. The fitted coefficient carries the sign of the increments.
pub fn cusp_scan(
    config: &Configuration,
    i: usize,
    params: &FractionalParams,
    offsets: &[f64],
    tol: f64,
) -> Result<CuspScan> {
    if i >= config.len() {
        return Err(GagliardoError::InvalidParams(format!(
            "index {i} out of range"
        )));
    }
    let m = config.multiplicity(i);
    let (pc, pe) = cusp_expansion(m, params)?;
    if offsets.len() < 2 || offsets.iter().any(|&h| !(h > 0.0 && h < 0.5)) {
        return Err(GagliardoError::InvalidParams(
            "cusp offsets must be at least two values in (0, 0.5)".into(),
        ));
    }
    let e0 = energy_config_tol(config, params, tol)?.value;
    let mut rows = Vec::with_capacity(offsets.len());
    for &h in offsets {
        let e = energy_config_tol(&config.perturbed(i, h), params, tol)?.value;
        rows.push(CuspRow {
            h,
            delta: e - e0,
            predicted: pc * h.powf(pe),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.delta.abs().ln()).collect();
    let slope = fitted_slope(&xs, &ys);
    let n = xs.len() as f64;
    let intercept = (ys.iter().sum::<f64>() - slope * xs.iter().sum::<f64>()) / n;
    let sign = rows.iter().map(|r| r.delta).sum::<f64>().signum();
    Ok(CuspScan {
        index: i,
        multiplicity: m,
        rows,
        fitted_exponent: slope,
        fitted_coef: sign * intercept.exp(),
        predicted_exponent: pe,
        predicted_coef: pc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_jump_coefficient() {
        let prm = FractionalParams::one_d(0.25, 2.0, 2).unwrap();
        let (c, e) = cusp_expansion(2, &prm).unwrap();
        assert!((c + 16.0).abs() < 1e-12 && (e - 0.5).abs() < 1e-15);
        let prm = FractionalParams::one_d(0.3, 1.0, 2).unwrap();
        assert!(matches!(
            cusp_expansion(2, &prm),
            Err(GagliardoError::WrongRegime(_))
        ));
    }

    #[test]
    fn simple_jump_is_not_overlapping() {
        let c = Configuration::equispaced(3).unwrap();
        assert!(matches!(
            separation_functionals_p1(&c, 1, 0.5),
            Err(GagliardoError::NotOverlapping { index: 1 })
        ));
    }
}
