//! The rigid fractional p-Laplacian: derivative of the energy in one jump position.

use rayon::prelude::*;

use super::pv::{pv_integral, PvTerm};
use crate::domain::{Configuration, FractionalParams};
use crate::energy::config::check_params;
use crate::error::{GagliardoError, Result};

pub(crate) fn check_subcritical(params: &FractionalParams) -> Result<()> {
    if params.sp() >= 1.0 - crate::domain::CRITICAL_TOL {
        return Err(GagliardoError::DivergentEnergy {
            s: params.s,
            p: params.p,
        });
    }
    Ok(())
}

/// 2 P.V. int_R [|u(x_i) - u(y) + 1|^p - |u(x_i) - u(y)|^p] |x_i - y|^{-1-sp} dy with the
/// right-continuous value u(x_i). Equals d/dx_i of the energy.
pub fn rigid_laplacian(config: &Configuration, i: usize, params: &FractionalParams) -> Result<f64> {
    check_params(config, params)?;
    check_subcritical(params)?;
    if i >= config.len() {
        return Err(GagliardoError::InvalidParams(format!(
            "index {i} out of range"
        )));
    }
    let m = config.multiplicity(i);
    if m > 1 {
        return Err(GagliardoError::CuspPoint {
            index: i,
            multiplicity: m,
        });
    }
    let terms = [PvTerm { coef: 1.0, r: 1.0 }, PvTerm { coef: -1.0, r: 0.0 }];
    Ok(pv_integral(config, i, &terms, params.p, params.sigma()).0)
}

/// All components of the energy gradient.
pub fn gradient(config: &Configuration, params: &FractionalParams) -> Result<Vec<f64>> {
    (0..config.len())
        .into_par_iter()
        .map(|i| rigid_laplacian(config, i, params))
        .collect()
}
