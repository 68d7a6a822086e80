//! Energy of a jump configuration through its exact correlation profile.

use crate::domain::{Configuration, FractionalParams};
use crate::error::{GagliardoError, Result};
use crate::quadrature::{singular_integral, CorrelationProfile, EnergyReport};

/// Default absolute tolerance for configuration energies.
pub const DEFAULT_TOL: f64 = 1e-8;

pub(crate) fn check_params(config: &Configuration, params: &FractionalParams) -> Result<()> {
    params.require_1d()?;
    if params.period != config.period() {
        return Err(GagliardoError::InvalidParams(format!(
            "params T = {} but configuration has T = {}",
            params.period,
            config.period()
        )));
    }
    Ok(())
}

/// F^s_p of the sawtooth with jumps at `config`.
pub fn energy_config(config: &Configuration, params: &FractionalParams) -> Result<EnergyReport> {
    energy_config_tol(config, params, DEFAULT_TOL)
}

pub fn energy_config_tol(
    config: &Configuration,
    params: &FractionalParams,
    tol: f64,
) -> Result<EnergyReport> {
    check_params(config, params)?;
    if params.sp() >= 1.0 - crate::domain::CRITICAL_TOL {
        return Err(GagliardoError::DivergentEnergy {
            s: params.s,
            p: params.p,
        });
    }
    let profile = CorrelationProfile::new(config, params.p);
    singular_integral(&profile, params.sp(), tol)
}
