//! Energy of the mollified sawtooth, finite in every regime.

use crate::domain::{Configuration, FractionalParams};
use crate::energy::config::check_params;
use crate::energy::mollifier::MollifiedConfiguration;
use crate::energy::smooth::energy_smooth;
use crate::error::Result;
use crate::quadrature::EnergyReport;

/// Default relative tolerance for mollified energies.
pub const DEFAULT_TOL: f64 = 1e-9;

/// F^s_p(u^eps) for the configuration sawtooth u mollified at radius eps.
pub fn mollified_energy(
    config: &Configuration,
    params: &FractionalParams,
    eps: f64,
    tol: f64,
) -> Result<EnergyReport> {
    check_params(config, params)?;
    let u = MollifiedConfiguration::new(config, eps)?;
    energy_smooth(&u, params, tol)
}
