//! Energy functionals on configurations and smooth periodic functions.

pub mod config;
pub mod mollified;
pub mod mollifier;
pub mod sandwich;
pub mod smooth;
pub mod zero;

pub use config::{energy_config, energy_config_tol};
pub use mollified::mollified_energy;
pub use mollifier::{MollifiedConfiguration, MollifierSpec};
pub use sandwich::{sandwich_config, sandwich_smooth, tail_sandwich, SandwichReport, TailSandwich};
pub use smooth::{energy_smooth, PeriodicFunction, Resolution, Sine};
pub use zero::{energy_zero, segment_pair_integral};
