//! Quadrature building blocks: Gauss rules, tanh-sinh, periodic kernels, the exact
//! correlation profile and the singular integrator built on it.

pub mod gauss;
pub mod kernel;
pub mod oracle;
pub mod profile;
pub mod singular;
pub mod tanh_sinh;

pub use kernel::{periodic_kernel, periodic_kernel_adaptive, KernelValue};
pub use oracle::{cell_pair_oracle, FnOracle, OracleFunction};
pub use profile::{correlation_profile, CorrelationProfile};
pub use singular::{singular_integral, EnergyReport};
