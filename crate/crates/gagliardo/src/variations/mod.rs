//! First and second variations of the configuration energies.

pub mod cusp;
pub mod hessian;
pub mod mollified;
pub(crate) mod pv;
pub mod rigid;

pub use cusp::{
    cusp_expansion, cusp_scan, default_cusp_offsets, separation_functionals_p1, CuspRow, CuspScan,
};
pub use hessian::{hessian, spectrum_check, SpectrumCheck, VariationReport};
pub use mollified::{
    mollified_gradient, mollified_gradient_at, mollified_hessian, mollified_hessian_general,
};
pub use rigid::{gradient, rigid_laplacian};
