//! Second variation of the configuration energy.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::rigid::{check_subcritical, gradient};
use crate::domain::{Configuration, FractionalParams};
use crate::energy::config::check_params;
use crate::error::{GagliardoError, Result};
use crate::quadrature::kernel::two_sided;

/// Gradient, optional Hessian and the largest absolute row sum of the Hessian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub gradient: Vec<f64>,
    pub hessian: Option<Vec<Vec<f64>>>,
    pub row_sum_residual: f64,
}

impl VariationReport {
    /// Fills the diagonal from the off-diagonal entries so every row sums to zero.
    pub(crate) fn from_off_diagonal(gradient: Vec<f64>, mut h: Vec<Vec<f64>>) -> Self {
        let n = h.len();
        for i in 0..n {
            let s: f64 = (0..n).filter(|&j| j != i).map(|j| h[i][j]).sum();
            h[i][i] = -s;
        }
        let residual = h
            .iter()
            .map(|row| row.iter().sum::<f64>().abs())
            .fold(0.0, f64::max);
        Self {
            gradient,
            hessian: Some(h),
            row_sum_residual: residual,
        }
    }

    pub fn grad_inf(&self) -> f64 {
        self.gradient.iter().fold(0.0, |m, g| m.max(g.abs()))
    }

    /// H xi . xi.
    pub fn quadratic_form(&self, xi: &[f64]) -> Option<f64> {
        let h = self.hessian.as_ref()?;
        Some(
            h.iter()
                .zip(xi)
                .map(|(row, a)| a * row.iter().zip(xi).map(|(hij, b)| hij * b).sum::<f64>())
                .sum(),
        )
    }
}

/// 2|d|^p - |d+1|^p - |d-1|^p.
pub(crate) fn reverse_convexity(d: f64, p: f64) -> f64 {
    2.0 * d.abs().powf(p) - (d + 1.0).abs().powf(p) - (d - 1.0).abs().powf(p)
}

/// Hessian of the energy in the jump positions, with its gradient.
pub fn hessian(config: &Configuration, params: &FractionalParams) -> Result<VariationReport> {
    check_params(config, params)?;
    check_subcritical(params)?;
    if let Some(i) = (0..config.len()).find(|&i| config.multiplicity(i) > 1) {
        return Err(GagliardoError::CuspPoint {
            index: i,
            multiplicity: config.multiplicity(i),
        });
    }
    let grad = gradient(config, params)?;
    let n = config.len();
    let x = config.points();
    let u: Vec<f64> = x.iter().map(|&xi| config.evaluate_u(xi)).collect();
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (z, _) = two_sided(x[i] - x[j], config.t(), params.sigma());
            let v = 2.0 * reverse_convexity(u[i] - u[j], params.p) * z;
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    Ok(VariationReport::from_off_diagonal(grad, h))
}

/// Spectral summary of a Hessian with translation kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCheck {
    /// ascending
    pub eigenvalues: Vec<f64>,
    pub norm: f64,
    /// eigenvalues with |lambda| <= tol * norm
    pub near_zero: usize,
    /// angle between the kernel eigenvector and (1, ..., 1)
    pub kernel_angle: f64,
    pub min_nonzero: f64,
}

impl SpectrumCheck {
    /// Exactly one near-zero eigenvalue, along translations, and the rest positive.
    pub fn is_translation_only(&self, angle_tol: f64) -> bool {
        self.near_zero == 1 && self.kernel_angle < angle_tol && self.min_nonzero > 0.0
    }
}

pub fn spectrum_check(h: &[Vec<f64>], tol: f64) -> SpectrumCheck {
    let n = h.len();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (h[i][j] + h[j][i]));
    let norm = m.norm();
    let eig = SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let near_zero = eigenvalues.iter().filter(|l| l.abs() <= tol * norm).count();
    // the eigenvalue closest to zero
    let k0 = *idx
        .iter()
        .min_by(|&&a, &&b| {
            eig.eigenvalues[a]
                .abs()
                .total_cmp(&eig.eigenvalues[b].abs())
        })
        .expect("non-empty");
    let v: DVector<f64> = eig.eigenvectors.column(k0).into_owned();
    let ones = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let c = (v.dot(&ones).abs() / v.norm()).min(1.0);
    let kernel_angle = c.acos();
    let min_nonzero = idx
        .iter()
        .filter(|&&k| k != k0)
        .map(|&k| eig.eigenvalues[k])
        .fold(f64::INFINITY, f64::min);
    SpectrumCheck {
        eigenvalues,
        norm,
        near_zero,
        kernel_angle,
        min_nonzero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reverse_convexity_is_negative() {
        for p in [1.5, 2.0, 3.0] {
            for d in [-2.3, -0.5, 0.0, 0.2, 0.9, 4.0] {
                assert!(reverse_convexity(d, p) < 0.0);
            }
        }
    }

    #[test]
    fn double_jump_is_a_cusp() {
        let c = Configuration::new(&[0.5, 0.5, 2.0], 3).unwrap();
        let prm = FractionalParams::one_d(0.3, 2.0, 3).unwrap();
        assert!(matches!(
            hessian(&c, &prm),
            Err(GagliardoError::CuspPoint { .. })
        ));
    }
}
