//! Projected descent over the configuration torus.
//!
//! Iterates are stored as sorted configurations; a step moves every point by
//! -alpha * direction, computed on the circular gaps so the cyclic order is kept.
//! Gaps below the floor are raised to it and the excess is taken from the gaps
//! above the floor in proportion to their slack.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Configuration, FractionalParams};
use crate::energy::config::energy_config_tol;
use crate::energy::mollified::mollified_energy;
use crate::energy::zero::{energy_zero, energy_zero_min};
use crate::error::{GagliardoError, Result};
use crate::variations::rigid::check_subcritical;
use crate::variations::{gradient, hessian, mollified_gradient, mollified_hessian};

/// Consecutive rejected trial steps before giving up.
pub const MAX_LINE_SEARCH_FAILURES: usize = 50;

/// Step used for the central differences of the s = 0 energy.
pub const ZERO_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DescentMode {
    Exact,
    Mollified { eps: f64 },
}

/// Backtracking parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRule {
    pub initial: f64,
    pub shrink: f64,
    /// sufficient-decrease constant
    pub armijo: f64,
}

impl Default for StepRule {
    fn default() -> Self {
        Self {
            initial: 0.05,
            shrink: 0.5,
            armijo: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    pub max_iters: usize,
    /// stop once the sup norm of the gradient is at most this
    pub grad_tol: f64,
    pub step: StepRule,
    pub min_gap_floor: f64,
    pub mode: DescentMode,
    /// Newton steps on the complement of the translations when the Hessian is
    /// positive there; plain descent otherwise
    pub newton: bool,
    /// relative tolerance of the energy evaluations used by the line search
    pub energy_tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            grad_tol: 1e-8,
            step: StepRule::default(),
            min_gap_floor: 0.0,
            mode: DescentMode::Exact,
            newton: false,
            energy_tol: 1e-11,
        }
    }
}

impl DescentOptions {
    /// Mollified mode with the 4 eps floor.
    pub fn mollified(eps: f64) -> Self {
        Self {
            mode: DescentMode::Mollified { eps },
            min_gap_floor: 4.0 * eps,
            energy_tol: 1e-8,
            ..Self::default()
        }
    }

    fn validate(&self, period: u32) -> Result<()> {
        let st = &self.step;
        let ok = self.max_iters > 0
            && self.grad_tol > 0.0
            && st.initial > 0.0
            && st.shrink > 0.0
            && st.shrink < 1.0
            && st.armijo > 0.0
            && st.armijo < 1.0
            && self.min_gap_floor >= 0.0
            && self.min_gap_floor * period as f64 <= period as f64
            && self.energy_tol > 0.0;
        if !ok {
            return Err(GagliardoError::InvalidParams(format!(
                "invalid descent options {self:?}"
            )));
        }
        if let DescentMode::Mollified { eps } = self.mode {
            if !(eps > 0.0) {
                return Err(GagliardoError::InvalidParams(format!(
                    "eps = {eps} must be positive"
                )));
            }
            if self.min_gap_floor < 4.0 * eps {
                return Err(GagliardoError::InvalidParams(format!(
                    "mollified descent needs min_gap_floor >= 4 eps = {}",
                    4.0 * eps
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentTrace {
    pub iterates: Vec<Configuration>,
    pub energies: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub termination: Termination,
    /// quadrature noise allowed in the energy comparisons
    pub energy_noise: f64,
    /// closed-form lower bound checked at every iterate (s = 0 descent only)
    pub lower_bound: Option<f64>,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    iter: usize,
    energy: f64,
    grad_inf: f64,
    points: &'a [f64],
}

/// Closing record of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub termination: Termination,
    pub iters: usize,
    pub final_energy: f64,
    pub final_grad_inf: f64,
    pub final_points: Vec<f64>,
    pub equispaced: bool,
    pub max_gap_deviation: f64,
    pub lower_bound_ok: Option<bool>,
}

impl DescentTrace {
    pub fn last(&self) -> &Configuration {
        self.iterates
            .last()
            .expect("a trace holds at least the start")
    }

    pub fn final_energy(&self) -> f64 {
        *self.energies.last().expect("non-empty")
    }

    pub fn final_grad(&self) -> f64 {
        *self.grad_norms.last().expect("non-empty")
    }

    /// Iterations performed (the start is iterate 0).
    pub fn iters(&self) -> usize {
        self.iterates.len() - 1
    }

    /// Energies never increase by more than the quadrature noise.
    pub fn is_monotone(&self) -> bool {
        self.energies
            .windows(2)
            .all(|w| w[1] <= w[0] + self.energy_noise)
    }

    /// Every energy sits above the closed-form bound, up to `tol`; None without a bound.
    pub fn respects_lower_bound(&self, tol: f64) -> Option<bool> {
        self.lower_bound
            .map(|b| self.energies.iter().all(|&e| e >= b - tol))
    }

    /// One JSON object per iterate, LF-terminated.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for (k, ((c, e), g)) in self
            .iterates
            .iter()
            .zip(&self.energies)
            .zip(&self.grad_norms)
            .enumerate()
        {
            let line = TraceLine {
                iter: k,
                energy: *e,
                grad_inf: *g,
                points: c.points(),
            };
            s.push_str(&serde_json::to_string(&line).expect("plain data serialises"));
            s.push('\n');
        }
        s
    }

    pub fn summary(&self, gap_tol: f64) -> TraceSummary {
        let eq = verify_equispaced(self.last(), gap_tol);
        TraceSummary {
            termination: self.termination,
            iters: self.iters(),
            final_energy: self.final_energy(),
            final_grad_inf: self.final_grad(),
            final_points: self.last().points().to_vec(),
            equispaced: eq.equispaced,
            max_gap_deviation: eq.max_deviation,
            lower_bound_ok: self.respects_lower_bound(1e-9 * self.final_energy().abs().max(1.0)),
        }
    }
}

/// Sorted circular gaps compared with 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquispacedReport {
    pub equispaced: bool,
    pub max_deviation: f64,
    pub sorted_gaps: Vec<f64>,
}

/// True iff every circular gap is 1 within `tol`, i.e. the configuration is a
/// translate of the equispaced one.
pub fn verify_equispaced(result: &Configuration, tol: f64) -> EquispacedReport {
    let mut gaps = result.gaps();
    gaps.sort_by(|a, b| a.total_cmp(b));
    let max_deviation = gaps.iter().fold(0.0f64, |m, g| m.max((g - 1.0).abs()));
    EquispacedReport {
        equispaced: max_deviation <= tol,
        max_deviation,
        sorted_gaps: gaps,
    }
}

/// Raises gaps below `floor` to it and removes the excess from the others in
/// proportion to their slack above the floor. None if the floor is infeasible.
pub fn project_gaps(gaps: &mut [f64], floor: f64) -> Option<()> {
    let deficit: f64 = gaps.iter().filter(|&&g| g < floor).map(|g| floor - g).sum();
    if deficit == 0.0 {
        return Some(());
    }
    let slack: f64 = gaps.iter().filter(|&&g| g > floor).map(|g| g - floor).sum();
    if slack < deficit {
        return None;
    }
    let ratio = deficit / slack;
    for g in gaps.iter_mut() {
        if *g < floor {
            *g = floor;
        } else {
            *g -= ratio * (*g - floor);
        }
    }
    Some(())
}

/// Energy with its quadrature noise, gradient and optional Hessian.
trait Objective: Sync {
    fn energy(&self, c: &Configuration) -> Result<(f64, f64)>;
    fn gradient(&self, c: &Configuration) -> Result<Vec<f64>>;
    fn hessian(&self, _c: &Configuration) -> Option<Result<Vec<Vec<f64>>>> {
        None
    }
}

struct ExactObjective<'a> {
    params: &'a FractionalParams,
    tol: f64,
}

impl Objective for ExactObjective<'_> {
    fn energy(&self, c: &Configuration) -> Result<(f64, f64)> {
        let r = energy_config_tol(c, self.params, self.tol)?;
        Ok((r.value, r.abs_err_est))
    }
    fn gradient(&self, c: &Configuration) -> Result<Vec<f64>> {
        gradient(c, self.params)
    }
    fn hessian(&self, c: &Configuration) -> Option<Result<Vec<Vec<f64>>>> {
        Some(hessian(c, self.params).map(|r| r.hessian.expect("exact Hessian is always filled")))
    }
}

struct MollifiedObjective<'a> {
    params: &'a FractionalParams,
    eps: f64,
    tol: f64,
}

impl Objective for MollifiedObjective<'_> {
    fn energy(&self, c: &Configuration) -> Result<(f64, f64)> {
        let r = mollified_energy(c, self.params, self.eps, self.tol)?;
        Ok((r.value, r.abs_err_est))
    }
    fn gradient(&self, c: &Configuration) -> Result<Vec<f64>> {
        mollified_gradient(c, self.params, self.eps)
    }
    fn hessian(&self, c: &Configuration) -> Option<Result<Vec<Vec<f64>>>> {
        Some(mollified_hessian(c, self.params, self.eps).map(|r| r.hessian.expect("filled")))
    }
}

struct ZeroObjective {
    p: f64,
}

impl Objective for ZeroObjective {
    fn energy(&self, c: &Configuration) -> Result<(f64, f64)> {
        let e = energy_zero(c, self.p);
        Ok((e, 1e-14 * e.abs()))
    }
    fn gradient(&self, c: &Configuration) -> Result<Vec<f64>> {
        let h = ZERO_FD_STEP;
        Ok((0..c.len())
            .map(|i| {
                (energy_zero(&c.perturbed(i, h), self.p) - energy_zero(&c.perturbed(i, -h), self.p))
                    / (2.0 * h)
            })
            .collect())
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Newton direction on the complement of (1, ..., 1), if the Hessian is positive there.
fn newton_direction(h: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (h[i][j] + h[j][i]));
    let shift = m.norm().max(1.0) / n as f64;
    // lifting the kernel: H + shift * 1 1^T is positive definite iff H is on the complement
    let lifted = DMatrix::from_fn(n, n, |i, j| m[(i, j)] + shift);
    let chol = lifted.cholesky()?;
    let mean = g.iter().sum::<f64>() / n as f64;
    let rhs = DVector::from_iterator(n, g.iter().map(|x| -(x - mean)));
    let d = chol.solve(&rhs);
    let dm = d.mean();
    let d: Vec<f64> = d.iter().map(|x| x - dm).collect();
    (dot(&d, g) < 0.0).then_some(d)
}

/// Moves every point by `alpha * dir`, keeping the cyclic order. Returns None when
/// the step reorders the points and no floor is available to repair it.
fn take_step(c: &Configuration, dir: &[f64], alpha: f64, floor: f64) -> Option<Configuration> {
    let x = c.points();
    let n = x.len();
    let gaps = c.gaps();
    let mut new_gaps: Vec<f64> = (0..n)
        .map(|k| gaps[k] + alpha * (dir[(k + 1) % n] - dir[k]))
        .collect();
    if floor > 0.0 {
        project_gaps(&mut new_gaps, floor)?;
    } else if new_gaps.iter().any(|&g| g < 0.0) {
        return None;
    }
    let mut pts = Vec::with_capacity(n);
    let mut y = x[0] + alpha * dir[0];
    for g in new_gaps.iter().take(n) {
        pts.push(y);
        y += g;
    }
    Configuration::new(&pts, c.period()).ok()
}

fn has_overlap(c: &Configuration) -> bool {
    c.len() > 1 && c.gaps().iter().any(|&g| g <= 0.0)
}

fn cusp_as_encounter(e: GagliardoError, iter: usize) -> GagliardoError {
    match e {
        GagliardoError::CuspPoint { .. } => GagliardoError::CuspEncountered { iter },
        other => other,
    }
}

fn descend(
    obj: &dyn Objective,
    config0: &Configuration,
    opts: &DescentOptions,
    exact: bool,
    lower_bound: Option<f64>,
) -> Result<DescentTrace> {
    opts.validate(config0.period())?;
    if exact && has_overlap(config0) {
        return Err(GagliardoError::CuspEncountered { iter: 0 });
    }
    let mut c = config0.clone();
    if opts.min_gap_floor > 0.0 && c.min_gap() < opts.min_gap_floor {
        let mut gaps = c.gaps();
        project_gaps(&mut gaps, opts.min_gap_floor)
            .ok_or_else(|| GagliardoError::InvalidParams("min_gap_floor is infeasible".into()))?;
        let x0 = c.points()[0];
        let pts: Vec<f64> = gaps
            .iter()
            .scan(x0, |y, g| {
                let v = *y;
                *y += g;
                Some(v)
            })
            .collect();
        c = Configuration::new(&pts, c.period())?;
    }
    let (mut e, mut noise) = obj.energy(&c).map_err(|e| cusp_as_encounter(e, 0))?;
    let mut g = obj.gradient(&c).map_err(|e| cusp_as_encounter(e, 0))?;
    let mut trace = DescentTrace {
        iterates: vec![c.clone()],
        energies: vec![e],
        grad_norms: vec![sup(&g)],
        termination: Termination::MaxIters,
        energy_noise: 0.0,
        lower_bound,
    };
    let mut alpha0 = opts.step.initial;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for iter in 1..=opts.max_iters {
        if sup(&g) <= opts.grad_tol {
            trace.termination = Termination::Converged;
            break;
        }
        let mut dir = None;
        let mut is_newton = false;
        if opts.newton {
            if let Some(h) = obj.hessian(&c) {
                let h = h.map_err(|e| cusp_as_encounter(e, iter))?;
                dir = newton_direction(&h, &g);
                is_newton = dir.is_some();
            }
        }
        let dir = dir.unwrap_or_else(|| g.iter().map(|x| -x).collect());
        let slope = dot(&g, &dir);
        let mut alpha = if is_newton {
            1.0
        } else {
            // Barzilai-Borwein guess from the previous step, kept within a sane range
            match &prev {
                Some((sx, sy)) if dot(sx, sy) > 0.0 => (dot(sx, sx) / dot(sx, sy))
                    .clamp(1e-3 * opts.step.initial, 1e3 * opts.step.initial),
                _ => alpha0,
            }
        };
        let mut failures = 0;
        let accepted = loop {
            if failures >= MAX_LINE_SEARCH_FAILURES {
                return Err(GagliardoError::StalledDescent { iter, failures });
            }
            let trial = match take_step(&c, &dir, alpha, opts.min_gap_floor) {
                Some(t) if !(exact && has_overlap(&t)) => t,
                Some(_) if exact => return Err(GagliardoError::CuspEncountered { iter }),
                _ => {
                    failures += 1;
                    alpha *= opts.step.shrink;
                    continue;
                }
            };
            let (et, nt) = match obj.energy(&trial) {
                Ok(v) => v,
                Err(err @ GagliardoError::CuspPoint { .. }) => {
                    return Err(cusp_as_encounter(err, iter))
                }
                Err(err) => return Err(err),
            };
            let tol_e = 2.0 * (noise + nt) + 4.0 * f64::EPSILON * e.abs();
            let predicted = opts.step.armijo * alpha * slope;
            if et <= e + predicted {
                break (trial, et, nt, None);
            }
            // below the noise floor the energy cannot rank the trial; fall back on the gradient
            if predicted.abs() <= tol_e && et <= e + tol_e {
                let gt = obj
                    .gradient(&trial)
                    .map_err(|e| cusp_as_encounter(e, iter))?;
                if sup(&gt) < sup(&g) {
                    trace.energy_noise = trace.energy_noise.max(tol_e);
                    break (trial, et, nt, Some(gt));
                }
            }
            failures += 1;
            alpha *= opts.step.shrink;
        };
        let (next, et, nt, gt) = accepted;
        let gn = match gt {
            Some(v) => v,
            None => obj
                .gradient(&next)
                .map_err(|e| cusp_as_encounter(e, iter))?,
        };
        let sx: Vec<f64> = dir.iter().map(|d| alpha * d).collect();
        let sy: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        prev = Some((sx, sy));
        if !is_newton {
            alpha0 = (alpha / opts.step.shrink).min(opts.step.initial.max(alpha));
        }
        c = next;
        e = et;
        noise = nt;
        g = gn;
        trace.iterates.push(c.clone());
        trace.energies.push(e);
        trace.grad_norms.push(sup(&g));
    }
    if sup(&g) <= opts.grad_tol {
        trace.termination = Termination::Converged;
    }
    Ok(trace)
}

/// Projected descent on the exact or mollified energy.
pub fn gradient_descent(
    config0: &Configuration,
    params: &FractionalParams,
    opts: &DescentOptions,
) -> Result<DescentTrace> {
    match opts.mode {
        DescentMode::Exact => {
            check_subcritical(params)?;
            descend(
                &ExactObjective {
                    params,
                    tol: opts.energy_tol,
                },
                config0,
                opts,
                true,
                None,
            )
        }
        DescentMode::Mollified { eps } => {
            if params.p <= 1.0 {
                return Err(GagliardoError::WrongRegime(
                    "mollified descent needs p > 1".into(),
                ));
            }
            descend(
                &MollifiedObjective {
                    params,
                    eps,
                    tol: opts.energy_tol,
                },
                config0,
                opts,
                false,
                None,
            )
        }
    }
}

/// Descent on the s = 0 energy with central-difference gradients. The trace carries
/// the closed-form minimum as its lower bound.
pub fn minimize_zero(
    config0: &Configuration,
    p: f64,
    opts: &DescentOptions,
) -> Result<DescentTrace> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(GagliardoError::InvalidParams(format!(
            "p = {p} must be >= 1"
        )));
    }
    let opts = DescentOptions {
        mode: DescentMode::Exact,
        newton: false,
        ..*opts
    };
    let bound = energy_zero_min(config0.period(), p);
    descend(&ZeroObjective { p }, config0, &opts, false, Some(bound))
}

/// Independent restarts, run concurrently.
pub fn descent_restarts(
    starts: &[Configuration],
    params: &FractionalParams,
    opts: &DescentOptions,
) -> Vec<Result<DescentTrace>> {
    starts
        .par_iter()
        .map(|c| gradient_descent(c, params, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_keeps_total_and_floor() {
        let mut g = vec![0.01, 1.5, 0.2, 1.29];
        project_gaps(&mut g, 0.2).unwrap();
        assert!((g.iter().sum::<f64>() - 3.0).abs() < 1e-14);
        assert!(g.iter().all(|&x| x >= 0.2 - 1e-15));
        let mut bad = vec![0.1, 0.1];
        assert!(project_gaps(&mut bad, 0.2).is_none());
    }

    #[test]
    fn equispaced_check() {
        let c = Configuration::equispaced(7).unwrap();
        assert!(verify_equispaced(&c, 0.0).equispaced);
        assert!(verify_equispaced(&c.translated(0.31), 1e-12).equispaced);
        let c = Configuration::new(&[0.0, 0.9, 2.0], 3).unwrap();
        assert!(!verify_equispaced(&c, 1e-6).equispaced);
    }

    #[test]
    fn options_validation() {
        let c = Configuration::equispaced(3).unwrap();
        let prm = FractionalParams::one_d(0.5, 2.0, 3).unwrap();
        let mut o = DescentOptions::mollified(0.05);
        o.min_gap_floor = 0.1;
        assert!(gradient_descent(&c, &prm, &o).is_err());
        let o = DescentOptions {
            step: StepRule {
                shrink: 1.5,
                ..StepRule::default()
            },
            ..DescentOptions::default()
        };
        let prm = FractionalParams::one_d(0.3, 2.0, 3).unwrap();
        assert!(gradient_descent(&c, &prm, &o).is_err());
    }
}
