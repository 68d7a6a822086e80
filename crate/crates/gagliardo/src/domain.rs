//! Jump configurations on the periodic cell, their sawtooth representative and
//! the parameter pair (s, p).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GagliardoError, Result};

/// Tolerance on s*p used to classify the critical regime.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SubCritical,
    Critical,
    SuperCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalParams {
    pub s: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub period: u32,
    pub d: u32,
}

impl FractionalParams {
    pub fn new(s: f64, p: f64, period: u32, d: u32) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(GagliardoError::InvalidParams(format!(
                "s = {s} is outside (0, 1)"
            )));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(GagliardoError::InvalidParams(format!(
                "p = {p} must be >= 1"
            )));
        }
        if period < 1 {
            return Err(GagliardoError::InvalidParams(
                "T must be a positive integer".into(),
            ));
        }
        if d < 1 {
            return Err(GagliardoError::InvalidParams("d must be >= 1".into()));
        }
        Ok(Self { s, p, period, d })
    }

    /// One-dimensional parameters, the only case with configuration machinery.
    pub fn one_d(s: f64, p: f64, period: u32) -> Result<Self> {
        Self::new(s, p, period, 1)
    }

    pub fn sp(&self) -> f64 {
        self.s * self.p
    }

    /// Kernel exponent 1 + s p (d = 1).
    pub fn sigma(&self) -> f64 {
        1.0 + self.s * self.p
    }

    pub fn t(&self) -> f64 {
        self.period as f64
    }

    pub fn regime(&self) -> Regime {
        let sp = self.sp();
        if (sp - 1.0).abs() <= CRITICAL_TOL {
            Regime::Critical
        } else if sp < 1.0 {
            Regime::SubCritical
        } else {
            Regime::SuperCritical
        }
    }

    pub(crate) fn require_1d(&self) -> Result<()> {
        if self.d != 1 {
            return Err(GagliardoError::InvalidParams(
                "numerical energies are implemented for d = 1 only".into(),
            ));
        }
        Ok(())
    }
}

/// Sorted jump positions in [0, T), with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration", into = "RawConfiguration")]
pub struct Configuration {
    period: u32,
    points: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawConfiguration {
    #[serde(rename = "T")]
    period: u32,
    points: Vec<f64>,
}

impl TryFrom<RawConfiguration> for Configuration {
    type Error = GagliardoError;
    fn try_from(raw: RawConfiguration) -> Result<Self> {
        Configuration::new(&raw.points, raw.period)
    }
}

impl From<Configuration> for RawConfiguration {
    fn from(c: Configuration) -> Self {
        RawConfiguration {
            period: c.period,
            points: c.points,
        }
    }
}

fn wrap(x: f64, t: f64) -> f64 {
    let w = x.rem_euclid(t);
    // rem_euclid can round up to exactly t for tiny negative inputs
    if w >= t {
        0.0
    } else {
        w
    }
}

impl Configuration {
    /// Wraps every point into [0, T) and sorts. Exactly T points are required.
    pub fn new(points: &[f64], period: u32) -> Result<Self> {
        if period < 1 {
            return Err(GagliardoError::InvalidConfiguration(
                "T must be >= 1".into(),
            ));
        }
        if points.len() != period as usize {
            return Err(GagliardoError::InvalidConfiguration(format!(
                "expected {} points, got {}",
                period,
                points.len()
            )));
        }
        if let Some(bad) = points.iter().find(|x| !x.is_finite()) {
            return Err(GagliardoError::InvalidConfiguration(format!(
                "non-finite point {bad}"
            )));
        }
        let t = period as f64;
        let mut pts: Vec<f64> = points.iter().map(|&x| wrap(x, t)).collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        Ok(Self {
            period,
            points: pts,
        })
    }

    pub fn equispaced(period: u32) -> Result<Self> {
        if period < 1 {
            return Err(GagliardoError::InvalidConfiguration(
                "T must be >= 1".into(),
            ));
        }
        Ok(Self {
            period,
            points: (0..period).map(f64::from).collect(),
        })
    }

    /// Seeded random configuration whose circular gaps are all at least `min_gap`.
    pub fn random(period: u32, min_gap: f64, seed: u64) -> Result<Self> {
        if period < 1 {
            return Err(GagliardoError::InvalidConfiguration(
                "T must be >= 1".into(),
            ));
        }
        if !(min_gap >= 0.0) || min_gap > 1.0 {
            return Err(GagliardoError::InvalidConfiguration(format!(
                "min_gap = {min_gap} is infeasible (needs 0 <= min_gap <= 1)"
            )));
        }
        let n = period as usize;
        let t = period as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if min_gap >= 1.0 {
            let offset = (rng.gen_range(0..1024u32) as f64) / 1024.0;
            let pts: Vec<f64> = (0..n).map(|i| offset + i as f64).collect();
            return Self::new(&pts, period);
        }
        // small slack so rounding in the cumulative sums cannot undercut the floor
        let floor = if min_gap > 0.0 {
            min_gap + 8.0 * f64::EPSILON * t
        } else {
            0.0
        };
        let floor = floor.min(1.0);
        let weights: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = weights.iter().sum();
        let free = t - floor * t;
        let offset = rng.gen::<f64>() * t;
        let mut pts = Vec::with_capacity(n);
        let mut x = offset;
        for w in &weights {
            pts.push(x);
            x += floor + free * w / total;
        }
        let cfg = Self::new(&pts, period)?;
        if cfg.min_gap() < min_gap {
            // offset wrap produced a rounding casualty; fall back to the unshifted layout
            let shifted: Vec<f64> = pts.iter().map(|x| x - offset).collect();
            return Self::new(&shifted, period);
        }
        Ok(cfg)
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn t(&self) -> f64 {
        self.period as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Circular gaps: gap i runs from point i to point i+1 (the last one crosses the seam).
    pub fn gaps(&self) -> Vec<f64> {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                if i + 1 < n {
                    self.points[i + 1] - self.points[i]
                } else {
                    self.points[0] + self.t() - self.points[i]
                }
            })
            .collect()
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Number of points coinciding with point i (including itself).
    pub fn multiplicity(&self, i: usize) -> usize {
        let x = self.points[i];
        let t = self.t();
        self.points
            .iter()
            .filter(|&&y| y == x || (y - x).abs() == t)
            .count()
    }

    /// Translate all points by `a`, then wrap and sort.
    pub fn translated(&self, a: f64) -> Self {
        let pts: Vec<f64> = self.points.iter().map(|x| x + a).collect();
        Self::new(&pts, self.period).expect("translation of a valid configuration")
    }

    /// Copy with point i moved by `h` (then re-canonicalised).
    pub fn perturbed(&self, i: usize, h: f64) -> Self {
        let mut pts = self.points.clone();
        pts[i] += h;
        Self::new(&pts, self.period).expect("perturbation of a valid configuration")
    }

    /// Vertical offset making the representative mean-zero: u(x) = x - #jumps in (0,x] + c0.
    pub fn mean_offset(&self) -> f64 {
        let mean = self.points.iter().sum::<f64>() / self.points.len() as f64;
        self.t() / 2.0 - mean
    }

    /// Number of jumps (all periodic copies) in the half-open interval (a, b].
    pub fn jumps_in(&self, a: f64, b: f64) -> i64 {
        if b <= a {
            return 0;
        }
        let t = self.t();
        self.points
            .iter()
            .map(|&x| {
                let hi = last_copy_at_most(x, t, b);
                let lo = first_copy_above(x, t, a);
                (hi - lo + 1).max(0)
            })
            .sum()
    }

    /// Right-continuous mean-zero representative u[X](x).
    pub fn evaluate_u(&self, x: f64) -> f64 {
        let t = self.t();
        let xr = wrap(x, t);
        let count = self.points.iter().filter(|&&y| y <= xr).count() as f64;
        xr - count + self.mean_offset()
    }

    /// Number of jumps with multiplicity in the closed interval [a, b], all periodic copies.
    pub fn jump_count(&self, a: f64, b: f64) -> Result<usize> {
        if a > b || !a.is_finite() || !b.is_finite() {
            return Err(GagliardoError::InvalidInterval { a, b });
        }
        let t = self.t();
        let n = self
            .points
            .iter()
            .map(|&x| {
                let hi = last_copy_at_most(x, t, b);
                let lo = first_copy_at_least(x, t, a);
                (hi - lo + 1).max(0) as usize
            })
            .sum();
        Ok(n)
    }
}

// Index helpers over the copies x + mT, consistent with how x + m*T rounds.
fn last_copy_at_most(x: f64, t: f64, b: f64) -> i64 {
    let mut m = ((b - x) / t).floor() as i64;
    while x + m as f64 * t > b {
        m -= 1;
    }
    while x + (m + 1) as f64 * t <= b {
        m += 1;
    }
    m
}

fn first_copy_above(x: f64, t: f64, a: f64) -> i64 {
    let mut m = ((a - x) / t).floor() as i64 + 1;
    while x + (m - 1) as f64 * t > a {
        m -= 1;
    }
    while x + m as f64 * t <= a {
        m += 1;
    }
    m
}

fn first_copy_at_least(x: f64, t: f64, a: f64) -> i64 {
    let mut m = ((a - x) / t).ceil() as i64;
    while x + (m - 1) as f64 * t >= a {
        m -= 1;
    }
    while x + (m as f64) * t < a {
        m += 1;
    }
    m
}

/// Free-function spelling of [`Configuration::new`].
pub fn make_configuration(points: &[f64], period: u32) -> Result<Configuration> {
    Configuration::new(points, period)
}

pub fn equispaced(period: u32) -> Result<Configuration> {
    Configuration::equispaced(period)
}

pub fn random_configuration(period: u32, min_gap: f64, seed: u64) -> Result<Configuration> {
    Configuration::random(period, min_gap, seed)
}

pub fn evaluate_u(config: &Configuration, x: f64) -> f64 {
    config.evaluate_u(x)
}

pub fn jump_count(config: &Configuration, a: f64, b: f64) -> Result<usize> {
    config.jump_count(a, b)
}
