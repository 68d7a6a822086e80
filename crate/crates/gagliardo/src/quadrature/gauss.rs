//! Gauss-Legendre and Gauss-Jacobi rules.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Nodes and weights on [-1, 1] (Legendre) or [0, 1] (Jacobi, see [`jacobi`]).
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre_rule(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Cached n-point Gauss-Legendre rule on [-1, 1].
pub fn legendre(n: usize) -> &'static Rule {
    const MAX: usize = 256;
    static RULES: [OnceLock<Rule>; MAX + 1] = [const { OnceLock::new() }; MAX + 1];
    assert!(
        (1..=MAX).contains(&n),
        "Gauss-Legendre order {n} out of range"
    );
    RULES[n].get_or_init(|| legendre_rule(n))
}

/// n-point rule for the weight t^beta (1-t)^alpha on [0, 1], via Golub-Welsch.
fn jacobi_rule(n: usize, alpha: f64, beta: f64) -> Rule {
    // recurrence for weight (1-x)^alpha (1+x)^beta on [-1, 1]
    let ab = alpha + beta;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        let den = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        *d = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / den
        };
    }
    for (i, o) in off.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        let num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
        let two = 2.0 * k + ab;
        let den = two * two * (two + 1.0) * (two - 1.0);
        *o = (num / den).sqrt();
    }
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = diag[k];
        if k + 1 < n {
            j[(k, k + 1)] = off[k];
            j[(k + 1, k)] = off[k];
        }
    }
    let eig = SymmetricEigen::new(j);
    // total mass of (1-x)^a (1+x)^b on [-1,1], then mapped to [0,1]: factor 2^{-(a+b+1)}
    let ln_mu0 =
        (ab + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0) - ln_gamma(ab + 2.0);
    let mu0 = (ln_mu0 - (ab + 1.0) * 2f64.ln()).exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let x = eig.eigenvalues[k];
            let v0 = eig.eigenvectors[(0, k)];
            ((1.0 + x) / 2.0, mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Cached rule with nodes in (0, 1) integrating f(t) t^beta (1-t)^alpha dt exactly for
/// polynomials f of degree < 2n. Requires alpha, beta > -1.
pub fn jacobi(n: usize, alpha: f64, beta: f64) -> Arc<Rule> {
    type Key = (usize, u64, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Rule>>>> = OnceLock::new();
    assert!(
        alpha > -1.0 && beta > -1.0,
        "Jacobi exponents must exceed -1"
    );
    let key = (n, alpha.to_bits(), beta.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = Arc::new(jacobi_rule(n, alpha, beta));
    let mut guard = cache.lock().unwrap();
    if guard.len() > 4096 {
        guard.clear();
    }
    guard.entry(key).or_insert(rule).clone()
}

/// Composite-free n-point Gauss-Legendre on [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let r = legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Integrate f(t) (t-a)^beta (b-t)^alpha over [a, b]. `f` receives (t, t-a, b-t).
pub fn integrate_jacobi<F: FnMut(f64, f64, f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    alpha: f64,
    beta: f64,
) -> f64 {
    let len = b - a;
    if alpha == 0.0 && beta == 0.0 {
        let r = legendre(n);
        let mut s = 0.0;
        for (x, w) in r.nodes.iter().zip(&r.weights) {
            let u = 0.5 * (1.0 + x);
            let v = 0.5 * (1.0 - x);
            s += w * f(a + len * u, len * u, len * v);
        }
        return 0.5 * s * len;
    }
    let r = jacobi(n, alpha, beta);
    let mut s = 0.0;
    for (u, w) in r.nodes.iter().zip(&r.weights) {
        let v = 1.0 - u;
        s += w * f(a + len * u, len * u, len * v);
    }
    s * len.powf(1.0 + alpha + beta)
}
