use std::f64::consts::PI;

use gagliardo::domain::Configuration;
use gagliardo::error::GagliardoError;
use gagliardo::quadrature::{
    cell_pair_oracle, correlation_profile, gauss, periodic_kernel, periodic_kernel_adaptive,
    singular_integral, FnOracle,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// int_0^T |u(x+t)-u(x)|^p dx, exact up to rounding: u(x+t)-u(x) = t - (jumps in (x, x+t]),
/// so the integrand is constant between the points x_j and x_j - t.
fn correlation_by_pieces(c: &Configuration, p: f64, t: f64) -> f64 {
    let period = c.t();
    let mut cuts = vec![0.0, period];
    for &x in c.points() {
        for k in -2..=2 {
            for y in [x + k as f64 * period, x - t + k as f64 * period] {
                if y > 0.0 && y < period {
                    cuts.push(y);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.windows(2)
        .map(|w| {
            let m = 0.5 * (w[0] + w[1]);
            (w[1] - w[0]) * (c.evaluate_u(m + t) - c.evaluate_u(m)).abs().powf(p)
        })
        .sum()
}

#[test]
fn sawtooth_correlation() {
    let c = Configuration::equispaced(1).unwrap();
    let g = correlation_profile(&c, 2.0);
    assert!((g.eval(0.5) - 0.25).abs() < 1e-14);
    assert_eq!(g.eval(0.0), 0.0);
    for &t in &[0.1, 0.3, 0.77] {
        let want = t * (t - 1.0f64).abs().powi(2) + (1.0 - t) * t * t;
        assert!((g.eval(t) - want).abs() < 1e-13);
    }
}

#[test]
fn correlation_matches_direct_integration() {
    let c = Configuration::random(4, 0.0, 3).unwrap();
    for &p in &[1.0, 1.5, 2.0, 3.0] {
        let g = correlation_profile(&c, p);
        for &t in &[0.37, 1.2, 2.9] {
            let want = correlation_by_pieces(&c, p, t);
            assert!(
                (g.eval(t) - want).abs() <= 1e-8 * want,
                "p={p} t={t}: {} vs {want}",
                g.eval(t)
            );
        }
    }
}

#[test]
fn basel_limit() {
    for &period in &[1u32, 2, 5] {
        let t = period as f64;
        let k = periodic_kernel(t, period, 1.0, 64).unwrap();
        let want = PI * PI / (6.0 * t * t);
        assert!(
            (k.value - want).abs() <= k.half_width() + 1e-15,
            "T={period}"
        );
        assert!(
            k.partial + k.tail_lower <= want + 1e-15 && want <= k.partial + k.tail_upper + 1e-15
        );
    }
}

#[test]
fn first_image_only() {
    let k = periodic_kernel(1.0, 2, 0.5, 1).unwrap();
    assert_eq!(k.partial, 1.0);
    assert!(k.tail_lower > 0.0 && k.tail_upper >= k.tail_lower);
}

#[test]
fn kernel_argument_checks() {
    assert!(matches!(
        periodic_kernel(0.0, 1, 0.5, 4),
        Err(GagliardoError::SingularArgument(_))
    ));
    assert!(periodic_kernel(1.0, 1, 0.5, 0).is_err());
    let a = periodic_kernel_adaptive(0.3, 2, 0.4, 1e-12).unwrap();
    assert!(a.tail_upper - a.tail_lower <= 1e-12);
}

#[test]
fn tail_brackets_hold_against_long_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 1_000_000usize;
    for _ in 0..20 {
        let t: f64 = rng.gen_range(0.05..3.0);
        let sp: f64 = rng.gen_range(0.1..1.5);
        let period = 2u32;
        let tt = period as f64;
        let sigma = 1.0 + sp;
        let k = 4;
        let v = periodic_kernel(t, period, sp, k).unwrap();
        let term = |j: f64| (t + j * tt).powf(-sigma);
        // summed backwards for accuracy, closed with an integral and a half term
        let body: f64 = (k..n).rev().map(|j| term(j as f64)).sum();
        let end = (t + n as f64 * tt).powf(-sp) / (sp * tt) + 0.5 * term(n as f64);
        let rem = body + end;
        let slack = 1e-12 * rem;
        assert!(
            v.tail_lower <= rem + slack && rem <= v.tail_upper + slack,
            "t={t} sp={sp}"
        );
    }
}

#[test]
fn profile_path_matches_cell_pairs() {
    let c = Configuration::equispaced(1).unwrap();
    let e = singular_integral(&correlation_profile(&c, 2.0), 0.5, 1e-12).unwrap();
    let o = cell_pair_oracle(&c, 0.25, 2.0, 8, 64);
    assert!(
        (e.value - o.value).abs() <= 1e-6 * o.value,
        "{} vs {}",
        e.value,
        o.value
    );

    let c = Configuration::equispaced(2).unwrap();
    let e = singular_integral(&correlation_profile(&c, 2.0), 0.4, 1e-12).unwrap();
    let o = cell_pair_oracle(&c, 0.2, 2.0, 64, 256);
    assert!((e.value - o.value).abs() <= 1e-4 * o.value);
}

#[test]
fn singular_integral_rejects_critical() {
    let c = Configuration::equispaced(2).unwrap();
    assert!(matches!(
        singular_integral(&correlation_profile(&c, 2.0), 1.0, 1e-9),
        Err(GagliardoError::DivergentEnergy { .. })
    ));
}

#[test]
fn oracle_on_smooth_functions() {
    let flat = FnOracle {
        f: |_x: f64| 0.7,
        period: 1.0,
        breaks: vec![],
    };
    assert_eq!(cell_pair_oracle(&flat, 0.5, 2.0, 4, 32).value, 0.0);
    let sine = FnOracle {
        f: |x: f64| (2.0 * PI * x).sin(),
        period: 1.0,
        breaks: vec![],
    };
    let a = cell_pair_oracle(&sine, 0.5, 2.0, 8, 32).value;
    let b = cell_pair_oracle(&sine, 0.5, 2.0, 8, 64).value;
    assert!(a.is_finite() && a > 0.0);
    assert!((a - b).abs() <= 1e-3 * b);
}

#[test]
fn gauss_rules_are_exact_on_polynomials() {
    let v = gauss::integrate(|x| x.powi(9) - 3.0 * x * x, -1.0, 2.0, 5);
    assert!((v - (2f64.powi(10) - 1.0) / 10.0 + 9.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn profile_is_even_and_periodic(seed in 0u64..500, t in 0.01f64..2.99) {
        let c = Configuration::random(3, 0.0, seed).unwrap();
        let g = correlation_profile(&c, 1.5);
        let a = g.eval(t);
        prop_assert!(a >= 0.0);
        prop_assert!((a - g.eval(3.0 - t)).abs() <= 1e-10 * (1.0 + a));
        prop_assert!((a - g.eval(t + 3.0)).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn energy_is_translation_invariant(seed in 0u64..500, shift in -3.0f64..3.0) {
        let c = Configuration::random(3, 0.05, seed).unwrap();
        let e = singular_integral(&correlation_profile(&c, 2.0), 0.6, 1e-11).unwrap().value;
        let f = singular_integral(&correlation_profile(&c.translated(shift), 2.0), 0.6, 1e-11).unwrap().value;
        prop_assert!((e - f).abs() <= 1e-9 * e);
    }
}
