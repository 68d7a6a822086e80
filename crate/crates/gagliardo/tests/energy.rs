use std::f64::consts::PI;

use gagliardo::domain::{Configuration, FractionalParams};
use gagliardo::energy::smooth::{energy_smooth_at, Constant, Resolution};
use gagliardo::energy::zero::{energy_zero_min, segment_pair_centered};
use gagliardo::energy::{
    energy_config, energy_config_tol, energy_smooth, energy_zero, mollified_energy,
    segment_pair_integral, tail_sandwich, Sine,
};
use gagliardo::error::GagliardoError;
use gagliardo::quadrature::{cell_pair_oracle, gauss};
use proptest::prelude::*;
use statrs::function::gamma::gamma;

fn params(s: f64, p: f64, t: u32) -> FractionalParams {
    FractionalParams::one_d(s, p, t).unwrap()
}

#[test]
fn sawtooth_energy_matches_oracle() {
    let c = Configuration::equispaced(1).unwrap();
    let e = energy_config(&c, &params(0.25, 2.0, 1)).unwrap();
    let o = cell_pair_oracle(&c, 0.25, 2.0, 8, 64);
    assert!((e.value - o.value).abs() <= 1e-4 * o.value);
    assert!(e.tail_lower <= e.tail_upper);
}

#[test]
fn translation_invariance() {
    let c = Configuration::random(4, 0.05, 9).unwrap();
    let prm = params(0.3, 2.0, 4);
    let a = energy_config_tol(&c, &prm, 1e-12).unwrap().value;
    let b = energy_config_tol(&c.translated(0.37), &prm, 1e-12)
        .unwrap()
        .value;
    assert!((a - b).abs() <= 1e-9 * a);
}

#[test]
fn divergence_at_and_above_criticality() {
    let c = Configuration::equispaced(2).unwrap();
    assert!(matches!(
        energy_config(&c, &params(0.5, 2.0, 2)),
        Err(GagliardoError::DivergentEnergy { .. })
    ));
    let d = Configuration::new(&[0.3, 0.3], 2).unwrap();
    assert!(matches!(
        energy_config(&d, &params(0.8, 1.5, 2)),
        Err(GagliardoError::DivergentEnergy { .. })
    ));
}

#[test]
fn period_mismatch_is_rejected() {
    let c = Configuration::equispaced(2).unwrap();
    assert!(energy_config(&c, &params(0.3, 2.0, 3)).is_err());
}

#[test]
fn smooth_energy_of_a_constant_is_zero() {
    let k = Constant {
        period: 1.0,
        c: 0.4,
    };
    assert_eq!(
        energy_smooth(&k, &params(0.5, 2.0, 1), 1e-9).unwrap().value,
        0.0
    );
}

/// For p = 2, F = int_R (1 - cos 2 pi t) |t|^{-1-2s} dt = 2 (2 pi)^{2s} (-Gamma(-2s) cos(pi s)).
fn sine_energy_p2(s: f64) -> f64 {
    2.0 * (2.0 * PI).powf(2.0 * s) * (-gamma(-2.0 * s) * (PI * s).cos())
}

#[test]
fn sine_energy_closed_form() {
    for &s in &[0.3, 0.5 + 1e-9, 0.75] {
        let e = energy_smooth(&Sine::unit(), &params(s, 2.0, 1), 1e-10).unwrap();
        let want = sine_energy_p2(s);
        assert!(
            (e.value - want).abs() <= 1e-7 * want,
            "s={s}: {} vs {want}",
            e.value
        );
    }
}

#[test]
fn sine_energy_self_converges() {
    let r = Resolution::default();
    let a = energy_smooth_at(&Sine::unit(), 0.5, 1.5, r).value;
    let b = energy_smooth_at(&Sine::unit(), 0.5, 1.5, r.finer()).value;
    assert!((a - b).abs() <= 1e-4 * b);
}

#[test]
fn zero_energy_values() {
    let eq2 = Configuration::equispaced(2).unwrap();
    assert!((energy_zero(&eq2, 2.0) - 2.0 / 3.0).abs() < 1e-14);
    for t in 1..=6u32 {
        let c = Configuration::equispaced(t).unwrap();
        for &p in &[1.0, 1.5, 2.0, 3.0] {
            let want = (t * t) as f64 * 2.0 / ((p + 1.0) * (p + 2.0));
            assert!((energy_zero(&c, p) - want).abs() <= 1e-13 * want);
            assert!((energy_zero_min(t, p) - want).abs() <= 1e-13 * want);
        }
    }
}

#[test]
fn zero_energy_matches_double_quadrature() {
    let c = Configuration::random(3, 0.0, 5).unwrap();
    // u(x) - u(y) is piecewise linear; integrate on the x-cells with y split at its kink
    let pts = c.points();
    let mut cells: Vec<f64> = pts.to_vec();
    cells.push(pts[0] + 3.0);
    let mut total = 0.0;
    for a in cells.windows(2) {
        for b in cells.windows(2) {
            let (ma, mb) = (0.5 * (a[0] + a[1]), 0.5 * (b[0] + b[1]));
            let cc = (c.evaluate_u(ma) - ma) - (c.evaluate_u(mb) - mb);
            let mut outer = vec![a[0], a[1]];
            outer.extend(
                [b[0] - cc, b[1] - cc]
                    .into_iter()
                    .filter(|&z| z > a[0] && z < a[1]),
            );
            outer.sort_by(|x, y| x.total_cmp(y));
            for o in outer.windows(2) {
                total += gauss::integrate(
                    |x| {
                        let k = x + cc;
                        let mut cuts = vec![b[0], b[1]];
                        if k > b[0] && k < b[1] {
                            cuts.insert(1, k);
                        }
                        cuts.windows(2)
                            .map(|w| gauss::integrate(|y| (x - y + cc).powi(2), w[0], w[1], 4))
                            .sum::<f64>()
                    },
                    o[0],
                    o[1],
                    4,
                );
            }
        }
    }
    let e = energy_zero(&c, 2.0);
    assert!((e - total).abs() <= 1e-6 * total, "{e} vs {total}");
}

#[test]
fn segment_pair_values() {
    assert!((segment_pair_integral(0.5, 0.5, 0.0, 2.0) - 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(segment_pair_integral(0.3, 0.0, 0.2, 2.0), 0.0);
    assert!((segment_pair_centered(0.5, 0.5, 2.0) - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn segment_pair_is_convex_in_c_with_minimum_at_zero() {
    let h = 1e-4;
    let cases = [
        (0.3, 0.7, 1.0),
        (0.5, 0.2, 1.5),
        (0.11, 0.9, 2.0),
        (0.4, 0.4, 3.0),
        (1.2, 0.05, 1.2),
    ];
    for &(l, lp, p) in &cases {
        let f = |c: f64| segment_pair_integral(l, lp, c, p);
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        assert!(d1.abs() <= 1e-8, "{d1}");
        for &c in &[-0.5, 0.0, 0.2, 1.0] {
            assert!(f(c + h) + f(c - h) - 2.0 * f(c) >= -1e-12);
        }
    }
}

#[test]
fn mollification_lowers_the_energy() {
    let c = Configuration::equispaced(1).unwrap();
    let prm = params(0.25, 2.0, 1);
    let exact = energy_config_tol(&c, &prm, 1e-12).unwrap();
    let mut last = f64::INFINITY;
    for &eps in &[0.2, 0.1, 0.05] {
        let m = mollified_energy(&c, &prm, eps, 1e-9).unwrap();
        assert!(m.value <= exact.value + m.abs_err_est + exact.abs_err_est);
        let gap = exact.value - m.value;
        assert!(gap < last, "eps={eps}");
        last = gap;
    }
}

#[test]
fn critical_energy_grows_logarithmically() {
    let c = Configuration::equispaced(2).unwrap();
    let prm = params(0.5, 2.0, 2);
    let a = mollified_energy(&c, &prm, 0.1, 1e-8).unwrap().value;
    let b = mollified_energy(&c, &prm, 0.05, 1e-8).unwrap().value;
    assert!(b - a >= 2.0 * 2f64.ln() * 0.95, "{}", b - a);
}

#[test]
fn tail_bounds_decay_like_the_kernel() {
    let prm = params(0.3, 2.0, 1);
    let f0 = 1.0;
    let r = 1e6;
    let ts = tail_sandwich(f0, r, &prm).unwrap();
    // d |S^0| = 2
    let law = 2.0 / 0.6 * r.powf(-0.6) * f0;
    assert!((ts.lower - law).abs() <= 1e-4 * law && (ts.upper - law).abs() <= 1e-4 * law);
    assert!((ts.c1 - 1.0).abs() < 2.0 / r && (ts.c2 - 1.0).abs() < 2.0 / r);
    assert!(matches!(
        tail_sandwich(f0, 1.5, &prm),
        Err(GagliardoError::InvalidRadius { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_energy_is_minimal_at_equispaced(seed in 0u64..10_000, t in 1u32..7, p in 1.0f64..4.0) {
        let c = Configuration::random(t, 0.0, seed).unwrap();
        prop_assert!(energy_zero(&c, p) >= energy_zero_min(t, p) * (1.0 - 1e-12));
    }

    #[test]
    fn segment_pair_is_even_in_c(l in 0.01f64..2.0, lp in 0.01f64..2.0, c in -3.0f64..3.0, p in 1.0f64..4.0) {
        let a = segment_pair_integral(l, lp, c, p);
        let b = segment_pair_integral(lp, l, -c, p);
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn energy_is_non_negative(seed in 0u64..10_000, s in 0.05f64..0.45) {
        let c = Configuration::random(2, 0.0, seed).unwrap();
        prop_assert!(energy_config(&c, &params(s, 2.0, 2)).unwrap().value >= 0.0);
    }
}
