use gagliardo::domain::{Configuration, FractionalParams};
use gagliardo::energy::{energy_config_tol, mollified_energy};
use gagliardo::error::GagliardoError;
use gagliardo::variations::{
    cusp_expansion, gradient, hessian, mollified_gradient, mollified_hessian,
    mollified_hessian_general, separation_functionals_p1,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(s: f64, p: f64, t: u32) -> FractionalParams {
    FractionalParams::one_d(s, p, t).unwrap()
}

/// Random configuration shifted so no point sits near the wrap at 0.
fn interior(t: u32, min_gap: f64, seed: u64) -> Configuration {
    let c = Configuration::random(t, min_gap, seed).unwrap();
    let shift = 0.5 * c.gaps()[c.len() - 1] - c.points()[0];
    c.translated(shift)
}

#[test]
fn equispaced_is_critical() {
    for t in 1..=5u32 {
        let c = Configuration::equispaced(t).unwrap();
        for &(s, p) in &[(0.3, 2.0), (0.45, 1.5), (0.2, 3.0), (0.7, 1.2)] {
            let g = gradient(&c, &params(s, p, t)).unwrap();
            assert!(g.iter().all(|x| x.abs() < 1e-8), "T={t} s={s} p={p}: {g:?}");
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let c = interior(3, 0.1, 2);
    let prm = params(0.3, 2.0, 3);
    let g = gradient(&c, &prm).unwrap();
    let h = 1e-5;
    let e = |d: f64| {
        energy_config_tol(&c.perturbed(1, d), &prm, 1e-13)
            .unwrap()
            .value
    };
    let fd = (e(h) - e(-h)) / (2.0 * h);
    assert!((g[1] - fd).abs() <= 1e-3 * fd.abs(), "{} vs {fd}", g[1]);
}

#[test]
fn double_jumps_are_cusps() {
    let c = Configuration::new(&[0.4, 0.4, 2.0], 3).unwrap();
    assert!(matches!(
        gradient(&c, &params(0.3, 2.0, 3)),
        Err(GagliardoError::CuspPoint {
            multiplicity: 2,
            ..
        })
    ));
    assert!(matches!(
        hessian(&c, &params(0.3, 2.0, 3)),
        Err(GagliardoError::CuspPoint { .. })
    ));
}

#[test]
fn hessian_off_diagonal_is_negative() {
    for seed in 0..20 {
        let c = Configuration::random(4, 0.05, seed).unwrap();
        let h = hessian(&c, &params(0.3, 1.5, 4)).unwrap().hessian.unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(h[i][j] < 0.0);
                }
            }
        }
    }
}

#[test]
fn quadratic_form_identity() {
    let c = Configuration::random(4, 0.05, 21).unwrap();
    let rep = hessian(&c, &params(0.2, 3.0, 4)).unwrap();
    let h = rep.hessian.clone().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let xi: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut want = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                want -= h[i][j] * (xi[i] - xi[j]).powi(2);
            }
        }
        let got = rep.quadratic_form(&xi).unwrap();
        assert!((got - want).abs() <= 1e-9 * want.abs());
    }
}

#[test]
fn hessian_matches_gradient_differences() {
    let c = interior(3, 0.1, 4);
    let prm = params(0.3, 2.0, 3);
    let h = hessian(&c, &prm).unwrap().hessian.unwrap();
    let step = 1e-5;
    for j in 0..3 {
        let gp = gradient(&c.perturbed(j, step), &prm).unwrap();
        let gm = gradient(&c.perturbed(j, -step), &prm).unwrap();
        for i in 0..3 {
            let fd = (gp[i] - gm[i]) / (2.0 * step);
            assert!(
                (h[i][j] - fd).abs() <= 1e-3 * h[i][j].abs().max(1e-3),
                "({i},{j}): {} vs {fd}",
                h[i][j]
            );
        }
    }
}

#[test]
fn cusp_coefficients() {
    let (coef, exp) = cusp_expansion(2, &params(0.25, 2.0, 2)).unwrap();
    assert!((coef + 16.0).abs() < 1e-12 && (exp - 0.5).abs() < 1e-15);
    for m in 2..6 {
        for &p in &[1.2, 1.5, 2.0, 3.0] {
            assert!(cusp_expansion(m, &params(0.2, p, 6)).unwrap().0 < 0.0);
        }
    }
    assert!(cusp_expansion(1, &params(0.2, 2.0, 2)).is_err());
}

#[test]
fn separation_needs_a_multiple_jump() {
    let c = Configuration::new(&[0.0, 1.3, 2.2], 3).unwrap();
    assert!(matches!(
        separation_functionals_p1(&c, 1, 0.5),
        Err(GagliardoError::NotOverlapping { index: 1 })
    ));
}

#[test]
fn separation_functionals_favour_splitting() {
    for seed in 0..5 {
        let c = Configuration::random(4, 0.1, seed).unwrap();
        let mut pts = c.points().to_vec();
        pts[2] = pts[1];
        let c = Configuration::new(&pts, 4).unwrap();
        let i = (0..4).find(|&i| c.multiplicity(i) == 2).unwrap();
        for &s in &[0.2, 0.5, 0.8] {
            let (fp, fm) = separation_functionals_p1(&c, i, s).unwrap();
            assert!(fp + fm < 0.0);
        }
    }
}

#[test]
fn mollified_gradient_vanishes_at_equispaced() {
    for t in 2..=4u32 {
        let c = Configuration::equispaced(t).unwrap();
        let g = mollified_gradient(&c, &params(0.75, 2.0, t), 0.1).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-7), "{g:?}");
    }
}

#[test]
fn mollified_gradient_matches_finite_differences() {
    let eps = 0.05;
    let c = interior(3, 4.0 * eps + 0.05, 8);
    let prm = params(0.75, 2.0, 3);
    let g = mollified_gradient(&c, &prm, eps).unwrap();
    let h = 1e-5;
    let e = |d: f64| {
        mollified_energy(&c.perturbed(1, d), &prm, eps, 1e-12)
            .unwrap()
            .value
    };
    let fd = (e(h) - e(-h)) / (2.0 * h);
    assert!((g[1] - fd).abs() <= 1e-3 * fd.abs(), "{} vs {fd}", g[1]);
}

#[test]
fn mollified_gradient_pushes_towards_equispacing() {
    let c = Configuration::new(&[0.0, 0.7], 2).unwrap();
    let g = mollified_gradient(&c, &params(0.75, 2.0, 2), 0.05).unwrap();
    assert!(g[0] * g[1] < 0.0);
    // moving against the gradient lowers the energy and widens the short gap
    assert!(g[1] < 0.0);
}

#[test]
fn mollified_hessian_structure() {
    let eps = 0.05;
    let c = interior(3, 4.0 * eps + 0.05, 12);
    let prm = params(0.75, 2.0, 3);
    let rep = mollified_hessian(&c, &prm, eps).unwrap();
    let h = rep.hessian.clone().unwrap();
    let norm = h.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    assert!(rep.row_sum_residual <= 1e-8 * norm);
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                assert!(h[i][j] <= 0.0);
            }
        }
    }
    let step = 1e-5;
    for j in 0..3 {
        let gp = mollified_gradient(&c.perturbed(j, step), &prm, eps).unwrap();
        let gm = mollified_gradient(&c.perturbed(j, -step), &prm, eps).unwrap();
        for i in 0..3 {
            let fd = (gp[i] - gm[i]) / (2.0 * step);
            assert!(
                (h[i][j] - fd).abs() <= 1e-2 * norm,
                "({i},{j}): {} vs {fd}",
                h[i][j]
            );
        }
    }
    let general = mollified_hessian_general(&c, &prm, eps)
        .unwrap()
        .hessian
        .unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((general[i][j] - h[i][j]).abs() <= 1e-4 * norm);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_sums_to_zero(seed in 0u64..10_000, t in 2u32..6) {
        let c = Configuration::random(t, 0.05, seed).unwrap();
        let g = gradient(&c, &params(0.3, 2.0, t)).unwrap();
        let scale = g.iter().map(|x| x.abs()).fold(1.0, f64::max);
        prop_assert!(g.iter().sum::<f64>().abs() <= 1e-9 * scale);
    }

    #[test]
    fn reflection_flips_the_gradient(seed in 0u64..10_000) {
        let c = Configuration::random(3, 0.05, seed).unwrap();
        let prm = params(0.4, 1.5, 3);
        let g = gradient(&c, &prm).unwrap();
        let mirrored: Vec<f64> = c.points().iter().map(|x| -x).collect();
        let m = Configuration::new(&mirrored, 3).unwrap();
        let gm = gradient(&m, &prm).unwrap();
        // the mirror reverses the order of the points
        let mut a: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut b = gm.clone();
        a.sort_by(|x, y| x.total_cmp(y));
        b.sort_by(|x, y| x.total_cmp(y));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()));
        }
    }
}
