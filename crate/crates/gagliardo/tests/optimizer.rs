use gagliardo::domain::{Configuration, FractionalParams};
use gagliardo::optimizer::{
    descent_restarts, gradient_descent, minimize_zero, project_gaps, verify_equispaced,
    DescentMode, DescentOptions, Termination,
};
use proptest::prelude::*;

fn params(s: f64, p: f64, t: u32) -> FractionalParams {
    FractionalParams::one_d(s, p, t).unwrap()
}

#[test]
fn equispaced_detection() {
    let eq = Configuration::equispaced(7).unwrap();
    assert!(verify_equispaced(&eq, 0.0).equispaced);
    assert!(verify_equispaced(&eq.translated(0.31), 1e-12).equispaced);
    let c = Configuration::new(&[0.0, 0.9, 2.0], 3).unwrap();
    let r = verify_equispaced(&c, 1e-6);
    assert!(!r.equispaced);
    assert!((r.max_deviation - 0.1).abs() < 1e-12);
}

#[test]
fn random_starts_reach_equispaced() {
    let prm = params(0.3, 2.0, 5);
    for seed in 0..3 {
        let c = Configuration::random(5, 0.1, seed).unwrap();
        let tr = gradient_descent(&c, &prm, &DescentOptions::default()).unwrap();
        assert_eq!(tr.termination, Termination::Converged);
        assert!(verify_equispaced(tr.last(), 1e-6).equispaced);
        assert!(tr.final_grad() < 1e-8);
        assert!(tr.is_monotone());
    }
}

#[test]
fn equispaced_start_stops_at_once() {
    let c = Configuration::equispaced(4).unwrap();
    let tr = gradient_descent(&c, &params(0.45, 1.5, 4), &DescentOptions::default()).unwrap();
    assert!(tr.iters() <= 1);
    assert!(tr.final_grad() < 1e-8);
}

#[test]
fn newton_agrees_with_plain_descent() {
    let prm = params(0.2, 3.0, 4);
    let c = Configuration::random(4, 0.1, 17).unwrap();
    let plain = gradient_descent(&c, &prm, &DescentOptions::default()).unwrap();
    let newton = gradient_descent(
        &c,
        &prm,
        &DescentOptions {
            newton: true,
            ..DescentOptions::default()
        },
    )
    .unwrap();
    assert!((plain.final_energy() - newton.final_energy()).abs() <= 1e-9 * plain.final_energy());
    assert!(newton.iters() <= plain.iters());
}

#[test]
fn mollified_descent_reaches_equispaced() {
    let eps = 0.02;
    let prm = params(0.75, 2.0, 2);
    let c = Configuration::random(2, 0.1, 3).unwrap();
    let opts = DescentOptions {
        grad_tol: 1e-7,
        ..DescentOptions::mollified(eps)
    };
    assert_eq!(opts.min_gap_floor, 0.08);
    let tr = gradient_descent(&c, &prm, &opts).unwrap();
    assert!(
        verify_equispaced(tr.last(), 1e-5).equispaced,
        "{:?}",
        tr.last().gaps()
    );
    assert!(tr.iterates.iter().all(|x| x.min_gap() >= 0.08 - 1e-12));
}

#[test]
fn zero_energy_descent() {
    let c = Configuration::random(4, 0.0, 2).unwrap();
    let tr = minimize_zero(&c, 2.0, &DescentOptions::default()).unwrap();
    let min = 8.0 / 3.0;
    assert!((tr.final_energy() - min).abs() <= 1e-6 * min);
    assert!(tr.energies.iter().all(|&e| e >= min - 1e-9));
    assert_eq!(tr.respects_lower_bound(1e-9), Some(true));

    let c = Configuration::random(3, 0.0, 5).unwrap();
    let tr = minimize_zero(&c, 1.0, &DescentOptions::default()).unwrap();
    assert!((tr.final_energy() - 3.0).abs() <= 1e-6 * 3.0);
    assert!(verify_equispaced(tr.last(), 1e-6).equispaced);
}

#[test]
fn trace_serialisation() {
    let c = Configuration::random(3, 0.1, 1).unwrap();
    let tr = gradient_descent(&c, &params(0.3, 2.0, 3), &DescentOptions::default()).unwrap();
    let jsonl = tr.to_jsonl();
    assert_eq!(jsonl.lines().count(), tr.iterates.len());
    for (k, line) in jsonl.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["iter"], k);
        assert_eq!(v["points"].as_array().unwrap().len(), 3);
    }
    let s = tr.summary(1e-6);
    assert!(s.equispaced && s.lower_bound_ok.is_none());
    assert_eq!(s.iters, tr.iters());
}

#[test]
fn invalid_options_are_rejected() {
    let c = Configuration::equispaced(2).unwrap();
    let prm = params(0.3, 2.0, 2);
    let bad = DescentOptions {
        grad_tol: 0.0,
        ..DescentOptions::default()
    };
    assert!(gradient_descent(&c, &prm, &bad).is_err());
    let bad = DescentOptions {
        min_gap_floor: 0.1,
        ..DescentOptions::mollified(0.05)
    };
    assert!(gradient_descent(&c, &prm, &bad).is_err());
    let bad = DescentOptions {
        mode: DescentMode::Mollified { eps: 0.05 },
        ..DescentOptions::mollified(0.05)
    };
    assert!(gradient_descent(&c, &params(0.3, 1.0, 2), &bad).is_err());
    // the exact energy is infinite at criticality
    assert!(gradient_descent(&c, &params(0.5, 2.0, 2), &DescentOptions::default()).is_err());
}

#[test]
fn restarts_run_independently() {
    let starts: Vec<_> = (0..4)
        .map(|k| Configuration::random(3, 0.1, k).unwrap())
        .collect();
    let prm = params(0.45, 1.5, 3);
    let out = descent_restarts(&starts, &prm, &DescentOptions::default());
    assert_eq!(out.len(), 4);
    for r in out {
        assert!(verify_equispaced(r.unwrap().last(), 1e-6).equispaced);
    }
}

proptest! {
    #[test]
    fn projection_preserves_length_and_floor(raw in prop::collection::vec(0.0f64..1.0, 2..8), floor in 0.0f64..0.1) {
        let total: f64 = raw.iter().sum::<f64>() + 1e-3;
        let n = raw.len() as f64;
        let mut g: Vec<f64> = raw.iter().map(|x| (x + 1e-3 / n) * n / total).collect();
        let before: f64 = g.iter().sum();
        project_gaps(&mut g, floor).unwrap();
        let after: f64 = g.iter().sum();
        prop_assert!((before - after).abs() <= 1e-12 * before);
        prop_assert!(g.iter().all(|&x| x >= floor - 1e-12));
    }
}
