use resetkit::cglp::Order;
use resetkit::tuner::{build_report, gamma_grid, tune, Objective, TuningReport};
use std::f64::consts::PI;

#[test]
fn reports_do_not_depend_on_the_crossover_scale() {
    for (order, theta) in [(Order::First, 30.0), (Order::Second, 40.0)] {
        let a = build_report(order, theta, 2.0 * PI * 100.0, None).unwrap();
        let b = build_report(order, theta, 2.0 * PI * 7.0, None).unwrap();
        assert_eq!(a.recommendation_tracking, b.recommendation_tracking);
        assert_eq!(a.recommendation_noise, b.recommendation_noise);
        assert_eq!(a.infeasible, b.infeasible);
        for (x, y) in a.candidates.iter().zip(&b.candidates) {
            match (x.b, y.b) {
                (Some(p), Some(q)) => assert!((p / q - 1.0).abs() < 1e-6, "gamma {}: b {p} vs {q}", x.gamma),
                (None, None) => {}
                other => panic!("gamma {}: feasibility differs {other:?}", x.gamma),
            }
            if let (Some(p), Some(q)) = (x.ratio, y.ratio) {
                assert!((p / q - 1.0).abs() < 1e-3, "gamma {}: ratio {p} vs {q}", x.gamma);
            }
        }
    }
}

#[test]
fn recommendations_are_feasible_optima() {
    let r = build_report(Order::First, 20.0, 2.0 * PI * 100.0, None).unwrap();
    assert_eq!(r.candidates.len(), gamma_grid().len());
    let feasible: Vec<_> = r.candidates.iter().filter(|c| c.feasible).collect();
    assert_eq!(feasible.len() + r.infeasible.len(), r.candidates.len());

    let noise = r.recommended(Objective::Noise).unwrap();
    assert!(noise.feasible);
    assert!(feasible.iter().all(|c| c.m_p_db >= noise.m_p_db - 0.01 - 1e-12));

    let track = r.recommended(Objective::Tracking).unwrap();
    let best = feasible.iter().filter_map(|c| c.omega_p).fold(0.0, f64::max);
    assert!(track.omega_p.unwrap() >= 0.99 * best);
}

#[test]
fn report_round_trips_through_json() {
    let r = build_report(Order::Second, 30.0, 2.0 * PI * 100.0, None).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: TuningReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.recommendation_tracking, r.recommendation_tracking);
    assert_eq!(back.candidates.len(), r.candidates.len());
    assert!(back.candidates.iter().all(|c| c.config.is_none()));
}

#[test]
fn an_unreachable_target_has_no_recommendation() {
    let err = tune(Order::First, 89.0, 100.0, None).unwrap_err();
    assert!(matches!(err, resetkit::Error::NoFeasibleCandidate { .. }), "{err}");
}
