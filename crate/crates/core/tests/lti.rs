use proptest::prelude::*;
use resetkit::lti::{zoh_discretize, TransferFunction};
use resetkit::sim::stage_plant;
use resetkit::Complex;
use std::f64::consts::PI;

/// Stable polynomial with roots `-p_i`, leading coefficient 1.
fn from_roots(roots: &[f64]) -> Vec<f64> {
    roots.iter().fold(vec![1.0], |acc, &p| {
        let mut next = vec![0.0; acc.len() + 1];
        for (i, c) in acc.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c * p;
        }
        next
    })
}

fn proper_tf() -> impl Strategy<Value = TransferFunction> {
    (1usize..4)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.1f64..100.0, n),
                prop::collection::vec(-10.0f64..10.0, 1..=n + 1),
            )
        })
        .prop_map(|(roots, num)| TransferFunction::new(num, from_roots(&roots)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn state_space_realization_keeps_the_response(g in proper_tf(), w in 0.01f64..1e3) {
        let direct = g.freq_response(w).unwrap();
        let ss = g.to_ss().unwrap().freq_response(w).unwrap();
        prop_assert!((direct - ss).norm() <= 1e-8 * direct.norm().max(1e-6), "{direct} vs {ss}");
    }

    #[test]
    fn series_multiplies_responses(a in proper_tf(), b in proper_tf(), w in 0.01f64..1e3) {
        let want = a.freq_response(w).unwrap() * b.freq_response(w).unwrap();
        let tf = a.series(&b).freq_response(w).unwrap();
        let ss = a.to_ss().unwrap().series(&b.to_ss().unwrap()).unwrap().freq_response(w).unwrap();
        let scale = want.norm().max(1e-9);
        prop_assert!((tf - want).norm() <= 1e-8 * scale);
        prop_assert!((ss - want).norm() <= 1e-8 * scale);
    }

    #[test]
    fn zoh_model_matches_continuous_at_low_frequency(g in proper_tf(), frac in 1e-4f64..1e-2) {
        // ω Ts ≪ 1: the hold delay and warping vanish
        let ts = 1e-4;
        let w = frac / ts;
        let c = g.freq_response(w).unwrap();
        let d = zoh_discretize(&g.to_ss().unwrap(), ts).unwrap().freq_response(w).unwrap();
        // error is relative to the system size, which includes the feedthrough
        let scale = c.norm() + g.freq_response(1e6).unwrap().norm();
        prop_assert!((c - d).norm() <= 0.02 * scale, "{c} vs {d}");
    }
}

/// Steady-state gain of the sampled stage model, measured by stepping the
/// held sine and taking a single-bin DFT over an integer number of periods.
#[test]
fn sampled_stage_plant_matches_its_frequency_response() {
    let ts = 1e-5;
    let g = stage_plant();
    let d = zoh_discretize(&g.to_ss().unwrap(), ts).unwrap();
    let (a, b, c) = (d.a().clone(), d.b().clone(), d.c().clone());
    let total = (12.0 / ts).round() as usize;
    let window = (1.0 / ts).round() as usize;
    for f in [1.0, 5.0, 14.0, 40.0, 100.0] {
        let w = 2.0 * PI * f;
        let mut x = nalgebra::DVector::zeros(2);
        let mut acc = Complex::new(0.0, 0.0);
        for k in 0..total {
            let t = k as f64 * ts;
            let y = (&c * &x)[0];
            if k >= total - window {
                acc += Complex::from_polar(y, -w * t);
            }
            x = &a * &x + &b * (w * t).sin();
        }
        // sin input: fundamental of y is Im-rotated by -j
        let measured = acc * Complex::new(0.0, 2.0) / window as f64;
        let want = g.freq_response(w).unwrap();
        let err = (measured - want).norm() / want.norm();
        assert!(
            err < 5e-3,
            "f = {f} Hz: measured {measured}, expected {want}, rel err {err}"
        );
    }
}
