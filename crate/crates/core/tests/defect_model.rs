use std::f64::consts::TAU;

use proptest::prelude::*;
use zenokit::defect::{generalized_purcell, resonant_purcell, zeno_jump_rate, zeno_map};
use zenokit::{AngularFrequency, DefectParams, QubitParams, Rate};

fn defect(g_mhz: f64, decay: f64) -> DefectParams {
    DefectParams::new(AngularFrequency::ZERO, AngularFrequency::from_mhz(g_mhz), Rate::per_us(decay)).unwrap()
}

#[test]
fn resonant_column_is_zeno() {
    let d = defect(1.6, 1.0 / 0.103);
    let gphi: Vec<Rate> = (0..200).map(|i| Rate::per_us(0.1 * i as f64)).collect();
    let map = zeno_map(&[AngularFrequency::ZERO], &gphi, &d, Rate::per_us(0.01)).unwrap();
    for w in map.row(0).windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn far_detuned_column_peaks_where_width_equals_detuning() {
    let d = defect(0.1, 1.0);
    let delta = 60.0;
    let step = 0.05;
    let gphi: Vec<Rate> = (0..4000).map(|i| Rate::per_us(step * i as f64)).collect();
    let map = zeno_map(&[AngularFrequency::new(delta)], &gphi, &d, Rate::ZERO).unwrap();
    let row = map.row(0);
    let peak = (0..row.len()).max_by(|&a, &b| row[a].get().total_cmp(&row[b].get())).unwrap();
    let w_at_peak = gphi[peak].get() + d.decay().get() / 2.0;
    assert!((w_at_peak - delta).abs() <= step);
    assert!(row[..peak].windows(2).all(|w| w[1] > w[0]));
    assert!(row[peak..].windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn reference_map_spans_three_decades() {
    let d = defect(1.6, 1.0 / 0.103);
    let det: Vec<_> = (-50..=50).map(|i| AngularFrequency::from_mhz(10.0 * i as f64)).collect();
    let gphi: Vec<_> = (0..=20).map(|i| Rate::from_mhz(0.1 * i as f64)).collect();
    let map = zeno_map(&det, &gphi, &d, Rate::per_us(0.01)).unwrap();
    let max = map.rates.iter().map(|r| r.get()).fold(0.0, f64::max);
    let min = map.rates.iter().map(|r| r.get()).fold(f64::INFINITY, f64::min);
    assert!((max - 41.6).abs() < 0.1);
    assert!(max / min >= 1e3);
}

proptest! {
    #[test]
    fn purcell_halves_when_kappa_doubles(g in 0.0..50.0f64, kappa in 0.01..1e3f64) {
        let a = resonant_purcell(AngularFrequency::new(g), Rate::per_us(kappa)).unwrap().get();
        let b = resonant_purcell(AngularFrequency::new(g), Rate::per_us(2.0 * kappa)).unwrap().get();
        prop_assert!((a - 2.0 * b).abs() <= 1e-12 * a);
    }

    #[test]
    fn jump_rate_halves_when_measurement_doubles(omega in 0.0..50.0f64, gm in 0.01..1e3f64) {
        let a = zeno_jump_rate(AngularFrequency::new(omega), Rate::per_us(gm)).unwrap().get();
        let b = zeno_jump_rate(AngularFrequency::new(omega), Rate::per_us(2.0 * gm)).unwrap().get();
        prop_assert!((a - 2.0 * b).abs() <= 1e-12 * a);
    }

    /// Ten widths off resonance the defect term is 1/101 of its resonant value.
    #[test]
    fn lorentzian_tail(g_mhz in 0.01..5.0f64, decay in 0.1..50.0f64, gphi in 0.0..5.0f64) {
        let d = defect(g_mhz, decay);
        let w = gphi + decay / 2.0;
        let at = |delta: f64| {
            let q = QubitParams::new(AngularFrequency::new(delta), Rate::ZERO, Rate::per_us(gphi)).unwrap();
            generalized_purcell(&q, &d).unwrap().get()
        };
        prop_assert!((at(10.0 * w) * 101.0 / at(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_is_at_least_intrinsic_decay(
        g_mhz in 0.0..5.0f64, decay in 0.1..50.0f64, gq in 0.0..0.1f64,
        gphi in 0.0..5.0f64, delta_mhz in -100.0..100.0f64,
    ) {
        let d = defect(g_mhz, decay);
        let q = QubitParams::new(AngularFrequency::new(TAU * delta_mhz), Rate::per_us(gq), Rate::per_us(gphi)).unwrap();
        prop_assert!(generalized_purcell(&q, &d).unwrap().get() >= gq);
    }
}
