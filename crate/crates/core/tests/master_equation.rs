use num_complex::Complex64;
use zenokit::defect::generalized_purcell;
use zenokit::oracle::{evolve, extract_decay_rate, DensityMatrix, ExtractOptions, LindbladModel};
use zenokit::{AngularFrequency, DefectParams, QubitParams, Rate};

#[test]
fn bare_decay_is_exponential() {
    for gphi in [0.0, 0.7, 5.0] {
        let m = LindbladModel::qubit_only(Rate::per_us(0.1), Rate::per_us(gphi)).unwrap();
        let traj = evolve(&m, &m.excited_state(), 30.0, m.default_dt(), 50).unwrap();
        for s in &traj.samples {
            assert!((s.excited_population - (-0.1 * s.time).exp()).abs() < 1e-8, "t = {}", s.time);
        }
    }
}

#[test]
fn dephasing_damps_coherence_at_gamma_phi() {
    let gphi = 0.8;
    let m = LindbladModel::qubit_only(Rate::ZERO, Rate::per_us(gphi)).unwrap();
    let plus = DensityMatrix::from_row_major(2, vec![Complex64::new(0.5, 0.0); 4]).unwrap();
    let traj = evolve(&m, &plus, 5.0, m.default_dt(), 20).unwrap();
    for s in &traj.samples {
        let c = s.rho.get(0, 1).norm();
        assert!((c - 0.5 * (-gphi * s.time).exp()).abs() < 1e-9);
        assert!((s.excited_population - 0.5).abs() < 1e-12);
    }
}

#[test]
fn lossless_exchange_is_cos_squared() {
    let g = AngularFrequency::from_mhz(1.6).get();
    let d = DefectParams::new(AngularFrequency::ZERO, AngularFrequency::new(g), Rate::per_us(1e-300)).unwrap();
    let m = LindbladModel::with_defect(AngularFrequency::ZERO, Rate::ZERO, Rate::ZERO, &d, 2).unwrap();
    let period = std::f64::consts::PI / g;
    let traj = evolve(&m, &m.excited_state(), 3.0 * period, m.default_dt(), 10).unwrap();
    for s in &traj.samples {
        assert!((s.excited_population - (g * s.time).cos().powi(2)).abs() < 1e-8);
    }
    assert!((traj.last().excited_population - 1.0).abs() < 1e-8);
}

#[test]
fn extracted_bare_rate() {
    let m = LindbladModel::qubit_only(Rate::per_us(0.01), Rate::ZERO).unwrap();
    let traj = evolve(&m, &m.excited_state(), 150.0, 0.5, 10).unwrap();
    let ex = extract_decay_rate(&traj, 0.0, 150.0, ExtractOptions::default()).unwrap();
    assert!((ex.rate.get() - 0.01).abs() < 1e-6);
    assert!(!ex.report.has_oscillation_warning());
}

#[test]
fn adiabatic_regime_matches_defect_formula() {
    let d = DefectParams::new(AngularFrequency::ZERO, AngularFrequency::from_mhz(0.1), Rate::per_us(10.0)).unwrap();
    let m = LindbladModel::with_defect(AngularFrequency::ZERO, Rate::ZERO, Rate::ZERO, &d, 2).unwrap();
    let expected = generalized_purcell(&QubitParams::new(AngularFrequency::ZERO, Rate::ZERO, Rate::ZERO).unwrap(), &d)
        .unwrap()
        .get();
    let t1 = 1.5 / expected;
    let traj = evolve(&m, &m.excited_state(), t1, m.default_dt(), 20).unwrap();
    let ex = extract_decay_rate(&traj, 0.5, t1, ExtractOptions::default()).unwrap();
    assert!((ex.rate.get() / expected - 1.0).abs() < 0.05);
}

/// Starting with one excitation, Fock levels above one are never reached,
/// so raising the cutoff changes nothing.
#[test]
fn truncation_is_adequate() {
    let d = DefectParams::new(AngularFrequency::ZERO, AngularFrequency::from_mhz(1.6), Rate::per_us(9.7)).unwrap();
    let run = |n: usize| {
        let m = LindbladModel::with_defect(AngularFrequency::from_mhz(0.5), Rate::per_us(0.01), Rate::per_us(1.0), &d, n)
            .unwrap();
        evolve(&m, &m.excited_state(), 2.0, 1e-4, 1000).unwrap().excited_populations()
    };
    let (a, b) = (run(2), run(4));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}
