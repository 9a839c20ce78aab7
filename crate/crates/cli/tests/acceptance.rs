//! End-to-end acceptance checks. Runs without the libtest harness so each
//! criterion prints exactly one PASS/FAIL line; the process exits nonzero if
//! any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use zenokit::calibration::{
    fit_damped_sine, fit_dephasing_quadratic, fit_stark_poly, fit_swap_chevron,
};
use zenokit::defect::{generalized_purcell, resonant_purcell, zeno_jump_rate, zeno_map};
use zenokit::kk::{kk_rate_with, KkOptions};
use zenokit::oracle::{
    evolve, extract_decay_rate, validate_kk, ExtractOptions, Integrity, LindbladModel,
    OracleSettings,
};
use zenokit::synthetic::{linspace, ramsey_trace, seeded_rng, swap_linecut};
use zenokit::{
    AngularFrequency, BathSpectrum, DefectParams, MeasurementContext, ParametricSpectrum,
    QubitParams, Rate, TlsPeak,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn reference_defect(at: AngularFrequency) -> DefectParams {
    DefectParams::new(at, AngularFrequency::from_mhz(1.6), Rate::per_us(1.0 / 0.103)).unwrap()
}

/// Hot-spot spectra of the kind a fixed-delay T1 scan produces.
fn tabulated_fixtures() -> Vec<BathSpectrum> {
    let lo = AngularFrequency::from_mhz(4200.0);
    let hi = AngularFrequency::from_mhz(4400.0);
    let single = ParametricSpectrum::new(
        Rate::per_us(0.012),
        vec![TlsPeak::new(AngularFrequency::from_mhz(4300.0), Rate::per_us(4.0), 0.9).unwrap()],
    )
    .unwrap();
    let several = ParametricSpectrum::new(
        Rate::per_us(0.02),
        vec![
            TlsPeak::new(AngularFrequency::from_mhz(4251.3), Rate::per_us(2.0), 0.4).unwrap(),
            TlsPeak::new(AngularFrequency::from_mhz(4318.0), Rate::per_us(9.7), 101.0).unwrap(),
            TlsPeak::new(AngularFrequency::from_mhz(4377.7), Rate::per_us(0.5), 0.05).unwrap(),
        ],
    )
    .unwrap();
    let mut rng = seeded_rng(11);
    vec![
        single.sample(lo, hi, 801).unwrap().into(),
        several.sample(lo, hi, 4001).unwrap().into(),
        zenokit::synthetic::hot_spot_spectrum(&several, lo, hi, 2001, 0.05, &mut rng)
            .unwrap()
            .into(),
    ]
}

fn ac1() -> Outcome {
    let mut worst: f64 = 0.0;
    for spectrum in tabulated_fixtures() {
        for mhz in [4213.7, 4251.3, 4300.02, 4318.0, 4333.3, 4390.1] {
            let w = AngularFrequency::from_mhz(mhz);
            let golden = spectrum.eval(w).map_err(|e| e.to_string())?.get();
            for gphi in [0.0, 1e-10, 1e-8] {
                let ctx = MeasurementContext::new(w, Rate::per_us(gphi), 0.0).unwrap();
                let g = kk_rate_with(&spectrum, &ctx, &KkOptions::default())
                    .map_err(|e| e.to_string())?
                    .gamma
                    .get();
                worst = worst.max(rel(g, golden));
            }
        }
    }
    check(worst < 1e-6, format!("max relative error {worst:.2e} (< 1e-6)"))
}

fn ac2() -> Outcome {
    let g1d = 9.70874;
    let g = AngularFrequency::from_mhz(1.6);
    let w_d = AngularFrequency::from_mhz(5000.0);
    let spectrum: BathSpectrum = ParametricSpectrum::new(
        Rate::ZERO,
        vec![TlsPeak::new(w_d, Rate::per_us(g1d), g.get() * g.get()).unwrap()],
    )
    .unwrap()
    .into();
    let mut worst: f64 = 0.0;
    for a in [0.01, 0.1, 1.0, 10.0] {
        for b in [0.0, 1.0, 5.0, 20.0] {
            let gphi = a * g1d;
            let delta = b * g1d;
            let ctx = MeasurementContext::new(w_d + AngularFrequency::new(delta), Rate::per_us(gphi), 0.0).unwrap();
            let kk = kk_rate_with(&spectrum, &ctx, &KkOptions::default())
                .map_err(|e| e.to_string())?
                .gamma
                .get();
            let w = gphi + g1d / 2.0;
            let closed = 2.0 * g.get().powi(2) * w / (w * w + delta * delta);
            worst = worst.max(rel(kk, closed));
        }
    }
    check(worst < 1e-3, format!("16 points, max relative error {worst:.2e} (< 1e-3)"))
}

fn ac3() -> Outcome {
    let defect = reference_defect(AngularFrequency::from_mhz(5000.0));
    let q = QubitParams::new(defect.frequency(), Rate::ZERO, Rate::ZERO).unwrap();
    let a = generalized_purcell(&q, &defect).unwrap().get();
    let b = resonant_purcell(defect.coupling(), defect.decay()).unwrap().get();
    let c = zeno_jump_rate(AngularFrequency::new(2.0 * defect.coupling().get()), defect.decay())
        .unwrap()
        .get();
    let spread = rel(a, b).max(rel(b, c)).max(rel(a, c));
    check(
        spread <= 1e-15,
        format!("defect formula {a:.17e}, purcell {b:.17e}, zeno {c:.17e}, spread {spread:.1e}"),
    )
}

fn ac4() -> Outcome {
    let defect = reference_defect(AngularFrequency::from_mhz(5000.0));
    let gq = Rate::per_us(0.01);
    let q = QubitParams::new(defect.frequency(), gq, Rate::ZERO).unwrap();
    let ratio = generalized_purcell(&q, &defect).unwrap().get() / gq.get();
    check(
        (1e3..=1e4).contains(&ratio),
        format!("resonant Gamma/gamma_q = {ratio:.1} (in [1e3, 1e4])"),
    )
}

fn ac5() -> Outcome {
    let defect = reference_defect(AngularFrequency::ZERO);
    let gq = Rate::per_us(0.01);
    let step_mhz = 0.05;
    let detunings: Vec<_> = (-100..=100).map(|i| AngularFrequency::from_mhz(0.05 * i as f64)).collect();
    let dephasings: Vec<_> = (0..=100).map(|j| Rate::from_mhz(step_mhz * j as f64)).collect();
    let map = zeno_map(&detunings, &dephasings, &defect, gq).map_err(|e| e.to_string())?;
    let h = dephasings[1].get();
    let (mut zeno, mut anti, mut bad) = (0, 0, 0);
    for (i, d) in detunings.iter().enumerate() {
        let row = map.row(i);
        for j in 0..dephasings.len() - 1 {
            let slope = (row[j + 1].get() - row[j].get()) / h;
            let w = dephasings[j].get() + defect.decay().get() / 2.0 - gq.get() / 2.0;
            if w > d.get().abs() {
                zeno += 1;
                bad += usize::from(slope >= 0.0);
            } else if w < d.get().abs() - 3.0 * h {
                anti += 1;
                bad += usize::from(slope <= 0.0);
            }
        }
    }
    check(
        bad == 0 && zeno > 0 && anti > 0,
        format!("{zeno} Zeno and {anti} anti-Zeno points, {bad} with the wrong sign"),
    )
}

fn ac6(integrity: &mut Integrity) -> Outcome {
    let defect = DefectParams::new(
        AngularFrequency::ZERO,
        AngularFrequency::from_mhz(0.1),
        Rate::per_us(10.0),
    )
    .unwrap();
    let points: Vec<_> = [0.0, 1.0, 2.0]
        .iter()
        .flat_map(|&d| {
            [0.0, 0.5, 1.0]
                .iter()
                .map(move |&p| (Rate::from_mhz(p), AngularFrequency::from_mhz(d)))
        })
        .collect();
    let rows = validate_kk(&defect, Rate::per_us(0.01), &points, &OracleSettings::default())
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for r in &rows {
        *integrity = integrity.merge(r.integrity);
        let (a, b, c) = (r.oracle.get(), r.closed_form.get(), r.kk.get());
        worst = worst.max(rel(b, a)).max(rel(c, a)).max(rel(b, c));
    }
    check(
        worst < 0.05 && rows.len() == 9,
        format!("9 points, max pairwise deviation {:.2}% (< 5%)", 100.0 * worst),
    )
}

fn ac7(integrity: &mut Integrity) -> Outcome {
    let defect = reference_defect(AngularFrequency::ZERO);
    let gq = Rate::per_us(0.01);
    let model = LindbladModel::with_defect(defect.frequency(), gq, Rate::ZERO, &defect, 2).unwrap();
    let traj = evolve(&model, &model.excited_state(), 30.0, model.default_dt(), 10)
        .map_err(|e| e.to_string())?;
    *integrity = integrity.merge(traj.integrity);
    let fit = extract_decay_rate(&traj, 0.05, 30.0, ExtractOptions::default())
        .map_err(|e| e.to_string())?;
    let spectrum: BathSpectrum = defect.as_spectrum(gq).unwrap().into();
    let ctx = MeasurementContext::new(defect.frequency(), Rate::ZERO, 0.0).unwrap();
    let kk = kk_rate_with(&spectrum, &ctx, &KkOptions::default()).unwrap().gamma.get();
    let dev = rel(kk, fit.rate.get());
    check(
        fit.report.has_oscillation_warning() && dev > 0.1,
        format!(
            "oscillation warning {}, oracle {:.3}/us vs KK {kk:.3}/us, deviation {:.0}%",
            fit.report.has_oscillation_warning(),
            fit.rate.get(),
            100.0 * dev
        ),
    )
}

fn ac8(integrity: &mut Integrity) -> Outcome {
    // Lossless vacuum-Rabi exchange: P1 = cos^2(g t).
    let g = AngularFrequency::from_mhz(1.6);
    let model = LindbladModel {
        detuning: AngularFrequency::ZERO,
        coupling: g,
        qubit_decay: Rate::ZERO,
        dephasing: Rate::ZERO,
        defect_decay: Rate::ZERO,
        truncation: Some(2),
    };
    let t = 10.0;
    let exact = (g.get() * t).cos().powi(2);
    let mut errors = Vec::new();
    for k in 0..4 {
        let dt = model.max_dt() / f64::from(1 << k);
        let traj = evolve(&model, &model.excited_state(), t, dt, usize::MAX).map_err(|e| e.to_string())?;
        *integrity = integrity.merge(traj.integrity);
        errors.push((traj.last().excited_population - exact).abs());
    }
    let order = errors
        .windows(2)
        .map(|e| (e[0] / e[1]).log2())
        .fold(f64::INFINITY, f64::min);
    check(
        integrity.within_tolerance() && order >= 3.7,
        format!(
            "trace {:.1e}, hermiticity {:.1e}, min eigenvalue {:.1e}; RK4 order {order:.2} (>= 3.7)",
            integrity.max_trace_error, integrity.max_hermiticity_error, integrity.min_eigenvalue
        ),
    )
}

fn ac9() -> Outcome {
    let (nu, gphi) = (0.451, Rate::from_mhz(0.362));
    let times = linspace(2.0, 401);
    let clean = ramsey_trace(nu, gphi, 10.0, 0.025, times.clone(), 0.0, &mut seeded_rng(0)).unwrap();
    let fit = fit_damped_sine(&clean).map_err(|e| e.to_string())?;
    let clean_err = rel(fit.stark_shift.mhz(), nu).max(rel(fit.dephasing.get(), gphi.get()));

    let (mut sum_nu, mut sum_g) = (0.0, 0.0);
    for seed in 0..50 {
        let trace = ramsey_trace(nu, gphi, 10.0, 0.025, times.clone(), 0.02, &mut seeded_rng(seed)).unwrap();
        let fit = fit_damped_sine(&trace).map_err(|e| e.to_string())?;
        sum_nu += fit.stark_shift.mhz();
        sum_g += fit.dephasing.get();
    }
    let bias = rel(sum_nu / 50.0, nu).max(rel(sum_g / 50.0, gphi.get()));

    let (s, k, r) = (825.0, 5619.0, 429.0);
    let eps: Vec<f64> = (1..=8).map(|i| 0.005 * i as f64).collect();
    let stark: Vec<_> = eps
        .iter()
        .map(|&e| (e, AngularFrequency::from_mhz(s * e * e + k * e.powi(4))))
        .collect();
    let deph: Vec<_> = eps.iter().map(|&e| (e, Rate::from_mhz(r * e * e))).collect();
    let sf = fit_stark_poly(&stark).map_err(|e| e.to_string())?;
    let df = fit_dephasing_quadratic(&deph).map_err(|e| e.to_string())?;
    let poly_err = rel(sf.quadratic.mhz(), s)
        .max(rel(sf.quartic.mhz(), k))
        .max(rel(df.coefficient.mhz(), r));
    check(
        clean_err < 1e-6 && bias < 0.01 && poly_err < 1e-10,
        format!(
            "noiseless {clean_err:.1e} (< 1e-6), 50-seed bias {:.2}% (< 1%), polynomial {poly_err:.1e}",
            100.0 * bias
        ),
    )
}

fn ac10() -> Outcome {
    let defect = reference_defect(AngularFrequency::ZERO);
    let times = linspace(1.0, 501);
    let p1 = swap_linecut(&defect, AngularFrequency::ZERO, Rate::per_us(0.01), &times)
        .map_err(|e| e.to_string())?;
    let fit = fit_swap_chevron(&times, &p1, None).map_err(|e| e.to_string())?;
    let eg = rel(fit.coupling.get(), defect.coupling().get());
    let ed = rel(fit.defect_decay.get(), defect.decay().get());
    check(
        eg < 0.02 && ed < 0.1,
        format!(
            "g/2pi {:.4} MHz ({:.2}%), gamma_1D {:.3}/us ({:.2}%)",
            fit.coupling.mhz(),
            100.0 * eg,
            fit.defect_decay.get(),
            100.0 * ed
        ),
    )
}

fn ac11() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for case in ["predict", "calibrate", "oracle", "convert-t1", "fit-swap", "fit-flux-noise"] {
        let dir = root.join(case);
        let dest = out.path().join(case);
        let status = Command::new(env!("CARGO_BIN_EXE_zenokit"))
            .arg(case)
            .arg("--config")
            .arg(dir.join("config.json"))
            .arg("--out")
            .arg(&dest)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{case}: exit {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr)));
        }
        let golden = dir.join("expected");
        let mut names: Vec<_> = std::fs::read_dir(&golden)
            .map_err(|e| format!("{}: {e}", golden.display()))?
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        let mut produced: Vec<_> = std::fs::read_dir(&dest).unwrap().map(|e| e.unwrap().file_name()).collect();
        produced.sort();
        if names != produced {
            return Err(format!("{case}: produced {produced:?}, expected {names:?}"));
        }
        for name in names {
            let want = std::fs::read(golden.join(&name)).unwrap();
            let got = std::fs::read(dest.join(&name)).unwrap();
            if want != got {
                return Err(format!("{case}/{}: output differs from golden file", name.to_string_lossy()));
            }
            compared += 1;
        }
    }
    check(true, format!("{compared} files byte-identical across 6 subcommands"))
}

fn main() {
    let start = Instant::now();
    let mut integrity = Integrity::default();
    let mut results: Vec<(&str, Outcome, Duration, Duration)> = Vec::new();
    let mut run = |name: &'static str, limit_s: u64, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let out = f();
        results.push((name, out, t.elapsed(), Duration::from_secs(limit_s)));
    };
    run("AC1  golden-rule limit", 1, &mut ac1);
    run("AC2  Lorentzian closed form", 10, &mut ac2);
    run("AC3  resonant limit chain", 1, &mut ac3);
    run("AC4  reference-parameter magnitude", 1, &mut ac4);
    run("AC5  Zeno/anti-Zeno sign map", 5, &mut ac5);
    run("AC6  oracle three-way agreement", 120, &mut || ac6(&mut integrity));
    run("AC7  strong-coupling breakdown", 120, &mut || ac7(&mut integrity));
    run("AC8  oracle integrity and order", 120, &mut || ac8(&mut integrity));
    run("AC9  fit recovery", 60, &mut ac9);
    run("AC10 swap-fit loop closure", 60, &mut ac10);
    run("AC11 CLI golden files", 300, &mut ac11);

    let mut failed = 0;
    for (name, out, took, limit) in &results {
        let slow = took > limit;
        let (tag, msg) = match out {
            Ok(m) if !slow => ("PASS", m.clone()),
            Ok(m) => ("FAIL", format!("{m}; took {took:.1?}, limit {limit:?}")),
            Err(m) => ("FAIL", m.clone()),
        };
        failed += usize::from(tag == "FAIL");
        println!("{tag} {name}: {msg} [{took:.2?}]");
    }
    let total = start.elapsed();
    println!("{} of {} criteria passed in {total:.1?}", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
