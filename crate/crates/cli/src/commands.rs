use std::path::{Path, PathBuf};

use zenokit::calibration::{
    fit_damped_sine, fit_dephasing_quadratic, fit_exponential_decay, fit_flux_noise_quadratic,
    fit_stark_poly, fit_swap_chevron, rate_from_fixed_delay,
};
use zenokit::defect::zeno_map;
use zenokit::formats::{
    self, fit_report_json, fmt_num, json_array, read_text, CalibrationFile, JsonObject, TraceMeta,
};
use zenokit::kk::{kk_sweep, FrequencyWindow, KkOptions};
use zenokit::oracle::{evolve, validate_kk, LindbladModel, OracleSettings, DEFAULT_TRUNCATION};
use zenokit::synthetic::{self, linspace, seeded_rng};
use zenokit::{
    AngularFrequency, BathSpectrum, DefectParams, Error, Extrapolation, ParametricSpectrum,
    RamseyTrace, Rate, ReadoutCalibration, TlsPeak,
};

use crate::config::{self, ExtrapolationMode, PeakConfig, SynthConfig};
use crate::error::CliError;
use crate::output::Outputs;

type CliResult<T> = std::result::Result<T, CliError>;

struct Trace {
    name: String,
    times: Vec<f64>,
    signal: Vec<f64>,
    meta: TraceMeta,
}

/// Every `*.csv` in `dir` (sorted by name) with its `.json` sidecar.
fn load_traces(dir: &Path) -> CliResult<Vec<Trace>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Parse {
            path: dir.to_path_buf(),
            message: "no .csv traces found".into(),
        }
        .into());
    }
    paths
        .into_iter()
        .map(|p| {
            let (times, signal) = formats::parse_trace_csv(&read_text(&p)?, &p)?;
            let side = p.with_extension("json");
            let meta = formats::parse_trace_meta(&read_text(&side)?, &side)?;
            let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
            Ok(Trace { name, times, signal, meta })
        })
        .collect()
}

fn required(v: Option<f64>, what: &str, trace: &str) -> CliResult<f64> {
    v.ok_or_else(|| {
        Error::Parse {
            path: PathBuf::from(trace),
            message: format!("sidecar is missing `{what}`"),
        }
        .into()
    })
}

pub fn predict(cfg_path: &Path) -> CliResult<Outputs> {
    let cfg: config::PredictConfig = config::load(cfg_path)?;
    let spath = config::resolve(cfg_path, &cfg.spectrum);
    let cpath = config::resolve(cfg_path, &cfg.calibration);
    let policy = match cfg.extrapolation {
        ExtrapolationMode::Hold => Extrapolation::Hold,
        ExtrapolationMode::Strict => Extrapolation::Strict,
    };
    let spectrum: BathSpectrum = formats::parse_spectrum_csv(&read_text(&spath)?, &spath)?
        .with_extrapolation(policy)
        .into();
    let c = formats::parse_calibration_json(&read_text(&cpath)?, &cpath)?;
    let amplitudes = cfg.amplitudes.values()?;

    let cal = ReadoutCalibration::from_mhz(c.S_mhz, c.K_mhz, c.R_mhz, c.chi_mhz)?;
    let window = match cfg.window_mhz {
        Some([lo, hi]) => Some(FrequencyWindow::new(
            AngularFrequency::from_mhz(lo),
            AngularFrequency::from_mhz(hi),
        )?),
        None => None,
    };
    let opts = KkOptions {
        window,
        resolution: cfg.resolution,
    };
    let points = kk_sweep(
        &spectrum,
        &cal,
        AngularFrequency::from_mhz(cfg.qubit_mhz),
        &amplitudes,
        Rate::nonnegative(Rate::from_mhz(cfg.residual_dephasing_mhz).get(), "residual dephasing")?,
        &opts,
    )?;
    let mut out = Outputs::default();
    out.add("kk_results.json", formats::write_kk_results_json(&points));
    out.add("nbar_gamma.csv", formats::write_nbar_csv(&points));
    Ok(out)
}

pub fn calibrate(cfg_path: &Path) -> CliResult<Outputs> {
    let cfg: config::CalibrateConfig = config::load(cfg_path)?;
    let traces = load_traces(&config::resolve(cfg_path, &cfg.traces))?;

    let mut fits = Vec::new();
    let mut failed = Vec::new();
    for t in &traces {
        let eps = required(t.meta.epsilon, "epsilon", &t.name)?;
        let trace = RamseyTrace::new(t.times.clone(), t.signal.clone(), t.meta.offset_mhz, eps)?;
        match fit_damped_sine(&trace) {
            Ok(f) => fits.push((t.name.clone(), eps, f)),
            Err(e) => failed.push((t.name.clone(), e)),
        }
    }
    if let Some((_, first)) = failed.first() {
        let files: Vec<String> = failed
            .iter()
            .map(|(n, _)| serde_json::Value::from(n.as_str()).to_string())
            .collect();
        return Err(CliError::new(first.clone()).detail("files", json_array(&files, 1)));
    }

    let stark: Vec<_> = fits.iter().map(|(_, e, f)| (*e, f.stark_shift)).collect();
    let deph: Vec<_> = fits.iter().map(|(_, e, f)| (*e, f.dephasing)).collect();
    let sf = fit_stark_poly(&stark)?;
    let df = fit_dephasing_quadratic(&deph)?;
    let chi = AngularFrequency::from_mhz(cfg.chi_mhz);
    let cal = ReadoutCalibration::new(sf.quadratic, sf.quartic, df.coefficient, chi)?;

    let per_trace: Vec<String> = fits
        .iter()
        .map(|(name, eps, f)| {
            // Single-trace values next to the global fits evaluated at the
            // same amplitude; the two need not agree.
            let mut o = JsonObject::new();
            o.str("file", name)
                .num("epsilon", *eps)
                .num("stark_mhz", f.stark_shift.mhz())
                .num("gamma_phi_mhz", f.dephasing.mhz())
                .num("global_stark_mhz", (sf.quadratic.get() * eps * eps + sf.quartic.get() * eps.powi(4)) / std::f64::consts::TAU)
                .num("global_gamma_phi_mhz", df.coefficient.mhz() * eps * eps)
                .raw("report", fit_report_json(&f.report, 3));
            o.finish(2)
        })
        .collect();
    let mut reports = JsonObject::new();
    reports
        .str("version", zenokit::FORMAT_VERSION)
        .raw("traces", json_array(&per_trace, 1))
        .raw("stark_poly", fit_report_json(&sf.report, 1))
        .raw("dephasing_quadratic", fit_report_json(&df.report, 1));

    let mut out = Outputs::default();
    out.add(
        "calibration.json",
        formats::write_calibration_json(&CalibrationFile {
            S_mhz: cal.stark_quadratic().mhz(),
            K_mhz: cal.stark_quartic().mhz(),
            R_mhz: cal.dephasing_quadratic().mhz(),
            chi_mhz: cal.chi().mhz(),
        }),
    );
    out.add("fit_reports.json", reports.finish(0) + "\n");
    Ok(out)
}

fn defect_from(d: &config::DefectConfig) -> zenokit::Result<DefectParams> {
    DefectParams::new(
        AngularFrequency::from_mhz(d.frequency_mhz),
        AngularFrequency::from_mhz(d.coupling_mhz),
        Rate::per_us(d.decay_per_us),
    )
}

pub fn oracle(cfg_path: &Path) -> CliResult<Outputs> {
    let cfg: config::OracleConfig = config::load(cfg_path)?;
    let defect = defect_from(&cfg.defect)?;
    let gq = Rate::nonnegative(cfg.qubit_decay_per_us, "qubit decay")?;
    let mut settings = OracleSettings {
        truncation: cfg.truncation.unwrap_or(DEFAULT_TRUNCATION),
        dt: cfg.dt_us,
        ..OracleSettings::default()
    };
    if let Some(t) = cfg.t_max_us {
        settings.t_max = t;
    }

    let mut points = Vec::new();
    for d in cfg.comparison.detunings_mhz.values()? {
        for g in cfg.comparison.dephasings_mhz.values()? {
            points.push((Rate::nonnegative(Rate::from_mhz(g).get(), "dephasing")?, AngularFrequency::from_mhz(d)));
        }
    }
    let rows = validate_kk(&defect, gq, &points, &settings)?;

    let detunings: Vec<_> = cfg.map.detunings_mhz.values()?.into_iter().map(AngularFrequency::from_mhz).collect();
    let dephasings: Vec<_> = cfg.map.dephasings_mhz.values()?.into_iter().map(Rate::from_mhz).collect();
    let map = zeno_map(&detunings, &dephasings, &defect, gq)?;

    let mut out = Outputs::default();
    out.add("comparison.csv", formats::write_comparison_csv(&rows));
    out.add("zeno_map.csv", formats::write_zeno_map_csv(&map));
    if let Some(tc) = &cfg.trajectory {
        let model = LindbladModel::with_defect(
            defect.frequency() + AngularFrequency::from_mhz(tc.detuning_mhz),
            gq,
            Rate::nonnegative(Rate::from_mhz(tc.dephasing_mhz).get(), "dephasing")?,
            &defect,
            settings.truncation,
        )?;
        let dt = settings.dt.unwrap_or_else(|| model.default_dt());
        let steps = (tc.t_us / dt).ceil() as usize;
        let stride = (steps / tc.rows.max(1)).max(1);
        let traj = evolve(&model, &model.excited_state(), tc.t_us, dt, stride)?;
        out.add("trajectory.csv", formats::write_trajectory_csv(&traj));
    }
    Ok(out)
}

pub fn convert_t1(cfg_path: &Path, t_delay_flag: Option<f64>) -> CliResult<Outputs> {
    let cfg: config::ConvertT1Config = config::load(cfg_path)?;
    let input = config::resolve(cfg_path, &cfg.input);
    let rows = formats::parse_t1_csv(&read_text(&input)?, &input)?;
    let t_delay = t_delay_flag.or(cfg.t_delay_us).ok_or_else(|| Error::Parse {
        path: cfg_path.to_path_buf(),
        message: "no delay given: set `t_delay_us` or pass --t-delay".into(),
    })?;

    let mut points = Vec::with_capacity(rows.len());
    for (i, &(f, p1)) in rows.iter().enumerate() {
        let rate = rate_from_fixed_delay(p1, t_delay).map_err(|e| {
            CliError::new(e)
                .detail("row", (i + 1).to_string())
                .detail("freq_mhz", fmt_num(f))
        })?;
        points.push((AngularFrequency::from_mhz(f), rate));
    }
    let spectrum = zenokit::TabulatedSpectrum::new(points)?;
    let mut out = Outputs::default();
    out.add("spectrum.csv", formats::write_spectrum_csv(&spectrum));
    Ok(out)
}

pub fn fit_swap(cfg_path: &Path) -> CliResult<Outputs> {
    let cfg: config::FitSwapConfig = config::load(cfg_path)?;
    let path = config::resolve(cfg_path, &cfg.trace);
    let (times, p1) = formats::parse_trace_csv(&read_text(&path)?, &path)?;
    let fit = fit_swap_chevron(&times, &p1, cfg.f_guess_mhz)?;
    let mut o = JsonObject::new();
    o.num("coupling_mhz", fit.coupling.mhz())
        .num("defect_decay_per_us", fit.defect_decay.get())
        .num("oscillation_mhz", fit.oscillation_mhz)
        .raw("report", fit_report_json(&fit.report, 1))
        .str("version", zenokit::FORMAT_VERSION);
    let mut out = Outputs::default();
    out.add("swap_fit.json", o.finish(0) + "\n");
    Ok(out)
}

pub fn fit_flux_noise(cfg_path: &Path) -> CliResult<Outputs> {
    let cfg: config::FitFluxNoiseConfig = config::load(cfg_path)?;
    let traces = load_traces(&config::resolve(cfg_path, &cfg.traces))?;
    let mut points = Vec::new();
    let mut per_trace = Vec::new();
    for t in &traces {
        let amp = required(t.meta.flux_amp, "flux_amp", &t.name)?;
        let fit = fit_exponential_decay(&t.times, &t.signal)
            .map_err(|e| CliError::new(e).detail("file", serde_json::Value::from(t.name.as_str()).to_string()))?;
        points.push((amp, fit.rate));
        let mut o = JsonObject::new();
        o.str("file", &t.name)
            .num("flux_amp", amp)
            .num("gamma_per_us", fit.rate.get())
            .raw("report", fit_report_json(&fit.report, 3));
        per_trace.push(o.finish(2));
    }
    let q = fit_flux_noise_quadratic(&points)?;
    let mut o = JsonObject::new();
    o.num("coefficient_per_us", q.coefficient.get())
        .raw("report", fit_report_json(&q.report, 1))
        .raw("traces", json_array(&per_trace, 1))
        .str("version", zenokit::FORMAT_VERSION);
    let mut out = Outputs::default();
    out.add("flux_noise.json", o.finish(0) + "\n");
    Ok(out)
}

fn peaks_from(peaks: &[PeakConfig]) -> zenokit::Result<Vec<TlsPeak>> {
    peaks
        .iter()
        .map(|p| {
            let g = AngularFrequency::from_mhz(p.coupling_mhz).get();
            TlsPeak::new(AngularFrequency::from_mhz(p.center_mhz), Rate::per_us(p.width_per_us), g * g)
        })
        .collect()
}

/// Returns the outputs and the seed actually used, if any randomness was drawn.
pub fn synth(cfg_path: &Path, seed_flag: Option<u64>) -> CliResult<(Outputs, Option<u64>)> {
    let cfg: SynthConfig = config::load(cfg_path)?;
    let mut out = Outputs::default();
    let seed = |s: Option<u64>| seed_flag.or(s).unwrap_or(0);
    let used = match cfg {
        SynthConfig::Ramsey { s_mhz, k_mhz, r_mhz, epsilons, offset_mhz, t_us, points, noise, seed: s } => {
            let seed = seed(s);
            let mut rng = seeded_rng(seed);
            for (i, eps) in epsilons.iter().enumerate() {
                let nu = s_mhz * eps * eps + k_mhz * eps.powi(4);
                let gphi = Rate::from_mhz(r_mhz * eps * eps);
                let trace = synthetic::ramsey_trace(nu, gphi, offset_mhz, *eps, linspace(t_us, points), noise, &mut rng)?;
                let stem = format!("ramsey_{i:02}");
                out.add(&format!("{stem}.csv"), formats::write_trace_csv(trace.times(), trace.signal()));
                let meta = TraceMeta {
                    epsilon: Some(*eps),
                    offset_mhz,
                    ..TraceMeta::default()
                };
                out.add(&format!("{stem}.json"), formats::write_trace_meta(&meta));
            }
            Some(seed)
        }
        SynthConfig::Echo { coefficient_per_us, flux_amps, t_us, points, randomizations, seed: s } => {
            let seed = seed(s);
            let mut rng = seeded_rng(seed);
            let times = linspace(t_us, points);
            for (i, a) in flux_amps.iter().enumerate() {
                let gamma = Rate::nonnegative(coefficient_per_us * a * a, "echo dephasing")?;
                let signal = synthetic::echo_decay(gamma, &times, randomizations, &mut rng)?;
                let stem = format!("echo_{i:02}");
                out.add(&format!("{stem}.csv"), formats::write_trace_csv(&times, &signal));
                let meta = TraceMeta {
                    flux_amp: Some(*a),
                    ..TraceMeta::default()
                };
                out.add(&format!("{stem}.json"), formats::write_trace_meta(&meta));
            }
            Some(seed)
        }
        SynthConfig::Spectrum { background_per_us, peaks, low_mhz, high_mhz, points, noise, seed: s } => {
            let seed = seed(s);
            let spec = ParametricSpectrum::new(Rate::per_us(background_per_us), peaks_from(&peaks)?)?;
            let tab = synthetic::hot_spot_spectrum(
                &spec,
                AngularFrequency::from_mhz(low_mhz),
                AngularFrequency::from_mhz(high_mhz),
                points,
                noise,
                &mut seeded_rng(seed),
            )?;
            out.add("spectrum.csv", formats::write_spectrum_csv(&tab));
            Some(seed)
        }
        SynthConfig::T1Scan { background_per_us, peaks, low_mhz, high_mhz, points, t_delay_us } => {
            let spec = ParametricSpectrum::new(Rate::per_us(background_per_us), peaks_from(&peaks)?)?;
            let mut csv = format!("{}\n", formats::T1_HEADER);
            for f in linspace(high_mhz - low_mhz, points) {
                let mhz = low_mhz + f;
                let gamma = spec.eval(AngularFrequency::from_mhz(mhz).get());
                csv.push_str(&format!("{},{}\n", fmt_num(mhz), fmt_num((-gamma * t_delay_us).exp())));
            }
            out.add("t1_scan.csv", csv);
            None
        }
        SynthConfig::Swap { defect, qubit_decay_per_us, detuning_mhz, t_us, points } => {
            let defect = defect_from(&defect)?;
            let times = linspace(t_us, points);
            let p1 = synthetic::swap_linecut(
                &defect,
                AngularFrequency::from_mhz(detuning_mhz),
                Rate::nonnegative(qubit_decay_per_us, "qubit decay")?,
                &times,
            )?;
            out.add("swap.csv", formats::write_trace_csv(&times, &p1));
            None
        }
    };
    Ok((out, used))
}
