//! File formats at the program boundary.
//!
//! Frequencies are ordinary MHz and rates are 1/us in every file. Numbers are
//! written with 17 significant digits so a file read back reproduces the
//! in-memory values exactly, and the same inputs always give the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::calibration::{FitReport, FitWarning};
use crate::defect::ZenoMap;
use crate::error::{Error, Result};
use crate::kk::SweepPoint;
use crate::oracle::{ComparisonRow, Trajectory};
use crate::spectral::TabulatedSpectrum;
use crate::units::{AngularFrequency, Rate};
use crate::FORMAT_VERSION;

pub const SPECTRUM_HEADER: &str = "freq_mhz,gamma_per_us";
pub const T1_HEADER: &str = "freq_mhz,p1";
pub const TRACE_HEADER: &str = "time_us,signal";
pub const NBAR_HEADER: &str = "nbar,gamma_per_us";
pub const ZENO_MAP_HEADER: &str = "detuning_mhz,gamma_phi_mhz,Gamma_per_us";
pub const TRAJECTORY_HEADER: &str = "time_us,p1,trace_error";
pub const COMPARISON_HEADER: &str =
    "gamma_phi_mhz,detuning_mhz,kk_per_us,eq2_per_us,oracle_per_us,dev_kk,dev_eq2,flag";

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Rows of a two-or-more column numeric CSV with an exact header. Blank lines
/// are skipped; every other field must parse as a finite number.
pub fn parse_numeric_csv(text: &str, header: &str, source: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = reader
        .headers()
        .map_err(|e| Error::parse(source, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != header {
        return Err(Error::parse(source, format!("expected header `{header}`, found `{found}`")));
    }
    let columns = header.split(',').count();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::parse(source, format!("line {line}: {e}")))?;
        if record.len() != columns {
            return Err(Error::parse(
                source,
                format!("line {line}: expected {columns} fields, found {}", record.len()),
            ));
        }
        let row = record
            .iter()
            .map(|field| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::parse(source, format!("line {line}: `{field}` is not a finite number"))),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(source, "no data rows"));
    }
    Ok(rows)
}

fn check_ascending(xs: impl Iterator<Item = f64>, what: &str, source: &Path) -> Result<()> {
    let mut prev: Option<f64> = None;
    for (i, x) in xs.enumerate() {
        if let Some(p) = prev {
            if x == p {
                return Err(Error::parse(source, format!("line {}: duplicate {what} {x}", i + 2)));
            }
            if x < p {
                return Err(Error::parse(source, format!("line {}: {what} not ascending", i + 2)));
            }
        }
        prev = Some(x);
    }
    Ok(())
}

/// Loss spectrum: absolute frequency in MHz and decay rate in 1/us, sorted
/// strictly ascending.
pub fn parse_spectrum_csv(text: &str, source: &Path) -> Result<TabulatedSpectrum> {
    let rows = parse_numeric_csv(text, SPECTRUM_HEADER, source)?;
    check_ascending(rows.iter().map(|r| r[0]), "frequency", source)?;
    if let Some(i) = rows.iter().position(|r| r[1] < 0.0) {
        return Err(Error::parse(source, format!("line {}: negative decay rate", i + 2)));
    }
    TabulatedSpectrum::new(
        rows.iter()
            .map(|r| (AngularFrequency::from_mhz(r[0]), Rate::per_us(r[1]))),
    )
    .map_err(|e| Error::parse(source, e.to_string()))
}

pub fn write_spectrum_csv(spectrum: &TabulatedSpectrum) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for (w, g) in spectrum.points() {
        let _ = writeln!(out, "{},{}", fmt_num(w.mhz()), fmt_num(g.get()));
    }
    out
}

/// Fixed-delay T1 scan: frequency in MHz and excited-state population.
/// Populations are checked later, where a bad row can be reported by number.
pub fn parse_t1_csv(text: &str, source: &Path) -> Result<Vec<(f64, f64)>> {
    let rows = parse_numeric_csv(text, T1_HEADER, source)?;
    check_ascending(rows.iter().map(|r| r[0]), "frequency", source)?;
    Ok(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

/// Time trace (Ramsey fringes, echo decay, swap line cut): `(times, signal)`.
pub fn parse_trace_csv(text: &str, source: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = parse_numeric_csv(text, TRACE_HEADER, source)?;
    check_ascending(rows.iter().map(|r| r[0]), "time", source)?;
    Ok(rows.into_iter().map(|r| (r[0], r[1])).unzip())
}

pub fn write_trace_csv(times: &[f64], signal: &[f64]) -> String {
    let mut out = format!("{TRACE_HEADER}\n");
    for (t, y) in times.iter().zip(signal) {
        let _ = writeln!(out, "{},{}", fmt_num(*t), fmt_num(*y));
    }
    out
}

/// Sidecar describing a trace: the drive amplitude (readout `epsilon` or flux
/// pulse `flux_amp`) and the deliberate fringe offset.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMeta {
    pub epsilon: Option<f64>,
    pub flux_amp: Option<f64>,
    #[serde(default)]
    pub offset_mhz: f64,
    /// Tag written by this crate's own sidecars.
    pub version: Option<String>,
}

pub fn parse_trace_meta(text: &str, source: &Path) -> Result<TraceMeta> {
    serde_json::from_str(text).map_err(|e| Error::parse(source, e.to_string()))
}

pub fn write_trace_meta(meta: &TraceMeta) -> String {
    let mut obj = JsonObject::new();
    if let Some(e) = meta.epsilon {
        obj.num("epsilon", e);
    }
    if let Some(a) = meta.flux_amp {
        obj.num("flux_amp", a);
    }
    obj.num("offset_mhz", meta.offset_mhz);
    obj.str("version", FORMAT_VERSION);
    obj.finish(0) + "\n"
}

/// Readout calibration constants in ordinary MHz.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[allow(non_snake_case)]
pub struct CalibrationFile {
    pub S_mhz: f64,
    pub K_mhz: f64,
    pub R_mhz: f64,
    pub chi_mhz: f64,
}

pub fn parse_calibration_json(text: &str, source: &Path) -> Result<CalibrationFile> {
    let cal: CalibrationFile =
        serde_json::from_str(text).map_err(|e| Error::parse(source, e.to_string()))?;
    if ![cal.S_mhz, cal.K_mhz, cal.R_mhz, cal.chi_mhz].iter().all(|v| v.is_finite()) {
        return Err(Error::parse(source, "calibration values must be finite"));
    }
    Ok(cal)
}

pub fn write_calibration_json(cal: &CalibrationFile) -> String {
    let mut obj = JsonObject::new();
    obj.num("S_mhz", cal.S_mhz)
        .num("K_mhz", cal.K_mhz)
        .num("R_mhz", cal.R_mhz)
        .num("chi_mhz", cal.chi_mhz)
        .str("version", FORMAT_VERSION);
    obj.finish(0) + "\n"
}

/// Readout sweep as a JSON array, one object per amplitude.
pub fn write_kk_results_json(points: &[SweepPoint]) -> String {
    let items: Vec<String> = points
        .iter()
        .map(|p| {
            let ctx = &p.result.context;
            let mut obj = JsonObject::new();
            obj.num("epsilon", p.epsilon)
                .num("nbar", ctx.nbar())
                .num("stark_mhz", p.stark_shift.mhz())
                .num("gamma_phi_mhz", ctx.dephasing().mhz())
                .num("gamma_raw_per_us", p.result.gamma_raw.get())
                .num("norm", p.result.norm)
                .num("gamma_per_us", p.result.gamma.get())
                .str("version", FORMAT_VERSION);
            obj.finish(1)
        })
        .collect();
    json_array(&items, 0) + "\n"
}

pub fn write_nbar_csv(points: &[SweepPoint]) -> String {
    let mut out = format!("{NBAR_HEADER}\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{}",
            fmt_num(p.result.context.nbar()),
            fmt_num(p.result.gamma.get())
        );
    }
    out
}

pub fn write_zeno_map_csv(map: &ZenoMap) -> String {
    let mut out = format!("{ZENO_MAP_HEADER}\n");
    for (i, d) in map.detunings.iter().enumerate() {
        for (j, g) in map.dephasings.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_num(d.mhz()),
                fmt_num(g.mhz()),
                fmt_num(map.get(i, j).get())
            );
        }
    }
    out
}

pub fn write_trajectory_csv(trajectory: &Trajectory) -> String {
    let mut out = format!("{TRAJECTORY_HEADER}\n");
    for s in &trajectory.samples {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_num(s.time),
            fmt_num(s.excited_population),
            fmt_num(s.rho.trace_error())
        );
    }
    out
}

pub fn write_comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = format!("{COMPARISON_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_num(r.dephasing.mhz()),
            fmt_num(r.detuning.mhz()),
            fmt_num(r.kk.get()),
            fmt_num(r.closed_form.get()),
            fmt_num(r.oracle.get()),
            fmt_num(r.dev_kk),
            fmt_num(r.dev_closed_form),
            r.flag
        );
    }
    out
}

/// Ordered JSON object whose numbers use [`fmt_num`].
#[derive(Debug, Default)]
pub struct JsonObject {
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        let v = if value.is_finite() { fmt_num(value) } else { "null".to_string() };
        self.fields.push((key.to_string(), v));
        self
    }

    pub fn str(&mut self, key: &str, value: &str) -> &mut Self {
        self.fields
            .push((key.to_string(), serde_json::Value::from(value).to_string()));
        self
    }

    pub fn bool(&mut self, key: &str, value: bool) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    /// Insert already-rendered JSON.
    pub fn raw(&mut self, key: &str, json: String) -> &mut Self {
        self.fields.push((key.to_string(), json));
        self
    }

    /// Render with two-space indentation, nested `depth` levels deep.
    pub fn finish(&self, depth: usize) -> String {
        if self.fields.is_empty() {
            return "{}".to_string();
        }
        let pad = "  ".repeat(depth + 1);
        let body: Vec<String> = self
            .fields
            .iter()
            .map(|(k, v)| format!("{pad}{}: {v}", serde_json::Value::from(k.as_str())))
            .collect();
        format!("{{\n{}\n{}}}", body.join(",\n"), "  ".repeat(depth))
    }
}

/// JSON array of items already rendered at `depth + 1`.
pub fn json_array(items: &[String], depth: usize) -> String {
    if items.is_empty() {
        return "[]".to_string();
    }
    let pad = "  ".repeat(depth + 1);
    let body: Vec<String> = items.iter().map(|s| format!("{pad}{s}")).collect();
    format!("[\n{}\n{}]", body.join(",\n"), "  ".repeat(depth))
}

/// A [`FitReport`] as a JSON object at `depth`.
pub fn fit_report_json(report: &FitReport, depth: usize) -> String {
    let params: Vec<String> = report
        .parameters
        .iter()
        .map(|p| {
            let mut o = JsonObject::new();
            o.str("name", &p.name).num("value", p.value).num("sigma", p.sigma);
            o.finish(depth + 2)
        })
        .collect();
    let warnings: Vec<String> = report
        .warnings
        .iter()
        .map(|w| match w {
            FitWarning::Oscillation { max_relative_deviation } => {
                let mut o = JsonObject::new();
                o.str("kind", "oscillation")
                    .num("max_relative_deviation", *max_relative_deviation);
                o.finish(depth + 2)
            }
        })
        .collect();
    let mut obj = JsonObject::new();
    obj.raw("parameters", json_array(&params, depth + 1))
        .num("residual_norm", report.residual_norm)
        .num("gradient_norm", report.gradient_norm)
        .bool("converged", report.converged)
        .raw("iterations", report.iterations.to_string())
        .raw("warnings", json_array(&warnings, depth + 1));
    obj.finish(depth)
}
