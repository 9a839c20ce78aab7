use zenokit::formats::{fmt_num, JsonObject};
use zenokit::{Error, FORMAT_VERSION};

/// A library error plus extra context for the JSON error report.
#[derive(Debug)]
pub struct CliError {
    pub error: Error,
    /// Pre-rendered JSON values keyed by name.
    details: Vec<(String, String)>,
}

impl CliError {
    pub fn new(error: Error) -> Self {
        Self { error, details: Vec::new() }
    }

    pub fn detail(mut self, key: &str, json: String) -> Self {
        self.details.push((key.to_string(), json));
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.error {
            Error::Parse { .. } | Error::Io { .. } => 2,
            Error::Stability { .. } => 4,
            _ => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let mut o = JsonObject::new();
        o.str("error", self.error.kind())
            .str("message", &self.error.to_string())
            .str("version", FORMAT_VERSION);
        match &self.error {
            Error::Stability { time, suggested_dt, .. } => {
                o.num("time_us", *time).num("suggested_dt_us", *suggested_dt);
            }
            Error::Parse { path, .. } | Error::Io { path, .. } => {
                o.str("path", &path.display().to_string());
            }
            Error::Range { omega, low, high } => {
                o.num("freq_mhz", omega / std::f64::consts::TAU)
                    .raw("range_mhz", format!("[{}, {}]", fmt_num(low / std::f64::consts::TAU), fmt_num(high / std::f64::consts::TAU)));
            }
            Error::Fit { iterations, residual_norm, .. } => {
                o.raw("iterations", iterations.to_string()).num("residual_norm", *residual_norm);
            }
            _ => {}
        }
        for (k, v) in &self.details {
            o.raw(k, v.clone());
        }
        o.finish(0)
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        Self::new(error)
    }
}
