//! Flat key-value run configuration.
//!
//! Values come from an optional JSON file and are then overridden by command
//! line flags. Every key is declared in [`KEYS`]; anything else is rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Experiment {
    Characteristic,
    Stability,
    Sweep,
    Shapiro,
    Attractor,
    Basin,
    Spectrum,
    HarmonicBalance,
    Squid,
    Radiation,
    Simulate,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Characteristic => "characteristic",
            Experiment::Stability => "stability",
            Experiment::Sweep => "sweep",
            Experiment::Shapiro => "shapiro",
            Experiment::Attractor => "attractor",
            Experiment::Basin => "basin",
            Experiment::Spectrum => "spectrum",
            Experiment::HarmonicBalance => "harmonic-balance",
            Experiment::Squid => "squid",
            Experiment::Radiation => "radiation",
            Experiment::Simulate => "simulate",
        }
    }

    /// Keys that have no default for this experiment.
    pub fn required(self) -> &'static [&'static str] {
        match self {
            Experiment::Characteristic
            | Experiment::Stability
            | Experiment::Sweep
            | Experiment::Shapiro
            | Experiment::Spectrum
            | Experiment::Simulate => &["alpha"],
            Experiment::Attractor | Experiment::Basin => &["alpha", "v0"],
            Experiment::HarmonicBalance => &["alpha", "i_tot"],
            Experiment::Squid | Experiment::Radiation => &[],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Number,
    Count,
    Flag,
    Text,
}

impl Kind {
    fn describe(self) -> &'static str {
        match self {
            Kind::Number => "a number",
            Kind::Count => "a non-negative integer",
            Kind::Flag => "a boolean",
            Kind::Text => "a string",
        }
    }
}

pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { name, kind, default, help }
}

pub const KEYS: &[KeySpec] = &[
    key("alpha", Kind::Number, "required", "tunneling strength |K|^2/gamma^2, >= 0"),
    key("i_tot", Kind::Number, "from v0", "reduced bias current"),
    key("v0", Kind::Number, "from i_tot", "equilibrium voltage the run starts from"),
    key("delta_is", Kind::Number, "-0.1 (0 for simulate)", "perturbation of i_S"),
    key("tau_max", Kind::Number, "5000 attractor/basin, 500 spectrum, 100 simulate", "integration horizon"),
    key("dt_out", Kind::Number, "0.01 attractor/basin/spectrum, 0.1 otherwise", "output sampling interval"),
    key("rtol", Kind::Number, "1e-9", "relative tolerance"),
    key("atol", Kind::Number, "1e-9", "absolute tolerance"),
    key("method", Kind::Text, "adaptive", "adaptive | rk4"),
    key("dt", Kind::Number, "min(1e-3, dt_out)", "fixed RK4 step"),
    key("out", Kind::Text, "<experiment>", "output path prefix"),
    key("format", Kind::Text, "csv", "csv | json data file"),
    key("v_min", Kind::Number, "0", "voltage grid start"),
    key("v_max", Kind::Number, "10", "voltage grid end"),
    key("points", Kind::Count, "1000", "voltage grid size"),
    key("i_start", Kind::Number, "0", "ramp start current"),
    key("i_peak", Kind::Number, "15", "ramp turning current"),
    key("i_end", Kind::Number, "0", "ramp final current"),
    key("rate", Kind::Number, "0.01", "ramp rate |di/dtau|"),
    key("omega_f", Kind::Number, "20", "drive frequency"),
    key("v_f", Kind::Number, "300 (no drive for simulate)", "drive amplitude"),
    key("i_min", Kind::Number, "0", "bias grid start"),
    key("i_max", Kind::Number, "110", "bias grid end"),
    key("i_step", Kind::Number, "0.2", "bias grid step"),
    key("continuation", Kind::Flag, "true", "start each bias from the previous end state"),
    key("plateau_tol", Kind::Number, "0.01", "relative plateau tolerance"),
    key("field", Kind::Text, "i_j", "spectrum component: v | i_j | i_s"),
    key("dir_v", Kind::Number, "0", "basin direction, v component"),
    key("dir_ij", Kind::Number, "0", "basin direction, i_J component"),
    key("dir_is", Kind::Number, "-1", "basin direction, i_S component"),
    key("floor", Kind::Number, "1e-8", "smallest basin probe"),
    key("ceiling", Kind::Number, "1", "largest basin probe"),
    key("resolution", Kind::Number, "1", "basin bracket width in decades"),
    key("k_a", Kind::Number, "2", "first SQUID channel, units of gamma"),
    key("k_b", Kind::Number, "1.5", "second SQUID channel, units of gamma"),
    key("flux_points", Kind::Count, "201", "flux grid size"),
    key("periods", Kind::Number, "2", "flux periods covered"),
    key("voltage_si", Kind::Number, "1e-3", "junction voltage (V)"),
    key("ell_si", Kind::Number, "1e-9", "electrode separation (m)"),
    key("capacitance_si", Kind::Number, "3e-13", "capacitance (F)"),
    key("resistance_si", Kind::Number, "50", "resistance (ohm)"),
    key("current_si", Kind::Number, "1e-3", "bias current (A)"),
    key("i_c_si", Kind::Number, "1e-3", "critical current (A)"),
    key("q", Kind::Number, "none", "cavity quality factor"),
    key("cavity_l_si", Kind::Number, "none", "cavity size (m)"),
];

pub fn spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

/// Text for the end of `--help`.
pub fn key_help() -> String {
    let mut s = String::from("Configuration keys (file, flags or --set KEY=VALUE):\n");
    for k in KEYS {
        s.push_str(&format!("  {:<15} {:<34} [default: {}]\n", k.name, k.help, k.default));
    }
    s.push_str("\nExit codes: 0 ok, 2 config error, 3 numerical failure, 4 no result,\n");
    s.push_str("5 type mismatch, 6 missing required key.\n");
    s.push_str("JJSIM_THREADS caps the number of worker threads.");
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Number(f64),
    Flag(bool),
    Text(String),
}

impl Scalar {
    fn to_json(&self) -> Value {
        match self {
            Scalar::Number(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
            Scalar::Flag(b) => Value::Bool(*b),
            Scalar::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Resolved settings for one run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub experiment: Experiment,
    given: BTreeMap<&'static str, Scalar>,
    used: BTreeMap<&'static str, Scalar>,
}

impl Settings {
    pub fn new(experiment: Experiment) -> Self {
        Settings {
            experiment,
            given: BTreeMap::new(),
            used: BTreeMap::new(),
        }
    }

    /// Reads a flat JSON object; later calls to [`Settings::set`] override it.
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let Value::Object(map) = doc else {
            return Err(CliError::ConfigFile {
                path: path.display().to_string(),
                reason: "expected a flat JSON object".into(),
            });
        };
        for (k, v) in &map {
            self.set_json(k, v)?;
        }
        Ok(())
    }

    pub fn set_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let spec = spec(name).ok_or_else(|| CliError::UnknownKey(name.to_string()))?;
        let mismatch = || CliError::TypeMismatch {
            key: spec.name,
            expected: spec.kind.describe(),
        };
        let scalar = match (spec.kind, value) {
            (Kind::Number, Value::Number(n)) => Scalar::Number(n.as_f64().ok_or_else(mismatch)?),
            (Kind::Count, Value::Number(n)) => Scalar::Number(n.as_u64().ok_or_else(mismatch)? as f64),
            (Kind::Flag, Value::Bool(b)) => Scalar::Flag(*b),
            (Kind::Text, Value::String(s)) => Scalar::Text(s.clone()),
            _ => return Err(mismatch()),
        };
        self.given.insert(spec.name, scalar);
        Ok(())
    }

    /// Sets a key from its command-line spelling.
    pub fn set_str(&mut self, name: &str, raw: &str) -> Result<(), CliError> {
        let spec = spec(name).ok_or_else(|| CliError::UnknownKey(name.to_string()))?;
        let mismatch = || CliError::TypeMismatch {
            key: spec.name,
            expected: spec.kind.describe(),
        };
        let scalar = match spec.kind {
            Kind::Number => Scalar::Number(raw.trim().parse().map_err(|_| mismatch())?),
            Kind::Count => Scalar::Number(raw.trim().parse::<u64>().map_err(|_| mismatch())? as f64),
            Kind::Flag => Scalar::Flag(raw.trim().parse().map_err(|_| mismatch())?),
            Kind::Text => Scalar::Text(raw.to_string()),
        };
        self.given.insert(spec.name, scalar);
        Ok(())
    }

    pub fn is_set(&self, name: &str) -> bool {
        self.given.contains_key(name)
    }

    /// Checks required keys and the ranges that apply to every experiment.
    pub fn validate(&self) -> Result<(), CliError> {
        for &k in self.experiment.required() {
            if !self.is_set(k) {
                return Err(CliError::Missing {
                    key: k,
                    experiment: self.experiment.name(),
                });
            }
        }
        if let Some(Scalar::Number(a)) = self.given.get("alpha") {
            if !(*a >= 0.0 && a.is_finite()) {
                return Err(CliError::invalid("alpha", "alpha must be ≥ 0"));
            }
        }
        for k in ["rtol", "atol", "dt_out", "dt", "tau_max", "rate", "i_step", "omega_f"] {
            if let Some(Scalar::Number(x)) = self.given.get(k) {
                if !(*x > 0.0 && x.is_finite()) {
                    return Err(CliError::invalid(spec(k).map_or("?", |s| s.name), format!("{k} must be > 0")));
                }
            }
        }
        if let Some(Scalar::Text(m)) = self.given.get("method") {
            if m != "adaptive" && m != "rk4" {
                return Err(CliError::invalid("method", format!("method must be adaptive or rk4, got {m:?}")));
            }
        }
        if let Some(Scalar::Text(f)) = self.given.get("format") {
            if f != "csv" && f != "json" {
                return Err(CliError::invalid("format", format!("format must be csv or json, got {f:?}")));
            }
        }
        for (k, v) in &self.given {
            if let Scalar::Number(x) = v {
                if !x.is_finite() {
                    return Err(CliError::invalid(k, format!("{k} must be finite")));
                }
            }
        }
        Ok(())
    }

    fn record(&mut self, name: &'static str, value: Scalar) {
        self.used.insert(name, value);
    }

    fn spec_name(name: &str) -> &'static str {
        spec(name).map(|s| s.name).unwrap_or_else(|| panic!("undeclared key {name}"))
    }

    pub fn number(&mut self, name: &str) -> Option<f64> {
        let name = Self::spec_name(name);
        match self.given.get(name).cloned() {
            Some(Scalar::Number(x)) => {
                self.record(name, Scalar::Number(x));
                Some(x)
            }
            _ => None,
        }
    }

    pub fn number_or(&mut self, name: &str, default: f64) -> f64 {
        match self.number(name) {
            Some(x) => x,
            None => {
                self.record(Self::spec_name(name), Scalar::Number(default));
                default
            }
        }
    }

    pub fn require(&mut self, name: &str) -> Result<f64, CliError> {
        let experiment = self.experiment.name();
        self.number(name).ok_or(CliError::Missing {
            key: Self::spec_name(name),
            experiment,
        })
    }

    pub fn count_or(&mut self, name: &str, default: usize) -> usize {
        self.number_or(name, default as f64) as usize
    }

    pub fn flag_or(&mut self, name: &str, default: bool) -> bool {
        let name = Self::spec_name(name);
        let b = match self.given.get(name) {
            Some(Scalar::Flag(b)) => *b,
            _ => default,
        };
        self.record(name, Scalar::Flag(b));
        b
    }

    pub fn text_or(&mut self, name: &str, default: &str) -> String {
        let name = Self::spec_name(name);
        let s = match self.given.get(name) {
            Some(Scalar::Text(s)) => s.clone(),
            _ => default.to_string(),
        };
        self.record(name, Scalar::Text(s.clone()));
        s
    }

    /// Every key that was given or read with a default, as JSON.
    pub fn parameters(&self) -> serde_json::Map<String, Value> {
        let mut out = serde_json::Map::new();
        for (k, v) in self.given.iter().chain(self.used.iter()) {
            out.insert((*k).to_string(), v.to_json());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn every_key_is_declared_once() {
        let mut names: Vec<_> = KEYS.iter().map(|k| k.name).collect();
        names.sort_unstable();
        let n = names.len();
        names.dedup();
        assert_eq!(names.len(), n);
    }

    #[test]
    fn unknown_key_is_named() {
        let mut s = Settings::new(Experiment::Characteristic);
        let err = s.set_json("alhpa", &json!(4.0)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("alhpa"));
    }

    #[test]
    fn type_mismatch_and_missing_have_their_own_codes() {
        let mut s = Settings::new(Experiment::Characteristic);
        let err = s.set_json("alpha", &json!("four")).unwrap_err();
        assert_eq!(err.exit_code(), 5);
        assert!(err.to_string().contains("alpha"));
        let err = s.set_json("points", &json!(2.5)).unwrap_err();
        assert_eq!(err.exit_code(), 5);

        let err = Settings::new(Experiment::Attractor).validate().unwrap_err();
        assert_eq!(err.exit_code(), 6);
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn negative_alpha_is_rejected() {
        let mut s = Settings::new(Experiment::Characteristic);
        s.set_str("alpha", "-1").unwrap();
        let err = s.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("alpha must be ≥ 0"));
    }

    #[test]
    fn later_values_override_earlier_ones() {
        let mut s = Settings::new(Experiment::Characteristic);
        s.set_json("alpha", &json!(1.0)).unwrap();
        s.set_str("alpha", "4").unwrap();
        assert_eq!(s.number("alpha"), Some(4.0));
    }

    #[test]
    fn defaults_are_recorded_in_parameters() {
        let mut s = Settings::new(Experiment::Characteristic);
        s.set_str("alpha", "4").unwrap();
        assert_eq!(s.count_or("points", 1000), 1000);
        let p = s.parameters();
        assert_eq!(p["points"], json!(1000.0));
        assert_eq!(p["alpha"], json!(4.0));
    }
}
