//! Run configuration: a TOML file with dotted section keys, each of which
//! can be overridden by a command-line flag of the same name.
//!
//! ```toml
//! observable = "msd-rate"
//! temperature = 1.0          # or "zero"
//!
//! [model]
//! kind = "power-law"
//! gamma = 0.5
//! b = 1.0
//! mass = 1.0
//!
//! [grid]
//! t_min = 100.0
//! t_max = 1e4
//! n_points = 40
//! spacing = "log"
//! ```

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use qbm_core::{time_grid, BathModel, MeasurementSetup, Observable, QuadratureSpec, Spacing, ThermalContext};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Failure;

/// Reduced Planck constant in J s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Boltzmann constant in J/K.
pub const KB_SI: f64 = 1.380_649e-23;
/// Classical electron time `2e^2/3Mc^3` in seconds, the QED default for `tau_e` in SI runs.
pub const TAU_E_SI: f64 = 6.25e-24;

/// Every key accepted in a config file, as `(dotted name, help)`. Each one
/// is also a `--<dotted name>` flag.
pub const OVERRIDE_KEYS: &[(&str, &str)] = &[
    ("model.kind", "ohmic | power-law | harmonic | qed | free-particle"),
    (
        "model.mass",
        "inertial mass (ohmic, power-law, harmonic, free-particle)",
    ),
    ("model.zeta", "Ohmic friction constant"),
    ("model.gamma", "power-law exponent, -1 < gamma < 1"),
    ("model.b", "power-law or oscillator frequency"),
    ("model.renormalized_mass", "QED physical mass M"),
    ("model.bare_mass", "QED bare mass m, 0 <= m <= M"),
    (
        "model.tau_e",
        "QED time constant (defaults to the electron value in SI units)",
    ),
    ("temperature", "temperature, or \"zero\""),
    ("units.system", "natural | si | explicit"),
    ("units.hbar", "hbar for explicit units"),
    ("units.kb", "Boltzmann constant for explicit units"),
    ("grid.t_min", "first time point, > 0"),
    ("grid.t_max", "last time point, > t_min"),
    ("grid.n_points", "number of time points, >= 2"),
    ("grid.spacing", "linear | log"),
    ("quadrature.rel_tol", "relative tolerance"),
    ("quadrature.abs_tol", "absolute tolerance"),
    (
        "quadrature.max_half_periods",
        "panel budget beyond the asymptotic onset",
    ),
    ("quadrature.panel_order", "Gauss-Legendre nodes per panel"),
    (
        "quadrature.accel_depth",
        "epsilon-table columns used by the accelerator",
    ),
    (
        "quadrature.asymptotic_onset",
        "lower bound on the frequency where acceleration starts",
    ),
    ("observable", "msd | msd-rate | correlation | commutator | width"),
    ("width.sigma1", "first instrument width, > 0"),
    ("width.sigma2", "second instrument width, >= 0"),
    ("width.mode", "exact | asymptotic"),
    ("asymptote.tail_fraction", "fraction of the grid used for the slope fit"),
    ("asymptote.slope_tolerance", "allowed |fitted - expected| slope"),
    (
        "asymptote.expected_slope",
        "expected slope (default: fitted from the long-time law)",
    ),
    ("output", "output path, or - for standard output"),
];

/// Keys whose override value is always taken as a string.
const STRING_KEYS: &[&str] = &[
    "model.kind",
    "units.system",
    "grid.spacing",
    "observable",
    "width.mode",
    "output",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Zero,
    Value(f64),
}

impl Temperature {
    pub fn value(self) -> f64 {
        match self {
            Temperature::Zero => 0.0,
            Temperature::Value(t) => t,
        }
    }
}

impl Serialize for Temperature {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Temperature::Zero => s.serialize_str("zero"),
            Temperature::Value(t) => s.serialize_f64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for Temperature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Temperature;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number >= 0 or \"zero\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Temperature, E> {
                Ok(Temperature::Value(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Temperature, E> {
                Ok(Temperature::Value(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Temperature, E> {
                Ok(Temperature::Value(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Temperature, E> {
                if v == "zero" {
                    Ok(Temperature::Zero)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Units {
    /// hbar = kB = 1.
    #[default]
    Natural,
    /// SI constants; QED `tau_e` defaults to [`TAU_E_SI`].
    Si,
    Explicit {
        hbar: f64,
        kb: f64,
    },
}

impl Units {
    pub fn constants(self) -> (f64, f64) {
        match self {
            Units::Natural => (1.0, 1.0),
            Units::Si => (HBAR_SI, KB_SI),
            Units::Explicit { hbar, kb } => (hbar, kb),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

/// The quadrature knobs a run may change. The endpoint exponent is always
/// derived from the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_half_periods: usize,
    pub panel_order: usize,
    pub accel_depth: usize,
    pub asymptotic_onset: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        let d = QuadratureSpec::default();
        QuadratureSettings {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_half_periods: d.max_half_periods,
            panel_order: d.panel_order,
            accel_depth: d.accel_depth,
            asymptotic_onset: d.asymptotic_onset,
        }
    }
}

impl QuadratureSettings {
    pub fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_half_periods: self.max_half_periods,
            panel_order: self.panel_order,
            accel_depth: self.accel_depth,
            asymptotic_onset: self.asymptotic_onset,
            ..QuadratureSpec::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableKind {
    Msd,
    MsdRate,
    Correlation,
    Commutator,
    /// Mean-square width of the measured packet; needs `[width]`.
    Width,
}

impl ObservableKind {
    pub fn name(self) -> &'static str {
        match self.observable() {
            Some(o) => o.name(),
            None => "width",
        }
    }

    /// The core observable, `None` for the packet width.
    pub fn observable(self) -> Option<Observable> {
        match self {
            ObservableKind::Msd => Some(Observable::Msd),
            ObservableKind::MsdRate => Some(Observable::MsdRate),
            ObservableKind::Correlation => Some(Observable::Correlation),
            ObservableKind::Commutator => Some(Observable::Commutator),
            ObservableKind::Width => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthMode {
    /// Quadrature for every term.
    #[default]
    Exact,
    /// Long-time law, with the dominant term named in an extra column.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WidthParams {
    pub sigma1: f64,
    #[serde(default)]
    pub sigma2: f64,
    #[serde(default)]
    pub mode: WidthMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoteSettings {
    pub tail_fraction: f64,
    pub slope_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_slope: Option<f64>,
}

impl Default for AsymptoteSettings {
    fn default() -> Self {
        AsymptoteSettings {
            tail_fraction: 0.5,
            slope_tolerance: 0.02,
            expected_slope: None,
        }
    }
}

/// One run. Only `model` is needed by `validate`; `compute` and
/// `asymptote` also need `temperature`, `grid` and `observable`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<Temperature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub model: BathModel,
    #[serde(default)]
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<WidthParams>,
    #[serde(default)]
    pub asymptote: AsymptoteSettings,
}

/// Everything `compute` and `asymptote` need, checked.
#[derive(Debug, Clone)]
pub struct Run {
    pub model: BathModel,
    pub ctx: ThermalContext,
    pub times: Vec<f64>,
    pub observable: ObservableKind,
    pub spec: QuadratureSpec,
    pub width: Option<WidthParams>,
}

impl RunConfig {
    /// Parses config text with no overrides. Errors carry the line and field.
    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        Self::load(text, &[])
    }

    /// Parses config text, applies `(dotted key, raw value)` overrides in
    /// order, then checks the structure.
    pub fn load(text: &str, overrides: &[(String, String)]) -> Result<Self, Failure> {
        let mut table = text
            .parse::<toml::Table>()
            .map_err(|e| Failure::usage(format!("config: {}", e.to_string().trim_end())))?;
        let mut changed = false;
        for (key, raw) in overrides {
            set_dotted(&mut table, key, parse_override(key, raw))?;
            changed = true;
        }
        changed |= default_tau_e(&mut table);
        let cfg: RunConfig = if changed {
            toml::Value::Table(table)
                .try_into()
                .map_err(|e| Failure::usage(format!("config (after overrides): {}", e.to_string().trim_end())))?
        } else {
            toml::from_str(text).map_err(|e| Failure::usage(format!("config: {}", e.to_string().trim_end())))?
        };
        cfg.check_structure()?;
        Ok(cfg)
    }

    /// Reads `path` (if any) and applies overrides.
    pub fn load_file(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, Failure> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::load(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    fn check_structure(&self) -> Result<(), Failure> {
        match (self.observable, &self.width) {
            (Some(ObservableKind::Width), None) => {
                return Err(Failure::usage("width: observable = \"width\" needs width.sigma1"));
            }
            (Some(obs), Some(_)) if obs != ObservableKind::Width => {
                return Err(Failure::usage(format!(
                    "width: [width] is only allowed with observable = \"width\", got \"{}\"",
                    obs.name()
                )));
            }
            _ => {}
        }
        if let Some(t) = self.temperature {
            if !(t.value() >= 0.0 && t.value().is_finite()) {
                return Err(Failure::usage(format!(
                    "temperature: must be finite and >= 0, got {}",
                    t.value()
                )));
            }
        }
        if let Units::Explicit { hbar, kb } = self.units {
            if !(hbar > 0.0 && hbar.is_finite() && kb > 0.0 && kb.is_finite()) {
                return Err(Failure::usage(format!(
                    "units: hbar and kb must be positive, got {hbar}, {kb}"
                )));
            }
        }
        if let Some(g) = &self.grid {
            time_grid(g.t_min, g.t_max, g.n_points, g.spacing).map_err(|e| Failure::usage(format!("grid: {e}")))?;
        }
        let a = &self.asymptote;
        if !(a.tail_fraction > 0.0 && a.tail_fraction <= 1.0) {
            return Err(Failure::usage(format!(
                "asymptote.tail_fraction: must lie in (0, 1], got {}",
                a.tail_fraction
            )));
        }
        if !(a.slope_tolerance >= 0.0) {
            return Err(Failure::usage(format!(
                "asymptote.slope_tolerance: must be >= 0, got {}",
                a.slope_tolerance
            )));
        }
        Ok(())
    }

    pub fn thermal_context(&self) -> Result<ThermalContext, Failure> {
        let t = self
            .temperature
            .ok_or_else(|| Failure::usage("temperature: missing (a number or \"zero\")"))?;
        let (hbar, kb) = self.units.constants();
        ThermalContext::with_units(t.value(), hbar, kb).map_err(|e| Failure::usage(format!("temperature: {e}")))
    }

    /// Validated inputs for a sweep.
    pub fn run(&self) -> Result<Run, Failure> {
        self.model
            .validate_params()
            .map_err(|e| Failure::usage(format!("model: {e}")))?;
        let ctx = self.thermal_context()?;
        let g = self
            .grid
            .ok_or_else(|| Failure::usage("grid: missing (t_min, t_max, n_points)"))?;
        let times =
            time_grid(g.t_min, g.t_max, g.n_points, g.spacing).map_err(|e| Failure::usage(format!("grid: {e}")))?;
        let observable = self.observable.ok_or_else(|| Failure::usage("observable: missing"))?;
        if let Some(w) = &self.width {
            MeasurementSetup::new(w.sigma1, w.sigma2, 0.0).map_err(|e| Failure::usage(format!("width: {e}")))?;
        }
        let spec = self.quadrature.spec();
        spec.validate()
            .map_err(|e| Failure::usage(format!("quadrature: {e}")))?;
        Ok(Run {
            model: self.model,
            ctx,
            times,
            observable,
            spec,
            width: self.width,
        })
    }

    /// Opens `output`; standard output when unset or `-`.
    pub fn open_output(&self) -> Result<Box<dyn Write>, Failure> {
        match self.output.as_deref() {
            None | Some("-") => Ok(Box::new(BufWriter::new(io::stdout()))),
            Some(path) => {
                let f = File::create(path).map_err(|e| Failure::usage(format!("output: cannot create {path}: {e}")))?;
                Ok(Box::new(BufWriter::new(f)))
            }
        }
    }
}

fn parse_override(key: &str, raw: &str) -> toml::Value {
    if STRING_KEYS.contains(&key) {
        return toml::Value::String(raw.to_string());
    }
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), Failure> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().unwrap_or(key);
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Failure::usage(format!("{key}: `{p}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Fills in the electron `tau_e` for SI QED runs that omit it.
fn default_tau_e(table: &mut toml::Table) -> bool {
    let si = table
        .get("units")
        .and_then(|u| u.get("system"))
        .and_then(|s| s.as_str())
        == Some("si");
    let Some(model) = table.get_mut("model").and_then(|m| m.as_table_mut()) else {
        return false;
    };
    if si && model.get("kind").and_then(|k| k.as_str()) == Some("qed") && !model.contains_key("tau_e") {
        model.insert("tau_e".into(), toml::Value::Float(TAU_E_SI));
        return true;
    }
    false
}
