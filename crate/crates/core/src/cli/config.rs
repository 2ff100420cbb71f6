//! Run configuration in user units (Hz, µm, nm, amu) and its conversion to
//! the internal SI/angular types.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::ChainConfig;
use crate::constants::{hz_to_angular, ATOMIC_MASS_UNIT, CA40_MASS_AMU};
use crate::error::{Error, Result};
use crate::noise::{NoiseKind, NoiseModel, NoiseTarget};

/// The configuration shipped with the binary and used without `--config`.
pub const DEFAULT_CONFIG: &str = include_str!("../../configs/three_ion.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Modes,
    Gate,
    Synth,
    Noise,
    Scan,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Modes => "modes",
            Experiment::Gate => "gate",
            Experiment::Synth => "synth",
            Experiment::Noise => "noise",
            Experiment::Scan => "scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_experiment")]
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    pub chain: ChainSection,
    #[serde(default)]
    pub gate: GateSection,
    #[serde(default)]
    pub synth: SynthSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_experiment() -> Experiment {
    Experiment::Modes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub n_ions: usize,
    pub axial_freq_hz: f64,
    #[serde(default = "default_mass")]
    pub mass_amu: f64,
    /// 0-based indices of tweezed ions.
    #[serde(default)]
    pub tweezed: Vec<usize>,
    #[serde(default)]
    pub light_shift_hz: f64,
    #[serde(default = "default_waist")]
    pub beam_waist_um: f64,
    #[serde(default = "default_wavelength")]
    pub drive_wavelength_nm: f64,
    #[serde(default = "one")]
    pub axis_projection: f64,
    /// Per-ion static qubit offsets, Hz.
    #[serde(default)]
    pub qubit_offsets_hz: Vec<f64>,
    /// 0-based gate-mode index in ascending frequency (0 is the COM).
    #[serde(default)]
    pub gate_mode: usize,
}

fn default_mass() -> f64 {
    CA40_MASS_AMU
}
fn default_waist() -> f64 {
    1.0
}
fn default_wavelength() -> f64 {
    729.0
}
fn one() -> f64 {
    1.0
}

impl ChainSection {
    pub fn to_chain(&self) -> Result<ChainConfig> {
        let mut c = ChainConfig::new(self.n_ions, hz_to_angular(self.axial_freq_hz))
            .with_tweezed(&self.tweezed)
            .with_light_shift(hz_to_angular(self.light_shift_hz))
            .with_beam_waist(self.beam_waist_um * 1e-6);
        if let Some(&bad) = self.tweezed.iter().find(|&&i| i >= self.n_ions) {
            return Err(Error::Config(format!("tweezed ion {bad} out of range for {} ions", self.n_ions)));
        }
        c.ion_mass = self.mass_amu * ATOMIC_MASS_UNIT;
        c.drive_wavelength = self.drive_wavelength_nm * 1e-9;
        c.axis_projection = self.axis_projection;
        if !self.qubit_offsets_hz.is_empty() {
            c.qubit_offsets = self.qubit_offsets_hz.iter().map(|&f| hz_to_angular(f)).collect();
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateSection {
    /// Gate detuning δ₀ from the unshifted mode, Hz.
    pub delta0_hz: f64,
    /// Defaults to two loops, 4π/δ₀.
    pub duration_us: Option<f64>,
    /// Defaults to δ₀/(2η).
    pub rabi_hz: Option<f64>,
    pub nbar: f64,
    pub samples: usize,
    pub cases: Vec<String>,
    pub phase_samples: usize,
    /// Also run the Fock-space integrator and report its deviation.
    pub fock_check: bool,
    pub fock_cutoff: usize,
    /// Fit δ back from each simulated trace.
    pub fit: bool,
}

impl Default for GateSection {
    fn default() -> Self {
        GateSection {
            delta0_hz: 4e3,
            duration_us: None,
            rabi_hz: None,
            nbar: 0.0,
            samples: 512,
            cases: vec!["D".into(), "S".into()],
            phase_samples: 64,
            fock_check: false,
            fock_cutoff: 30,
            fit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    /// Number of controls. Taken from the chain when absent.
    pub n: Option<usize>,
    /// Base (k = 0) gate-mode frequency, Hz. From the chain when absent.
    pub nu_com_hz: Option<f64>,
    /// Shift per control, Hz. From the chain when absent.
    pub delta_nu_hz: Option<f64>,
    /// Target η. From the chain when absent.
    pub eta: Option<f64>,
    pub exact_eta: bool,
    pub target_angle_rad: f64,
    /// Tone positions relative to the base mode, Hz. Commensurate grid when absent.
    pub tone_offsets_hz: Option<Vec<f64>>,
    pub max_total_rabi_hz: Option<f64>,
    pub closure_tol: f64,
    pub phase_tol: f64,
    pub starts: usize,
    pub trajectory_samples: usize,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            n: None,
            nu_com_hz: None,
            delta_nu_hz: None,
            eta: None,
            exact_eta: false,
            target_angle_rad: std::f64::consts::FRAC_PI_2,
            tone_offsets_hz: None,
            max_total_rabi_hz: None,
            closure_tol: 1e-6,
            phase_tol: 1e-4,
            starts: 8,
            trajectory_samples: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseEntry {
    pub kind: NoiseKind,
    pub target: NoiseTarget,
    /// Fractional RMS for intensities, Hz RMS for the trap frequency.
    pub amplitude: f64,
    #[serde(default)]
    pub correlation_time_s: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseEntry {
    pub fn to_model(&self) -> NoiseModel {
        let amplitude = match self.target {
            NoiseTarget::TrapFreq => hz_to_angular(self.amplitude),
            _ => self.amplitude,
        };
        NoiseModel {
            kind: self.kind,
            target: self.target,
            amplitude,
            correlation_time: self.correlation_time_s,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub trials: usize,
    pub case: String,
    pub models: Vec<NoiseEntry>,
    /// Multipliers applied to one channel at a time for the sweep table.
    pub sweep: Vec<f64>,
    /// Decoupling stage counts; 0 means no decoupling.
    pub dd_stages: Vec<usize>,
    pub dd_model: Option<NoiseEntry>,
    pub dd_trials: usize,
    pub per_shot: bool,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            trials: 10_000,
            case: "D".into(),
            models: Vec::new(),
            sweep: vec![0.5, 1.0, 2.0],
            dd_stages: vec![0, 1, 2, 4, 8],
            dd_model: None,
            dd_trials: 4000,
            per_shot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub light_shift_start_hz: f64,
    pub light_shift_stop_hz: f64,
    pub light_shift_points: usize,
    pub beam_waists_um: Vec<f64>,
    /// 0-based mode indices to report.
    pub modes: Vec<usize>,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            light_shift_start_hz: 0.0,
            light_shift_stop_hz: 25e6,
            light_shift_points: 26,
            beam_waists_um: vec![0.8, 1.0, 1.5],
            modes: vec![0, 2],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: Option<Format>,
}

/// Parses a config document; JSON when `json` is set, TOML otherwise.
pub fn parse_document(text: &str, json: bool) -> Result<Value> {
    if json {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON config: {e}")))
    } else {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid TOML config: {e}")))
    }
}

pub fn load_document(path: Option<&Path>) -> Result<Value> {
    match path {
        None => parse_document(DEFAULT_CONFIG, false),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
            let json = p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
            parse_document(&text, json)
        }
    }
}

/// A `--set` value: JSON or TOML literal, otherwise a bare string.
fn parse_override_value(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if let Ok(t) = toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        if let Ok(Value::Object(mut m)) = serde_json::to_value(t) {
            if let Some(v) = m.remove("v") {
                return v;
            }
        }
    }
    Value::String(raw.to_string())
}

/// Applies `dotted.path=value`, creating intermediate tables.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override key `{path}` is malformed")));
    }
    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override `{path}` descends into a non-table")))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("override `{path}` descends into a non-table")))?;
    obj.insert(keys[keys.len() - 1].to_string(), parse_override_value(raw.trim()));
    Ok(())
}

pub fn from_document(doc: Value) -> Result<RunConfig> {
    serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))
}
