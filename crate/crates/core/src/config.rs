//! Run configuration: a TOML file with unit-suffixed keys. Unknown keys are
//! rejected.
//!
//! ```toml
//! [trap]
//! length_um = 1.0                 # or omega1_rad_per_s = 31415.9
//! sound_speed_mm_per_s = 10.0
//! chemical_potential_nK = 100.0
//! temperature_nK = 0.0
//!
//! [modes]
//! n = 1
//! m = 2
//!
//! [seed]
//! r = 10.0
//!
//! [channel]
//! rate_per_strain_over_omega1 = 0.35355
//!
//! [sweep]
//! axis = "omega1_t"
//! from = 100.0
//! to = 1000.0
//! points = 10
//! ```

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::channel::{ChannelForm, ChannelModel, DEFAULT_STRAIN_CAP};
use crate::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
use crate::error::{Error, Result};
use crate::metrology::{BulkWavenumber, CountVariant, DifferencingPolicy};
use crate::model::{ModePair, PhysicalParams};
use crate::oracle::{calibration_times, extract_rate, LengthConvention, OracleConfig};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub length_um: Option<f64>,
    /// Alternative to `length_um`: the trap length follows from `ω₁ = πc_s/L`.
    pub omega1_rad_per_s: Option<f64>,
    pub sound_speed_mm_per_s: f64,
    pub atom_mass_kg: Option<f64>,
    #[serde(rename = "chemical_potential_nK")]
    pub chemical_potential_nk: f64,
    #[serde(rename = "temperature_nK", default)]
    pub temperature_nk: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    pub n: u32,
    pub m: u32,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub theta_rad: f64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FormName {
    #[default]
    Exact,
    FirstOrder,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub phase_rad: Option<f64>,
    pub rate_per_strain_hz: Option<f64>,
    pub rate_per_strain_over_omega1: Option<f64>,
    #[serde(default)]
    pub rate_from_oracle: bool,
    pub provenance: Option<String>,
    #[serde(default)]
    pub form: FormName,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    /// Strain at which the QFI is evaluated.
    #[serde(default)]
    pub strain: f64,
    #[serde(default = "default_cap")]
    pub strain_cap: f64,
}

fn default_cap() -> f64 {
    DEFAULT_STRAIN_CAP
}

impl Default for WaveSection {
    fn default() -> Self {
        Self { strain: 0.0, strain_cap: DEFAULT_STRAIN_CAP }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, serde::Serialize)]
pub enum Axis {
    /// Dimensionless time `ω₁t`.
    #[serde(rename = "omega1_t")]
    Omega1T,
    #[serde(rename = "time_s")]
    TimeS,
    #[serde(rename = "omega1_rad_per_s")]
    Omega1RadPerS,
    /// `ω₁ / 2π`.
    #[serde(rename = "frequency_hz")]
    FrequencyHz,
    #[serde(rename = "temperature_nK")]
    TemperatureNk,
    #[serde(rename = "squeezing_r")]
    SqueezingR,
    /// Channel quadrature relative to the seed.
    #[serde(rename = "phase_rad")]
    PhaseRad,
}

impl Axis {
    pub fn column(self) -> &'static str {
        match self {
            Axis::Omega1T => "omega1_t",
            Axis::TimeS => "time_s",
            Axis::Omega1RadPerS => "omega1_rad_per_s",
            Axis::FrequencyHz => "frequency_hz",
            Axis::TemperatureNk => "temperature_nK",
            Axis::SqueezingR => "squeezing_r",
            Axis::PhaseRad => "phase_rad",
        }
    }

    fn is_time(self) -> bool {
        matches!(self, Axis::Omega1T | Axis::TimeS)
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Axis,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
    /// Explicit grid instead of `from`/`to`/`points`.
    pub values: Option<Vec<f64>>,
    /// Fixed time for non-time axes, one of the two.
    pub omega1_t: Option<f64>,
    pub time_s: Option<f64>,
    #[serde(default = "one")]
    pub probes: u64,
    #[serde(default)]
    pub cfi: bool,
    #[serde(default = "yes")]
    pub bulk: bool,
    pub output: Option<String>,
    pub overlay: Option<String>,
}

fn one() -> u64 {
    1
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    #[default]
    Exact,
    Geometric,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum WavenumberName {
    #[default]
    GroundMode,
    FullWave,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetrologySection {
    #[serde(default)]
    pub cfi_variant: VariantName,
    pub j_max: Option<usize>,
    #[serde(default)]
    pub bulk_wavenumber: WavenumberName,
    #[serde(default = "default_rel_tol")]
    pub qfi_rel_tol: f64,
    #[serde(default = "default_deficit")]
    pub qfi_target_deficit: f64,
}

fn default_rel_tol() -> f64 {
    1e-3
}

fn default_deficit() -> f64 {
    1e-6
}

impl Default for MetrologySection {
    fn default() -> Self {
        Self {
            cfi_variant: VariantName::Exact,
            j_max: None,
            bulk_wavenumber: WavenumberName::GroundMode,
            qfi_rel_tol: default_rel_tol(),
            qfi_target_deficit: default_deficit(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ConventionName {
    #[default]
    ProperLength,
    FullStrain,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// Defaults to `m + 4`, and at least the library default.
    pub n_modes: Option<usize>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default)]
    pub convention: ConventionName,
    #[serde(default = "default_strains")]
    pub strains: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_rtol() -> f64 {
    OracleConfig::default().rtol
}

fn default_atol() -> f64 {
    OracleConfig::default().atol
}

fn default_strains() -> Vec<f64> {
    vec![1e-5, 1e-4]
}

fn default_samples() -> usize {
    5
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            n_modes: None,
            rtol: default_rtol(),
            atol: default_atol(),
            convention: ConventionName::ProperLength,
            strains: default_strains(),
            samples: default_samples(),
        }
    }
}

/// The file as written.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub trap: TrapSection,
    pub modes: ModesSection,
    #[serde(default)]
    pub seed: SeedSection,
    pub channel: ChannelSection,
    #[serde(default)]
    pub wave: WaveSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub metrology: MetrologySection,
    #[serde(default)]
    pub oracle: OracleSection,
}

/// Channel rate, either absolute or tied to the fundamental.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub enum RateSpec {
    /// 1/s per unit strain.
    PerStrain(f64),
    /// Multiple of `ω₁` per unit strain; follows `ω₁` across frequency sweeps.
    OverOmega1(f64),
}

impl RateSpec {
    pub fn rate(&self, params: &PhysicalParams) -> f64 {
        match *self {
            RateSpec::PerStrain(r) => r,
            RateSpec::OverOmega1(k) => k * params.omega1(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    pub rate: RateSpec,
    pub phase: f64,
    pub form: ChannelForm,
    pub provenance: String,
}

impl ChannelSpec {
    pub fn model(&self, params: &PhysicalParams) -> Result<ChannelModel> {
        ChannelModel::new(self.rate.rate(params), self.phase, self.provenance.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixedTime {
    Omega1T(f64),
    Seconds(f64),
}

impl FixedTime {
    pub fn seconds(&self, params: &PhysicalParams) -> f64 {
        match *self {
            FixedTime::Omega1T(x) => x / params.omega1(),
            FixedTime::Seconds(t) => t,
        }
    }

    pub fn label(&self) -> String {
        match self {
            FixedTime::Omega1T(x) => format!("omega1_t={x}"),
            FixedTime::Seconds(t) => format!("time_s={t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub fixed_time: Option<FixedTime>,
    pub probes: u64,
    pub cfi: bool,
    pub bulk: bool,
    pub output: Option<String>,
    pub overlay: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetrologySettings {
    pub cfi_variant: CountVariant,
    pub j_max: Option<usize>,
    pub bulk_wavenumber: BulkWavenumber,
    pub policy: DifferencingPolicy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationSettings {
    pub oracle: OracleConfig,
    pub strains: Vec<f64>,
    pub samples: usize,
}

/// A validated configuration in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub modes: ModePair,
    pub r: f64,
    pub theta: f64,
    pub channel: ChannelSpec,
    pub strain: f64,
    pub strain_cap: f64,
    pub sweep: Option<SweepSpec>,
    pub metrology: MetrologySettings,
    pub calibration: CalibrationSettings,
    /// SHA-256 of the file contents.
    pub hash: String,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(format!("{name} must be positive, got {v}")))
    }
}

/// Grid of the sweep: strictly monotone, finite.
pub fn build_grid(sweep: &SweepSection) -> Result<Vec<f64>> {
    let grid = match (&sweep.values, sweep.from, sweep.to, sweep.points) {
        (Some(values), None, None, None) => values.clone(),
        (None, Some(from), Some(to), Some(points)) => {
            if points < 2 {
                return Err(config_err("sweep.points must be at least 2"));
            }
            let last = (points - 1) as f64;
            match sweep.spacing {
                Spacing::Linear => (0..points).map(|k| from + (to - from) * k as f64 / last).collect(),
                Spacing::Log => {
                    if !(from > 0.0 && to > 0.0) {
                        return Err(config_err("log-spaced sweeps need positive endpoints"));
                    }
                    let ratio = (to / from).ln();
                    let mut grid: Vec<f64> = (0..points).map(|k| from * (ratio * k as f64 / last).exp()).collect();
                    grid[points - 1] = to;
                    grid
                }
            }
        }
        _ => return Err(config_err("sweep needs either `values` or all of `from`, `to`, `points`")),
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(config_err("sweep grid must be non-empty and finite"));
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(config_err("sweep grid must be strictly monotone"));
    }
    Ok(grid)
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    /// Validates and converts to SI. Runs the oracle calibration when
    /// `rate_from_oracle` is set.
    pub fn resolve(&self, hash: String) -> Result<RunConfig> {
        let t = &self.trap;
        let sound_speed = positive("trap.sound_speed_mm_per_s", t.sound_speed_mm_per_s)? * 1e-3;
        let mass = positive("trap.atom_mass_kg", t.atom_mass_kg.unwrap_or(RB87_MASS))?;
        let mu = positive("trap.chemical_potential_nK", t.chemical_potential_nk)? * NANOKELVIN;
        let temperature = t.temperature_nk * NANOKELVIN;
        let params = match (t.length_um, t.omega1_rad_per_s) {
            (Some(l), None) => PhysicalParams::new(positive("trap.length_um", l)? * MICROMETER, sound_speed, mass, mu, temperature),
            (None, Some(w)) => PhysicalParams::new(MICROMETER, sound_speed, mass, mu, temperature)
                .and_then(|p| p.with_fundamental(positive("trap.omega1_rad_per_s", w)?)),
            _ => return Err(config_err("trap needs exactly one of length_um, omega1_rad_per_s")),
        }
        .map_err(|e| config_err(e.to_string()))?;
        let modes = ModePair::new(self.modes.n, self.modes.m).map_err(|e| config_err(e.to_string()))?;
        if !(self.seed.r.is_finite() && self.seed.r >= 0.0 && self.seed.theta_rad.is_finite()) {
            return Err(config_err("seed.r must be non-negative and seed.theta_rad finite"));
        }
        let w = self.wave;
        if !(w.strain >= 0.0 && w.strain <= w.strain_cap && w.strain_cap > 0.0) {
            return Err(config_err(format!("wave.strain {} outside [0, {}]", w.strain, w.strain_cap)));
        }

        let o = &self.oracle;
        let oracle = OracleConfig {
            n_modes: o.n_modes.unwrap_or((modes.m as usize + 4).max(OracleConfig::default().n_modes)),
            rtol: o.rtol,
            atol: o.atol,
            convention: match o.convention {
                ConventionName::ProperLength => LengthConvention::ProperLength,
                ConventionName::FullStrain => LengthConvention::FullStrain,
            },
        };
        oracle.validate(modes).map_err(|e| config_err(e.to_string()))?;
        let calibration = CalibrationSettings { oracle, strains: o.strains.clone(), samples: o.samples };

        let c = &self.channel;
        let phase = c.phase_rad.unwrap_or(FRAC_PI_2);
        if !phase.is_finite() {
            return Err(config_err("channel.phase_rad must be finite"));
        }
        let sources = [c.rate_per_strain_hz.is_some(), c.rate_per_strain_over_omega1.is_some(), c.rate_from_oracle];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(config_err(
                "channel needs exactly one of rate_per_strain_hz, rate_per_strain_over_omega1, rate_from_oracle",
            ));
        }
        let form = match c.form {
            FormName::Exact => ChannelForm::Exact,
            FormName::FirstOrder => ChannelForm::FirstOrder,
        };
        let (rate, provenance) = if let Some(r) = c.rate_per_strain_hz {
            (RateSpec::PerStrain(positive("channel.rate_per_strain_hz", r)?), c.provenance.clone())
        } else if let Some(k) = c.rate_per_strain_over_omega1 {
            (RateSpec::OverOmega1(positive("channel.rate_per_strain_over_omega1", k)?), c.provenance.clone())
        } else {
            let times = calibration_times(&params, calibration.samples);
            let fit = extract_rate(&params, modes, &calibration.strains, &times, &calibration.oracle, phase)?;
            (RateSpec::OverOmega1(fit.rate_over_omega1), Some(fit.model.provenance))
        };
        let channel = ChannelSpec {
            rate,
            phase,
            form,
            provenance: provenance.unwrap_or_else(|| "user supplied".to_string()),
        };

        let m = &self.metrology;
        let policy = DifferencingPolicy {
            rel_tol: positive("metrology.qfi_rel_tol", m.qfi_rel_tol)?,
            target_deficit: positive("metrology.qfi_target_deficit", m.qfi_target_deficit)?,
            ..DifferencingPolicy::default()
        };
        let metrology = MetrologySettings {
            cfi_variant: match m.cfi_variant {
                VariantName::Exact => CountVariant::Exact,
                VariantName::Geometric => CountVariant::Geometric,
            },
            j_max: m.j_max,
            bulk_wavenumber: match m.bulk_wavenumber {
                WavenumberName::GroundMode => BulkWavenumber::GroundMode,
                WavenumberName::FullWave => BulkWavenumber::FullWave,
            },
            policy,
        };

        let sweep = match &self.sweep {
            None => None,
            Some(s) => {
                let grid = build_grid(s)?;
                let fixed_time = match (s.omega1_t, s.time_s) {
                    (None, None) => None,
                    (Some(x), None) => Some(FixedTime::Omega1T(positive("sweep.omega1_t", x)?)),
                    (None, Some(t)) => Some(FixedTime::Seconds(positive("sweep.time_s", t)?)),
                    _ => return Err(config_err("sweep takes at most one of omega1_t, time_s")),
                };
                if s.axis.is_time() && fixed_time.is_some() {
                    return Err(config_err("a time sweep cannot also fix the time"));
                }
                if !s.axis.is_time() && fixed_time.is_none() {
                    return Err(config_err(format!("a {} sweep needs omega1_t or time_s", s.axis.column())));
                }
                if s.probes == 0 {
                    return Err(config_err("sweep.probes must be at least 1"));
                }
                if s.cfi && (phase != 0.0 || self.seed.theta_rad != 0.0 || s.axis == Axis::PhaseRad) {
                    return Err(config_err("counting statistics need aligned phases: channel.phase_rad = 0, seed.theta_rad = 0"));
                }
                Some(SweepSpec {
                    axis: s.axis,
                    grid,
                    fixed_time,
                    probes: s.probes,
                    cfi: s.cfi,
                    bulk: s.bulk,
                    output: s.output.clone(),
                    overlay: s.overlay.clone(),
                })
            }
        };

        Ok(RunConfig {
            params,
            modes,
            r: self.seed.r,
            theta: self.seed.theta_rad,
            channel,
            strain: w.strain,
            strain_cap: w.strain_cap,
            sweep,
            metrology,
            calibration,
            hash,
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        RawConfig::parse(text)?.resolve(sha256_hex(text.as_bytes()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
