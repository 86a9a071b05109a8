//! JSON run configurations in laboratory units.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use oddeven::pipeline::{AtomChoice, Numerics};
use oddeven::sampling::ScanMode;
use oddeven::spectrum::Window;
use oddeven::tdse::{AbsorberSpec, AtomLabel};
use oddeven::units::{fs_to_au_time, intensity_to_field, wavelength_to_frequency, ProbePulse, ThzContribution, ThzPulse};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub intensity_w_cm2: f64,
    pub wavelength_nm: f64,
    pub cycles: u32,
    #[serde(default = "one")]
    pub ramp_cycles: u32,
    /// Carrier-envelope phase in radians.
    #[serde(default)]
    pub cep: f64,
}

fn one() -> u32 {
    1
}

impl ProbeConfig {
    pub fn pulse(&self) -> Result<ProbePulse<f64>, CliError> {
        positive("probe.intensity_w_cm2", self.intensity_w_cm2)?;
        positive("probe.wavelength_nm", self.wavelength_nm)?;
        if !self.cep.is_finite() {
            return Err(CliError::Config("probe.cep must be finite".into()));
        }
        ProbePulse::new(
            intensity_to_field(self.intensity_w_cm2).map_err(config)?,
            wavelength_to_frequency(self.wavelength_nm).map_err(config)?,
            self.cycles,
            self.ramp_cycles,
            self.cep,
        )
        .map_err(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomConfig {
    /// `"H"`, `"He"`, `"Ne"` or `"Ar"`.
    Label(String),
    /// Custom target tuned to `ip` (a.u.).
    Custom {
        ip: f64,
    },
}

impl Default for AtomConfig {
    fn default() -> Self {
        Self::Label("H".into())
    }
}

impl AtomConfig {
    pub fn choice(&self) -> Result<AtomChoice<f64>, CliError> {
        match self {
            Self::Label(s) => {
                let label: AtomLabel = s.parse().map_err(|e| CliError::Config(format!("atom: {e}")))?;
                if label == AtomLabel::Custom {
                    return Err(CliError::Config("custom atoms need {\"ip\": ...}".into()));
                }
                Ok(AtomChoice::Label(label))
            }
            Self::Custom { ip } => {
                positive("atom.ip", *ip)?;
                Ok(AtomChoice::Ip(*ip))
            }
        }
    }

    /// Ionization potential in a.u.
    pub fn ip(&self) -> Result<f64, CliError> {
        match self.choice()? {
            AtomChoice::Label(l) => Ok(l.ionization_potential().expect("named atoms carry an Ip")),
            AtomChoice::Ip(ip) => Ok(ip),
            AtomChoice::Model(m) => Ok(m.ionization_potential),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Label(s) => s.clone(),
            Self::Custom { ip } => format!("ip={ip}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThzModeConfig {
    /// Time-dependent pulse.
    FullWave,
    /// The pulse value at the probe centre, held constant.
    QuasiStatic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThzConfig {
    /// Peak field in kV/cm (sign selects the polarity).
    pub amplitude_kv_cm: f64,
    #[serde(default = "default_thz_frequency")]
    pub frequency_thz: f64,
    #[serde(default = "default_thz_mode")]
    pub mode: ThzModeConfig,
    /// Time of the THz centre relative to the probe centre, in fs.
    #[serde(default)]
    pub offset_fs: f64,
}

fn default_thz_frequency() -> f64 {
    1.3
}

fn default_thz_mode() -> ThzModeConfig {
    ThzModeConfig::FullWave
}

impl ThzConfig {
    pub fn pulse(&self) -> Result<ThzPulse<f64>, CliError> {
        positive("thz.frequency_thz", self.frequency_thz)?;
        ThzPulse::from_lab(self.amplitude_kv_cm, self.frequency_thz, fs_to_au_time(self.offset_fs)).map_err(config)
    }

    pub fn contribution(&self, force_quasi_static: bool) -> Result<ThzContribution<f64>, CliError> {
        let pulse = self.pulse()?;
        Ok(match (self.mode, force_quasi_static) {
            (ThzModeConfig::FullWave, false) => ThzContribution::Pulse(pulse),
            _ => ThzContribution::Static(pulse.field_at(0.0)),
        })
    }

    pub fn scan_mode(&self, force_quasi_static: bool) -> ScanMode {
        match (self.mode, force_quasi_static) {
            (ThzModeConfig::FullWave, false) => ScanMode::FullWave,
            _ => ScanMode::QuasiStatic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowConfig {
    #[default]
    FlatTop,
    Full,
    Rectangular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub half_width: Option<f64>,
    /// Absorbing layer as a fraction of each half box; 0 disables it.
    pub absorber_fraction: Option<f64>,
    #[serde(default)]
    pub window: WindowConfig,
    /// Even order for `eta`; defaults to the largest even order below cutoff.
    pub monitored_order: Option<u32>,
}

impl GridConfig {
    pub fn numerics(&self) -> Result<Numerics<f64>, CliError> {
        let mut n = Numerics::<f64>::default();
        if let Some(dx) = self.dx {
            positive("grid.dx", dx)?;
            n.dx = dx;
        }
        if let Some(dt) = self.dt {
            positive("grid.dt", dt)?;
            n.dt = dt;
        }
        if let Some(h) = self.half_width {
            positive("grid.half_width", h)?;
            n.half_width = Some(h);
        }
        match self.absorber_fraction {
            Some(f) if f == 0.0 => n.absorber = None,
            Some(f) => {
                n.absorber = Some(AbsorberSpec::new(f, AbsorberSpec::<f64>::default().mask_exponent).map_err(config)?)
            }
            None => {}
        }
        n.window = match self.window {
            WindowConfig::FlatTop => Window::HannFlatTop,
            WindowConfig::Full => Window::HannFull,
            WindowConfig::Rectangular => Window::Rectangular,
        };
        if let Some(order) = self.monitored_order {
            if order < 2 || order % 2 != 0 {
                return Err(CliError::Config(format!("grid.monitored_order {order} is not an even order >= 2")));
            }
        }
        n.monitored_order = self.monitored_order;
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayConfig {
    /// Number of delays, spread evenly over `+-span_periods` THz periods.
    pub count: usize,
    #[serde(default = "default_span")]
    pub span_periods: f64,
}

fn default_span() -> f64 {
    1.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub probe: ProbeConfig,
    #[serde(default)]
    pub atom: AtomConfig,
    pub thz: Option<ThzConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    /// Delay grid for `reconstruct`; defaults to flat-top steps over the
    /// THz support.
    pub delays: Option<DelayConfig>,
    /// Coefficient used to invert `eta`.
    pub coefficient: Option<f64>,
    /// Allow probes outside the working range of the law.
    #[serde(default)]
    pub allow_outside_range: bool,
    pub output_dir: Option<PathBuf>,
    pub parallelism: Option<usize>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.probe.pulse()?;
        self.atom.choice()?;
        if let Some(thz) = &self.thz {
            thz.pulse()?;
        }
        self.grid.numerics()?;
        if let Some(c) = self.coefficient {
            positive("coefficient", c)?;
        }
        if let Some(d) = &self.delays {
            if d.count < 2 {
                return Err(CliError::Config("delays.count must be at least 2".into()));
            }
            positive("delays.span_periods", d.span_periods)?;
        }
        if self.parallelism == Some(0) {
            return Err(CliError::Config("parallelism must be at least 1".into()));
        }
        Ok(())
    }

    pub fn thz_contribution(&self, force_quasi_static: bool) -> Result<ThzContribution<f64>, CliError> {
        match &self.thz {
            Some(t) => t.contribution(force_quasi_static),
            None => Ok(ThzContribution::None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Static THz field in kV/cm.
    EtKvCm,
    /// Static THz field in a.u.
    EtAu,
    /// Static THz field given through `gamma = E0 E_T / w0^3`.
    Gamma,
    IntensityWCm2,
    WavelengthNm,
    Cycles,
    /// Values are atom labels (`"H"`, `"Ar"`, ...).
    Atom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub base: RunConfig,
    pub variable: SweepVariable,
    pub values: Vec<SweepValue>,
    /// Overrides `base.grid.monitored_order`.
    pub monitored_order: Option<u32>,
    /// Label used by `collapse`.
    pub id: Option<String>,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.base.validate()?;
        if self.values.is_empty() {
            return Err(CliError::Config("sweep values are empty".into()));
        }
        for v in &self.values {
            match (self.variable, v) {
                (SweepVariable::Atom, SweepValue::Label(s)) => {
                    AtomConfig::Label(s.clone()).choice()?;
                }
                (SweepVariable::Atom, SweepValue::Number(_)) => {
                    return Err(CliError::Config("atom sweeps take labels".into()))
                }
                (_, SweepValue::Label(_)) => {
                    return Err(CliError::Config("numeric sweep has a non-numeric value".into()))
                }
                (var, SweepValue::Number(x)) => {
                    if !x.is_finite() {
                        return Err(CliError::Config("sweep values must be finite".into()));
                    }
                    let must_be_positive = matches!(
                        var,
                        SweepVariable::IntensityWCm2 | SweepVariable::WavelengthNm | SweepVariable::Cycles
                    );
                    if must_be_positive && *x <= 0.0 {
                        return Err(CliError::Config(format!("{var:?} sweep values must be positive")));
                    }
                    if var == SweepVariable::Cycles && x.fract() != 0.0 {
                        return Err(CliError::Config("cycle counts must be integers".into()));
                    }
                }
            }
        }
        if let Some(order) = self.monitored_order {
            if order < 2 || order % 2 != 0 {
                return Err(CliError::Config(format!("monitored_order {order} is not an even order >= 2")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseConfig {
    pub scans: Vec<ScanConfig>,
    #[serde(default = "default_gamma_min")]
    pub gamma_min: f64,
    #[serde(default = "default_gamma_max")]
    pub gamma_max: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_gamma_min() -> f64 {
    0.15
}

fn default_gamma_max() -> f64 {
    0.55
}

fn default_grid_points() -> usize {
    9
}

impl CollapseConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.scans.len() < 2 {
            return Err(CliError::Config("collapse needs at least two scans".into()));
        }
        for s in &self.scans {
            s.validate()?;
        }
        if !(self.gamma_min >= 0.0 && self.gamma_max > self.gamma_min) || self.grid_points < 2 {
            return Err(CliError::Config("collapse grid needs 0 <= gamma_min < gamma_max and >= 2 points".into()));
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn config(e: oddeven::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Reads and validates a JSON config of type `C`.
pub fn load<C: for<'de> Deserialize<'de>>(path: &Path) -> Result<C, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<C: for<'de> Deserialize<'de>>(text: &str) -> Result<C, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("schema: {e}")))
}

/// SHA-256 of the canonical JSON form, as hex.
pub fn config_hash<C: Serialize>(cfg: &C) -> String {
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&canonical)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
