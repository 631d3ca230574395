//! TOML run configuration.
//!
//! Frequencies are written as cyclic values, either plain numbers in Hz or
//! strings with a unit (`"14.4 MHz"`, `"-30 GHz"`, `"42 kHz"`), and are
//! converted to rad/s when the model parameters are built. Lengths accept
//! `m`, `mm`, `um` and `nm`; times `s`, `ms`, `us` and `ns`; temperatures `K`,
//! `mK`, `uK` and `nK`. Unknown keys are rejected and every error names the
//! offending key.

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::dynamics::{CavityFieldModel, ForceModel, SwitchOn};
use crate::error::{Error, Result};
use crate::lattice::{PhaseModel, PopulationModel, SpreadSampling};
use crate::measure::{Averaging, EnvelopeModel};
use crate::params::{
    angular, atoms_for_shift, CavityParams, CouplingAverage, DriveParams, PhysicalConstants,
    SystemParams, TrapParams,
};
use crate::steady_state::ResponseProfile;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Dimension {
    Frequency,
    Length,
    Time,
    Temperature,
    Chirp,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Self::Frequency => "frequency",
            Self::Length => "length",
            Self::Time => "time",
            Self::Temperature => "temperature",
            Self::Chirp => "chirp rate",
        }
    }

    fn base_unit(self) -> &'static str {
        match self {
            Self::Frequency => "Hz",
            Self::Length => "m",
            Self::Time => "s",
            Self::Temperature => "K",
            Self::Chirp => "Hz/s",
        }
    }

    fn scale(self, unit: &str) -> Option<f64> {
        let u = unit.replace('µ', "u");
        let simple = |base: &str| -> Option<f64> {
            let prefix = u.strip_suffix(base)?;
            match prefix {
                "" => Some(1.0),
                "G" => Some(1e9),
                "M" => Some(1e6),
                "k" => Some(1e3),
                "m" => Some(1e-3),
                "u" => Some(1e-6),
                "n" => Some(1e-9),
                _ => None,
            }
        };
        match self {
            Self::Frequency => simple("Hz").filter(|s| *s >= 1.0),
            Self::Length => simple("m").filter(|s| *s <= 1.0),
            Self::Time => simple("s").filter(|s| *s <= 1.0),
            Self::Temperature => simple("K").filter(|s| *s <= 1.0),
            Self::Chirp => {
                let (f, t) = u.split_once('/')?;
                Some(Self::Frequency.scale(f.trim())? / Self::Time.scale(t.trim())?)
            }
        }
    }
}

/// Parses `"<number> <unit>"` (or a bare number in base units).
fn parse_with_unit(text: &str, dim: Dimension) -> std::result::Result<f64, String> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| {
            c.is_alphabetic() && c != 'e' && c != 'E' || (c == 'e' || c == 'E') && !t[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+')
        })
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("cannot read a number from `{text}`"))?;
    let unit = unit.trim();
    let scale = if unit.is_empty() {
        1.0
    } else {
        dim.scale(unit).ok_or_else(|| {
            format!("unknown {} unit `{unit}` (base unit {})", dim.name(), dim.base_unit())
        })?
    };
    let v = value * scale;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{text}` is not finite"))
    }
}

/// Public entry point for parsing a frequency string to cyclic Hz.
pub fn parse_frequency(text: &str) -> Result<f64> {
    parse_with_unit(text, Dimension::Frequency).map_err(|m| Error::Config {
        key: "<value>".into(),
        message: m,
    })
}

struct QuantityVisitor(Dimension);

impl Visitor<'_> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a {} as a number in {} or a string with a unit", self.0.name(), self.0.base_unit())
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
        parse_with_unit(v, self.0).map_err(E::custom)
    }
}

macro_rules! quantity {
    ($name:ident, $dim:expr, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, Copy, PartialEq, Default)]
        pub struct $name(pub f64);

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                d.deserialize_any(QuantityVisitor($dim)).map($name)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(&format!("{:?} {}", self.0, $dim.base_unit()))
            }
        }
    };
}

quantity!(Freq, Dimension::Frequency, "Cyclic frequency in Hz.");
quantity!(Length, Dimension::Length, "Length in metres.");
quantity!(Time, Dimension::Time, "Time in seconds.");
quantity!(Temperature, Dimension::Temperature, "Temperature in kelvin.");
quantity!(Chirp, Dimension::Chirp, "Frequency chirp in Hz per second.");

impl Freq {
    pub fn rad(self) -> f64 {
        angular(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    #[default]
    Derived,
    Lineshape,
    BistabilityThreshold,
    Sweep,
    Ringdown,
    Trigger,
}

impl Scenario {
    pub const ALL: [&'static str; 6] = [
        "derived",
        "lineshape",
        "bistability-threshold",
        "sweep",
        "ringdown",
        "trigger",
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Derived => "derived",
            Self::Lineshape => "lineshape",
            Self::BistabilityThreshold => "bistability-threshold",
            Self::Sweep => "sweep",
            Self::Ringdown => "ringdown",
            Self::Trigger => "trigger",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::deserialize(de::value::StrDeserializer::<de::value::Error>::new(name)).map_err(|_| {
            Error::Config {
                key: "scenario".into(),
                message: format!("unknown scenario `{name}`; expected one of {}", Self::ALL.join(", ")),
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileChoice {
    /// Voigt when the cavity has technical jitter, Lorentzian otherwise.
    #[default]
    Auto,
    Lorentzian,
    Voigt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavitySection {
    pub kappa: Freq,
    pub g0: Freq,
    pub gamma_atom: Freq,
    pub delta_ca: Freq,
    pub probe_wavelength: Length,
    pub trap_wavelength: Length,
    pub sigma_jitter: Freq,
    pub waist: Length,
    pub finesse: f64,
    pub profile: ProfileChoice,
}

impl Default for CavitySection {
    fn default() -> Self {
        Self {
            kappa: Freq(0.66e6),
            g0: Freq(14.4e6),
            gamma_atom: Freq(3.0e6),
            delta_ca: Freq(-30e9),
            probe_wavelength: Length(780e-9),
            trap_wavelength: Length(850e-9),
            sigma_jitter: Freq(1.1e6),
            waist: Length(23.4e-6),
            finesse: 5.8e5,
            profile: ProfileChoice::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapSection {
    pub omega_z: Freq,
    pub omega_radial: Freq,
    /// Lattice depth as a temperature, `U / k_B`.
    pub trap_depth: Temperature,
    pub temperature: Temperature,
    pub num_sites: usize,
}

impl Default for TrapSection {
    fn default() -> Self {
        Self {
            omega_z: Freq(42e3),
            omega_radial: Freq(0.3e3),
            trap_depth: Temperature(6.6e-6),
            temperature: Temperature(0.8e-6),
            num_sites: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AveragingChoice {
    SingleWell,
    #[default]
    MultiWell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveSection {
    pub n_max: f64,
    pub delta_pc: Freq,
    /// Either the atom number or the collective shift it produces; with
    /// neither, the shift defaults to [`DEFAULT_COLLECTIVE_SHIFT_HZ`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom_number: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collective_shift: Option<Freq>,
    pub averaging: AveragingChoice,
}

pub const DEFAULT_COLLECTIVE_SHIFT_HZ: f64 = -148e6;

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            n_max: 0.56,
            delta_pc: Freq(0.0),
            atom_number: None,
            collective_shift: None,
            averaging: AveragingChoice::MultiWell,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionChoice {
    #[default]
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineshapeSection {
    /// One trace per resonant photon number.
    pub n_max: Vec<f64>,
    pub delta_pc_start: Freq,
    pub delta_pc_end: Freq,
    pub points: usize,
    pub direction: DirectionChoice,
}

impl Default for LineshapeSection {
    fn default() -> Self {
        Self {
            n_max: vec![0.06, 0.20, 0.56],
            delta_pc_start: Freq(-175e6),
            delta_pc_end: Freq(-125e6),
            points: 1001,
            direction: DirectionChoice::Up,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Chirp for the upward sweep; the downward sweep uses its negative.
    pub chirp: Chirp,
    pub delta_pc_start: Freq,
    pub delta_pc_end: Freq,
    pub points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            chirp: Chirp(6e9),
            delta_pc_start: Freq(-100e6),
            delta_pc_end: Freq(-50e6),
            points: 2001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSection {
    /// Report fold points at this beta instead of the configured one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseChoice {
    #[default]
    Walk,
    Uniform,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingChoice {
    Random,
    #[default]
    Quantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    pub phases: PhaseChoice,
    /// Probe phase (rad) when `phases = "fixed"`.
    pub fixed_phase: f64,
    /// rms width of a Gaussian population profile in sites; uniform if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian_rms_sites: Option<f64>,
    /// rms spread of the axial trap frequency (cyclic).
    pub omega_z_spread: Freq,
    pub sub_ensembles: usize,
    pub spread_sampling: SamplingChoice,
    pub seed: u64,
    /// Load the ensemble from a `theta,population,omega_z` table instead.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

/// Trap-frequency spread (Hz, rms) that gives a 1.0 ms decay of the fitted
/// spectral amplitude at the reference ring-down operating point.
pub const CALIBRATED_SPREAD_HZ: f64 = 2.5e3;
pub const CALIBRATED_SUB_ENSEMBLES: usize = 64;

impl Default for LatticeSection {
    fn default() -> Self {
        Self {
            phases: PhaseChoice::Walk,
            fixed_phase: std::f64::consts::FRAC_PI_4,
            gaussian_rms_sites: None,
            omega_z_spread: Freq(CALIBRATED_SPREAD_HZ),
            sub_ensembles: CALIBRATED_SUB_ENSEMBLES,
            spread_sampling: SamplingChoice::Quantiles,
            seed: 1,
            table: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FieldChoice {
    #[default]
    Adiabatic,
    FirstOrderFilter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RingupSection {
    /// Collective shift of the atoms at rest when the probe comes on.
    pub collective_shift: Freq,
    pub delta_pc: Freq,
    /// Photon number just after switch-on; sets `n_max` through the cavity
    /// response at the resting shift. Ignored when `n_max` is given.
    pub switch_on_nbar: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<f64>,
    pub duration: Time,
    /// Linear switch-on ramp; zero for an instantaneous step.
    pub ramp: Time,
    pub field: FieldChoice,
    pub linearized_force: bool,
    /// Viscous damping rate in 1/s.
    pub viscous_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<Time>,
    pub record_every: usize,
}

impl Default for RingupSection {
    fn default() -> Self {
        Self {
            collective_shift: Freq(-19e6),
            delta_pc: Freq(-17e6),
            switch_on_nbar: 6.5,
            n_max: None,
            duration: Time(2.5e-3),
            ramp: Time(5e-6),
            field: FieldChoice::Adiabatic,
            linearized_force: false,
            viscous_rate: 0.0,
            dt: None,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CountsSection {
    pub efficiency: f64,
    pub bin_width: Time,
    /// Background counts per second.
    pub dark_rate: f64,
}

impl Default for CountsSection {
    fn default() -> Self {
        Self {
            efficiency: 0.05,
            bin_width: Time(1e-6),
            dark_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AveragingOrder {
    #[default]
    Traces,
    Spectra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeChoice {
    #[default]
    Gaussian,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub repetitions: usize,
    pub window: Time,
    /// Fixed analysis frequency; the spectral peak is used if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<Freq>,
    pub band_low: Freq,
    pub band_high: Freq,
    pub averaging: AveragingOrder,
    pub envelope: EnvelopeChoice,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            repetitions: 50,
            window: Time(500e-6),
            frequency: None,
            band_low: Freq(20e3),
            band_high: Freq(100e3),
            averaging: AveragingOrder::Traces,
            envelope: EnvelopeChoice::Gaussian,
        }
    }
}

/// Atom-loss drift toward the probe, watched at the ring-up probe detuning
/// `ringup.delta_pc`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TriggerSection {
    /// Run the trigger phase before the ring-up and take the conditioned
    /// shift from it (ring-down scenario only).
    pub enabled: bool,
    pub initial_shift: Freq,
    /// Atom loss rate in 1/s.
    pub loss_rate: f64,
    pub probe_level: f64,
    /// Smoothed detected rate (counts/s) that fires the trigger.
    pub threshold_rate: f64,
    pub smoothing: Time,
    pub horizon: Time,
    pub delay: Time,
}

impl Default for TriggerSection {
    fn default() -> Self {
        Self {
            enabled: false,
            initial_shift: Freq(-23e6),
            loss_rate: 5.0,
            probe_level: 5.0,
            threshold_rate: 8.0e5,
            smoothing: Time(100e-6),
            horizon: Time(0.1),
            delay: Time(10e-3),
        }
    }
}

/// The configuration document as written, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub scenario: Scenario,
    pub seed: u64,
    pub cavity: CavitySection,
    pub trap: TrapSection,
    pub drive: DriveSection,
    pub lineshape: LineshapeSection,
    pub sweep: SweepSection,
    pub threshold: ThresholdSection,
    pub lattice: LatticeSection,
    pub ringup: RingupSection,
    pub counts: CountsSection,
    pub analysis: AnalysisSection,
    pub trigger: TriggerSection,
}

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn require(ok: bool, key: &str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(config_error(key, message))
    }
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error("<document>", e.message().to_string()))?;
        let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            config_error(if key == "." { "<document>" } else { &key }, e.into_inner().message().to_string())
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Resolved configuration as TOML, re-readable by [`from_toml`](Self::from_toml).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Checks every value that has a restricted range, naming the key.
    pub fn validate(&self) -> Result<()> {
        let c = &self.cavity;
        for (key, v) in [
            ("cavity.kappa", c.kappa.0),
            ("cavity.g0", c.g0.0),
            ("cavity.gamma_atom", c.gamma_atom.0),
            ("cavity.probe_wavelength", c.probe_wavelength.0),
            ("cavity.trap_wavelength", c.trap_wavelength.0),
            ("trap.omega_z", self.trap.omega_z.0),
        ] {
            require(v > 0.0, key, "must be positive")?;
        }
        require(c.sigma_jitter.0 >= 0.0, "cavity.sigma_jitter", "must be non-negative")?;
        require(
            c.probe_wavelength.0 != c.trap_wavelength.0,
            "cavity.trap_wavelength",
            "must differ from the probe wavelength",
        )?;
        require(
            !(c.profile == ProfileChoice::Voigt && c.sigma_jitter.0 == 0.0),
            "cavity.profile",
            "a Voigt profile needs sigma_jitter > 0",
        )?;
        require(self.trap.num_sites >= 1, "trap.num_sites", "must be at least 1")?;
        let d = &self.drive;
        require(d.n_max >= 0.0, "drive.n_max", "must be non-negative")?;
        match (d.atom_number, d.collective_shift) {
            (Some(_), Some(_)) => {
                return Err(config_error(
                    "drive.atom_number",
                    "give either atom_number or collective_shift, not both",
                ))
            }
            (Some(n), None) => require(n >= 0.0, "drive.atom_number", "must be non-negative")?,
            (None, Some(s)) => require(
                s.0 == 0.0 || s.0.signum() == c.delta_ca.0.signum(),
                "drive.collective_shift",
                "must have the sign of cavity.delta_ca",
            )?,
            (None, None) => {}
        }
        require(
            d.atom_number.is_some() || DEFAULT_COLLECTIVE_SHIFT_HZ.signum() == c.delta_ca.0.signum(),
            "drive.collective_shift",
            "the default shift is red-detuned; set atom_number or collective_shift for delta_ca > 0",
        )?;
        let l = &self.lineshape;
        require(!l.n_max.is_empty(), "lineshape.n_max", "needs at least one value")?;
        require(l.n_max.iter().all(|n| *n >= 0.0), "lineshape.n_max", "values must be non-negative")?;
        require(l.points >= 2, "lineshape.points", "must be at least 2")?;
        require(
            l.delta_pc_start.0 != l.delta_pc_end.0,
            "lineshape.delta_pc_end",
            "grid is empty: start and end coincide",
        )?;
        let s = &self.sweep;
        require(s.chirp.0 > 0.0, "sweep.chirp", "must be positive (both directions are run)")?;
        require(s.points >= 2, "sweep.points", "must be at least 2")?;
        require(
            s.delta_pc_end.0 > s.delta_pc_start.0,
            "sweep.delta_pc_end",
            "must exceed sweep.delta_pc_start",
        )?;
        let lat = &self.lattice;
        require(lat.sub_ensembles >= 1, "lattice.sub_ensembles", "must be at least 1")?;
        require(lat.omega_z_spread.0 >= 0.0, "lattice.omega_z_spread", "must be non-negative")?;
        if let Some(rms) = lat.gaussian_rms_sites {
            require(rms > 0.0, "lattice.gaussian_rms_sites", "must be positive")?;
        }
        let r = &self.ringup;
        require(r.duration.0 > 0.0, "ringup.duration", "must be positive")?;
        require(r.ramp.0 >= 0.0, "ringup.ramp", "must be non-negative")?;
        require(r.switch_on_nbar >= 0.0, "ringup.switch_on_nbar", "must be non-negative")?;
        if let Some(n) = r.n_max {
            require(n >= 0.0, "ringup.n_max", "must be non-negative")?;
        }
        require(r.viscous_rate >= 0.0, "ringup.viscous_rate", "must be non-negative")?;
        require(r.record_every >= 1, "ringup.record_every", "must be at least 1")?;
        if let Some(dt) = r.dt {
            require(dt.0 > 0.0, "ringup.dt", "must be positive")?;
        }
        require(
            r.collective_shift.0.signum() == c.delta_ca.0.signum() && r.collective_shift.0 != 0.0,
            "ringup.collective_shift",
            "must be nonzero with the sign of cavity.delta_ca",
        )?;
        let k = &self.counts;
        require((0.0..=1.0).contains(&k.efficiency), "counts.efficiency", "must lie in [0, 1]")?;
        require(k.bin_width.0 > 0.0, "counts.bin_width", "must be positive")?;
        require(k.dark_rate >= 0.0, "counts.dark_rate", "must be non-negative")?;
        let a = &self.analysis;
        require(a.repetitions >= 1, "analysis.repetitions", "must be at least 1")?;
        require(a.window.0 > 0.0, "analysis.window", "must be positive")?;
        require(
            a.band_low.0 > 0.0 && a.band_high.0 > a.band_low.0,
            "analysis.band_high",
            "band must satisfy 0 < band_low < band_high",
        )?;
        let lowest = match a.frequency {
            Some(f) => {
                require(f.0 > 0.0, "analysis.frequency", "must be positive")?;
                f.0
            }
            None => a.band_low.0,
        };
        require(
            a.window.0 * lowest >= 5.0,
            "analysis.window",
            "must span at least five cycles of the analysis frequency (or of band_low)",
        )?;
        require(a.window.0 <= r.duration.0, "analysis.window", "must not exceed ringup.duration")?;
        let t = &self.trigger;
        require(
            t.initial_shift.0.signum() == c.delta_ca.0.signum() && t.initial_shift.0 != 0.0,
            "trigger.initial_shift",
            "must be nonzero with the sign of cavity.delta_ca",
        )?;
        require(t.loss_rate >= 0.0, "trigger.loss_rate", "must be non-negative")?;
        require(t.probe_level >= 0.0, "trigger.probe_level", "must be non-negative")?;
        require(t.threshold_rate >= 0.0, "trigger.threshold_rate", "must be non-negative")?;
        require(t.smoothing.0 >= k.bin_width.0, "trigger.smoothing", "must be at least one count bin")?;
        require(t.horizon.0 > t.smoothing.0, "trigger.horizon", "must exceed the smoothing time")?;
        require(t.delay.0 >= 0.0, "trigger.delay", "must be non-negative")?;
        Ok(())
    }

    pub fn cavity_params(&self) -> CavityParams {
        let c = &self.cavity;
        CavityParams {
            kappa: c.kappa.rad(),
            g0: c.g0.rad(),
            gamma_atom: c.gamma_atom.rad(),
            delta_ca: c.delta_ca.rad(),
            k_probe: std::f64::consts::TAU / c.probe_wavelength.0,
            k_trap: std::f64::consts::TAU / c.trap_wavelength.0,
            sigma_jitter: c.sigma_jitter.rad(),
            waist: c.waist.0,
            finesse: c.finesse,
        }
    }

    pub fn profile(&self) -> Result<ResponseProfile> {
        let cav = self.cavity_params();
        match self.cavity.profile {
            ProfileChoice::Auto => ResponseProfile::from_jitter(cav.kappa, cav.sigma_jitter),
            ProfileChoice::Lorentzian => ResponseProfile::lorentzian(cav.kappa),
            ProfileChoice::Voigt => ResponseProfile::voigt(cav.kappa, cav.sigma_jitter),
        }
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        let constants = PhysicalConstants::RB87;
        let cavity = self.cavity_params();
        let trap = TrapParams {
            omega_z: self.trap.omega_z.rad(),
            omega_radial: self.trap.omega_radial.rad(),
            trap_depth: constants.k_b * self.trap.trap_depth.0,
            temperature: self.trap.temperature.0,
            num_sites: self.trap.num_sites,
        };
        let averaging = match self.drive.averaging {
            AveragingChoice::SingleWell => CouplingAverage::SingleWell,
            AveragingChoice::MultiWell => CouplingAverage::MultiWell,
        };
        let atom_number = match (self.drive.atom_number, self.drive.collective_shift) {
            (Some(n), _) => n,
            (None, shift) => {
                let shift = shift.map_or(angular(DEFAULT_COLLECTIVE_SHIFT_HZ), Freq::rad);
                atoms_for_shift(shift, cavity.g0, cavity.delta_ca)
                    .map_err(|e| config_error("drive.collective_shift", e.to_string()))?
            }
        };
        let params = SystemParams {
            constants,
            cavity,
            trap,
            drive: DriveParams {
                n_max: self.drive.n_max,
                delta_pc: self.drive.delta_pc.rad(),
                atom_number,
            },
            averaging,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn phase_model(&self) -> PhaseModel {
        match self.lattice.phases {
            PhaseChoice::Walk => PhaseModel::Walk,
            PhaseChoice::Uniform => PhaseModel::UniformRandom,
            PhaseChoice::Fixed => PhaseModel::Fixed(self.lattice.fixed_phase),
        }
    }

    pub fn population_model(&self) -> PopulationModel {
        match self.lattice.gaussian_rms_sites {
            None => PopulationModel::Uniform,
            Some(rms_sites) => PopulationModel::Gaussian { rms_sites },
        }
    }

    pub fn spread_sampling(&self) -> SpreadSampling {
        match self.lattice.spread_sampling {
            SamplingChoice::Random => SpreadSampling::Random,
            SamplingChoice::Quantiles => SpreadSampling::Quantiles,
        }
    }

    pub fn field_model(&self) -> CavityFieldModel {
        match self.ringup.field {
            FieldChoice::Adiabatic => CavityFieldModel::Adiabatic,
            FieldChoice::FirstOrderFilter => CavityFieldModel::FirstOrderFilter,
        }
    }

    pub fn force_model(&self) -> ForceModel {
        if self.ringup.linearized_force {
            ForceModel::Linearized
        } else {
            ForceModel::Nonlinear
        }
    }

    pub fn switch_on(&self) -> SwitchOn {
        if self.ringup.ramp.0 > 0.0 {
            SwitchOn::Ramp(self.ringup.ramp.0)
        } else {
            SwitchOn::Instant
        }
    }

    pub fn averaging_order(&self) -> Averaging {
        match self.analysis.averaging {
            AveragingOrder::Traces => Averaging::Traces,
            AveragingOrder::Spectra => Averaging::Spectra,
        }
    }

    pub fn envelope(&self) -> EnvelopeModel {
        match self.analysis.envelope {
            EnvelopeChoice::Gaussian => EnvelopeModel::Gaussian,
            EnvelopeChoice::Exponential => EnvelopeModel::Exponential,
        }
    }
}
