//! JSON run configurations.
//!
//! A config names a command, an optional output path and thread count, and a
//! `parameters` object whose keys mirror the library types. Unknown keys are
//! rejected. Frequencies may be given either as `<name>_rad_per_s` or as
//! `<name>_over_2pi_hz`, never both.

use std::path::{Path, PathBuf};

use atomlink::scatter::ScatterParams;
use atomlink::storage::{GroupVelocityLaw, StorageMode, StorageParams};
use atomlink::transfer::{
    Axis, AxisScale, LossTemplate, OptimizationGrid, ScheduleSpec, SweepBounds, SweepSchedule, TwoCellSystem,
};
use atomlink::units::{self, RateSet};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Storage,
    Transfer,
    Optimize,
    Plot,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Storage => "storage",
            Command::Transfer => "transfer",
            Command::Optimize => "optimize",
            Command::Plot => "plot",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Command,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    threads: usize,
    parameters: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub output: Option<PathBuf>,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    pub job: Job,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    Spectrum(SpectrumJob),
    Storage(StorageParams),
    Transfer(TransferJob),
    Optimize(OptimizeJob),
    Plot(PlotJob),
}

impl Job {
    pub fn command(&self) -> Command {
        match self {
            Job::Spectrum(_) => Command::Spectrum,
            Job::Storage(_) => Command::Storage,
            Job::Transfer(_) => Command::Transfer,
            Job::Optimize(_) => Command::Optimize,
            Job::Plot(_) => Command::Plot,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumJob {
    pub params: ScatterParams,
    pub delta_min: f64,
    pub delta_max: f64,
    pub n_points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferJob {
    pub system: TwoCellSystem,
    pub schedule: SweepSchedule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeJob {
    pub template: LossTemplate,
    pub grid: OptimizationGrid,
    pub schedule: ScheduleSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Line,
    Contour,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotJob {
    pub input: PathBuf,
    pub kind: PlotKind,
    /// Horizontal-axis column; defaults to the first column.
    #[serde(default)]
    pub x: Option<String>,
    /// Line plots: columns to draw; defaults to every other numeric column.
    /// Contour plots: the vertical-axis column.
    #[serde(default)]
    pub y: Vec<String>,
    /// Contour plots: the filled quantity; defaults to the last numeric column.
    #[serde(default)]
    pub z: Option<String>,
    #[serde(default)]
    pub log_x: bool,
    #[serde(default)]
    pub log_y: bool,
    #[serde(default)]
    pub log_z: bool,
    #[serde(default)]
    pub title: Option<String>,
}

impl PlotJob {
    pub fn new(input: PathBuf, kind: PlotKind) -> Self {
        Self {
            input,
            kind,
            x: None,
            y: Vec::new(),
            z: None,
            log_x: false,
            log_y: false,
            log_z: false,
            title: None,
        }
    }
}

pub fn parse_file(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
    let params = raw.parameters;
    let job = match raw.command {
        Command::Spectrum => Job::Spectrum(from_value::<SpectrumInput>(params)?.build()?),
        Command::Storage => Job::Storage(from_value::<StorageInput>(params)?.build()?),
        Command::Transfer => Job::Transfer(from_value::<TransferInput>(params)?.build()?),
        Command::Optimize => Job::Optimize(from_value::<OptimizeInput>(params)?.build()?),
        Command::Plot => Job::Plot(from_value::<PlotJob>(params)?),
    };
    Ok(RunConfig {
        output: raw.output,
        threads: raw.threads,
        job,
    })
}

fn from_value<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::config(format!("parameters: {e}")))
}

/// Resolves a `<name>_rad_per_s` / `<name>_over_2pi_hz` pair.
fn frequency(name: &str, rad: Option<f64>, hz: Option<f64>) -> Result<Option<f64>, CliError> {
    match (rad, hz) {
        (Some(_), Some(_)) => Err(CliError::config(format!(
            "{name}_rad_per_s and {name}_over_2pi_hz are mutually exclusive"
        ))),
        (Some(w), None) => Ok(Some(w)),
        (None, Some(f)) => Ok(Some(units::hz_to_rad_per_s(f))),
        (None, None) => Ok(None),
    }
}

fn required(name: &str, v: Option<f64>) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::config(format!("missing {name}_rad_per_s or {name}_over_2pi_hz")))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumInput {
    gamma_1d: f64,
    #[serde(default)]
    gamma_out: Option<f64>,
    omega: f64,
    #[serde(default)]
    control_detuning: f64,
    #[serde(default = "default_spacing")]
    spacing_m: f64,
    c_over_a: f64,
    #[serde(default = "one")]
    bragg_ratio: f64,
    n_sites: u64,
    #[serde(default = "one_u32")]
    atoms_per_site: u32,
    delta_min: f64,
    delta_max: f64,
    n_points: usize,
}

fn default_spacing() -> f64 {
    500e-9
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

impl SpectrumInput {
    fn build(self) -> Result<SpectrumJob, CliError> {
        let params = ScatterParams {
            gamma_1d: self.gamma_1d,
            gamma_out: self.gamma_out.unwrap_or(1.0 - self.gamma_1d),
            omega: self.omega,
            control_detuning: self.control_detuning,
            spacing_m: self.spacing_m,
            c_over_a: self.c_over_a,
            bragg_ratio: self.bragg_ratio,
            n_sites: self.n_sites,
            atoms_per_site: self.atoms_per_site,
        };
        params.validate()?;
        atomlink::scatter::sweep_grid(self.delta_min, self.delta_max, self.n_points)?;
        Ok(SpectrumJob {
            params,
            delta_min: self.delta_min,
            delta_max: self.delta_max,
            n_points: self.n_points,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModeInput {
    FreeSpace,
    Resonator,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LawInput {
    Linear,
    SquareRoot,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StorageInput {
    g_rad_per_s: Option<f64>,
    g_over_2pi_hz: Option<f64>,
    atom_number: u64,
    gamma_per_s: f64,
    kappa_per_s: Option<f64>,
    /// With `resonator_frequency_*`, sets `κ = ω/Q`.
    quality_factor: Option<f64>,
    resonator_frequency_rad_per_s: Option<f64>,
    resonator_frequency_over_2pi_hz: Option<f64>,
    #[serde(default)]
    kappa_in_per_s: f64,
    omega_rad_per_s: Option<f64>,
    omega_over_2pi_hz: Option<f64>,
    mode: ModeInput,
    /// Defaults to `1/κ` in resonator mode.
    pulse_duration_s: Option<f64>,
    branching: f64,
    guide_velocity_m_per_s: f64,
    length_m: f64,
    #[serde(default = "ten")]
    cooperativity_min: f64,
    #[serde(default = "ten")]
    window_factor: f64,
    #[serde(default)]
    group_velocity_law: Option<LawInput>,
}

fn ten() -> f64 {
    10.0
}

impl StorageInput {
    fn build(self) -> Result<StorageParams, CliError> {
        let g = required("g", frequency("g", self.g_rad_per_s, self.g_over_2pi_hz)?)?;
        let omega = required("omega", frequency("omega", self.omega_rad_per_s, self.omega_over_2pi_hz)?)?;
        let resonator = frequency(
            "resonator_frequency",
            self.resonator_frequency_rad_per_s,
            self.resonator_frequency_over_2pi_hz,
        )?;
        let kappa = match (self.kappa_per_s, self.quality_factor, resonator) {
            (Some(k), None, None) => k,
            (None, Some(q), Some(w)) => {
                if !(q > 0.0 && w > 0.0) {
                    return Err(CliError::config("quality_factor and resonator frequency must be positive"));
                }
                units::kappa_from_q(w, q)
            }
            (None, None, None) => 0.0,
            _ => {
                return Err(CliError::config(
                    "give either kappa_per_s or quality_factor with a resonator frequency",
                ))
            }
        };
        let mode = match self.mode {
            ModeInput::FreeSpace => StorageMode::FreeSpace,
            ModeInput::Resonator => StorageMode::Resonator,
        };
        let pulse_duration = match (self.pulse_duration_s, mode) {
            (Some(t), _) => t,
            (None, StorageMode::Resonator) if kappa > 0.0 => 1.0 / kappa,
            (None, _) => return Err(CliError::config("missing pulse_duration_s")),
        };
        let params = StorageParams {
            rates: RateSet {
                g,
                atom_number: self.atom_number,
                gamma: self.gamma_per_s,
                kappa,
                kappa_in: self.kappa_in_per_s,
                guide_velocity: self.guide_velocity_m_per_s,
                length: self.length_m,
            },
            mode,
            omega,
            pulse_duration,
            branching: self.branching,
            cooperativity_min: self.cooperativity_min,
            window_factor: self.window_factor,
            group_velocity_law: match self.group_velocity_law {
                None | Some(LawInput::Linear) => GroupVelocityLaw::Linear,
                Some(LawInput::SquareRoot) => GroupVelocityLaw::SquareRoot,
            },
        };
        params.validate()?;
        Ok(params)
    }
}

/// Loss and coupling rates, either in units of `g√N` or in laboratory units
/// together with `g√N` itself.
#[derive(Debug)]
struct RatesInput {
    kappa: Option<f64>,
    kappa_in: Option<f64>,
    gamma: Option<f64>,
    kappa_per_s: Option<f64>,
    kappa_in_per_s: Option<f64>,
    gamma_per_s: Option<f64>,
    collective_coupling_rad_per_s: Option<f64>,
    collective_coupling_over_2pi_hz: Option<f64>,
}

macro_rules! rates_of {
    ($input:expr) => {
        RatesInput {
            kappa: $input.kappa,
            kappa_in: $input.kappa_in,
            gamma: $input.gamma,
            kappa_per_s: $input.kappa_per_s,
            kappa_in_per_s: $input.kappa_in_per_s,
            gamma_per_s: $input.gamma_per_s,
            collective_coupling_rad_per_s: $input.collective_coupling_rad_per_s,
            collective_coupling_over_2pi_hz: $input.collective_coupling_over_2pi_hz,
        }
    };
}

impl RatesInput {
    fn build(&self) -> Result<LossTemplate, CliError> {
        let unit = frequency(
            "collective_coupling",
            self.collective_coupling_rad_per_s,
            self.collective_coupling_over_2pi_hz,
        )?;
        let pick = |name: &str, plain: Option<f64>, lab: Option<f64>| -> Result<f64, CliError> {
            match (plain, lab, unit) {
                (Some(v), None, _) => Ok(v),
                (None, Some(v), Some(u)) if u > 0.0 => Ok(v / u),
                (None, Some(_), _) => Err(CliError::config(format!(
                    "{name}_per_s needs a positive collective_coupling_rad_per_s or collective_coupling_over_2pi_hz"
                ))),
                (Some(_), Some(_), _) => Err(CliError::config(format!(
                    "{name} and {name}_per_s are mutually exclusive"
                ))),
                (None, None, _) => Err(CliError::config(format!("missing {name}"))),
            }
        };
        Ok(LossTemplate {
            kappa: pick("kappa", self.kappa, self.kappa_per_s)?,
            kappa_in: pick("kappa_in", self.kappa_in, self.kappa_in_per_s)?,
            gamma: pick("gamma", self.gamma, self.gamma_per_s)?,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleInput {
    #[serde(default)]
    span: Option<f64>,
    #[serde(default)]
    purity: Option<f64>,
    #[serde(default)]
    eta_min: Option<f64>,
    #[serde(default)]
    eta_max: Option<f64>,
    #[serde(default = "default_steps")]
    n_steps: usize,
}

fn default_steps() -> usize {
    SweepSchedule::DEFAULT_STEPS
}

impl Default for ScheduleInput {
    fn default() -> Self {
        Self {
            span: None,
            purity: None,
            eta_min: None,
            eta_max: None,
            n_steps: default_steps(),
        }
    }
}

impl ScheduleInput {
    fn spec(&self) -> Result<ScheduleSpec, CliError> {
        let bounds = match (self.span, self.purity) {
            (Some(_), Some(_)) => return Err(CliError::config("schedule: span and purity are mutually exclusive")),
            (Some(s), None) => SweepBounds::Span(s),
            (None, Some(p)) => SweepBounds::Purity(p),
            (None, None) => SweepBounds::Span(SweepSchedule::DEFAULT_SPAN),
        };
        if self.eta_min.is_some() || self.eta_max.is_some() {
            return Err(CliError::config("schedule: eta_min/eta_max are only valid for a single transfer run"));
        }
        Ok(ScheduleSpec {
            bounds,
            n_steps: self.n_steps,
        })
    }

    fn resolve(&self, sys: &TwoCellSystem) -> Result<SweepSchedule, CliError> {
        match (self.eta_min, self.eta_max) {
            (Some(lo), Some(hi)) => {
                if self.span.is_some() || self.purity.is_some() {
                    return Err(CliError::config("schedule: explicit bounds exclude span and purity"));
                }
                Ok(SweepSchedule::log_spaced(lo, hi, self.n_steps)?)
            }
            (None, None) => Ok(self.spec()?.resolve(sys)?),
            _ => Err(CliError::config("schedule: eta_min and eta_max go together")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransferInput {
    kappa: Option<f64>,
    kappa_in: Option<f64>,
    gamma: Option<f64>,
    kappa_per_s: Option<f64>,
    kappa_in_per_s: Option<f64>,
    gamma_per_s: Option<f64>,
    collective_coupling_rad_per_s: Option<f64>,
    collective_coupling_over_2pi_hz: Option<f64>,
    delta2: f64,
    eta_c: f64,
    #[serde(default)]
    schedule: ScheduleInput,
}

impl TransferInput {
    fn build(self) -> Result<TransferJob, CliError> {
        let system = rates_of!(self).build()?.with(self.eta_c, self.delta2);
        system.validate()?;
        let schedule = self.schedule.resolve(&system)?;
        Ok(TransferJob { system, schedule })
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ScaleInput {
    Linear,
    Log,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisInput {
    min: f64,
    max: f64,
    n: usize,
    #[serde(default)]
    scale: Option<ScaleInput>,
}

impl AxisInput {
    fn build(&self, default: AxisScale) -> Result<Axis, CliError> {
        let axis = Axis {
            min: self.min,
            max: self.max,
            n: self.n,
            scale: match self.scale {
                None => default,
                Some(ScaleInput::Linear) => AxisScale::Linear,
                Some(ScaleInput::Log) => AxisScale::Log,
            },
        };
        axis.values()?;
        Ok(axis)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizeInput {
    kappa: Option<f64>,
    kappa_in: Option<f64>,
    gamma: Option<f64>,
    kappa_per_s: Option<f64>,
    kappa_in_per_s: Option<f64>,
    gamma_per_s: Option<f64>,
    collective_coupling_rad_per_s: Option<f64>,
    collective_coupling_over_2pi_hz: Option<f64>,
    eta_c: AxisInput,
    delta2: AxisInput,
    #[serde(default)]
    schedule: ScheduleInput,
}

impl OptimizeInput {
    fn build(self) -> Result<OptimizeJob, CliError> {
        let template = rates_of!(self).build()?;
        let grid = OptimizationGrid {
            eta_c: self.eta_c.build(AxisScale::Log)?,
            delta2: self.delta2.build(AxisScale::Linear)?,
        };
        template.with(grid.eta_c.min, grid.delta2.min).validate()?;
        Ok(OptimizeJob {
            template,
            grid,
            schedule: self.schedule.spec()?,
        })
    }
}
