//! Executes a parsed configuration into in-memory artifacts. Nothing touches
//! the filesystem here except reading a plot's input CSV; writing is left to
//! [`write_artifacts`] so output order never depends on worker scheduling.

use std::path::{Path, PathBuf};

use atomlink::exec::{self, Execution};
use atomlink::scatter::{spectrum_sweep, SweepSample};
use atomlink::storage::{feasibility_report, FeasibilityReport, GroupVelocityLaw, StorageMode, StorageParams};
use atomlink::transfer::{diagnose, optimize, OptimizationResult, SweepBounds};
use atomlink::units::rad_per_s_to_hz;
use serde::Serialize;

use crate::config::{Job, OptimizeJob, RunConfig, SpectrumJob, TransferJob};
use crate::error::CliError;
use crate::plot;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: Vec<u8>,
}

/// Shortest decimal that round-trips to the same double; `inf`, `-inf`, `nan`
/// for non-finite values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_owned()
    } else {
        x.to_string()
    }
}

fn default_output(job: &Job) -> PathBuf {
    match job {
        Job::Spectrum(_) => "spectrum.csv".into(),
        Job::Storage(_) => "storage.json".into(),
        Job::Transfer(_) => "transfer.csv".into(),
        Job::Optimize(_) => "surface.csv".into(),
        Job::Plot(p) => p.input.with_extension("svg"),
    }
}

/// `out.csv` → `out.best.json`
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn execution() -> Execution {
    if exec::parallel_available() {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

/// Runs `config`, with `threads` overriding the configured worker count when
/// given, and `out` overriding the configured output path.
pub fn execute(config: &RunConfig, out: Option<&Path>, threads: Option<usize>) -> Result<Vec<Artifact>, CliError> {
    let path = out
        .map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| default_output(&config.job));
    let threads = threads.unwrap_or(config.threads);
    exec::with_threads(threads, || match &config.job {
        Job::Spectrum(job) => run_spectrum(job, &path),
        Job::Storage(params) => run_storage(params, &path),
        Job::Transfer(job) => run_transfer(job, &path),
        Job::Optimize(job) => run_optimize(job, &path),
        Job::Plot(job) => Ok(vec![Artifact {
            contents: plot::render(job)?.into_bytes(),
            path,
        }]),
    })
}

pub fn write_artifacts(artifacts: &[Artifact]) -> Result<(), CliError> {
    for a in artifacts {
        if let Some(dir) = a.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(&a.path, &a.contents).map_err(|e| CliError::io(&a.path, e))?;
    }
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Numerical(format!("csv encoding: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Numerical(format!("csv encoding: {e}")))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Numerical(format!("json encoding: {e}")))?;
    v.push(b'\n');
    Ok(v)
}

pub const SPECTRUM_HEADER: [&str; 8] = ["delta", "T", "R", "re_t", "im_t", "re_r", "im_r", "status"];

fn spectrum_row(s: &SweepSample) -> Vec<String> {
    match &s.outcome {
        Ok(p) => vec![
            num(s.delta),
            num(p.transmittance),
            num(p.reflectance),
            num(p.t.re),
            num(p.t.im),
            num(p.r.re),
            num(p.r.im),
            "ok".to_owned(),
        ],
        Err(e) => {
            let mut row = vec![num(s.delta)];
            row.extend(std::iter::repeat_n("nan".to_owned(), 6));
            row.push(e.tag().to_owned());
            row
        }
    }
}

pub fn run_spectrum(job: &SpectrumJob, path: &Path) -> Result<Vec<Artifact>, CliError> {
    let samples = spectrum_sweep(job.delta_min, job.delta_max, job.n_points, &job.params, execution())?;
    Ok(vec![Artifact {
        path: path.to_path_buf(),
        contents: csv_bytes(&SPECTRUM_HEADER, samples.iter().map(spectrum_row))?,
    }])
}

/// Flat storage report with unit-suffixed keys.
#[derive(Debug, Serialize)]
pub struct StorageReport {
    pub version: &'static str,
    pub input_mode: &'static str,
    pub input_g_rad_per_s: f64,
    pub input_atom_number: u64,
    pub input_gamma_per_s: f64,
    pub input_kappa_per_s: f64,
    pub input_kappa_in_per_s: f64,
    pub input_omega_rad_per_s: f64,
    pub input_pulse_duration_s: f64,
    pub input_branching: f64,
    pub input_guide_velocity_m_per_s: f64,
    pub input_length_m: f64,
    pub input_cooperativity_min: f64,
    pub input_window_factor: f64,
    pub input_group_velocity_law: &'static str,
    pub decay_rate_per_s: f64,
    pub collective_coupling_rad_per_s: f64,
    pub collective_coupling_over_2pi_hz: f64,
    pub cooperativity: f64,
    pub optical_depth: f64,
    pub eta: f64,
    pub group_velocity_m_per_s: f64,
    pub eit_width_rad_per_s: Option<f64>,
    pub eit_width_unbounded: bool,
    pub max_bandwidth_per_s: f64,
    pub pulse_bandwidth_per_s: f64,
    pub retrieval_efficiency: f64,
    pub efficiency_clamped: bool,
    pub recommended_omega_rad_per_s: f64,
    pub recommended_omega_over_2pi_hz: f64,
    pub high_cooperativity_pass: bool,
    pub high_cooperativity_margin: f64,
    pub bandwidth_pass: bool,
    pub bandwidth_margin: f64,
    pub eit_window_pass: bool,
    pub eit_window_margin: f64,
    pub pulse_fits_pass: Option<bool>,
    pub pulse_fits_margin: Option<f64>,
    pub warnings: Vec<String>,
}

impl StorageReport {
    pub fn new(p: &StorageParams, r: &FeasibilityReport) -> Self {
        let finite = |x: f64| if x.is_finite() { Some(x) } else { None };
        Self {
            version: atomlink::VERSION,
            input_mode: match p.mode {
                StorageMode::FreeSpace => "free_space",
                StorageMode::Resonator => "resonator",
            },
            input_g_rad_per_s: p.rates.g,
            input_atom_number: p.rates.atom_number,
            input_gamma_per_s: p.rates.gamma,
            input_kappa_per_s: p.rates.kappa,
            input_kappa_in_per_s: p.rates.kappa_in,
            input_omega_rad_per_s: p.omega,
            input_pulse_duration_s: p.pulse_duration,
            input_branching: p.branching,
            input_guide_velocity_m_per_s: p.rates.guide_velocity,
            input_length_m: p.rates.length,
            input_cooperativity_min: p.cooperativity_min,
            input_window_factor: p.window_factor,
            input_group_velocity_law: match p.group_velocity_law {
                GroupVelocityLaw::Linear => "linear",
                GroupVelocityLaw::SquareRoot => "square_root",
            },
            decay_rate_per_s: r.decay_rate,
            collective_coupling_rad_per_s: r.collective_coupling,
            collective_coupling_over_2pi_hz: rad_per_s_to_hz(r.collective_coupling),
            cooperativity: r.cooperativity,
            optical_depth: r.optical_depth,
            eta: r.eta,
            group_velocity_m_per_s: r.group_velocity,
            eit_width_rad_per_s: r.eit_width.and_then(finite),
            eit_width_unbounded: r.eit_width_unbounded,
            max_bandwidth_per_s: r.max_bandwidth,
            pulse_bandwidth_per_s: r.pulse_bandwidth,
            retrieval_efficiency: r.retrieval_efficiency,
            efficiency_clamped: r.efficiency_clamped,
            recommended_omega_rad_per_s: r.recommended_omega,
            recommended_omega_over_2pi_hz: rad_per_s_to_hz(r.recommended_omega),
            high_cooperativity_pass: r.high_cooperativity.pass,
            high_cooperativity_margin: r.high_cooperativity.margin,
            bandwidth_pass: r.bandwidth.pass,
            bandwidth_margin: r.bandwidth.margin,
            eit_window_pass: r.eit_window.pass,
            eit_window_margin: r.eit_window.margin,
            pulse_fits_pass: r.pulse_fits.map(|c| c.pass),
            pulse_fits_margin: r.pulse_fits.map(|c| c.margin),
            warnings: r.warnings.clone(),
        }
    }
}

pub fn run_storage(params: &StorageParams, path: &Path) -> Result<Vec<Artifact>, CliError> {
    let report = feasibility_report(params)?;
    Ok(vec![Artifact {
        path: path.to_path_buf(),
        contents: json_bytes(&StorageReport::new(params, &report))?,
    }])
}

pub const TRANSFER_HEADER: [&str; 14] = [
    "eta1",
    "e1",
    "e2",
    "e3",
    "e4",
    "e5",
    "e6",
    "pop_E1",
    "pop_E2",
    "pop_S1",
    "pop_S2",
    "pop_P1",
    "pop_P2",
    "eps1_pointwise",
];

#[derive(Debug, Serialize)]
struct TransferSummary {
    version: &'static str,
    kappa: f64,
    kappa_in: f64,
    gamma: f64,
    delta2: f64,
    eta_c: f64,
    eta1_min: f64,
    eta1_max: f64,
    n_steps: usize,
    eps1: f64,
    eps1_eta1: f64,
    eps2: f64,
    product: f64,
    start_purity_s2: f64,
    end_purity_s1: f64,
    dark_index_start: usize,
    dark_index_end: usize,
    warnings: Vec<String>,
}

pub fn run_transfer(job: &TransferJob, path: &Path) -> Result<Vec<Artifact>, CliError> {
    let d = diagnose(&job.schedule, &job.system)?;
    let rows = d.steps.iter().map(|s| {
        let mut row = vec![num(s.eta1)];
        row.extend(s.energies.iter().map(|&e| num(e)));
        row.extend(
            [s.pop_e[0], s.pop_e[1], s.pop_s[0], s.pop_s[1], s.pop_p[0], s.pop_p[1], s.eps1_pointwise]
                .iter()
                .map(|&x| num(x)),
        );
        row
    });
    let csv = csv_bytes(&TRANSFER_HEADER, rows)?;
    let etas = job.schedule.etas();
    let sys = &job.system;
    let summary = TransferSummary {
        version: atomlink::VERSION,
        kappa: sys.kappa,
        kappa_in: sys.kappa_in,
        gamma: sys.gamma,
        delta2: sys.delta2,
        eta_c: sys.eta_c,
        eta1_min: etas[0],
        eta1_max: etas[etas.len() - 1],
        n_steps: etas.len(),
        eps1: d.eps1.value,
        eps1_eta1: d.eps1.eta1,
        eps2: d.eps2,
        product: d.product,
        start_purity_s2: d.endpoint_purity.0,
        end_purity_s1: d.endpoint_purity.1,
        dark_index_start: d.steps[0].dark_index,
        dark_index_end: d.steps[d.steps.len() - 1].dark_index,
        warnings: d.warnings.clone(),
    };
    Ok(vec![
        Artifact {
            path: path.to_path_buf(),
            contents: csv,
        },
        Artifact {
            path: sidecar(path, "summary.json"),
            contents: json_bytes(&summary)?,
        },
    ])
}

pub const SURFACE_HEADER: [&str; 6] = ["eta_c", "delta2", "eps1", "eps2", "product", "status"];

#[derive(Debug, Serialize)]
struct BestPoint {
    version: &'static str,
    kappa: f64,
    kappa_in: f64,
    gamma: f64,
    sweep_bounds: String,
    n_steps: usize,
    grid_points: usize,
    failed_points: usize,
    found: bool,
    eta_c: Option<f64>,
    delta2: Option<f64>,
    eps1: Option<f64>,
    eps2: Option<f64>,
    product: Option<f64>,
}

pub fn run_optimize(job: &OptimizeJob, path: &Path) -> Result<Vec<Artifact>, CliError> {
    let result = optimize(&job.template, &job.grid, &job.schedule, execution())?;
    optimize_artifacts(job, &result, path)
}

pub fn optimize_artifacts(job: &OptimizeJob, result: &OptimizationResult, path: &Path) -> Result<Vec<Artifact>, CliError> {
    let rows = result.surface.iter().map(|p| {
        vec![
            num(p.eta_c),
            num(p.delta2),
            num(p.eps1),
            num(p.eps2),
            num(p.product),
            p.failure.as_ref().map_or("ok", |e| e.tag()).to_owned(),
        ]
    });
    let best = result.best_point();
    let summary = BestPoint {
        version: atomlink::VERSION,
        kappa: job.template.kappa,
        kappa_in: job.template.kappa_in,
        gamma: job.template.gamma,
        sweep_bounds: match job.schedule.bounds {
            SweepBounds::Span(s) => format!("span {}", num(s)),
            SweepBounds::Purity(p) => format!("purity {}", num(p)),
        },
        n_steps: job.schedule.n_steps,
        grid_points: result.surface.len(),
        failed_points: result.surface.iter().filter(|p| p.failure.is_some()).count(),
        found: best.is_some(),
        eta_c: best.map(|b| b.eta_c),
        delta2: best.map(|b| b.delta2),
        eps1: best.map(|b| b.eps1),
        eps2: best.map(|b| b.eps2),
        product: best.map(|b| b.product),
    };
    Ok(vec![
        Artifact {
            path: path.to_path_buf(),
            contents: csv_bytes(&SURFACE_HEADER, rows)?,
        },
        Artifact {
            path: sidecar(path, "best.json"),
            contents: json_bytes(&summary)?,
        },
    ])
}
