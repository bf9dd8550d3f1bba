//! Light scattering from a periodic one-dimensional lattice of driven
//! three-level atoms coupled to a waveguide.
//!
//! All rates and detunings are in units of the total spontaneous emission
//! rate `Γ_tot = Γ_1D + Γ_out`.
//!
//! A lattice cell is an atom followed by free propagation over one spacing.
//! Its transfer matrix maps `(forward, backward)` field amplitudes on the left
//! of the atom to those one spacing further right:
//!
//! ```text
//! M_cell = diag(e^{ik_p a}, e^{-ik_p a}) · [[1+iζ, iζ], [-iζ, 1-iζ]]
//! ```
//!
//! For the full stack `M`, the transmission is `t = 1/M₂₂` and the reflection
//! is `r = M₁₂/M₂₂` (light incident from the right-hand end).

use std::f64::consts::TAU;

use thiserror::Error;

use crate::exec::{self, Execution};
use crate::linalg::{Complex2x2, ScaledMatrix, C64};

/// Magnitude below which a denominator counts as singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-30;
const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatterError {
    #[error("{name} must be {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("single-site scattering amplitude is singular at delta = {delta}")]
    SingularZeta { delta: f64 },
    #[error("stack transfer matrix has |M22| below {SINGULAR_TOLERANCE:e} at delta = {delta}")]
    SingularStack { delta: f64 },
    #[error("sweep needs at least two points (got {0})")]
    TooFewPoints(usize),
    #[error("sweep range is empty: delta_min = {min} is not below delta_max = {max}")]
    EmptyRange { min: f64, max: f64 },
}

impl ScatterError {
    /// Short machine-readable tag used in tabular output.
    pub fn tag(&self) -> &'static str {
        match self {
            ScatterError::InvalidParameter { .. } => "invalid_parameter",
            ScatterError::SingularZeta { .. } => "singular_zeta",
            ScatterError::SingularStack { .. } => "singular_stack",
            ScatterError::TooFewPoints(_) => "too_few_points",
            ScatterError::EmptyRange { .. } => "empty_range",
        }
    }
}

/// Per-site scattering configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatterParams {
    /// Emission rate into the waveguide, `Γ_1D`.
    pub gamma_1d: f64,
    /// Emission rate into all other modes, `Γ_out`.
    pub gamma_out: f64,
    /// Control Rabi frequency `Ω`.
    pub omega: f64,
    /// One-photon detuning of the control field, `Δ`.
    pub control_detuning: f64,
    /// Lattice spacing in metres. Informational: the propagation phase only
    /// needs `c/a`.
    pub spacing_m: f64,
    /// `c/a` in units of `Γ_tot`.
    pub c_over_a: f64,
    /// `ω_a / ω_lattice`; 1 is the commensurate (Bragg) lattice.
    pub bragg_ratio: f64,
    pub n_sites: u64,
    pub atoms_per_site: u32,
}

impl Default for ScatterParams {
    fn default() -> Self {
        Self::eit_lattice()
    }
}

impl ScatterParams {
    /// The 8000-site lattice with `(Γ_1D, Ω, c/a) = (0.05, 10, 10⁷)` and
    /// 500 nm spacing.
    pub fn eit_lattice() -> Self {
        Self {
            gamma_1d: 0.05,
            gamma_out: 0.95,
            omega: 10.0,
            control_detuning: 0.0,
            spacing_m: 500e-9,
            c_over_a: 1e7,
            bragg_ratio: 1.0,
            n_sites: 8000,
            atoms_per_site: 1,
        }
    }

    /// The 50,000-site band-gap lattice with `(Δ, Γ_1D, c/a, Ω) = (0, 0.1, 10⁶, 10)`.
    pub fn band_gap_lattice() -> Self {
        Self {
            gamma_1d: 0.1,
            gamma_out: 0.9,
            omega: 10.0,
            control_detuning: 0.0,
            spacing_m: 500e-9,
            c_over_a: 1e6,
            bragg_ratio: 1.0,
            n_sites: 50_000,
            atoms_per_site: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ScatterError> {
        let check = |name, ok: bool, requirement, value| {
            if ok {
                Ok(())
            } else {
                Err(ScatterError::InvalidParameter {
                    name,
                    requirement,
                    value,
                })
            }
        };
        let finite_nonneg = |x: f64| x >= 0.0 && x.is_finite();
        check("gamma_1d", finite_nonneg(self.gamma_1d), "non-negative", self.gamma_1d)?;
        check("gamma_out", finite_nonneg(self.gamma_out), "non-negative", self.gamma_out)?;
        let total = self.gamma_1d + self.gamma_out;
        check(
            "gamma_1d + gamma_out",
            (total - 1.0).abs() <= NORMALIZATION_TOLERANCE,
            "1 (rates are in units of the total emission rate)",
            total,
        )?;
        check("omega", finite_nonneg(self.omega), "non-negative", self.omega)?;
        check(
            "control_detuning",
            self.control_detuning.is_finite(),
            "finite",
            self.control_detuning,
        )?;
        check(
            "spacing_m",
            self.spacing_m > 0.0 && self.spacing_m.is_finite(),
            "positive",
            self.spacing_m,
        )?;
        check(
            "c_over_a",
            self.c_over_a > 0.0 && self.c_over_a.is_finite(),
            "positive",
            self.c_over_a,
        )?;
        check("bragg_ratio", self.bragg_ratio.is_finite(), "finite", self.bragg_ratio)?;
        check("n_sites", self.n_sites >= 1, "at least 1", self.n_sites as f64)?;
        check(
            "atoms_per_site",
            self.atoms_per_site >= 1,
            "at least 1",
            f64::from(self.atoms_per_site),
        )?;
        Ok(())
    }
}

/// One point of a transmission/reflection spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumPoint {
    /// Two-photon probe detuning `δ`.
    pub delta: f64,
    pub transmittance: f64,
    pub reflectance: f64,
    pub t: C64,
    pub r: C64,
    /// `ln T`, finite even where `T` underflows.
    pub ln_transmittance: f64,
}

/// Complex single-site scattering strength `ζ(δ)` of one atom.
///
/// When `Ω = 0` the common factor `δ` is cancelled analytically, which also
/// covers the `0/0` point at `δ = 0`.
pub fn zeta(delta: f64, p: &ScatterParams) -> Result<C64, ScatterError> {
    let detuning = 2.0 * (delta + p.control_detuning);
    if p.omega == 0.0 {
        let denom = C64::new(detuning, p.gamma_out);
        if denom.norm() <= SINGULAR_TOLERANCE {
            return Err(ScatterError::SingularZeta { delta });
        }
        return Ok(-p.gamma_1d / denom);
    }
    let denom = C64::new(detuning, p.gamma_out) * delta - 2.0 * p.omega * p.omega;
    if denom.norm() <= SINGULAR_TOLERANCE {
        return Err(ScatterError::SingularZeta { delta });
    }
    Ok(-p.gamma_1d * delta / denom)
}

/// Closed-form single-atom reflection amplitude. Finite wherever
/// `Γ_1D + Γ_out > 0`, including the points where `ζ` diverges.
pub fn reflection_closed_form(delta: f64, p: &ScatterParams) -> C64 {
    let total = p.gamma_1d + p.gamma_out;
    let detuning = 2.0 * (delta + p.control_detuning);
    if p.omega == 0.0 {
        return -p.gamma_1d / C64::new(total, -detuning);
    }
    let denom = C64::new(total, -detuning) * delta + C64::new(0.0, 2.0 * p.omega * p.omega);
    -p.gamma_1d * delta / denom
}

/// Single-atom reflection and transmission amplitudes `(r_a, t_a)`.
pub fn single_atom_rt(delta: f64, p: &ScatterParams) -> Result<(C64, C64), ScatterError> {
    match zeta(delta, p) {
        Ok(z) => {
            let iz = C64::i() * z;
            let t = 1.0 / (1.0 - iz);
            Ok((iz * t, t))
        }
        Err(ScatterError::SingularZeta { .. }) => {
            let r = reflection_closed_form(delta, p);
            Ok((r, 1.0 + r))
        }
        Err(e) => Err(e),
    }
}

/// Propagation phase `k_p a = (δ + Δ)/(c/a) + 2π ω_a/ω_lattice`, unreduced.
pub fn bragg_phase(delta: f64, p: &ScatterParams) -> f64 {
    (delta + p.control_detuning) / p.c_over_a + TAU * p.bragg_ratio
}

/// `k_p a` reduced into `[0, 2π)`. The commensurate part is reduced before
/// the small detuning part is added, so the latter keeps full precision.
fn reduced_bragg_phase(delta: f64, p: &ScatterParams) -> f64 {
    let frac = p.bragg_ratio - p.bragg_ratio.floor();
    (TAU * frac + (delta + p.control_detuning) / p.c_over_a).rem_euclid(TAU)
}

pub fn free_matrix(phase: f64) -> Complex2x2 {
    Complex2x2::diag(C64::cis(phase), C64::cis(-phase))
}

pub fn atom_matrix(zeta: C64) -> Complex2x2 {
    let iz = C64::i() * zeta;
    Complex2x2::new(1.0 + iz, iz, -iz, 1.0 - iz)
}

/// Scattering strength of one lattice site (`m·ζ` for `m` atoms per site).
fn site_zeta(delta: f64, p: &ScatterParams) -> Result<C64, ScatterError> {
    Ok(zeta(delta, p)? * f64::from(p.atoms_per_site))
}

/// Transfer matrix of one lattice cell, `M_free · M_atom`.
pub fn cell_matrix(delta: f64, p: &ScatterParams) -> Result<Complex2x2, ScatterError> {
    let z = site_zeta(delta, p)?;
    Ok(free_matrix(reduced_bragg_phase(delta, p)) * atom_matrix(z))
}

/// Transmission and reflection of the full `n_sites` lattice.
pub fn stack_rt(delta: f64, p: &ScatterParams) -> Result<SpectrumPoint, ScatterError> {
    let z = site_zeta(delta, p)?;
    let phase = reduced_bragg_phase(delta, p);

    if z == C64::new(0.0, 0.0) {
        // Transparent sites: the stack is pure propagation, diag(e^{iNφ}, e^{-iNφ}).
        let total_phase = (phase * p.n_sites as f64).rem_euclid(TAU);
        return Ok(SpectrumPoint {
            delta,
            transmittance: 1.0,
            reflectance: 0.0,
            t: C64::cis(total_phase),
            r: C64::new(0.0, 0.0),
            ln_transmittance: 0.0,
        });
    }

    let cell = free_matrix(phase) * atom_matrix(z);
    let stack = ScaledMatrix::power(&cell, p.n_sites);
    let m22 = stack.mantissa.m22;
    let ln_abs_m22 = stack.log_scale + m22.norm().ln();
    if !stack.mantissa.is_finite() || m22.norm() == 0.0 || ln_abs_m22 < SINGULAR_TOLERANCE.ln() {
        return Err(ScatterError::SingularStack { delta });
    }

    let r = stack.mantissa.m12 / m22;
    let ln_t = -ln_abs_m22;
    let t = C64::from_polar(ln_t.exp(), -m22.arg());
    Ok(SpectrumPoint {
        delta,
        transmittance: (2.0 * ln_t).exp(),
        reflectance: r.norm_sqr(),
        t,
        r,
        ln_transmittance: 2.0 * ln_t,
    })
}

/// One sweep sample; failures are kept per point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSample {
    pub delta: f64,
    pub outcome: Result<SpectrumPoint, ScatterError>,
}

/// `n_points` uniformly spaced detunings from `delta_min` to `delta_max`
/// inclusive.
pub fn sweep_grid(delta_min: f64, delta_max: f64, n_points: usize) -> Result<Vec<f64>, ScatterError> {
    if n_points < 2 {
        return Err(ScatterError::TooFewPoints(n_points));
    }
    if !(delta_min < delta_max) || !delta_min.is_finite() || !delta_max.is_finite() {
        return Err(ScatterError::EmptyRange {
            min: delta_min,
            max: delta_max,
        });
    }
    let span = delta_max - delta_min;
    let last = (n_points - 1) as f64;
    Ok((0..n_points)
        .map(|i| delta_min + span * (i as f64 / last))
        .collect())
}

pub fn spectrum_sweep(
    delta_min: f64,
    delta_max: f64,
    n_points: usize,
    p: &ScatterParams,
    exec: Execution,
) -> Result<Vec<SweepSample>, ScatterError> {
    p.validate()?;
    let grid = sweep_grid(delta_min, delta_max, n_points)?;
    Ok(exec::map_indexed(grid.len(), exec, |i| {
        let delta = grid[i];
        SweepSample {
            delta,
            outcome: stack_rt(delta, p),
        }
    }))
}
