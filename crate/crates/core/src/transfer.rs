//! Adiabatic transfer of a single excitation between two coupled
//! resonator+ensemble cells through their shared dark state.
//!
//! Energies are in units of `g√N`. A cell's state is `(E, S, P)`: resonator
//! field, spin coherence and optical polarisation. The two-cell state stacks
//! cell 1 then cell 2, so the six components are
//! `(E₁, S₁, P₁, E₂, S₂, P₂)`.
//!
//! The control ratios are swept as `η₁` increases with `η₂ = η_c²/η₁`. The
//! tracked branch starts as the spin wave of cell 2 and ends as the spin wave
//! of cell 1.

use thiserror::Error;

use crate::exec::{self, Execution};
use crate::linalg::{dot, eig_sym, eig_sym_with_gauge, EigenError, EigenSystem, SymMatrix, C64};

/// Minimum overlap between consecutive tracked eigenvectors.
pub const TRACKING_OVERLAP_MIN: f64 = 0.5;
/// Energy gap below which the adiabaticity sum diverges.
pub const DEGENERATE_GAP: f64 = 1e-10;
/// Endpoint purity below which a sweep is reported as not converged.
pub const ENDPOINT_PURITY_MIN: f64 = 0.99;

pub const E1: usize = 0;
pub const S1: usize = 1;
pub const P1: usize = 2;
pub const E2: usize = 3;
pub const S2: usize = 4;
pub const P2: usize = 5;

const MAX_PURITY_SPAN: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("{name} must be {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("dark-state tracking lost at step {step} (eta1 = {eta1}): best overlap {overlap:.3} < {TRACKING_OVERLAP_MIN}")]
    TrackingLost { step: usize, eta1: f64, overlap: f64 },
    #[error("adiabaticity sum diverges at step {step} (eta1 = {eta1}): gap {gap:e} to state {state}")]
    DivergentEpsilon1 {
        step: usize,
        eta1: f64,
        state: usize,
        gap: f64,
    },
    #[error("sweep schedule must be strictly increasing and positive with at least two points")]
    InvalidSchedule,
    #[error("endpoint purity {target} is not reached within eta_c·{MAX_PURITY_SPAN:e}")]
    PurityUnreachable { target: f64 },
    #[error("optimisation grid is empty")]
    EmptyGrid,
}

impl TransferError {
    pub fn tag(&self) -> &'static str {
        match self {
            TransferError::InvalidParameter { .. } => "invalid_parameter",
            TransferError::Eigen(_) => "eigensolver",
            TransferError::TrackingLost { .. } => "tracking_lost",
            TransferError::DivergentEpsilon1 { .. } => "divergent_eps1",
            TransferError::InvalidSchedule => "invalid_schedule",
            TransferError::PurityUnreachable { .. } => "purity_unreachable",
            TransferError::EmptyGrid => "empty_grid",
        }
    }
}

fn invalid(name: &'static str, requirement: &'static str, value: f64) -> TransferError {
    TransferError::InvalidParameter {
        name,
        requirement,
        value,
    }
}

/// Dimensionless parameters of the coupled two-cell system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoCellSystem {
    /// Inter-resonator coupling.
    pub kappa: f64,
    /// Intrinsic resonator loss.
    pub kappa_in: f64,
    /// Spin decoherence.
    pub gamma: f64,
    /// One-photon detuning `Δ₂/g√N`.
    pub delta2: f64,
    /// Control ratio at which `η₁ = η₂`.
    pub eta_c: f64,
}

impl TwoCellSystem {
    pub fn validate(&self) -> Result<(), TransferError> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("kappa_in", self.kappa_in),
            ("gamma", self.gamma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, "non-negative and finite", v));
            }
        }
        if !self.delta2.is_finite() {
            return Err(invalid("delta2", "finite", self.delta2));
        }
        if !(self.eta_c > 0.0 && self.eta_c.is_finite()) {
            return Err(invalid("eta_c", "positive and finite", self.eta_c));
        }
        Ok(())
    }

    /// `η₂ = η_c²/η₁`
    pub fn eta2(&self, eta1: f64) -> f64 {
        self.eta_c * self.eta_c / eta1
    }

    pub fn hamiltonian(&self, eta1: f64) -> Result<SymMatrix<6>, TransferError> {
        two_cell_h(eta1, self.eta2(eta1), self.delta2, self.kappa)
    }

    /// `∂H/∂η₁` along the constrained path `η₂ = η_c²/η₁`.
    pub fn hamiltonian_derivative(&self, eta1: f64) -> SymMatrix<6> {
        let mut d = SymMatrix::zeros();
        // -1/η₁ → 1/η₁²; -1/η₂ = -η₁/η_c² → -1/η_c²
        d.set(S1, P1, 1.0 / (eta1 * eta1));
        d.set(S2, P2, -1.0 / (self.eta_c * self.eta_c));
        d
    }
}

/// Single-cell coupling matrix `−[[0,0,1],[0,0,1/η],[1,1/η,δ₂]]`.
pub fn single_cell_h(eta: f64, delta2: f64) -> Result<SymMatrix<3>, TransferError> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid("eta", "positive and finite", eta));
    }
    let mut h = SymMatrix::zeros();
    write_cell(&mut h, 0, eta, delta2);
    Ok(h)
}

fn write_cell<const N: usize>(h: &mut SymMatrix<N>, offset: usize, eta: f64, delta2: f64) {
    h.set(offset, offset + 2, -1.0);
    h.set(offset + 1, offset + 2, -1.0 / eta);
    h.set(offset + 2, offset + 2, -delta2);
}

/// Two cells coupled through their resonator fields with strength `κ`.
pub fn two_cell_h(eta1: f64, eta2: f64, delta2: f64, kappa: f64) -> Result<SymMatrix<6>, TransferError> {
    if !(eta1 > 0.0 && eta1.is_finite()) {
        return Err(invalid("eta1", "positive and finite", eta1));
    }
    if !(eta2 > 0.0 && eta2.is_finite()) {
        return Err(invalid("eta2", "positive and finite", eta2));
    }
    let mut h = SymMatrix::zeros();
    write_cell(&mut h, 0, eta1, delta2);
    write_cell(&mut h, 3, eta2, delta2);
    h.set(E1, E2, -kappa);
    Ok(h)
}

/// Zero-energy single-cell state `(1, −η, 0)/√(1+η²)`.
pub fn dark_state(eta: f64) -> [f64; 3] {
    let n = (1.0 + eta * eta).sqrt();
    [1.0 / n, -eta / n, 0.0]
}

/// Matrix element between the two cells' dark states,
/// `−κ/√((1+η₁²)(1+η₂²))`.
pub fn dark_coupling(eta1: f64, eta2: f64, kappa: f64) -> f64 {
    -kappa / ((1.0 + eta1 * eta1) * (1.0 + eta2 * eta2)).sqrt()
}

/// Strictly increasing list of `η₁` values.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSchedule {
    etas: Vec<f64>,
}

impl SweepSchedule {
    pub const DEFAULT_STEPS: usize = 400;
    pub const DEFAULT_SPAN: f64 = 100.0;

    /// `n` log-spaced points from `lo` to `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Self, TransferError> {
        if n < 2 || !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(TransferError::InvalidSchedule);
        }
        let (a, b) = (lo.ln(), hi.ln());
        let last = (n - 1) as f64;
        let mut etas: Vec<f64> = (0..n).map(|i| (a + (b - a) * (i as f64 / last)).exp()).collect();
        etas[0] = lo;
        etas[n - 1] = hi;
        Self::from_points(etas)
    }

    pub fn from_points(etas: Vec<f64>) -> Result<Self, TransferError> {
        let ok = etas.len() >= 2
            && etas.iter().all(|&x| x > 0.0 && x.is_finite())
            && etas.windows(2).all(|w| w[1] > w[0]);
        if ok {
            Ok(Self { etas })
        } else {
            Err(TransferError::InvalidSchedule)
        }
    }

    /// `[η_c/span, η_c·span]` with `DEFAULT_STEPS` points.
    pub fn around(eta_c: f64, span: f64, n: usize) -> Result<Self, TransferError> {
        Self::log_spaced(eta_c / span, eta_c * span, n)
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etas.is_empty()
    }
}

/// How the sweep end points are chosen around `η_c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepBounds {
    /// `[η_c/span, η_c·span]`
    Span(f64),
    /// The narrowest symmetric log-interval whose end points hold the
    /// excitation in a single spin wave with at least this population.
    Purity(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleSpec {
    pub bounds: SweepBounds,
    pub n_steps: usize,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self {
            bounds: SweepBounds::Span(SweepSchedule::DEFAULT_SPAN),
            n_steps: SweepSchedule::DEFAULT_STEPS,
        }
    }
}

impl ScheduleSpec {
    pub fn resolve(&self, sys: &TwoCellSystem) -> Result<SweepSchedule, TransferError> {
        sys.validate()?;
        let span = match self.bounds {
            SweepBounds::Span(s) => {
                if !(s > 1.0 && s.is_finite()) {
                    return Err(invalid("span", "greater than 1", s));
                }
                s
            }
            SweepBounds::Purity(p) => purity_span(sys, p)?,
        };
        SweepSchedule::around(sys.eta_c, span, self.n_steps)
    }
}

/// Spin-wave population of cell 2 in the eigenstate most like `|S₂⟩`, with
/// `η₁ = η_c/span`.
fn start_purity(sys: &TwoCellSystem, span: f64) -> Result<f64, TransferError> {
    let h = two_cell_h(sys.eta_c / span, sys.eta_c * span, sys.delta2, sys.kappa)?;
    let eig = eig_sym(&h)?;
    Ok(eig.vectors().iter().map(|v| v[S2] * v[S2]).fold(0.0, f64::max))
}

/// Smallest span at which the end points reach `target` purity, by bisection
/// on `ln span`.
pub fn purity_span(sys: &TwoCellSystem, target: f64) -> Result<f64, TransferError> {
    if !(target > 0.5 && target < 1.0) {
        return Err(invalid("purity", "within (0.5, 1)", target));
    }
    let (mut lo, mut hi) = (0.0_f64, MAX_PURITY_SPAN.ln());
    if start_purity(sys, hi.exp())? < target {
        return Err(TransferError::PurityUnreachable { target });
    }
    if start_purity(sys, 1.0)? >= target {
        return Err(invalid("purity", "above the purity at the crossing point", target));
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if start_purity(sys, mid.exp())? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp())
}

/// Diagonalisation at one sweep point with the tracked branch marked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackedStep {
    pub eta1: f64,
    pub eigen: EigenSystem<6>,
    /// Index (ascending energy) of the tracked dark state.
    pub index: usize,
    /// `|⟨previous|current⟩|` for the tracked branch; 1 at the first step.
    pub overlap: f64,
}

impl TrackedStep {
    pub fn dark(&self) -> &[f64; 6] {
        self.eigen.vector(self.index)
    }

    pub fn dark_energy(&self) -> f64 {
        self.eigen.energy(self.index)
    }
}

/// Follows the dark branch by maximal-overlap continuation from the state
/// that is most like `|S₂⟩` at the first grid point.
pub fn track_dark_state(schedule: &SweepSchedule, sys: &TwoCellSystem) -> Result<Vec<TrackedStep>, TransferError> {
    sys.validate()?;
    let mut steps: Vec<TrackedStep> = Vec::with_capacity(schedule.len());
    for (step, &eta1) in schedule.etas().iter().enumerate() {
        let h = sys.hamiltonian(eta1)?;
        let tracked = match steps.last() {
            None => {
                let eigen = eig_sym(&h)?;
                let index = (0..6)
                    .max_by(|&a, &b| {
                        let pa = eigen.vector(a)[S2].powi(2);
                        let pb = eigen.vector(b)[S2].powi(2);
                        pa.total_cmp(&pb).then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                TrackedStep {
                    eta1,
                    eigen,
                    index,
                    overlap: 1.0,
                }
            }
            Some(prev) => {
                let eigen = eig_sym_with_gauge(&h, Some(&prev.eigen))?;
                let (index, overlap) = eigen.best_overlap(prev.dark());
                if overlap < TRACKING_OVERLAP_MIN {
                    return Err(TransferError::TrackingLost { step, eta1, overlap });
                }
                TrackedStep {
                    eta1,
                    eigen,
                    index,
                    overlap,
                }
            }
        };
        steps.push(tracked);
    }
    Ok(steps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// One cell strongly photonic, the other strongly atomic.
    Asymptotic,
    Crossover,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbativeShift {
    /// Second-order shift of the lower dark state, `−δ₂κ²`.
    pub e3: f64,
    pub e4: f64,
    pub regime: Regime,
}

/// Second-order energy shifts of the two dark states away from the crossing.
pub fn perturbative_shift(eta1: f64, sys: &TwoCellSystem) -> PerturbativeShift {
    let eta2 = sys.eta2(eta1);
    let (small, large) = if eta1 < eta2 { (eta1, eta2) } else { (eta2, eta1) };
    let regime = if small <= 0.1 && large >= 10.0 {
        Regime::Asymptotic
    } else {
        Regime::Crossover
    };
    PerturbativeShift {
        e3: -sys.delta2 * sys.kappa * sys.kappa,
        e4: 0.0,
        regime,
    }
}

/// Non-adiabatic coupling sum `Σ_{i≠d} |⟨d|∂H|i⟩| / (e_i − e_d)²` at one step,
/// using the Hellmann–Feynman form.
pub fn epsilon1_pointwise(step: &TrackedStep, sys: &TwoCellSystem, step_index: usize) -> Result<f64, TransferError> {
    hellmann_feynman_sum(&step.eigen, step.index, &sys.hamiltonian_derivative(step.eta1))
        .map_err(|(state, gap)| TransferError::DivergentEpsilon1 {
            step: step_index,
            eta1: step.eta1,
            state,
            gap,
        })
}

fn hellmann_feynman_sum<const N: usize>(
    eigen: &EigenSystem<N>,
    dark: usize,
    dh: &SymMatrix<N>,
) -> Result<f64, (usize, f64)> {
    let d = eigen.vector(dark);
    let ed = eigen.energy(dark);
    let mut sum = 0.0;
    for i in (0..N).filter(|&i| i != dark) {
        let gap = eigen.energy(i) - ed;
        if gap.abs() < DEGENERATE_GAP {
            return Err((i, gap.abs()));
        }
        sum += dh.bilinear(d, eigen.vector(i)).abs() / (gap * gap);
    }
    Ok(sum)
}

/// The same sum from central finite differences of gauge-fixed eigenvectors,
/// `Σ_{i≠d} |⟨d|∂_η i⟩| / |e_i − e_d|`, with step `h` in `η₁`.
pub fn epsilon1_pointwise_fd(step: &TrackedStep, sys: &TwoCellSystem, h: f64) -> Result<f64, TransferError> {
    let plus = eig_sym_with_gauge(&sys.hamiltonian(step.eta1 + h)?, Some(&step.eigen))?;
    let minus = eig_sym_with_gauge(&sys.hamiltonian(step.eta1 - h)?, Some(&step.eigen))?;
    let dark = step.index;
    let d = step.dark();
    let ed = step.dark_energy();
    let mut sum = 0.0;
    for i in (0..6).filter(|&i| i != dark) {
        let derivative: [f64; 6] = std::array::from_fn(|k| (plus.vector(i)[k] - minus.vector(i)[k]) / (2.0 * h));
        let gap = (step.eigen.energy(i) - ed).abs();
        sum += dot(d, &derivative).abs() / gap;
    }
    Ok(sum)
}

/// Adiabaticity sum for an isolated cell's dark state, from numerical
/// eigenvectors of the 3×3 coupling matrix.
pub fn single_cell_epsilon1(eta: f64, delta2: f64) -> Result<f64, TransferError> {
    let h = single_cell_h(eta, delta2)?;
    let eigen = eig_sym(&h)?;
    let dark = dark_state(eta);
    let (index, _) = eigen.best_overlap(&dark);
    let mut dh = SymMatrix::<3>::zeros();
    dh.set(1, 2, 1.0 / (eta * eta));
    hellmann_feynman_sum(&eigen, index, &dh).map_err(|(state, gap)| TransferError::DivergentEpsilon1 {
        step: 0,
        eta1: eta,
        state,
        gap,
    })
}

/// Worst-case adiabaticity over a tracked sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Epsilon1 {
    pub value: f64,
    pub step: usize,
    pub eta1: f64,
}

pub fn epsilon1(track: &[TrackedStep], sys: &TwoCellSystem) -> Result<Epsilon1, TransferError> {
    let mut worst = Epsilon1 {
        value: 0.0,
        step: 0,
        eta1: track.first().map_or(0.0, |s| s.eta1),
    };
    for (k, step) in track.iter().enumerate() {
        let v = epsilon1_pointwise(step, sys, k)?;
        if v > worst.value {
            worst = Epsilon1 {
                value: v,
                step: k,
                eta1: step.eta1,
            };
        }
    }
    Ok(worst)
}

/// Instantaneous loss rate of the tracked state.
fn loss_rate(x: &[f64; 6], sys: &TwoCellSystem) -> f64 {
    sys.kappa_in * (x[E1] * x[E1] + x[E2] * x[E2]) + sys.gamma * (x[S1] * x[S1] + x[S2] * x[S2])
}

/// Path-integrated loss `∫ (κ_in Σ|E|² + γ Σ|S|²) dη₁` by the trapezoidal rule.
pub fn epsilon2(track: &[TrackedStep], sys: &TwoCellSystem) -> f64 {
    track
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            0.5 * (b.eta1 - a.eta1) * (loss_rate(a.dark(), sys) + loss_rate(b.dark(), sys))
        })
        .sum()
}

/// Populations and adiabaticity at one sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub eta1: f64,
    pub energies: [f64; 6],
    pub dark_index: usize,
    /// `|E₁|², |E₂|²` of the tracked state.
    pub pop_e: [f64; 2],
    pub pop_s: [f64; 2],
    pub pop_p: [f64; 2],
    pub eps1_pointwise: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferDiagnostics {
    pub system: TwoCellSystem,
    pub steps: Vec<StepDiagnostics>,
    pub eps1: Epsilon1,
    pub eps2: f64,
    pub product: f64,
    /// `|⟨S₂|d⟩|²` at the first step and `|⟨S₁|d⟩|²` at the last.
    pub endpoint_purity: (f64, f64),
    pub warnings: Vec<String>,
}

pub fn diagnose(schedule: &SweepSchedule, sys: &TwoCellSystem) -> Result<TransferDiagnostics, TransferError> {
    let track = track_dark_state(schedule, sys)?;
    let eps1 = epsilon1(&track, sys)?;
    let eps2 = epsilon2(&track, sys);

    let mut steps = Vec::with_capacity(track.len());
    for (k, s) in track.iter().enumerate() {
        let x = s.dark();
        steps.push(StepDiagnostics {
            eta1: s.eta1,
            energies: *s.eigen.energies(),
            dark_index: s.index,
            pop_e: [x[E1] * x[E1], x[E2] * x[E2]],
            pop_s: [x[S1] * x[S1], x[S2] * x[S2]],
            pop_p: [x[P1] * x[P1], x[P2] * x[P2]],
            eps1_pointwise: epsilon1_pointwise(s, sys, k)?,
        });
    }
    let first = steps.first().map_or(0.0, |s| s.pop_s[1]);
    let last = steps.last().map_or(0.0, |s| s.pop_s[0]);
    let mut warnings = Vec::new();
    // Purity-bounded sweeps end exactly at the threshold; allow for the bisection tolerance.
    let floor = ENDPOINT_PURITY_MIN - 1e-9;
    if first < floor || last < floor {
        warnings.push(format!(
            "sweep end points are not converged: spin-wave purity {first:.4} (start), {last:.4} (end) < {ENDPOINT_PURITY_MIN}"
        ));
    }

    Ok(TransferDiagnostics {
        system: *sys,
        steps,
        eps1,
        eps2,
        product: eps1.value * eps2,
        endpoint_purity: (first, last),
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisScale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>, TransferError> {
        if self.n == 0 {
            return Err(TransferError::EmptyGrid);
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.max >= self.min) {
            return Err(invalid("axis", "finite with max >= min", self.max));
        }
        if self.scale == AxisScale::Log && !(self.min > 0.0) {
            return Err(invalid("axis min", "positive on a log axis", self.min));
        }
        if self.n == 1 {
            return Ok(vec![self.min]);
        }
        let last = (self.n - 1) as f64;
        let mut v: Vec<f64> = match self.scale {
            AxisScale::Linear => (0..self.n)
                .map(|i| self.min + (self.max - self.min) * (i as f64 / last))
                .collect(),
            AxisScale::Log => {
                let (a, b) = (self.min.ln(), self.max.ln());
                (0..self.n).map(|i| (a + (b - a) * (i as f64 / last)).exp()).collect()
            }
        };
        v[0] = self.min;
        v[self.n - 1] = self.max;
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizationGrid {
    pub eta_c: Axis,
    pub delta2: Axis,
}

/// Rates shared by every grid cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossTemplate {
    pub kappa: f64,
    pub kappa_in: f64,
    pub gamma: f64,
}

impl LossTemplate {
    pub fn with(&self, eta_c: f64, delta2: f64) -> TwoCellSystem {
        TwoCellSystem {
            kappa: self.kappa,
            kappa_in: self.kappa_in,
            gamma: self.gamma,
            delta2,
            eta_c,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePoint {
    pub eta_c: f64,
    pub delta2: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// `ε₁ε₂`, `+∞` where ε₁ diverges or the sweep fails.
    pub product: f64,
    pub failure: Option<TransferError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    /// Row-major in `eta_c`, then `delta2`.
    pub surface: Vec<SurfacePoint>,
    pub best: Option<usize>,
}

impl OptimizationResult {
    pub fn best_point(&self) -> Option<&SurfacePoint> {
        self.best.map(|i| &self.surface[i])
    }
}

pub fn evaluate_point(sys: &TwoCellSystem, spec: &ScheduleSpec) -> SurfacePoint {
    let point = |eps1: f64, eps2: f64, failure| SurfacePoint {
        eta_c: sys.eta_c,
        delta2: sys.delta2,
        eps1,
        eps2,
        product: if eps1.is_finite() { eps1 * eps2 } else { f64::INFINITY },
        failure,
    };
    let track = match spec.resolve(sys).and_then(|schedule| track_dark_state(&schedule, sys)) {
        Ok(track) => track,
        Err(e) => return point(f64::INFINITY, f64::NAN, Some(e)),
    };
    let eps2 = epsilon2(&track, sys);
    match epsilon1(&track, sys) {
        Ok(e1) => point(e1.value, eps2, None),
        Err(e) => point(f64::INFINITY, eps2, Some(e)),
    }
}

/// Evaluates `ε₁ε₂` over the grid. The minimum prefers smaller `η_c`, then
/// smaller `δ₂`, among equal products.
pub fn optimize(
    template: &LossTemplate,
    grid: &OptimizationGrid,
    spec: &ScheduleSpec,
    exec: Execution,
) -> Result<OptimizationResult, TransferError> {
    let etas = grid.eta_c.values()?;
    let deltas = grid.delta2.values()?;
    template.with(etas[0], deltas[0]).validate()?;

    let nd = deltas.len();
    let surface = exec::map_indexed(etas.len() * nd, exec, |k| {
        evaluate_point(&template.with(etas[k / nd], deltas[k % nd]), spec)
    });

    let best = surface
        .iter()
        .enumerate()
        .filter(|(_, p)| p.product.is_finite())
        .min_by(|(_, a), (_, b)| {
            a.product
                .total_cmp(&b.product)
                .then(a.eta_c.total_cmp(&b.eta_c))
                .then(a.delta2.total_cmp(&b.delta2))
        })
        .map(|(i, _)| i);
    Ok(OptimizationResult { surface, best })
}

/// Outcome of integrating the lossy equations of motion along a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evolution {
    /// Remaining norm `‖X‖²`.
    pub survival: f64,
    /// `|⟨d_end|X⟩|²` with the dark state at the final `η₁`.
    pub fidelity: f64,
    /// `|⟨S₁|X⟩|²`
    pub spin1_population: f64,
    pub steps: usize,
}

/// Integrates `i dX/dt = (H − iΛ/2) X` with `η₁ = lo + rate·t` from the dark
/// state at `lo` to `hi`, with fixed-step RK4. `Λ` holds `κ_in` on the field
/// and `γ` on the spin components.
///
/// This goes beyond the adiabatic loss functional and serves as a check of it.
pub fn evolve_lossy(
    sys: &TwoCellSystem,
    lo: f64,
    hi: f64,
    rate: f64,
    dt: f64,
) -> Result<Evolution, TransferError> {
    sys.validate()?;
    if !(lo > 0.0 && hi > lo && rate > 0.0 && dt > 0.0) {
        return Err(TransferError::InvalidSchedule);
    }
    let start = track_dark_state(&SweepSchedule::from_points(vec![lo, 0.5 * (lo + hi)])?, sys)?;
    let mut x: [C64; 6] = std::array::from_fn(|k| C64::new(start[0].dark()[k], 0.0));

    let damping = [sys.kappa_in, sys.gamma, 0.0, sys.kappa_in, sys.gamma, 0.0];
    let rhs = |eta1: f64, x: &[C64; 6]| -> Result<[C64; 6], TransferError> {
        let h = sys.hamiltonian(eta1)?;
        let hx = mul_complex(&h, x);
        Ok(std::array::from_fn(|k| -C64::i() * hx[k] - 0.5 * damping[k] * x[k]))
    };

    let duration = (hi - lo) / rate;
    let steps = (duration / dt).ceil() as usize;
    let dt = duration / steps as f64;
    for n in 0..steps {
        let t = n as f64 * dt;
        let eta = |t: f64| (lo + rate * t).min(hi);
        let k1 = rhs(eta(t), &x)?;
        let k2 = rhs(eta(t + 0.5 * dt), &axpy(&x, 0.5 * dt, &k1))?;
        let k3 = rhs(eta(t + 0.5 * dt), &axpy(&x, 0.5 * dt, &k2))?;
        let k4 = rhs(eta(t + dt), &axpy(&x, dt, &k3))?;
        for k in 0..6 {
            x[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
    }

    let end_eigen = eig_sym(&sys.hamiltonian(hi)?)?;
    let end_dark = (0..6)
        .max_by(|&a, &b| {
            end_eigen.vector(a)[S1]
                .powi(2)
                .total_cmp(&end_eigen.vector(b)[S1].powi(2))
        })
        .unwrap_or(0);
    let d = end_eigen.vector(end_dark);
    let proj: C64 = (0..6).map(|k| x[k] * d[k]).sum();
    Ok(Evolution {
        survival: x.iter().map(|z| z.norm_sqr()).sum(),
        fidelity: proj.norm_sqr(),
        spin1_population: x[S1].norm_sqr(),
        steps,
    })
}

fn mul_complex(h: &SymMatrix<6>, x: &[C64; 6]) -> [C64; 6] {
    std::array::from_fn(|i| (0..6).map(|j| x[j] * h.get(i, j)).sum())
}

fn axpy(x: &[C64; 6], a: f64, y: &[C64; 6]) -> [C64; 6] {
    std::array::from_fn(|k| x[k] + y[k] * a)
}
