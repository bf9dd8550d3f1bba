//! EIT storage and retrieval figures of merit for an atomic ensemble coupled
//! either to a propagating guide (free space, decay rate `c/L`) or to a
//! resonator (decay rate `κ`).

use thiserror::Error;

use crate::units::{self, RateSet, UnitsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StorageError {
    #[error(transparent)]
    Units(#[from] UnitsError),
    #[error("polariton undefined: both the control field and g·√N vanish")]
    UndefinedPolariton,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StorageMode {
    FreeSpace,
    Resonator,
}

/// Group-velocity law. The single-pass guide and the resonator pictures give
/// different reductions; callers pick one explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupVelocityLaw {
    /// `v_g = c/(1+η²)`
    Linear,
    /// `v_g = c/√(1+η²)`
    SquareRoot,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StorageParams {
    pub rates: RateSet,
    pub mode: StorageMode,
    /// Control Rabi frequency `Ω` (rad/s).
    pub omega: f64,
    /// Pulse duration `T_p` (s).
    pub pulse_duration: f64,
    /// Optical branching ratio `Γ_wg/Γ_tot`.
    pub branching: f64,
    /// Minimum cooperativity that counts as "high".
    pub cooperativity_min: f64,
    /// Required factor between `Δω_EIT` and the pulse bandwidth.
    pub window_factor: f64,
    pub group_velocity_law: GroupVelocityLaw,
}

impl StorageParams {
    pub fn validate(&self) -> Result<(), StorageError> {
        self.rates.validate()?;
        units::non_negative("omega", self.omega)?;
        units::positive("pulse_duration", self.pulse_duration)?;
        if !(0.0..=1.0).contains(&self.branching) {
            return Err(UnitsError::OutOfRange {
                name: "branching",
                requirement: "within [0, 1]",
                value: self.branching,
            }
            .into());
        }
        units::positive("cooperativity_min", self.cooperativity_min)?;
        units::positive("window_factor", self.window_factor)?;
        Ok(())
    }

    pub fn decay_rate(&self) -> f64 {
        match self.mode {
            StorageMode::FreeSpace => self.rates.transit_rate(),
            StorageMode::Resonator => self.rates.kappa,
        }
    }
}

/// Photonic and spin-wave amplitudes of the dark-state polariton.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolaritonMix {
    /// `η = g√N/Ω`; infinite when the control field is off.
    pub eta: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
}

impl PolaritonMix {
    /// True for the pure spin-wave state reached with the control off.
    pub fn is_stored(&self) -> bool {
        self.eta.is_infinite()
    }
}

pub fn polariton_mix(omega: f64, g: f64, atom_number: u64) -> Result<PolaritonMix, StorageError> {
    let coupling = g * (atom_number as f64).sqrt();
    let norm = omega.hypot(coupling);
    if !(norm > 0.0) {
        return Err(StorageError::UndefinedPolariton);
    }
    let eta = if omega == 0.0 { f64::INFINITY } else { coupling / omega };
    Ok(PolaritonMix {
        eta,
        cos_theta: omega / norm,
        sin_theta: coupling / norm,
    })
}

pub fn group_velocity(eta: f64, c: f64, law: GroupVelocityLaw) -> f64 {
    let x = 1.0 + eta * eta;
    match law {
        GroupVelocityLaw::Linear => c / x,
        GroupVelocityLaw::SquareRoot => c / x.sqrt(),
    }
}

/// Width of the transparency window, `(Ω²/γ)·√(γ·decay/(g²N))`.
///
/// Returns `+∞` when `γ = 0`.
pub fn eit_width(omega: f64, gamma: f64, g: f64, atom_number: u64, decay_rate: f64) -> Result<f64, StorageError> {
    let g2n = g * g * atom_number as f64;
    if !(g2n > 0.0) {
        return Err(StorageError::NonPositive("g²N"));
    }
    if !(decay_rate > 0.0) {
        return Err(StorageError::NonPositive("decay rate"));
    }
    if !(omega > 0.0) {
        return Err(StorageError::NonPositive("control field"));
    }
    if gamma == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(omega * omega / gamma * (gamma * decay_rate / g2n).sqrt())
}

/// Largest storable pulse bandwidth, `g²N/decay`.
pub fn max_bandwidth(g: f64, atom_number: u64, decay_rate: f64) -> f64 {
    g * g * atom_number as f64 / decay_rate
}

/// `g²N/(γ·decay)`
pub fn cooperativity(g: f64, atom_number: u64, gamma: f64, decay_rate: f64) -> f64 {
    g * g * atom_number as f64 / (gamma * decay_rate)
}

/// `N·Γ_wg/Γ_tot`
pub fn optical_depth(atom_number: u64, branching: f64) -> f64 {
    atom_number as f64 * branching
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RetrievalEfficiency {
    pub value: f64,
    /// Set when `1 − 1/C` was negative and has been clamped to 0.
    pub clamped: bool,
}

pub fn retrieval_efficiency(cooperativity: f64) -> RetrievalEfficiency {
    let raw = 1.0 - 1.0 / cooperativity;
    if raw >= 0.0 {
        RetrievalEfficiency {
            value: raw,
            clamped: false,
        }
    } else {
        RetrievalEfficiency {
            value: 0.0,
            clamped: true,
        }
    }
}

/// Control field matching the slowed resonator linewidth to the pulse:
/// `Ω = √(g²N/(T_p·κ))`.
pub fn optimal_control(pulse_duration: f64, kappa: f64, g: f64, atom_number: u64) -> f64 {
    (g * g * atom_number as f64 / (pulse_duration * kappa)).sqrt()
}

/// A pass/fail check and how far it is from its threshold. A margin ≥ 1
/// means the condition holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Condition {
    pub pass: bool,
    pub margin: f64,
}

impl Condition {
    fn from_margin(margin: f64) -> Self {
        Self {
            pass: margin >= 1.0,
            margin,
        }
    }

    fn failed() -> Self {
        Self {
            pass: false,
            margin: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    pub mode: StorageMode,
    pub decay_rate: f64,
    pub collective_coupling: f64,
    pub cooperativity: f64,
    pub optical_depth: f64,
    pub eta: f64,
    pub group_velocity: f64,
    pub eit_width: Option<f64>,
    pub eit_width_unbounded: bool,
    pub max_bandwidth: f64,
    pub pulse_bandwidth: f64,
    pub retrieval_efficiency: f64,
    pub efficiency_clamped: bool,
    pub recommended_omega: f64,
    /// `C / C_min`
    pub high_cooperativity: Condition,
    /// `max_bandwidth · T_p`
    pub bandwidth: Condition,
    /// `Δω_EIT · T_p / window_factor`
    pub eit_window: Condition,
    /// `L / (T_p · v_g)`; only meaningful in free space.
    pub pulse_fits: Option<Condition>,
    pub warnings: Vec<String>,
}

pub fn feasibility_report(p: &StorageParams) -> Result<FeasibilityReport, StorageError> {
    p.validate()?;
    let r = &p.rates;
    let n = r.atom_number;
    let decay = p.decay_rate();
    let mut warnings = Vec::new();

    if p.mode == StorageMode::Resonator && r.kappa == 0.0 {
        warnings.push("resonator mode with kappa = 0: no decay channel to store from".to_owned());
    }
    if r.g == 0.0 {
        warnings.push("g = 0: the ensemble does not couple to the field".to_owned());
    }
    if r.gamma == 0.0 {
        warnings.push("gamma = 0: cooperativity and transparency window are unbounded".to_owned());
    }

    let coop = if decay > 0.0 {
        cooperativity(r.g, n, r.gamma, decay)
    } else {
        0.0
    };
    let coop = if coop.is_nan() { 0.0 } else { coop };
    let efficiency = retrieval_efficiency(coop);

    let max_bw = if decay > 0.0 { max_bandwidth(r.g, n, decay) } else { 0.0 };
    let pulse_bandwidth = 1.0 / p.pulse_duration;
    let recommended_omega = if decay > 0.0 {
        optimal_control(p.pulse_duration, decay, r.g, n)
    } else {
        0.0
    };

    let mix = polariton_mix(p.omega, r.g, n).ok();
    let eta = mix.map_or(0.0, |m| m.eta);
    let group_velocity = group_velocity(eta, r.guide_velocity, p.group_velocity_law);

    let width = eit_width(p.omega, r.gamma, r.g, n, decay).ok();
    let eit_window = match width {
        Some(w) => Condition::from_margin(w * p.pulse_duration / p.window_factor),
        None => Condition::failed(),
    };

    let high_cooperativity = if r.g > 0.0 {
        Condition::from_margin(coop / p.cooperativity_min)
    } else {
        Condition::failed()
    };
    let bandwidth = if max_bw > 0.0 {
        Condition::from_margin(max_bw * p.pulse_duration)
    } else {
        Condition::failed()
    };
    let pulse_fits = match p.mode {
        StorageMode::FreeSpace if r.g > 0.0 => Some(Condition::from_margin(
            r.length / (p.pulse_duration * group_velocity),
        )),
        StorageMode::FreeSpace => Some(Condition::failed()),
        StorageMode::Resonator => None,
    };

    Ok(FeasibilityReport {
        mode: p.mode,
        decay_rate: decay,
        collective_coupling: r.collective_coupling(),
        cooperativity: coop,
        optical_depth: optical_depth(n, p.branching),
        eta,
        group_velocity,
        eit_width: width,
        eit_width_unbounded: width == Some(f64::INFINITY),
        max_bandwidth: max_bw,
        pulse_bandwidth,
        retrieval_efficiency: efficiency.value,
        efficiency_clamped: efficiency.clamped,
        recommended_omega,
        high_cooperativity,
        bandwidth,
        eit_window,
        pulse_fits,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{hz_to_rad_per_s, kappa_from_q};
    use approx::assert_relative_eq;

    pub(super) fn device_rates() -> RateSet {
        RateSet {
            g: hz_to_rad_per_s(70.0),
            atom_number: 8000,
            gamma: 20.0,
            kappa: kappa_from_q(hz_to_rad_per_s(6.8e9), 1e6),
            kappa_in: 0.0,
            guide_velocity: 3e8,
            length: 4e-3,
        }
    }

    fn device_params() -> StorageParams {
        let rates = device_rates();
        StorageParams {
            rates,
            mode: StorageMode::Resonator,
            omega: hz_to_rad_per_s(6.3e3),
            pulse_duration: 1.0 / rates.kappa,
            branching: 0.05,
            cooperativity_min: 10.0,
            window_factor: 10.0,
            group_velocity_law: GroupVelocityLaw::Linear,
        }
    }

    #[test]
    fn polariton_limits() {
        let m = polariton_mix(2.0, 1.0, 4).unwrap();
        assert_relative_eq!(m.cos_theta, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);
        assert_relative_eq!(m.sin_theta, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);

        let stored = polariton_mix(0.0, 1.0, 4).unwrap();
        assert!(stored.is_stored());
        assert_eq!((stored.cos_theta, stored.sin_theta), (0.0, 1.0));

        assert_eq!(polariton_mix(0.0, 0.0, 4), Err(StorageError::UndefinedPolariton));
    }

    #[test]
    fn polariton_at_device_numbers_is_balanced() {
        let m = polariton_mix(hz_to_rad_per_s(6.3e3), hz_to_rad_per_s(70.0), 8000).unwrap();
        assert!((m.cos_theta / m.sin_theta - 1.0).abs() < 0.01);
        assert_relative_eq!(m.eta, 0.994, max_relative = 1e-3);
    }

    #[test]
    fn group_velocity_laws() {
        for law in [GroupVelocityLaw::Linear, GroupVelocityLaw::SquareRoot] {
            assert_eq!(group_velocity(0.0, 3.0, law), 3.0);
        }
        assert_eq!(group_velocity(10.0, 101.0, GroupVelocityLaw::Linear), 1.0);
        assert_relative_eq!(
            group_velocity(10.0, 1.0, GroupVelocityLaw::SquareRoot),
            1.0 / 101f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn eit_width_scaling() {
        let w = eit_width(2.0, 3.0, 0.5, 10, 7.0).unwrap();
        assert_relative_eq!(eit_width(4.0, 3.0, 0.5, 10, 7.0).unwrap(), 4.0 * w, max_relative = 1e-15);
        assert_relative_eq!(eit_width(2.0, 12.0, 0.5, 10, 7.0).unwrap(), 0.5 * w, max_relative = 1e-15);
        assert_eq!(eit_width(2.0, 0.0, 0.5, 10, 7.0), Ok(f64::INFINITY));
        assert!(eit_width(2.0, 1.0, 0.0, 10, 7.0).is_err());
    }

    #[test]
    fn device_transparency_window_exceeds_pulse_bandwidth() {
        let r = device_rates();
        let w = eit_width(hz_to_rad_per_s(6.3e3), r.gamma, r.g, r.atom_number, r.kappa).unwrap();
        assert!(w > r.kappa, "{w}");
    }

    #[test]
    fn bandwidth_bound() {
        let r = device_rates();
        let bw = max_bandwidth(r.g, r.atom_number, r.kappa);
        assert_relative_eq!(bw, 3.62e4, max_relative = 1e-2);
        assert!(bw < r.kappa);
        assert_eq!(max_bandwidth(0.0, 8000, r.kappa), 0.0);
        assert_relative_eq!(max_bandwidth(r.g, 4 * 8000, r.kappa), 4.0 * bw, max_relative = 1e-15);
    }

    #[test]
    fn cooperativity_values() {
        let r = device_rates();
        let c = cooperativity(r.g, r.atom_number, r.gamma, r.kappa);
        assert!((1445.0..=1955.0).contains(&c), "{c}");
        assert_eq!(cooperativity(0.0, 8000, 20.0, r.kappa), 0.0);
        assert_relative_eq!(cooperativity(r.g, 8000, 10.0, r.kappa), 2.0 * c, max_relative = 1e-15);
    }

    #[test]
    fn optical_depth_values() {
        assert_eq!(optical_depth(8000, 0.05), 400.0);
        assert_eq!(optical_depth(8000, 0.0), 0.0);
        assert_eq!(optical_depth(1, 1.0), 1.0);
    }

    #[test]
    fn retrieval_efficiency_values() {
        assert_relative_eq!(retrieval_efficiency(1700.0).value, 0.999_41, max_relative = 1e-5);
        assert_eq!(retrieval_efficiency(1.0), RetrievalEfficiency { value: 0.0, clamped: false });
        assert_eq!(retrieval_efficiency(2.0).value, 0.5);
        assert_eq!(retrieval_efficiency(0.5), RetrievalEfficiency { value: 0.0, clamped: true });
        assert_eq!(retrieval_efficiency(0.0).value, 0.0);
    }

    #[test]
    fn optimal_control_values() {
        let r = device_rates();
        let om = optimal_control(1.0 / r.kappa, r.kappa, r.g, r.atom_number);
        assert_relative_eq!(om, r.collective_coupling(), max_relative = 1e-14);
        assert!((units::rad_per_s_to_hz(om) / 6.26e3 - 1.0).abs() < 1e-3);
        assert_relative_eq!(optimal_control(1.0, 4.0, 3.0, 5), 0.5 * optimal_control(1.0, 1.0, 3.0, 5), max_relative = 1e-15);
        assert_relative_eq!(optimal_control(4.0, 1.0, 3.0, 5), 0.5 * optimal_control(1.0, 1.0, 3.0, 5), max_relative = 1e-15);
    }

    #[test]
    fn device_report() {
        let rep = feasibility_report(&device_params()).unwrap();
        assert!((1445.0..=1955.0).contains(&rep.cooperativity));
        assert!(rep.retrieval_efficiency > 0.999);
        assert_eq!(rep.optical_depth, 400.0);
        assert!((units::rad_per_s_to_hz(rep.recommended_omega) / 6.3e3 - 1.0).abs() < 0.05);
        assert!(rep.high_cooperativity.pass);
        assert!(rep.eit_window.pass);
        assert!(!rep.bandwidth.pass);
        assert!(rep.bandwidth.margin > 0.8 && rep.bandwidth.margin < 1.0);
        assert_eq!(rep.pulse_fits, None);
    }

    #[test]
    fn uncoupled_ensemble_fails_everything() {
        for mode in [StorageMode::Resonator, StorageMode::FreeSpace] {
            let mut p = device_params();
            p.mode = mode;
            p.rates.g = 0.0;
            let rep = feasibility_report(&p).unwrap();
            assert_eq!(rep.retrieval_efficiency, 0.0);
            assert!(!rep.high_cooperativity.pass);
            assert!(!rep.bandwidth.pass);
            assert!(!rep.eit_window.pass);
            assert!(rep.pulse_fits.is_none_or(|c| !c.pass));
            assert!(!rep.warnings.is_empty());
        }
    }

    #[test]
    fn resonator_without_linewidth_is_flagged() {
        let mut p = device_params();
        p.rates.kappa = 0.0;
        let rep = feasibility_report(&p).unwrap();
        assert!(rep.warnings.iter().any(|w| w.contains("kappa = 0")));
        assert!(!rep.bandwidth.pass);
    }

    #[test]
    fn report_is_deterministic() {
        let p = device_params();
        assert_eq!(feasibility_report(&p).unwrap(), feasibility_report(&p).unwrap());
    }
}
