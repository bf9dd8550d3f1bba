//! Laboratory rates and their conversion to the collective coupling unit `g√N`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitsError {
    #[error("{name} must be {requirement} (got {value})")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("collective coupling g·√N is zero; there is no energy unit")]
    NoEnergyUnit,
}

/// Rates describing one atomic ensemble coupled to a guided mode.
///
/// Frequencies are angular (rad/s); decay rates are in 1/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateSet {
    /// Single-photon coupling `g`.
    pub g: f64,
    pub atom_number: u64,
    /// Ground-state decoherence `γ`.
    pub gamma: f64,
    /// Resonator linewidth `κ`.
    pub kappa: f64,
    /// Intrinsic resonator loss `κ_in`.
    pub kappa_in: f64,
    /// Group velocity in the guide (m/s).
    pub guide_velocity: f64,
    /// Medium length (m).
    pub length: f64,
}

impl RateSet {
    pub fn validate(&self) -> Result<(), UnitsError> {
        non_negative("g", self.g)?;
        non_negative("gamma", self.gamma)?;
        non_negative("kappa", self.kappa)?;
        non_negative("kappa_in", self.kappa_in)?;
        positive("guide_velocity", self.guide_velocity)?;
        positive("length", self.length)?;
        if self.atom_number < 1 {
            return Err(UnitsError::OutOfRange {
                name: "atom_number",
                requirement: "at least 1",
                value: self.atom_number as f64,
            });
        }
        Ok(())
    }

    /// `g√N`
    pub fn collective_coupling(&self) -> f64 {
        self.g * (self.atom_number as f64).sqrt()
    }

    /// `g²N`
    pub fn collective_coupling_sq(&self) -> f64 {
        self.g * self.g * self.atom_number as f64
    }

    /// Transit rate `c/L` of the free-space configuration.
    pub fn transit_rate(&self) -> f64 {
        self.guide_velocity / self.length
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<(), UnitsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(UnitsError::OutOfRange {
            name,
            requirement: "positive and finite",
            value,
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<(), UnitsError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(UnitsError::OutOfRange {
            name,
            requirement: "non-negative and finite",
            value,
        })
    }
}

/// Resonator linewidth `κ = ω/Q` for angular frequency `ω` (rad/s).
pub fn kappa_from_q(omega: f64, quality: f64) -> f64 {
    debug_assert!(omega > 0.0 && quality > 0.0);
    omega / quality
}

/// Converts a frequency quoted as `f = ω/2π` in Hz to rad/s.
pub fn hz_to_rad_per_s(f: f64) -> f64 {
    std::f64::consts::TAU * f
}

pub fn rad_per_s_to_hz(omega: f64) -> f64 {
    omega / std::f64::consts::TAU
}

/// Loss and coupling rates in units of `g√N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionlessRates {
    pub kappa: f64,
    pub kappa_in: f64,
    pub gamma: f64,
}

pub fn dimensionless(rates: &RateSet) -> Result<DimensionlessRates, UnitsError> {
    let unit = rates.collective_coupling();
    if !(unit > 0.0 && unit.is_finite()) {
        return Err(UnitsError::NoEnergyUnit);
    }
    Ok(DimensionlessRates {
        kappa: rates.kappa / unit,
        kappa_in: rates.kappa_in / unit,
        gamma: rates.gamma / unit,
    })
}
