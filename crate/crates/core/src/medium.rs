//! Plane-wave propagation in a conductive medium.
//!
//! Everything here uses the good-conductor approximation: displacement
//! current is dropped, so `gamma = sqrt(j*omega*mu*sigma)` and the attenuation
//! and phase constants are equal.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::{EPSILON_0, MU_0};

/// Np to dB for field amplitudes, `20 / ln(10)`.
pub const NEPER_TO_DB: f64 = 20.0 / std::f64::consts::LN_10;

/// Below this conduction-to-displacement current ratio the approximation is
/// flagged as degraded.
pub const LOSS_TANGENT_WARN: f64 = 10.0;

/// A homogeneous body of water (or any conductor).
#[derive(Debug, Clone, PartialEq)]
pub struct ConductiveMedium {
    /// H/m.
    pub permeability: f64,
    /// S/m.
    pub conductivity: f64,
    pub relative_permittivity: f64,
    pub label: String,
}

impl ConductiveMedium {
    /// Water with the given conductivity, `mu = mu0` and `eps_r = 80`.
    pub fn water(conductivity: f64, label: impl Into<String>) -> Result<Self> {
        Self::new(MU_0, conductivity, 80.0, label)
    }

    pub fn new(
        permeability: f64,
        conductivity: f64,
        relative_permittivity: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let medium = ConductiveMedium {
            permeability,
            conductivity,
            relative_permittivity,
            label: label.into(),
        };
        medium.validate()?;
        Ok(medium)
    }

    /// Lake water, 97 uS/cm.
    pub fn freshwater() -> Self {
        Self::water(0.0097, "freshwater").expect("valid constants")
    }

    /// Coastal seawater, 48.18 mS/cm.
    pub fn saltwater() -> Self {
        Self::water(4.818, "saltwater").expect("valid constants")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.conductivity > 0.0 && self.conductivity.is_finite()) {
            return domain(format!("conductivity must be > 0, got {}", self.conductivity));
        }
        if !(self.permeability > 0.0 && self.permeability.is_finite()) {
            return domain(format!("permeability must be > 0, got {}", self.permeability));
        }
        if !(self.relative_permittivity >= 1.0 && self.relative_permittivity.is_finite()) {
            return domain(format!(
                "relative permittivity must be >= 1, got {}",
                self.relative_permittivity
            ));
        }
        Ok(())
    }

    /// Ratio of conduction to displacement current, `sigma / (omega eps0 eps_r)`.
    pub fn loss_tangent(&self, frequency: f64) -> f64 {
        self.conductivity / (2.0 * PI * frequency * EPSILON_0 * self.relative_permittivity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConstants {
    /// Np/m.
    pub attenuation_alpha: f64,
    /// rad/m.
    pub phase_beta: f64,
    /// Hz.
    pub frequency: f64,
    /// False when displacement current is no longer negligible
    /// (loss tangent below [`LOSS_TANGENT_WARN`]).
    pub approximation_valid: bool,
}

impl PropagationConstants {
    /// Skin depth, `1 / alpha`.
    pub fn skin_depth(&self) -> f64 {
        1.0 / self.attenuation_alpha
    }
}

/// Radial region boundaries around a source, in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRegions {
    /// `lambda / 2pi`
    pub reactive_near_limit: f64,
    /// `lambda`
    pub radiative_near_limit: f64,
    /// `2 lambda`; far field beyond.
    pub transition_limit: f64,
}

fn check(medium: &ConductiveMedium, frequency: f64) -> Result<()> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return domain(format!("frequency must be > 0, got {frequency}"));
    }
    medium.validate()
}

/// `alpha = beta = sqrt(pi f mu sigma)`.
pub fn propagation_constants(
    medium: &ConductiveMedium,
    frequency: f64,
) -> Result<PropagationConstants> {
    check(medium, frequency)?;
    let beta = (PI * frequency * medium.permeability * medium.conductivity).sqrt();
    Ok(PropagationConstants {
        attenuation_alpha: beta,
        phase_beta: beta,
        frequency,
        approximation_valid: medium.loss_tangent(frequency) >= LOSS_TANGENT_WARN,
    })
}

/// `lambda = 2 pi / beta`.
pub fn wavelength(medium: &ConductiveMedium, frequency: f64) -> Result<f64> {
    let pc = propagation_constants(medium, frequency)?;
    Ok(2.0 * PI / pc.phase_beta)
}

/// Field-amplitude attenuation in dB/m.
pub fn attenuation_db_per_m(medium: &ConductiveMedium, frequency: f64) -> Result<f64> {
    let pc = propagation_constants(medium, frequency)?;
    Ok(pc.attenuation_alpha * NEPER_TO_DB)
}

pub fn field_regions(medium: &ConductiveMedium, frequency: f64) -> Result<FieldRegions> {
    let lambda = wavelength(medium, frequency)?;
    Ok(FieldRegions {
        reactive_near_limit: lambda / (2.0 * PI),
        radiative_near_limit: lambda,
        transition_limit: 2.0 * lambda,
    })
}
