//! Dielectric permittivities and magnetic permeabilities at imaginary
//! Matsubara frequencies.
//!
//! Every model is evaluated on the imaginary axis ω = iξ, where all
//! permittivities are real and ≥ 1. The ξ = 0 (l = 0) Matsubara term is never
//! evaluated through these functions; [`Permittivity::zero_frequency`] reports
//! the analytic behaviour that the Lifshitz engine needs instead.

mod diagnostic;
mod table;

pub use diagnostic::{drude_zero_dissipation_diagnostic, DissipationDiagnostic};
pub use table::{Extrapolation, OpticalRow, OpticalTable, KK_RELATIVE_TOLERANCE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_xi(xi: f64) -> Result<()> {
    if xi > 0.0 && xi.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "imaginary frequency must be positive and finite, got {xi} eV"
        )))
    }
}

fn check_non_negative(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "{name} must be finite and >= 0, got {value}"
        )))
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}

/// Drude model ε(ω) = 1 − ω_p²/[ω(ω + iγ)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrudeModel {
    /// ω_p in eV.
    pub plasma_frequency: f64,
    /// Room-temperature relaxation parameter γ in eV.
    pub relaxation: f64,
}

impl DrudeModel {
    /// `plasma_frequency = 0` is accepted as the vacuum limit.
    pub fn new(plasma_frequency: f64, relaxation: f64) -> Result<Self> {
        let model = Self {
            plasma_frequency,
            relaxation,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("plasma_frequency", self.plasma_frequency)?;
        check_positive("relaxation", self.relaxation)
    }

    /// ε_D(iξ) = 1 + ω_p²/[ξ(ξ + γ)].
    pub fn eps_imag(&self, xi: f64) -> Result<f64> {
        check_xi(xi)?;
        let wp2 = self.plasma_frequency * self.plasma_frequency;
        Ok(1.0 + wp2 / (xi * (xi + self.relaxation)))
    }

    /// Imaginary part of ε_D on the real frequency axis, ω > 0.
    pub fn im_eps_real_axis(&self, omega: f64) -> f64 {
        let wp2 = self.plasma_frequency * self.plasma_frequency;
        let g = self.relaxation;
        wp2 * g / (omega * (omega * omega + g * g))
    }
}

/// Dissipationless plasma model ε(ω) = 1 − ω_p²/ω².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasmaModel {
    /// ω_p in eV.
    pub plasma_frequency: f64,
}

impl PlasmaModel {
    pub fn new(plasma_frequency: f64) -> Result<Self> {
        let model = Self { plasma_frequency };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("plasma_frequency", self.plasma_frequency)
    }

    /// ε_p(iξ) = 1 + ω_p²/ξ².
    pub fn eps_imag(&self, xi: f64) -> Result<f64> {
        check_xi(xi)?;
        Ok(1.0 + self.pole_term(xi))
    }

    pub(crate) fn pole_term(&self, xi: f64) -> f64 {
        (self.plasma_frequency * self.plasma_frequency) / (xi * xi)
    }
}

/// One Lorentz oscillator of the bound (core) electrons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    /// g_j in eV².
    pub strength: f64,
    /// ω_j in eV.
    pub resonance: f64,
    /// γ_j in eV.
    pub width: f64,
}

impl Oscillator {
    pub fn new(strength: f64, resonance: f64, width: f64) -> Result<Self> {
        let osc = Self {
            strength,
            resonance,
            width,
        };
        osc.validate()?;
        Ok(osc)
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("oscillator strength", self.strength)?;
        check_positive("oscillator resonance", self.resonance)?;
        check_non_negative("oscillator width", self.width)
    }

    fn term_imag(&self, xi: f64) -> f64 {
        self.strength / (self.resonance * self.resonance + xi * xi + self.width * xi)
    }
}

/// Plasma pole plus a sum of Lorentz oscillators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedPlasmaModel {
    pub plasma_frequency: f64,
    #[serde(default)]
    pub oscillators: Vec<Oscillator>,
}

impl GeneralizedPlasmaModel {
    pub fn new(plasma_frequency: f64, oscillators: Vec<Oscillator>) -> Result<Self> {
        let model = Self {
            plasma_frequency,
            oscillators,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("plasma_frequency", self.plasma_frequency)?;
        self.oscillators.iter().try_for_each(Oscillator::validate)
    }

    fn plasma(&self) -> PlasmaModel {
        PlasmaModel {
            plasma_frequency: self.plasma_frequency,
        }
    }

    /// ε_gp(iξ) = 1 + ω_p²/ξ² + Σ_j g_j/(ω_j² + ξ² + γ_j ξ).
    ///
    /// With no oscillators the result is bit-identical to the plain plasma model.
    pub fn eps_imag(&self, xi: f64) -> Result<f64> {
        let plasma = self.plasma().eps_imag(xi)?;
        Ok(self
            .oscillators
            .iter()
            .fold(plasma, |acc, osc| acc + osc.term_imag(xi)))
    }
}

/// Static magnetic permeability μ(0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticResponse {
    pub static_permeability: f64,
}

impl Default for MagneticResponse {
    fn default() -> Self {
        Self::NONMAGNETIC
    }
}

impl MagneticResponse {
    pub const NONMAGNETIC: Self = Self {
        static_permeability: 1.0,
    };

    pub fn new(static_permeability: f64) -> Result<Self> {
        let m = Self {
            static_permeability,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.static_permeability >= 1.0 && self.static_permeability.is_finite() {
            Ok(())
        } else {
            Err(Error::Input(format!(
                "static permeability must be >= 1, got {}",
                self.static_permeability
            )))
        }
    }

    /// μ at the l-th Matsubara frequency. Ferromagnetic response relaxes to
    /// unity far below ξ_1 at any temperature of interest, so only l = 0 sees μ(0).
    pub fn mu_imag(&self, matsubara_index: i64) -> Result<f64> {
        match matsubara_index {
            l if l < 0 => Err(Error::Domain(format!(
                "Matsubara index must be >= 0, got {l}"
            ))),
            0 => Ok(self.static_permeability),
            _ => Ok(1.0),
        }
    }
}

/// The permittivity variants a material can use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Permittivity {
    Drude(DrudeModel),
    Plasma(PlasmaModel),
    GeneralizedPlasma(GeneralizedPlasmaModel),
    Table(OpticalTable),
}

/// How a permittivity behaves as ξ → 0, which fixes the l = 0 reflection
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroFrequency {
    /// ε ∝ 1/ξ: TM fully reflected, TE reflection set by μ(0) alone.
    Dissipative,
    /// ε ≈ ω_p²/ξ²: TE reflection keeps a k⊥-dependent value.
    PlasmaPole { plasma_frequency: f64 },
}

impl Permittivity {
    pub fn eps_imag(&self, xi: f64) -> Result<f64> {
        match self {
            Permittivity::Drude(m) => m.eps_imag(xi),
            Permittivity::Plasma(m) => m.eps_imag(xi),
            Permittivity::GeneralizedPlasma(m) => m.eps_imag(xi),
            Permittivity::Table(t) => t.eps_imag(xi),
        }
    }

    pub fn zero_frequency(&self) -> Result<ZeroFrequency> {
        match self {
            Permittivity::Drude(_) => Ok(ZeroFrequency::Dissipative),
            Permittivity::Plasma(m) => Ok(ZeroFrequency::PlasmaPole {
                plasma_frequency: m.plasma_frequency,
            }),
            Permittivity::GeneralizedPlasma(m) => Ok(ZeroFrequency::PlasmaPole {
                plasma_frequency: m.plasma_frequency,
            }),
            Permittivity::Table(t) => match t.extrapolation {
                Some(Extrapolation::Drude(_)) => Ok(ZeroFrequency::Dissipative),
                Some(Extrapolation::Plasma(p)) => Ok(ZeroFrequency::PlasmaPole {
                    plasma_frequency: p.plasma_frequency,
                }),
                None => Err(Error::Config(
                    "optical table without a low-frequency extrapolation has no defined \
                     zero-frequency limit"
                        .into(),
                )),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Permittivity::Drude(m) => m.validate(),
            Permittivity::Plasma(m) => m.validate(),
            Permittivity::GeneralizedPlasma(m) => m.validate(),
            Permittivity::Table(t) => t.validate(),
        }
    }
}

/// A body's electromagnetic response: one permittivity model plus μ(0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub permittivity: Permittivity,
    #[serde(default)]
    pub magnetic: MagneticResponse,
}

impl Material {
    pub fn new(permittivity: Permittivity, magnetic: MagneticResponse) -> Result<Self> {
        let m = Self {
            permittivity,
            magnetic,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn nonmagnetic(permittivity: Permittivity) -> Result<Self> {
        Self::new(permittivity, MagneticResponse::NONMAGNETIC)
    }

    pub fn validate(&self) -> Result<()> {
        self.permittivity.validate()?;
        self.magnetic.validate()
    }

    pub fn eps_imag(&self, xi: f64) -> Result<f64> {
        self.permittivity.eps_imag(xi)
    }

    pub fn mu_imag(&self, l: i64) -> Result<f64> {
        self.magnetic.mu_imag(l)
    }
}

/// Reference parameters used throughout the examples and fixtures.
pub mod presets {
    use super::*;

    /// Ni: ω_p = 4.89 eV, γ = 0.0436 eV.
    pub const NI_DRUDE: DrudeModel = DrudeModel {
        plasma_frequency: 4.89,
        relaxation: 0.0436,
    };
    pub const NI_PLASMA: PlasmaModel = PlasmaModel {
        plasma_frequency: 4.89,
    };
    /// μ^Ni(0) = 110.
    pub const NI_MAGNETIC: MagneticResponse = MagneticResponse {
        static_permeability: 110.0,
    };

    /// Au: ω_p = 9.0 eV, γ = 0.035 eV.
    pub const AU_DRUDE: DrudeModel = DrudeModel {
        plasma_frequency: 9.0,
        relaxation: 0.035,
    };
    pub const AU_PLASMA: PlasmaModel = PlasmaModel {
        plasma_frequency: 9.0,
    };

    pub fn ni_drude() -> Material {
        Material {
            permittivity: Permittivity::Drude(NI_DRUDE),
            magnetic: NI_MAGNETIC,
        }
    }

    pub fn ni_plasma() -> Material {
        Material {
            permittivity: Permittivity::Plasma(NI_PLASMA),
            magnetic: NI_MAGNETIC,
        }
    }

    pub fn au_drude() -> Material {
        Material {
            permittivity: Permittivity::Drude(AU_DRUDE),
            magnetic: MagneticResponse::NONMAGNETIC,
        }
    }

    pub fn au_plasma() -> Material {
        Material {
            permittivity: Permittivity::Plasma(AU_PLASMA),
            magnetic: MagneticResponse::NONMAGNETIC,
        }
    }
}
