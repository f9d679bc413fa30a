//! The γ → 0 limit of the Drude model on the real frequency axis.
//!
//! For ω > 0 the Drude permittivity tends to the plasma form 1 − ω_p²/ω² with
//! vanishing loss. At ω = 0 it does not: Im ε keeps a 1/ω pole whose residue
//! ω_p²/γ grows without bound, so the γ → 0 Drude limit is not a
//! dissipationless permittivity there.

use serde::{Deserialize, Serialize};

use super::DrudeModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationDiagnostic {
    pub omega: f64,
    pub gammas: Vec<f64>,
    /// Re ε_D(ω) for each γ. Absent at ω = 0 with ω_p > 0, where it is −∞-bound.
    pub real_part_trend: Vec<Option<f64>>,
    /// 1 − ω_p²/ω² for ω > 0; 1 when ω_p = 0; absent when divergent.
    pub real_part_limit: Option<f64>,
    /// Im ε_D(ω) for ω > 0. At ω = 0 the residue ω_p²/γ of the 1/ω pole.
    pub imag_part_trend: Vec<f64>,
    /// True when the imaginary part grows without bound as γ → 0.
    pub divergent: bool,
}

/// Evaluates ε_D(ω) along `gammas` (which should decrease towards 0) with the
/// plasma frequency of `model`; the model's own γ is ignored.
pub fn drude_zero_dissipation_diagnostic(
    model: &DrudeModel,
    omega: f64,
    gammas: &[f64],
) -> DissipationDiagnostic {
    let wp2 = model.plasma_frequency * model.plasma_frequency;
    let at_zero = omega == 0.0;
    let divergent = at_zero && wp2 > 0.0;

    let real_part_trend = gammas
        .iter()
        .map(|&g| {
            if divergent {
                None
            } else {
                Some(1.0 - wp2 / (omega * omega + g * g))
            }
        })
        .collect();
    let imag_part_trend = gammas
        .iter()
        .map(|&g| {
            if wp2 == 0.0 {
                0.0
            } else if at_zero {
                wp2 / g
            } else {
                wp2 * g / (omega * (omega * omega + g * g))
            }
        })
        .collect();
    let real_part_limit = if wp2 == 0.0 {
        Some(1.0)
    } else if at_zero {
        None
    } else {
        Some(1.0 - wp2 / (omega * omega))
    };

    DissipationDiagnostic {
        omega,
        gammas: gammas.to_vec(),
        real_part_trend,
        real_part_limit,
        imag_part_trend,
        divergent,
    }
}
