//! Permittivity at imaginary frequency from tabulated optical constants.
//!
//! Im ε(ω) = 2 n₁ n₂ is integrated through the Kramers-Kronig relation
//!
//! ```text
//! ε(iξ) = 1 + (2/π) ∫₀^∞ ω Im ε(ω) / (ω² + ξ²) dω
//! ```
//!
//! in three pieces: a closed-form head below the first table frequency (from
//! the chosen extrapolation), the tabulated range integrated in ln ω, and a
//! closed-form ω⁻³ tail above the last table frequency. With a plasma
//! extrapolation the table holds core-electron data only, Im ε is zero below
//! the table and the free-electron pole ω_p²/ξ² is added explicitly.

use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use super::{check_xi, DrudeModel, PlasmaModel};
use crate::error::{Error, Result};

/// Relative tolerance of the per-interval adaptive quadrature.
pub const KK_RELATIVE_TOLERANCE: f64 = 1e-4;

const MAX_REFINEMENT_LEVEL: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalRow {
    /// ω in eV.
    pub frequency: f64,
    pub n1: f64,
    pub n2: f64,
}

impl OpticalRow {
    pub fn im_eps(&self) -> f64 {
        2.0 * self.n1 * self.n2
    }
}

/// Low-frequency continuation of the tabulated data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Extrapolation {
    Drude(DrudeModel),
    Plasma(PlasmaModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalTable {
    pub rows: Vec<OpticalRow>,
    pub extrapolation: Option<Extrapolation>,
}

impl OpticalTable {
    pub fn new(rows: Vec<OpticalRow>, extrapolation: Option<Extrapolation>) -> Result<Self> {
        let table = Self {
            rows,
            extrapolation,
        };
        table.validate()?;
        Ok(table)
    }

    /// Builds a table from (ω, Im ε) samples with n₁ = 1, n₂ = Im ε / 2.
    pub fn from_im_eps(
        samples: impl IntoIterator<Item = (f64, f64)>,
        extrapolation: Option<Extrapolation>,
    ) -> Result<Self> {
        let rows = samples
            .into_iter()
            .map(|(frequency, im_eps)| OpticalRow {
                frequency,
                n1: 1.0,
                n2: im_eps / 2.0,
            })
            .collect();
        Self::new(rows, extrapolation)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Input("optical table is empty".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !(row.frequency > 0.0 && row.frequency.is_finite()) {
                return Err(Error::Input(format!(
                    "optical table row {}: frequency must be > 0, got {}",
                    i + 1,
                    row.frequency
                )));
            }
            if !(row.n1 > 0.0 && row.n1.is_finite()) {
                return Err(Error::Input(format!(
                    "optical table row {}: n1 must be > 0, got {}",
                    i + 1,
                    row.n1
                )));
            }
            if !(row.n2 >= 0.0 && row.n2.is_finite()) {
                return Err(Error::Input(format!(
                    "optical table row {}: n2 must be >= 0, got {}",
                    i + 1,
                    row.n2
                )));
            }
        }
        if let Some(i) = self
            .rows
            .windows(2)
            .position(|w| w[1].frequency <= w[0].frequency)
        {
            return Err(Error::Input(format!(
                "optical table frequencies must be strictly increasing (row {} -> {})",
                i + 1,
                i + 2
            )));
        }
        if let Some(e) = &self.extrapolation {
            match e {
                Extrapolation::Drude(d) => d.validate()?,
                Extrapolation::Plasma(p) => p.validate()?,
            }
        }
        Ok(())
    }

    pub fn min_frequency(&self) -> f64 {
        self.rows[0].frequency
    }

    pub fn max_frequency(&self) -> f64 {
        self.rows[self.rows.len() - 1].frequency
    }

    /// ε(iξ) via the Kramers-Kronig relation.
    pub fn eps_imag(&self, xi: f64) -> Result<f64> {
        check_xi(xi)?;
        if self.rows.is_empty() {
            return Err(Error::Input("optical table is empty".into()));
        }
        let integral = self.head_integral(xi) + self.table_integral(xi) + self.tail_integral(xi);
        Ok(1.0 + self.pole_term(xi) + FRAC_2_PI * integral)
    }

    fn pole_term(&self, xi: f64) -> f64 {
        match &self.extrapolation {
            Some(Extrapolation::Plasma(p)) => p.pole_term(xi),
            _ => 0.0,
        }
    }

    /// ∫₀^{ω_min} ω Im ε_D(ω)/(ω² + ξ²) dω for the Drude continuation.
    fn head_integral(&self, xi: f64) -> f64 {
        let Some(Extrapolation::Drude(d)) = &self.extrapolation else {
            return 0.0;
        };
        let wp2 = d.plasma_frequency * d.plasma_frequency;
        let g = d.relaxation;
        let w = self.min_frequency();
        // ∫₀^W dω / ((ω²+γ²)(ω²+ξ²)) = [F(γ) − F(ξ)] / (ξ² − γ²), F(c) = atan(W/c)/c
        let f = |c: f64| (w / c).atan() / c;
        let value = if (xi - g).abs() > 1e-4 * g {
            (f(g) - f(xi)) / (xi * xi - g * g)
        } else {
            // limit ξ → γ: −F'(c)/(2c)
            let c = 0.5 * (xi + g);
            let df = -w / (c * (c * c + w * w)) - (w / c).atan() / (c * c);
            -df / (2.0 * c)
        };
        wp2 * g * value
    }

    /// ∫_{ω_max}^∞ with Im ε continued as Im ε(ω_max)·(ω_max/ω)³.
    fn tail_integral(&self, xi: f64) -> f64 {
        let last = self.rows[self.rows.len() - 1];
        let a = last.im_eps();
        if a == 0.0 {
            return 0.0;
        }
        let w = last.frequency;
        let x = xi / w;
        // A W²/ξ² (1 − atan(x)/x)
        let bracket_over_x2 = if x < 1e-3 {
            let x2 = x * x;
            1.0 / 3.0 - x2 / 5.0 + x2 * x2 / 7.0
        } else {
            (1.0 - x.atan() / x) / (x * x)
        };
        a * bracket_over_x2
    }

    fn table_integral(&self, xi: f64) -> f64 {
        self.rows
            .windows(2)
            .map(|w| interval_integral(w[0], w[1], xi))
            .sum()
    }
}

/// Integrand in u = ln ω: ω² Im ε(ω) / (ω² + ξ²), with Im ε interpolated as a
/// power law between positive samples and linearly in u otherwise.
fn interval_integral(lo: OpticalRow, hi: OpticalRow, xi: f64) -> f64 {
    let (u0, u1) = (lo.frequency.ln(), hi.frequency.ln());
    let (g0, g1) = (lo.im_eps(), hi.im_eps());
    if g0 == 0.0 && g1 == 0.0 {
        return 0.0;
    }
    let power_law = g0 > 0.0 && g1 > 0.0;
    let (lg0, lg1) = if power_law {
        (g0.ln(), g1.ln())
    } else {
        (0.0, 0.0)
    };
    let xi2 = xi * xi;
    let integrand = |u: f64| {
        let t = (u - u0) / (u1 - u0);
        let g = if power_law {
            (lg0 + t * (lg1 - lg0)).exp()
        } else {
            g0 + t * (g1 - g0)
        };
        let w2 = (2.0 * u).exp();
        w2 * g / (w2 + xi2)
    };
    adaptive_trapezoid(integrand, u0, u1)
}

/// Trapezoid refinement by interval halving, Richardson-extrapolated once the
/// successive estimates agree to [`KK_RELATIVE_TOLERANCE`].
fn adaptive_trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mut h = b - a;
    let mut estimate = 0.5 * h * (f(a) + f(b));
    let mut n = 1usize;
    for level in 1..=MAX_REFINEMENT_LEVEL {
        h *= 0.5;
        let mids: f64 = (0..n).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        let refined = 0.5 * estimate + h * mids;
        n *= 2;
        let change = (refined - estimate).abs();
        let previous = estimate;
        estimate = refined;
        if level >= 2 && change <= KK_RELATIVE_TOLERANCE * refined.abs() {
            return (4.0 * refined - previous) / 3.0;
        }
    }
    estimate
}
