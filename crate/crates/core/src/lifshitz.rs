//! Thermal Casimir pressure between parallel plates and the PFA force gradient
//! between a sphere and a plate.
//!
//! The pressure is the Matsubara sum of the Lifshitz formula,
//!
//! ```text
//! P(a,T) = −(k_B T/π) Σ'_l ∫₀^∞ k⊥ dk⊥ q_l Σ_α r_α¹ r_α² e^{−2aq_l} / (1 − r_α¹ r_α² e^{−2aq_l})
//! ```
//!
//! integrated in y = 2a q_l over (2aξ_l/c, ∞), where k⊥ dk⊥ q_l = y² dy/(8a³).
//! The l = 0 term uses the closed-form ξ → 0 reflection coefficients of each
//! material class, since the Drude/plasma difference lives there.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dielectric::{Material, ZeroFrequency};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::units::{matsubara_frequency, EV_PER_NM3_IN_PA, HBAR_C_EV_NM, K_B_EV_PER_K};

/// Panel boundaries in t = y − y_l. The integrand decays as e^{−t}; the
/// remainder past the last boundary is below 1e-25 of the leading term.
const PANEL_EDGES: [f64; 10] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

const MAX_MATSUBARA_TERMS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub sphere_radius_um: f64,
    pub separation_nm: f64,
}

impl Geometry {
    pub fn new(sphere_radius_um: f64, separation_nm: f64) -> Result<Self> {
        if !(sphere_radius_um > 0.0 && sphere_radius_um.is_finite()) {
            return Err(Error::Input(format!(
                "sphere radius must be > 0, got {sphere_radius_um} um"
            )));
        }
        check_separation(separation_nm)?;
        if separation_nm > sphere_radius_um * 1e3 / 20.0 {
            warn!(
                "separation {separation_nm} nm is not small against R = {sphere_radius_um} um; \
                 proximity force approximation is unreliable"
            );
        }
        Ok(Self {
            sphere_radius_um,
            separation_nm,
        })
    }
}

fn check_separation(a_nm: f64) -> Result<()> {
    if a_nm > 0.0 && a_nm.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "separation must be > 0, got {a_nm} nm"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub temperature_k: f64,
}

impl ThermalState {
    pub fn new(temperature_k: f64) -> Result<Self> {
        if temperature_k > 0.0 && temperature_k.is_finite() {
            Ok(Self { temperature_k })
        } else {
            Err(Error::Input(format!(
                "temperature must be > 0, got {temperature_k} K"
            )))
        }
    }

    pub fn matsubara(&self, l: u32) -> f64 {
        matsubara_frequency(self.temperature_k, l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Terms are summed while 2aξ_l/c ≤ this factor.
    pub matsubara_cutoff_factor: f64,
    /// Gauss-Legendre nodes per integration panel.
    pub k_nodes: usize,
    pub relative_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            matsubara_cutoff_factor: 30.0,
            k_nodes: 24,
            relative_tolerance: 1e-4,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.matsubara_cutoff_factor > 0.0 && self.matsubara_cutoff_factor.is_finite()) {
            return Err(Error::Config(format!(
                "matsubara_cutoff_factor must be > 0, got {}",
                self.matsubara_cutoff_factor
            )));
        }
        if self.k_nodes == 0 {
            return Err(Error::Config("k_nodes must be > 0".into()));
        }
        if !(self.relative_tolerance > 0.0 && self.relative_tolerance <= 1e-2) {
            return Err(Error::Config(format!(
                "relative_tolerance must lie in (0, 1e-2], got {}",
                self.relative_tolerance
            )));
        }
        Ok(())
    }
}

/// Reflection coefficients (r_TM, r_TE) at the l-th Matsubara frequency
/// `xi_l` (eV) and in-plane wave number `k_perp` (nm⁻¹).
pub fn reflection_coefficients(
    material: &Material,
    l: u32,
    xi_l: f64,
    k_perp: f64,
) -> Result<(f64, f64)> {
    if !(k_perp > 0.0 && k_perp.is_finite()) {
        return Err(Error::Domain(format!("k_perp must be > 0, got {k_perp}")));
    }
    let response = TermResponse::for_material(material, l, xi_l)?;
    let kappa = xi_l / HBAR_C_EV_NM;
    let q = (k_perp * k_perp + kappa * kappa).sqrt();
    // Lengths cancel in the ratios, so any common scale works: use y = q, y_l = ξ/c.
    Ok(response.reflection(q, kappa))
}

/// One material's response at a single Matsubara frequency, in the form the
/// y-integrand needs.
#[derive(Debug, Clone, Copy)]
enum TermResponse {
    Finite {
        eps: f64,
        mu: f64,
    },
    ZeroDissipative {
        mu: f64,
    },
    /// `pole` is ω_p/c in the same inverse-length unit as the wave numbers.
    ZeroPlasma {
        mu: f64,
        pole: f64,
    },
}

impl TermResponse {
    fn for_material(material: &Material, l: u32, xi_l: f64) -> Result<Self> {
        let mu = material.mu_imag(i64::from(l))?;
        if l == 0 {
            return Ok(match material.permittivity.zero_frequency()? {
                ZeroFrequency::Dissipative => TermResponse::ZeroDissipative { mu },
                ZeroFrequency::PlasmaPole { plasma_frequency } => TermResponse::ZeroPlasma {
                    mu,
                    pole: plasma_frequency / HBAR_C_EV_NM,
                },
            });
        }
        let eps = material.eps_imag(xi_l)?;
        Ok(TermResponse::Finite { eps, mu })
    }

    /// Rescales stored wave numbers by `scale` (used to move to y = 2aq).
    fn scaled(self, scale: f64) -> Self {
        match self {
            TermResponse::ZeroPlasma { mu, pole } => TermResponse::ZeroPlasma {
                mu,
                pole: pole * scale,
            },
            other => other,
        }
    }

    /// (r_TM, r_TE) with `y` the normal wave number in vacuum and `y_l` = ξ_l/c,
    /// both in the same units.
    fn reflection(&self, y: f64, y_l: f64) -> (f64, f64) {
        match *self {
            TermResponse::Finite { eps, mu } => {
                let k = (y * y + (eps * mu - 1.0) * y_l * y_l).sqrt();
                let tm = (eps * y - k) / (eps * y + k);
                let te = (mu * y - k) / (mu * y + k);
                (tm, te)
            }
            TermResponse::ZeroDissipative { mu } => (1.0, (mu - 1.0) / (mu + 1.0)),
            TermResponse::ZeroPlasma { mu, pole } => {
                let k = (y * y + mu * pole * pole).sqrt();
                (1.0, (mu * y - k) / (mu * y + k))
            }
        }
    }
}

/// ∫_{y_l}^∞ y² Σ_α r¹r² e^{−y}/(1 − r¹r² e^{−y}) dy.
fn term_integral(first: TermResponse, second: TermResponse, y_l: f64, rule: &GaussLegendre) -> f64 {
    let integrand = |t: f64| {
        let y = y_l + t;
        let (tm1, te1) = first.reflection(y, y_l);
        let (tm2, te2) = second.reflection(y, y_l);
        let decay = (-y).exp();
        let mode = |r: f64| {
            let x = r * decay;
            x / (1.0 - x)
        };
        y * y * (mode(tm1 * tm2) + mode(te1 * te2))
    };
    PANEL_EDGES
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], integrand))
        .sum()
}

/// Pressure together with what the convergence check saw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureEvaluation {
    pub pressure_pa: f64,
    pub matsubara_terms: usize,
    /// |S(cutoff) − S(cutoff/2)| / |S(cutoff)|.
    pub truncation_change: f64,
}

/// Casimir pressure between two plates in Pa (negative means attraction).
pub fn plate_pressure(
    first: &Material,
    second: &Material,
    separation_nm: f64,
    thermal: ThermalState,
    config: &QuadratureConfig,
) -> Result<f64> {
    plate_pressure_evaluation(first, second, separation_nm, thermal, config).map(|e| e.pressure_pa)
}

pub fn plate_pressure_evaluation(
    first: &Material,
    second: &Material,
    separation_nm: f64,
    thermal: ThermalState,
    config: &QuadratureConfig,
) -> Result<PressureEvaluation> {
    check_separation(separation_nm)?;
    config.validate()?;
    let a = separation_nm;
    // y_l = 2aξ_l/c
    let y_scale = 2.0 * a / HBAR_C_EV_NM;
    let y1 = y_scale * thermal.matsubara(1);
    let cutoff = config.matsubara_cutoff_factor;
    let terms = (cutoff / y1).floor() as usize + 1;
    if terms > MAX_MATSUBARA_TERMS {
        return Err(Error::Numerical {
            message: "Matsubara sum needs too many terms".into(),
            diagnostics: format!(
                "T = {} K, a = {a} nm: {terms} terms above the limit {MAX_MATSUBARA_TERMS}",
                thermal.temperature_k
            ),
        });
    }
    let rule = GaussLegendre::new(config.k_nodes);

    let values: Vec<f64> = (0..terms)
        .into_par_iter()
        .map(|l| -> Result<f64> {
            let l = l as u32;
            let xi = thermal.matsubara(l);
            let y_l = y_scale * xi;
            let r1 = TermResponse::for_material(first, l, xi)?.scaled(2.0 * a);
            let r2 = TermResponse::for_material(second, l, xi)?.scaled(2.0 * a);
            let value = term_integral(r1, r2, y_l, &rule);
            Ok(if l == 0 { 0.5 * value } else { value })
        })
        .collect::<Result<_>>()?;

    // Sequential reduction keeps the result independent of the thread count.
    let half_terms = ((0.5 * cutoff / y1).floor() as usize + 1).min(terms);
    let half_sum: f64 = values[..half_terms].iter().sum();
    let full_sum: f64 = half_sum + values[half_terms..].iter().sum::<f64>();
    let truncation_change = if full_sum != 0.0 {
        ((full_sum - half_sum) / full_sum).abs()
    } else {
        0.0
    };
    if !full_sum.is_finite() || truncation_change > config.relative_tolerance {
        return Err(Error::Numerical {
            message: "Matsubara sum did not converge within the cutoff".into(),
            diagnostics: format!(
                "a = {a} nm, T = {} K, {terms} terms, relative change from half cutoff {truncation_change:.3e} > {:.1e}",
                thermal.temperature_k, config.relative_tolerance
            ),
        });
    }

    let kt = K_B_EV_PER_K * thermal.temperature_k;
    let pressure_ev_nm3 = -kt / std::f64::consts::PI * full_sum / (8.0 * a * a * a);
    Ok(PressureEvaluation {
        pressure_pa: pressure_ev_nm3 * EV_PER_NM3_IN_PA,
        matsubara_terms: terms,
        truncation_change,
    })
}

/// PFA force gradient F′ = 2πR|P| in μN/m, reported as a positive magnitude.
pub fn force_gradient(
    sphere: &Material,
    plate: &Material,
    geometry: Geometry,
    thermal: ThermalState,
    config: &QuadratureConfig,
) -> Result<f64> {
    let p = plate_pressure(sphere, plate, geometry.separation_nm, thermal, config)?;
    // R [μm]·1e-6 · |P| [Pa] gives N/m; ×1e6 for μN/m.
    Ok(2.0 * std::f64::consts::PI * geometry.sphere_radius_um * p.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    pub separation_nm: f64,
    /// μN/m
    pub gradient: f64,
    /// μN/m
    pub theory_error: f64,
}

/// Force gradients with theoretical errors on a separation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryCurve {
    pub model_label: String,
    pub points: Vec<TheoryPoint>,
    /// Set when the values were interpolated from an external curve.
    #[serde(default)]
    pub interpolated: bool,
}

impl TheoryCurve {
    pub fn new(model_label: impl Into<String>, points: Vec<TheoryPoint>) -> Result<Self> {
        let curve = Self {
            model_label: model_label.into(),
            points,
            interpolated: false,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Input(format!(
                "theory curve '{}' has no points",
                self.model_label
            )));
        }
        for (i, p) in self.points.iter().enumerate() {
            if !(p.theory_error >= 0.0) || !p.gradient.is_finite() {
                return Err(Error::Input(format!(
                    "theory curve '{}' point {}: invalid gradient or negative error",
                    self.model_label,
                    i + 1
                )));
            }
        }
        if let Some(i) = self
            .points
            .windows(2)
            .position(|w| w[1].separation_nm <= w[0].separation_nm)
        {
            return Err(Error::Input(format!(
                "theory curve '{}': separations not strictly increasing at point {}",
                self.model_label,
                i + 2
            )));
        }
        Ok(())
    }

    pub fn separations(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.separation_nm).collect()
    }
}

/// How the theoretical error Δ^tot F′_theor is attached to each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryErrorSpec {
    /// A fixed percentage of the computed gradient.
    Percent(f64),
    /// Absolute errors in μN/m, one per grid point.
    PerPoint(Vec<f64>),
}

impl TheoryErrorSpec {
    fn errors(&self, gradients: &[f64]) -> Result<Vec<f64>> {
        match self {
            TheoryErrorSpec::Percent(pct) => {
                if !(*pct >= 0.0 && pct.is_finite()) {
                    return Err(Error::Config(format!(
                        "theory error percentage must be >= 0, got {pct}"
                    )));
                }
                Ok(gradients.iter().map(|g| g.abs() * pct / 100.0).collect())
            }
            TheoryErrorSpec::PerPoint(errors) => {
                if errors.len() != gradients.len() {
                    return Err(Error::Input(format!(
                        "per-point theory errors: {} values for {} grid points",
                        errors.len(),
                        gradients.len()
                    )));
                }
                if let Some(i) = errors.iter().position(|e| !(*e >= 0.0)) {
                    return Err(Error::Input(format!(
                        "per-point theory error {} is negative",
                        i + 1
                    )));
                }
                Ok(errors.clone())
            }
        }
    }
}

/// Everything besides the material pair that fixes a theory curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSetup {
    pub sphere_radius_um: f64,
    pub thermal: ThermalState,
    pub quadrature: QuadratureConfig,
    pub error_spec: TheoryErrorSpec,
    /// Multiplicative roughness correction, 1.0 for none.
    pub roughness_factor: f64,
}

/// Evaluates [`force_gradient`] on every grid separation (in parallel, collected
/// in grid order) and attaches theory errors.
pub fn theory_curve(
    label: impl Into<String>,
    sphere: &Material,
    plate: &Material,
    grid_nm: &[f64],
    setup: &CurveSetup,
) -> Result<TheoryCurve> {
    if grid_nm.is_empty() {
        return Err(Error::Input("separation grid is empty".into()));
    }
    if let Some(i) = grid_nm.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Input(format!(
            "separation grid not strictly increasing at index {}",
            i + 1
        )));
    }
    if !(setup.roughness_factor > 0.0 && setup.roughness_factor.is_finite()) {
        return Err(Error::Config(format!(
            "roughness factor must be > 0, got {}",
            setup.roughness_factor
        )));
    }
    let thermal = setup.thermal;
    let gradients: Vec<f64> = grid_nm
        .par_iter()
        .map(|&a| {
            let geometry = Geometry::new(setup.sphere_radius_um, a)?;
            force_gradient(sphere, plate, geometry, thermal, &setup.quadrature)
                .map(|g| g * setup.roughness_factor)
        })
        .collect::<Result<_>>()?;
    let errors = setup.error_spec.errors(&gradients)?;
    let points = grid_nm
        .iter()
        .zip(gradients.iter().zip(errors))
        .map(|(&a, (&g, e))| TheoryPoint {
            separation_nm: a,
            gradient: g,
            theory_error: e,
        })
        .collect();
    TheoryCurve::new(label, points)
}
