//! Run configuration: a TOML file naming materials and analysis parameters.
//!
//! ```toml
//! beta_grid = [0.05, 0.10, 0.20, 0.33, 0.67, 0.95]
//! window = 10
//! theory_error = { percent = 0.5 }
//!
//! [quadrature]
//! k_nodes = 32
//!
//! [materials.Cu]
//! static_permeability = 1.0
//! drude = { plasma_frequency = 8.9, relaxation = 0.030 }
//! plasma = { plasma_frequency = 8.9 }
//! ```
//!
//! Materials from the file are added to (or replace) the built-in `Au`, `Ni`
//! and `ideal`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use casimir_core::data;
use casimir_core::dielectric::{
    presets, DrudeModel, Extrapolation, GeneralizedPlasmaModel, MagneticResponse, Material,
    Oscillator, Permittivity, PlasmaModel,
};
use casimir_core::lifshitz::{QuadratureConfig, TheoryErrorSpec};
use casimir_core::{Error, Result};
use serde::Deserialize;

pub const FIXTURE_DIR_ENV: &str = "CASIMIR_FIXTURE_DIR";

const BUILTIN_NI_OSCILLATORS: &str = include_str!("../../core/fixtures/ni_oscillators.csv");

/// Directory searched for relative input paths that do not exist as given.
pub fn fixture_dir() -> PathBuf {
    std::env::var_os(FIXTURE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures"))
}

pub fn resolve_input(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    let candidate = fixture_dir().join(path);
    if candidate.exists() {
        candidate
    } else {
        path.to_path_buf()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum TheoryErrorConfig {
    Percent { percent: f64 },
    File { file: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub file: PathBuf,
    /// `drude`, `plasma` or `none`; the parameters come from the material's
    /// own drude/plasma entries.
    #[serde(default = "default_extrapolation")]
    pub extrapolation: String,
}

fn default_extrapolation() -> String {
    "drude".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralizedSpec {
    pub plasma_frequency: f64,
    #[serde(default)]
    pub oscillators: Vec<Oscillator>,
    pub oscillators_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    #[serde(default)]
    pub static_permeability: Option<f64>,
    pub drude: Option<DrudeModel>,
    pub plasma: Option<PlasmaModel>,
    pub generalized_plasma: Option<GeneralizedSpec>,
    pub table: Option<TableSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub materials: BTreeMap<String, MaterialSpec>,
    pub quadrature: QuadratureConfig,
    pub beta_grid: Vec<f64>,
    pub window: usize,
    pub theory_error: TheoryErrorConfig,
    pub fold_separation_error: bool,
    pub roughness_factor: f64,
    /// Used by `theory`; `compare` takes R and T from the dataset.
    pub sphere_radius_um: f64,
    pub temperature_k: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            materials: BTreeMap::new(),
            quadrature: QuadratureConfig::default(),
            beta_grid: vec![0.05, 0.10, 0.20, 0.33, 0.67, 0.95],
            window: 10,
            theory_error: TheoryErrorConfig::Percent { percent: 0.5 },
            fold_separation_error: false,
            roughness_factor: 1.0,
            sphere_radius_um: 61.71,
            temperature_k: 300.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let config = match path {
            None => Self::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("cannot read config {}: {e}", path.display()))
                })?;
                toml::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta_grid.is_empty()
            || self.beta_grid.iter().any(|b| !(*b > 0.0 && *b < 1.0))
            || self.beta_grid.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(Error::Config(format!(
                "beta_grid must be strictly increasing within (0, 1), got {:?}",
                self.beta_grid
            )));
        }
        if self.window < casimir_core::stats::MIN_WINDOW {
            return Err(Error::Config(format!(
                "window must be >= {}, got {}",
                casimir_core::stats::MIN_WINDOW,
                self.window
            )));
        }
        if let TheoryErrorConfig::Percent { percent } = self.theory_error {
            if !(percent >= 0.0 && percent.is_finite()) {
                return Err(Error::Config(format!(
                    "theory_error percent must be >= 0, got {percent}"
                )));
            }
        }
        if !(self.roughness_factor > 0.0 && self.roughness_factor.is_finite()) {
            return Err(Error::Config(format!(
                "roughness_factor must be > 0, got {}",
                self.roughness_factor
            )));
        }
        self.quadrature.validate()
    }

    pub fn theory_error_spec(&self, grid_nm: &[f64]) -> Result<TheoryErrorSpec> {
        match &self.theory_error {
            TheoryErrorConfig::Percent { percent } => Ok(TheoryErrorSpec::Percent(*percent)),
            TheoryErrorConfig::File { file } => Ok(TheoryErrorSpec::PerPoint(
                data::load_error_profile(resolve_input(file), grid_nm)?,
            )),
        }
    }

    fn material_spec(&self, name: &str) -> Result<MaterialSpec> {
        if let Some(spec) = self.materials.get(name) {
            return Ok(spec.clone());
        }
        builtin(name).ok_or_else(|| {
            let mut known: Vec<String> = ["Au", "Ni", "ideal"].map(String::from).to_vec();
            known.extend(self.materials.keys().cloned());
            known.sort();
            known.dedup();
            Error::Config(format!(
                "unknown material '{name}' (known: {})",
                known.join(", ")
            ))
        })
    }

    /// Builds material `name` under the response model `model`.
    pub fn material(&self, name: &str, model: Model) -> Result<Material> {
        let spec = self.material_spec(name)?;
        let magnetic = match spec.static_permeability {
            Some(mu) => MagneticResponse::new(mu)?,
            None => MagneticResponse::NONMAGNETIC,
        };
        let missing = || {
            Error::Config(format!(
                "material '{name}' has no {} parameters",
                model.name()
            ))
        };
        let permittivity = match model {
            Model::Drude => Permittivity::Drude(spec.drude.ok_or_else(missing)?),
            Model::Plasma => Permittivity::Plasma(spec.plasma.ok_or_else(missing)?),
            Model::GeneralizedPlasma => {
                let g = spec.generalized_plasma.ok_or_else(missing)?;
                let mut oscillators = g.oscillators;
                if let Some(file) = &g.oscillators_file {
                    oscillators.extend(data::load_oscillators(resolve_input(file))?);
                }
                Permittivity::GeneralizedPlasma(GeneralizedPlasmaModel::new(
                    g.plasma_frequency,
                    oscillators,
                )?)
            }
            Model::Table => {
                let t = spec.table.ok_or_else(missing)?;
                let extrapolation = match t.extrapolation.as_str() {
                    "drude" => Some(Extrapolation::Drude(spec.drude.ok_or_else(|| {
                        Error::Config(format!(
                            "material '{name}': drude extrapolation needs drude parameters"
                        ))
                    })?)),
                    "plasma" => Some(Extrapolation::Plasma(spec.plasma.ok_or_else(|| {
                        Error::Config(format!(
                            "material '{name}': plasma extrapolation needs plasma parameters"
                        ))
                    })?)),
                    "none" => None,
                    other => {
                        return Err(Error::Config(format!(
                            "material '{name}': unknown extrapolation '{other}'"
                        )))
                    }
                };
                Permittivity::Table(data::load_optical_table(
                    resolve_input(&t.file),
                    extrapolation,
                )?)
            }
        };
        Material::new(permittivity, magnetic).map_err(|e| match e {
            Error::Domain(m) | Error::Input(m) => Error::Config(format!("material '{name}': {m}")),
            other => other,
        })
    }
}

fn builtin(name: &str) -> Option<MaterialSpec> {
    match name {
        "Au" => Some(MaterialSpec {
            static_permeability: None,
            drude: Some(presets::AU_DRUDE),
            plasma: Some(presets::AU_PLASMA),
            ..MaterialSpec::default()
        }),
        "Ni" => Some(MaterialSpec {
            static_permeability: Some(presets::NI_MAGNETIC.static_permeability),
            drude: Some(presets::NI_DRUDE),
            plasma: Some(presets::NI_PLASMA),
            generalized_plasma: Some(GeneralizedSpec {
                plasma_frequency: presets::NI_PLASMA.plasma_frequency,
                oscillators: data::parse_oscillators(BUILTIN_NI_OSCILLATORS)
                    .expect("bundled oscillator table is valid"),
                oscillators_file: None,
            }),
            table: None,
        }),
        // plasma frequency far above every Matsubara frequency that matters
        "ideal" => Some(MaterialSpec {
            plasma: Some(PlasmaModel {
                plasma_frequency: 1.0e5,
            }),
            ..MaterialSpec::default()
        }),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Model {
    Drude,
    Plasma,
    GeneralizedPlasma,
    Table,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Drude => "drude",
            Model::Plasma => "plasma",
            Model::GeneralizedPlasma => "generalized_plasma",
            Model::Table => "table",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "drude" => Ok(Model::Drude),
            "plasma" => Ok(Model::Plasma),
            "generalized_plasma" => Ok(Model::GeneralizedPlasma),
            "table" => Ok(Model::Table),
            _ => Err(format!(
                "unknown model '{s}' (expected drude, plasma, generalized_plasma or table)"
            )),
        }
    }
}

/// `Au:Ni` → sphere material `Au`, plate material `Ni`.
pub fn parse_pair(pair: &str) -> Result<(String, String)> {
    match pair.split_once(':') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
            Ok((a.trim().to_string(), b.trim().to_string()))
        }
        _ => Err(Error::Config(format!(
            "material pair must look like SPHERE:PLATE, got '{pair}'"
        ))),
    }
}

/// `from:to:step` (inclusive) or a comma-separated list of separations in nm.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Config(format!("grid '{spec}': {why}"));
    let number = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(&format!("'{s}' is not a number")))
    };
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [from, to, step] = parts[..] else {
            return Err(bad("expected from:to:step"));
        };
        let (from, to, step) = (number(from)?, number(to)?, number(step)?);
        if !(step > 0.0) || to < from {
            return Err(bad("need step > 0 and to >= from"));
        }
        let n = ((to - from) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| from + step * i as f64).collect()
    } else {
        spec.split(',').map(number).collect::<Result<Vec<f64>>>()?
    };
    if grid.iter().any(|a| !(*a > 0.0)) {
        return Err(bad("separations must be > 0"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(bad("separations must be strictly increasing"));
    }
    Ok(grid)
}
