//! Experimental datasets, theory-curve files and analysis bundles.
//!
//! Dataset CSV:
//!
//! ```text
//! # label=Ni-Ni
//! # R_um=61.71
//! # T_K=300
//! a_nm,grad_uN_per_m,da_nm,dgrad_uN_per_m
//! 223,98.1,0.6,0.8
//! ```
//!
//! Theory CSV: `a_nm,grad_uN_per_m,err_uN_per_m`, optionally preceded by
//! `# model=<label>`. Bundles are UTF-8 JSON carrying a `schema_version`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dielectric::{Extrapolation, OpticalRow, OpticalTable, Oscillator};
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::lifshitz::{TheoryCurve, TheoryPoint};
use crate::stats::{DifferenceSeries, Verdict};

pub const DATASET_HEADER: [&str; 4] = ["a_nm", "grad_uN_per_m", "da_nm", "dgrad_uN_per_m"];
pub const THEORY_HEADER: [&str; 3] = ["a_nm", "grad_uN_per_m", "err_uN_per_m"];
pub const BAND_HEADER: [&str; 2] = ["a_nm", "xi_uN_per_m"];
pub const OPTICAL_HEADER: [&str; 3] = ["omega_eV", "n1", "n2"];
pub const OSCILLATOR_HEADER: [&str; 3] = ["g_eV2", "omega_eV", "gamma_eV"];
pub const ERROR_PROFILE_HEADER: [&str; 2] = ["a_nm", "err_uN_per_m"];

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub separation_nm: f64,
    /// F̄′_expt in μN/m
    pub mean_gradient: f64,
    /// Δ^tot a in nm
    pub separation_error: f64,
    /// Δ^tot F̄′_expt in μN/m
    pub gradient_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentDataset {
    pub label: String,
    pub sphere_radius_um: f64,
    pub temperature_k: f64,
    pub points: Vec<DataPoint>,
}

impl ExperimentDataset {
    pub fn validate(&self) -> Result<()> {
        if !(self.sphere_radius_um > 0.0 && self.sphere_radius_um.is_finite()) {
            return Err(Error::Input(format!(
                "dataset '{}': sphere radius must be > 0",
                self.label
            )));
        }
        if !(self.temperature_k > 0.0 && self.temperature_k.is_finite()) {
            return Err(Error::Input(format!(
                "dataset '{}': temperature must be > 0",
                self.label
            )));
        }
        if self.points.is_empty() {
            return Err(Error::Input(format!(
                "dataset '{}' has no points",
                self.label
            )));
        }
        for (i, p) in self.points.iter().enumerate() {
            let row = i + 1;
            if !(p.separation_nm > 0.0 && p.separation_nm.is_finite()) {
                return Err(row_error(row, "a_nm", "separation must be > 0"));
            }
            if !p.mean_gradient.is_finite() {
                return Err(row_error(row, "grad_uN_per_m", "gradient must be finite"));
            }
            if !(p.separation_error >= 0.0 && p.separation_error.is_finite()) {
                return Err(row_error(row, "da_nm", "error must be >= 0"));
            }
            if !(p.gradient_error >= 0.0 && p.gradient_error.is_finite()) {
                return Err(row_error(row, "dgrad_uN_per_m", "error must be >= 0"));
            }
            if i > 0 && p.separation_nm <= self.points[i - 1].separation_nm {
                return Err(row_error(
                    row,
                    "a_nm",
                    "separations must be strictly increasing (duplicate or out of order)",
                ));
            }
        }
        Ok(())
    }

    pub fn separations(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.separation_nm).collect()
    }
}

fn row_error(row: usize, column: &str, message: &str) -> Error {
    Error::Input(format!("row {row}, column '{column}': {message}"))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// `# key=value` comment metadata, in file order.
fn comment_metadata(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|line| line.trim().strip_prefix('#'))
        .filter_map(|rest| {
            let (k, v) = rest.split_once('=')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Parses a headed numeric CSV (with `#` comments) into rows of f64.
fn parse_numeric_csv(text: &str, header: &[&str], what: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = reader
        .headers()
        .map_err(|e| Error::Input(format!("{what}: cannot read header: {e}")))?
        .clone();
    if found.is_empty() || (found.len() == 1 && found[0].is_empty()) {
        return Err(Error::Input(format!("{what}: file is empty")));
    }
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Input(format!(
            "{what}: expected header '{}', found '{}'",
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Input(format!("{what}: row {row}: {e}")))?;
        if record.len() != header.len() {
            return Err(Error::Input(format!(
                "{what}: row {row}: expected {} columns, found {}",
                header.len(),
                record.len()
            )));
        }
        let values = record
            .iter()
            .zip(header)
            .map(|(field, column)| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::Input(format!(
                        "{what}: row {row}, column '{column}': '{field}' is not a finite number"
                    ))
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::Input(format!("{what}: no data rows")));
    }
    Ok(rows)
}

pub fn parse_dataset(text: &str) -> Result<ExperimentDataset> {
    if text.trim().is_empty() {
        return Err(Error::Input("dataset: file is empty".into()));
    }
    let meta = comment_metadata(text);
    let lookup = |key: &str| {
        meta.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::Input(format!("dataset: missing '# {key}=' metadata line")))
    };
    let number = |key: &str| -> Result<f64> {
        let v = lookup(key)?;
        v.parse()
            .map_err(|_| Error::Input(format!("dataset: metadata '{key}' is not a number: '{v}'")))
    };
    let label = lookup("label")?;
    let sphere_radius_um = number("R_um")?;
    let temperature_k = number("T_K")?;
    let rows = parse_numeric_csv(text, &DATASET_HEADER, "dataset")?;
    let dataset = ExperimentDataset {
        label,
        sphere_radius_um,
        temperature_k,
        points: rows
            .into_iter()
            .map(|r| DataPoint {
                separation_nm: r[0],
                mean_gradient: r[1],
                separation_error: r[2],
                gradient_error: r[3],
            })
            .collect(),
    };
    dataset
        .validate()
        .map_err(|e| Error::Input(format!("dataset '{}': {}", dataset.label, strip(e))))?;
    Ok(dataset)
}

fn strip(e: Error) -> String {
    match e {
        Error::Input(m) => m,
        other => other.to_string(),
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<ExperimentDataset> {
    let path = path.as_ref();
    parse_dataset(&read_text(path)?)
        .map_err(|e| Error::Input(format!("{}: {}", path.display(), strip(e))))
}

pub fn dataset_to_csv(dataset: &ExperimentDataset) -> String {
    let mut out = format!(
        "# label={}\n# R_um={}\n# T_K={}\n{}\n",
        dataset.label,
        dataset.sphere_radius_um,
        dataset.temperature_k,
        DATASET_HEADER.join(",")
    );
    for p in &dataset.points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.separation_nm, p.mean_gradient, p.separation_error, p.gradient_error
        ));
    }
    out
}

pub fn parse_theory(text: &str, default_label: &str) -> Result<TheoryCurve> {
    let label = comment_metadata(text)
        .into_iter()
        .find(|(k, _)| k == "model")
        .map(|(_, v)| v)
        .unwrap_or_else(|| default_label.to_string());
    let rows = parse_numeric_csv(text, &THEORY_HEADER, "theory curve")?;
    TheoryCurve::new(
        label,
        rows.into_iter()
            .map(|r| TheoryPoint {
                separation_nm: r[0],
                gradient: r[1],
                theory_error: r[2],
            })
            .collect(),
    )
}

pub fn theory_to_csv(curve: &TheoryCurve) -> String {
    let mut out = format!(
        "# model={}\n{}\n",
        curve.model_label,
        THEORY_HEADER.join(",")
    );
    for p in &curve.points {
        out.push_str(&format!(
            "{},{},{}\n",
            p.separation_nm, p.gradient, p.theory_error
        ));
    }
    out
}

pub fn band_to_csv(band: &crate::stats::ConfidenceBand) -> String {
    let mut out = format!("{}\n", BAND_HEADER.join(","));
    for (a, xi) in band.separations_nm.iter().zip(&band.half_widths) {
        out.push_str(&format!("{a},{xi}\n"));
    }
    out
}

/// Loads an externally computed theory curve and puts it on `grid_nm`.
///
/// A file already on the grid passes through unchanged. Otherwise the gradient
/// and its error are interpolated with a monotone cubic and the curve is
/// flagged as interpolated; grid points outside the file's range are an error.
pub fn load_external_theory(path: impl AsRef<Path>, grid_nm: &[f64]) -> Result<TheoryCurve> {
    let path = path.as_ref();
    let default_label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "external".into());
    let curve = parse_theory(&read_text(path)?, &default_label)
        .map_err(|e| Error::Input(format!("{}: {}", path.display(), strip(e))))?;
    resample_theory(curve, grid_nm)
}

pub fn resample_theory(curve: TheoryCurve, grid_nm: &[f64]) -> Result<TheoryCurve> {
    if grid_nm.is_empty() {
        return Err(Error::Input("target grid is empty".into()));
    }
    let file_grid = curve.separations();
    let on_grid = file_grid.len() == grid_nm.len()
        && file_grid
            .iter()
            .zip(grid_nm)
            .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(1.0));
    if on_grid {
        return Ok(curve);
    }
    let (lo, hi) = (file_grid[0], file_grid[file_grid.len() - 1]);
    let eps = 1e-9 * hi.abs().max(1.0);
    let missing: Vec<f64> = grid_nm
        .iter()
        .copied()
        .filter(|&a| a < lo - eps || a > hi + eps)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Input(format!(
            "theory curve '{}' covers {lo}..{hi} nm but the grid needs {}..{} nm",
            curve.model_label,
            missing[0],
            missing[missing.len() - 1]
        )));
    }
    if file_grid.len() < 2 {
        return Err(Error::Input(format!(
            "theory curve '{}' has a single point and cannot be interpolated",
            curve.model_label
        )));
    }
    let gradient = MonotoneCubic::new(
        file_grid.clone(),
        curve.points.iter().map(|p| p.gradient).collect(),
    )?;
    let error = MonotoneCubic::new(
        file_grid,
        curve.points.iter().map(|p| p.theory_error).collect(),
    )?;
    let points = grid_nm
        .iter()
        .map(|&a| {
            let a_clamped = a.clamp(lo, hi);
            TheoryPoint {
                separation_nm: a,
                gradient: gradient.eval(a_clamped),
                theory_error: error.eval(a_clamped).max(0.0),
            }
        })
        .collect();
    let mut out = TheoryCurve::new(curve.model_label, points)?;
    out.interpolated = true;
    Ok(out)
}

pub fn load_optical_table(
    path: impl AsRef<Path>,
    extrapolation: Option<Extrapolation>,
) -> Result<OpticalTable> {
    let path = path.as_ref();
    let rows = parse_numeric_csv(&read_text(path)?, &OPTICAL_HEADER, "optical table")
        .map_err(|e| Error::Input(format!("{}: {}", path.display(), strip(e))))?;
    OpticalTable::new(
        rows.into_iter()
            .map(|r| OpticalRow {
                frequency: r[0],
                n1: r[1],
                n2: r[2],
            })
            .collect(),
        extrapolation,
    )
}

pub fn parse_oscillators(text: &str) -> Result<Vec<Oscillator>> {
    let rows = parse_numeric_csv(text, &OSCILLATOR_HEADER, "oscillators")?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            Oscillator::new(r[0], r[1], r[2])
                .map_err(|e| Error::Input(format!("oscillators: row {}: {}", i + 1, strip(e))))
        })
        .collect()
}

pub fn load_oscillators(path: impl AsRef<Path>) -> Result<Vec<Oscillator>> {
    let path = path.as_ref();
    parse_oscillators(&read_text(path)?)
        .map_err(|e| Error::Input(format!("{}: {}", path.display(), strip(e))))
}

/// Reads a per-separation theory error profile (`a_nm,err_uN_per_m`) and puts
/// it on `grid_nm`, interpolating when the file uses a different grid.
pub fn load_error_profile(path: impl AsRef<Path>, grid_nm: &[f64]) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let rows = parse_numeric_csv(
        &read_text(path)?,
        &ERROR_PROFILE_HEADER,
        "theory error profile",
    )
    .map_err(|e| Error::Input(format!("{}: {}", path.display(), strip(e))))?;
    let label = path.display().to_string();
    let curve = TheoryCurve::new(
        label,
        rows.into_iter()
            .map(|r| TheoryPoint {
                separation_nm: r[0],
                gradient: 0.0,
                theory_error: r[1],
            })
            .collect(),
    )?;
    Ok(resample_theory(curve, grid_nm)?
        .points
        .into_iter()
        .map(|p| p.theory_error)
        .collect())
}

/// Everything one comparison run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub schema_version: u32,
    /// Where the dataset was read from, if it came from a file.
    pub dataset_source: Option<String>,
    pub dataset: Option<ExperimentDataset>,
    pub theory_curves: Vec<TheoryCurve>,
    pub differences: Vec<DifferenceSeries>,
    pub verdicts: Vec<Verdict>,
}

impl Default for AnalysisBundle {
    fn default() -> Self {
        Self {
            schema_version: BUNDLE_SCHEMA_VERSION,
            dataset_source: None,
            dataset: None,
            theory_curves: Vec::new(),
            differences: Vec::new(),
            verdicts: Vec::new(),
        }
    }
}

impl AnalysisBundle {
    /// Every theory curve and difference series must sit on the dataset grid.
    pub fn validate(&self) -> Result<()> {
        let Some(dataset) = &self.dataset else {
            return Ok(());
        };
        let grid = dataset.separations();
        let grids = self
            .theory_curves
            .iter()
            .map(|c| (&c.model_label, c.separations()))
            .chain(self.differences.iter().map(|d| {
                (
                    &d.model_label,
                    d.points.iter().map(|p| p.separation_nm).collect(),
                )
            }));
        for (label, g) in grids {
            if g != grid {
                return Err(Error::Input(format!(
                    "bundle: '{label}' is not on the grid of dataset '{}'",
                    dataset.label
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Input(format!("bundle: cannot serialize: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Input(format!("bundle: malformed JSON: {e}")))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(BUNDLE_SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(Error::Input(format!(
                    "bundle: schema_version {v} is not supported (expected {BUNDLE_SCHEMA_VERSION})"
                )))
            }
            None => return Err(Error::Input("bundle: missing schema_version".into())),
        }
        let bundle: Self = serde_json::from_value(value)
            .map_err(|e| Error::Input(format!("bundle: invalid content: {e}")))?;
        bundle.validate()?;
        Ok(bundle)
    }
}

pub fn save_bundle(bundle: &AnalysisBundle, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, bundle.to_json()?.as_bytes())
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<AnalysisBundle> {
    let path = path.as_ref();
    AnalysisBundle::from_json(&read_text(path)?)
        .map_err(|e| Error::Input(format!("{}: {}", path.display(), strip(e))))
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Input(format!("{}: not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
