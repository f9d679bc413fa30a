//! Theory-minus-experiment differences and their confidence bands.
//!
//! At each separation the difference F′_theor − F̄′_expt carries two errors,
//! modelled as independent centred uniform variables of half-widths Δ₁ and Δ₂.
//! The band half-width is
//!
//! ```text
//! Ξ^β = min{Δ₁ + Δ₂, k_β √(Δ₁² + Δ₂²)}
//! ```
//!
//! where k_β √(Δ₁² + Δ₂²) is the exact two-sided β-quantile of the
//! triangular/trapezoidal sum distribution. A model is classified by sliding a
//! window of consecutive separations along the series and counting the
//! differences that fall inside the band.

use serde::{Deserialize, Serialize};

use crate::data::ExperimentDataset;
use crate::error::{Error, Result};
use crate::lifshitz::TheoryCurve;

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "confidence probability must lie in (0, 1), got {beta}"
        )))
    }
}

/// Two-sided β-quantile q of U(−Δ₁, Δ₁) + U(−Δ₂, Δ₂): P(|S| ≤ q) = β.
pub fn composed_quantile(beta: f64, delta1: f64, delta2: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(delta1 >= 0.0 && delta2 >= 0.0) || !delta1.is_finite() || !delta2.is_finite() {
        return Err(Error::Domain(format!(
            "error half-widths must be finite and >= 0, got {delta1}, {delta2}"
        )));
    }
    if delta1 == 0.0 && delta2 == 0.0 {
        return Err(Error::Domain(
            "both error half-widths are zero; the composed distribution is degenerate".into(),
        ));
    }
    let (small, large) = if delta1 <= delta2 {
        (delta1, delta2)
    } else {
        (delta2, delta1)
    };
    // P(|S| ≤ q) = q/large on the flat top |q| ≤ large − small,
    // and 1 − (small + large − q)²/(4·small·large) on the slopes.
    let flat_mass = (large - small) / large;
    if beta <= flat_mass {
        Ok(beta * large)
    } else {
        Ok(small + large - 2.0 * (small * large * (1.0 - beta)).sqrt())
    }
}

/// k_β such that k_β √(Δ₁² + Δ₂²) is the composed β-quantile.
pub fn k_coefficient(beta: f64, delta1: f64, delta2: f64) -> Result<f64> {
    let q = composed_quantile(beta, delta1, delta2)?;
    Ok(q / delta1.hypot(delta2))
}

/// One separation of the difference series (gradients in μN/m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferencePoint {
    pub separation_nm: f64,
    /// F′_theor − F̄′_expt
    pub difference: f64,
    pub theory_error: f64,
    pub experiment_error: f64,
}

/// Ξ^β at one point.
pub fn half_width(point: &DifferencePoint, beta: f64) -> Result<f64> {
    let (d1, d2) = (point.theory_error, point.experiment_error);
    let composed = k_coefficient(beta, d1, d2)? * d1.hypot(d2);
    Ok(composed.min(d1 + d2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceSeries {
    pub model_label: String,
    pub points: Vec<DifferencePoint>,
}

fn same_separation(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Differences F′_theor(a_i) − F̄′_expt(a_i) on the dataset grid.
///
/// With `fold_separation_error` the experimental error becomes
/// √(ΔF′² + (|dF′_theor/da|·Δa)²), the slope taken from the theory curve by
/// finite differences.
pub fn difference_series(
    theory: &TheoryCurve,
    data: &ExperimentDataset,
    fold_separation_error: bool,
) -> Result<DifferenceSeries> {
    let mismatched: Vec<String> = if theory.points.len() != data.points.len() {
        vec![format!(
            "{} theory points vs {} measured points",
            theory.points.len(),
            data.points.len()
        )]
    } else {
        theory
            .points
            .iter()
            .zip(&data.points)
            .filter(|(t, d)| !same_separation(t.separation_nm, d.separation_nm))
            .map(|(t, d)| {
                format!(
                    "{} nm (theory) vs {} nm (data)",
                    t.separation_nm, d.separation_nm
                )
            })
            .collect()
    };
    if !mismatched.is_empty() {
        return Err(Error::Input(format!(
            "theory curve '{}' and dataset '{}' have different grids: {}",
            theory.model_label,
            data.label,
            mismatched.join(", ")
        )));
    }

    let slopes = if fold_separation_error {
        local_slopes(theory)
    } else {
        vec![0.0; theory.points.len()]
    };
    let points = theory
        .points
        .iter()
        .zip(&data.points)
        .zip(slopes)
        .map(|((t, d), slope)| {
            let experiment_error = if fold_separation_error {
                d.gradient_error.hypot(slope.abs() * d.separation_error)
            } else {
                d.gradient_error
            };
            DifferencePoint {
                separation_nm: d.separation_nm,
                difference: t.gradient - d.mean_gradient,
                theory_error: t.theory_error,
                experiment_error,
            }
        })
        .collect();
    Ok(DifferenceSeries {
        model_label: theory.model_label.clone(),
        points,
    })
}

fn local_slopes(theory: &TheoryCurve) -> Vec<f64> {
    let p = &theory.points;
    let n = p.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let slope = |i: usize, j: usize| {
        (p[j].gradient - p[i].gradient) / (p[j].separation_nm - p[i].separation_nm)
    };
    (0..n)
        .map(|i| match i {
            0 => slope(0, 1),
            i if i == n - 1 => slope(n - 2, n - 1),
            i => slope(i - 1, i + 1),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBand {
    pub beta: f64,
    pub separations_nm: Vec<f64>,
    pub half_widths: Vec<f64>,
}

pub fn confidence_band(series: &DifferenceSeries, beta: f64) -> Result<ConfidenceBand> {
    let half_widths = series
        .points
        .iter()
        .map(|p| half_width(p, beta))
        .collect::<Result<_>>()?;
    Ok(ConfidenceBand {
        beta,
        separations_nm: series.points.iter().map(|p| p.separation_nm).collect(),
        half_widths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationRange {
    pub from_nm: f64,
    pub to_nm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    /// Some window has more than 1 − β of its differences outside the band.
    /// The range is the widest contiguous run of such windows.
    Excluded { from_nm: f64, to_nm: f64 },
    /// Every window has more than a fraction β of its differences inside.
    Consistent,
    /// No window is excluded, but some window holds exactly a fraction β
    /// inside, so the strict "more than β" condition fails there.
    NotExcluded,
}

impl Status {
    pub fn is_excluded(&self) -> bool {
        matches!(self, Status::Excluded { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub model_label: String,
    pub beta: f64,
    pub window: usize,
    pub status: Status,
    /// Inside fraction of each window, in order of the first point.
    pub fraction_inside_per_window: Vec<f64>,
    /// Start indices of windows with outside-fraction above 1 − β.
    pub failing_windows: Vec<usize>,
    /// Every contiguous run of failing windows as a separation range.
    pub exclusion_ranges: Vec<SeparationRange>,
    /// 1 − β*, set by [`agreement_scan`].
    pub agreement_level: Option<f64>,
}

/// Minimum number of points per sliding window.
pub const MIN_WINDOW: usize = 3;

/// Slides a window of `window` consecutive points along `series` and classifies
/// the model at confidence probability `beta`. A difference exactly on the band
/// edge counts as inside.
pub fn classify(series: &DifferenceSeries, beta: f64, window: usize) -> Result<Verdict> {
    check_beta(beta)?;
    let points = &series.points;
    if window < MIN_WINDOW {
        return Err(Error::Input(format!(
            "window must hold at least {MIN_WINDOW} points, got {window}"
        )));
    }
    if points.len() < window {
        return Err(Error::Input(format!(
            "series '{}' has {} points, fewer than the window of {window}",
            series.model_label,
            points.len()
        )));
    }
    if points
        .windows(2)
        .any(|w| !(w[1].separation_nm > w[0].separation_nm))
    {
        return Err(Error::Input(format!(
            "series '{}' is not sorted by strictly increasing separation",
            series.model_label
        )));
    }

    let inside: Vec<bool> = points
        .iter()
        .map(|p| half_width(p, beta).map(|xi| p.difference.abs() <= xi))
        .collect::<Result<_>>()?;

    let threshold = beta * window as f64;
    let counts: Vec<usize> = inside
        .windows(window)
        .map(|w| w.iter().filter(|&&b| b).count())
        .collect();
    let fraction_inside_per_window = counts.iter().map(|&c| c as f64 / window as f64).collect();
    // outside > (1 − β)·w  ⇔  inside < β·w
    let failing_windows: Vec<usize> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| (c as f64) < threshold)
        .map(|(i, _)| i)
        .collect();
    let strictly_inside_everywhere = counts.iter().all(|&c| c as f64 > threshold);

    let exclusion_ranges = failing_runs(&failing_windows)
        .into_iter()
        .map(|(first, last)| SeparationRange {
            from_nm: points[first].separation_nm,
            to_nm: points[last + window - 1].separation_nm,
        })
        .collect::<Vec<_>>();

    let status = match widest(&exclusion_ranges) {
        Some(r) => Status::Excluded {
            from_nm: r.from_nm,
            to_nm: r.to_nm,
        },
        None if strictly_inside_everywhere => Status::Consistent,
        None => Status::NotExcluded,
    };

    Ok(Verdict {
        model_label: series.model_label.clone(),
        beta,
        window,
        status,
        fraction_inside_per_window,
        failing_windows,
        exclusion_ranges,
        agreement_level: None,
    })
}

fn failing_runs(starts: &[usize]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut iter = starts.iter().copied();
    let Some(first) = iter.next() else {
        return runs;
    };
    let (mut lo, mut hi) = (first, first);
    for s in iter {
        if s == hi + 1 {
            hi = s;
        } else {
            runs.push((lo, hi));
            lo = s;
            hi = s;
        }
    }
    runs.push((lo, hi));
    runs
}

fn widest(ranges: &[SeparationRange]) -> Option<SeparationRange> {
    ranges.iter().copied().fold(None, |best, r| match best {
        Some(b) if b.to_nm - b.from_nm >= r.to_nm - r.from_nm => Some(b),
        _ => Some(r),
    })
}

/// Finds the smallest β* in `beta_grid` at which every window holds more than
/// a fraction β* of the differences inside the band, and reports the verdict at
/// β* with agreement level 1 − β*. When no grid value qualifies the verdict at
/// the largest β is returned without an agreement level.
pub fn agreement_scan(
    series: &DifferenceSeries,
    beta_grid: &[f64],
    window: usize,
) -> Result<Verdict> {
    if beta_grid.is_empty() {
        return Err(Error::Input("beta grid is empty".into()));
    }
    if beta_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("beta grid must be strictly increasing".into()));
    }
    let mut last = None;
    for &beta in beta_grid {
        let verdict = classify(series, beta, window)?;
        if verdict.status == Status::Consistent {
            return Ok(Verdict {
                agreement_level: Some(1.0 - beta),
                ..verdict
            });
        }
        last = Some(verdict);
    }
    Ok(last.expect("grid is non-empty"))
}
