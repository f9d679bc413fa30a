//! Regenerates the reconstructed datasets under `fixtures/`.
//!
//! The original per-point measurements are not available, so each dataset is
//! rebuilt from the engine's own theory curves plus seeded noise. Error bars
//! are chosen so that the classifier reaches the known qualitative verdicts.
//!
//! ```text
//! cargo run --release -p casimir-core --example make_fixtures
//! ```

use std::path::{Path, PathBuf};

use casimir_core::data::{self, DataPoint, ExperimentDataset};
use casimir_core::dielectric::presets;
use casimir_core::dielectric::Material;
use casimir_core::lifshitz::{
    theory_curve, CurveSetup, QuadratureConfig, TheoryCurve, TheoryErrorSpec, TheoryPoint,
    ThermalState,
};
use casimir_core::stats::{half_width, DifferencePoint};
use casimir_core::units::ideal_metal_gradient;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THEORY_ERROR_PERCENT: f64 = 0.5;

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| from + step * i as f64).collect()
}

fn round(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

fn curve(label: &str, a: &Material, b: &Material, radius_um: f64, grid_nm: &[f64]) -> TheoryCurve {
    let setup = CurveSetup {
        sphere_radius_um: radius_um,
        thermal: ThermalState::new(300.0).unwrap(),
        quadrature: QuadratureConfig::default(),
        error_spec: TheoryErrorSpec::Percent(THEORY_ERROR_PERCENT),
        roughness_factor: 1.0,
    };
    theory_curve(label, a, b, grid_nm, &setup).unwrap()
}

/// Data scattered around `centre` with uniform noise of half-width `noise`.
fn noisy_dataset(
    label: &str,
    radius_um: f64,
    centre: &[TheoryPoint],
    separation_error: f64,
    gradient_error: f64,
    noise: f64,
    seed: u64,
) -> ExperimentDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ExperimentDataset {
        label: label.into(),
        sphere_radius_um: radius_um,
        temperature_k: 300.0,
        points: centre
            .iter()
            .map(|p| DataPoint {
                separation_nm: p.separation_nm,
                mean_gradient: round(p.gradient + rng.gen_range(-noise..=noise), 4),
                separation_error,
                gradient_error,
            })
            .collect(),
    }
}

fn write(dir: &Path, name: &str, text: &str) {
    data::write_atomic(dir.join(name), text.as_bytes()).unwrap();
    println!("wrote {name}");
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");

    // Ni-Ni: data follow the plasma curve; the Drude excess exceeds the 95%
    // band only at the short-separation end.
    let ni_grid = grid(223.0, 550.0, 3.0);
    let ni = curve(
        "plasma",
        &presets::ni_plasma(),
        &presets::ni_plasma(),
        61.71,
        &ni_grid,
    );
    let ds = noisy_dataset("Ni-Ni", 61.71, &ni.points, 0.6, 1.5, 0.2, 11);
    write(&dir, "ni_ni.csv", &data::dataset_to_csv(&ds));

    // Au-Au: same pattern, Drude below the data.
    let au_grid = grid(235.0, 598.0, 3.0);
    let au = curve(
        "plasma",
        &presets::au_plasma(),
        &presets::au_plasma(),
        41.3,
        &au_grid,
    );
    let ds = noisy_dataset("Au-Au", 41.3, &au.points, 0.6, 1.4, 0.2, 12);
    write(&dir, "au_au.csv", &data::dataset_to_csv(&ds));

    // Au-Ni: the two approaches nearly coincide; data sit midway.
    let auni_grid = grid(220.0, 500.0, 4.0);
    let p = curve(
        "plasma",
        &presets::au_plasma(),
        &presets::ni_plasma(),
        64.1,
        &auni_grid,
    );
    let d = curve(
        "drude",
        &presets::au_drude(),
        &presets::ni_drude(),
        64.1,
        &auni_grid,
    );
    let mid: Vec<TheoryPoint> = p
        .points
        .iter()
        .zip(&d.points)
        .map(|(p, d)| TheoryPoint {
            gradient: 0.5 * (p.gradient + d.gradient),
            ..*p
        })
        .collect();
    let ds = noisy_dataset("Au-Ni", 64.1, &mid, 0.6, 1.0, 0.2, 13);
    write(&dir, "au_ni.csv", &data::dataset_to_csv(&ds));

    // Graphene: externally supplied theory on its own grid. In one stretch
    // the differences sit between the 10% and 20% band borders.
    let file_grid = grid(220.0, 505.0, 3.0);
    let theory = TheoryCurve::new(
        "graphene",
        file_grid
            .iter()
            .map(|&a| {
                let g = round(0.45 * ideal_metal_gradient(54.1, a), 4);
                TheoryPoint {
                    separation_nm: a,
                    gradient: g,
                    theory_error: round(0.01 * g, 4),
                }
            })
            .collect(),
    )
    .unwrap();
    write(&dir, "graphene_theory.csv", &data::theory_to_csv(&theory));

    let data_grid = grid(224.0, 500.0, 4.0);
    let on_grid = data::resample_theory(theory, &data_grid).unwrap();
    let gradient_error = 0.6;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let points = on_grid
        .points
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let dp = DifferencePoint {
                separation_nm: t.separation_nm,
                difference: 0.0,
                theory_error: t.theory_error,
                experiment_error: gradient_error,
            };
            let xi10 = half_width(&dp, 0.10).unwrap();
            let xi20 = half_width(&dp, 0.20).unwrap();
            let difference = if (24..40).contains(&i) {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * 0.5 * (xi10 + xi20)
            } else {
                rng.gen_range(-0.6..=0.6) * xi10
            };
            DataPoint {
                separation_nm: t.separation_nm,
                mean_gradient: round(t.gradient - difference, 6),
                separation_error: 0.5,
                gradient_error,
            }
        })
        .collect();
    let ds = ExperimentDataset {
        label: "graphene".into(),
        sphere_radius_um: 54.1,
        temperature_k: 300.0,
        points,
    };
    write(&dir, "graphene.csv", &data::dataset_to_csv(&ds));

    write(
        &dir,
        "ni_oscillators.csv",
        "# illustrative core-electron oscillators for a generalized-plasma Ni model\n\
         g_eV2,omega_eV,gamma_eV\n12,1.5,1.0\n30,4.0,2.5\n60,8.0,4.0\n120,15.0,6.0\n",
    );
}
