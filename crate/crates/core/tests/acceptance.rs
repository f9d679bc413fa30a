//! Acceptance suite. Prints one PASS/FAIL line per criterion (with indented
//! detail lines) and exits non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use casimir_core::data::{self, AnalysisBundle, ExperimentDataset};
use casimir_core::dielectric::presets::{self, NI_DRUDE};
use casimir_core::dielectric::{Extrapolation, Material, OpticalTable, Permittivity, PlasmaModel};
use casimir_core::lifshitz::{
    force_gradient, theory_curve, CurveSetup, Geometry, QuadratureConfig, TheoryErrorSpec,
    ThermalState,
};
use casimir_core::stats::{
    agreement_scan, classify, difference_series, half_width, k_coefficient, DifferencePoint,
    DifferenceSeries, Status,
};
use casimir_core::units::{ideal_metal_gradient, matsubara_frequency};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const WINDOW: usize = 10;
const BETA_GRID: [f64; 6] = [0.05, 0.10, 0.20, 0.33, 0.67, 0.95];

type Criterion = (&'static str, fn() -> Outcome);

/// consistent at 0.67, not excluded at 0.10, offset fully excluded, inside count, points
type Replication = (bool, bool, bool, usize, usize);

struct Outcome {
    name: &'static str,
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        self.details
            .push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn setup(radius_um: f64) -> CurveSetup {
    CurveSetup {
        sphere_radius_um: radius_um,
        thermal: ThermalState::new(300.0).unwrap(),
        quadrature: QuadratureConfig::default(),
        error_spec: TheoryErrorSpec::Percent(0.5),
        roughness_factor: 1.0,
    }
}

fn model_series(
    label: &str,
    a: &Material,
    b: &Material,
    dataset: &ExperimentDataset,
) -> DifferenceSeries {
    let curve = theory_curve(
        label,
        a,
        b,
        &dataset.separations(),
        &setup(dataset.sphere_radius_um),
    )
    .unwrap();
    difference_series(&curve, dataset, false).unwrap()
}

fn empirical_k(beta: f64, ratio: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut abs: Vec<f64> = (0..samples)
        .map(|_| (rng.gen_range(-1.0..1.0) + ratio * rng.gen_range(-1.0..1.0_f64)).abs())
        .collect();
    let idx = ((beta * samples as f64).ceil() as usize).saturating_sub(1);
    let (_, q, _) = abs.select_nth_unstable_by(idx, f64::total_cmp);
    *q / (1.0 + ratio * ratio).sqrt()
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new("composition-law coefficient k_beta");
    let k = k_coefficient(0.95, 1.0, 1.0).unwrap();
    o.check(
        (1.09..=1.11).contains(&k),
        format!("k(0.95, D, D) = {k:.5}, required in [1.09, 1.11]"),
    );
    let cases: Vec<(f64, f64)> = [0.10, 0.20, 0.67, 0.95]
        .iter()
        .flat_map(|&b| [0.0, 0.5, 1.0, 2.0].map(|r| (b, r)))
        .collect();
    let results: Vec<(f64, f64, f64, f64)> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(beta, ratio))| {
            let closed = k_coefficient(beta, 1.0, ratio).unwrap();
            let mc = empirical_k(beta, ratio, 10_000_000, 1000 + i as u64);
            (beta, ratio, closed, mc)
        })
        .collect();
    for (beta, ratio, closed, mc) in results {
        o.check(
            (closed - mc).abs() <= 0.005,
            format!(
                "beta={beta:.2} D2/D1={ratio:.1}: closed {closed:.5} vs Monte Carlo {mc:.5} (|diff| {:.1e} <= 0.005)",
                (closed - mc).abs()
            ),
        );
    }
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new("ideal-metal oracle, plasma omega_p = 200 eV");
    let metal =
        Material::nonmagnetic(Permittivity::Plasma(PlasmaModel::new(200.0).unwrap())).unwrap();
    let g = force_gradient(
        &metal,
        &metal,
        Geometry::new(61.71, 200.0).unwrap(),
        ThermalState::new(1.0).unwrap(),
        &QuadratureConfig::default(),
    )
    .unwrap();
    let ideal = ideal_metal_gradient(61.71, 200.0);
    let rel = (g - ideal) / ideal;
    o.check(
        rel.abs() <= 0.02,
        format!(
            "F'(200 nm) = {g:.3} uN/m vs ideal {ideal:.3} uN/m, relative {:+.3}% (tolerance 2%)",
            100.0 * rel
        ),
    );
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new("Au-Ni plasma/Drude near-coincidence");
    let thermal = ThermalState::new(300.0).unwrap();
    let q = QuadratureConfig::default();
    let rel = |a: f64| {
        let geom = Geometry::new(64.1, a).unwrap();
        let p = force_gradient(
            &presets::au_plasma(),
            &presets::ni_plasma(),
            geom,
            thermal,
            &q,
        )
        .unwrap();
        let d = force_gradient(
            &presets::au_drude(),
            &presets::ni_drude(),
            geom,
            thermal,
            &q,
        )
        .unwrap();
        100.0 * (p - d) / p
    };
    for a in [220.0, 300.0, 400.0, 500.0] {
        let r = rel(a);
        o.check(r.abs() < 2.0, format!("a = {a} nm: {r:+.3}% (|.| < 2%)"));
    }
    for (a, target) in [(3000.0, 31.1), (5000.0, 42.8)] {
        let r = rel(a);
        o.check(
            (r - target).abs() <= 4.0,
            format!("a = {a} nm: {r:.2}% (target {target} +/- 4 pp)"),
        );
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new("statistical pipeline on synthetic fixtures");
    let base = data::load_dataset(fixture("ni_ni.csv")).unwrap();
    // error boxes of the Ni-Ni reconstruction: 0.5% theory error, stated experimental error
    let boxes: Vec<(f64, f64, f64)> = base
        .points
        .iter()
        .map(|p| (p.separation_nm, 0.005 * p.mean_gradient, p.gradient_error))
        .collect();
    let make = |seed: u64, offset: f64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DifferenceSeries {
            model_label: "synthetic".into(),
            points: boxes
                .iter()
                .map(|&(a, d1, d2)| DifferencePoint {
                    separation_nm: a,
                    difference: offset * (d1 + d2)
                        + rng.gen_range(-d1..=d1)
                        + rng.gen_range(-d2..=d2),
                    theory_error: d1,
                    experiment_error: d2,
                })
                .collect(),
        }
    };
    let replications = 1000u64;
    let results: Vec<Replication> = (0..replications)
        .into_par_iter()
        .map(|seed| {
            let s = make(seed, 0.0);
            let v67 = classify(&s, 0.67, WINDOW).unwrap();
            let v10 = classify(&s, 0.10, WINDOW).unwrap();
            let inside: usize = s
                .points
                .iter()
                .filter(|p| p.difference.abs() <= half_width(p, 0.67).unwrap())
                .count();
            let far = make(10_000 + seed, 3.0);
            let v95 = classify(&far, 0.95, WINDOW).unwrap();
            let full = v95.status
                == Status::Excluded {
                    from_nm: boxes[0].0,
                    to_nm: boxes[boxes.len() - 1].0,
                };
            (
                v67.status == Status::Consistent,
                !v10.status.is_excluded(),
                full,
                inside,
                s.points.len(),
            )
        })
        .collect();
    let n = replications as f64;
    let rate =
        |f: &dyn Fn(&Replication) -> bool| results.iter().filter(|r| f(r)).count() as f64 / n;
    let consistent = rate(&|r| r.0);
    let not_excluded = rate(&|r| r.1);
    let full = rate(&|r| r.2);
    let inside: usize = results.iter().map(|r| r.3).sum();
    let total: usize = results.iter().map(|r| r.4).sum();
    o.check(
        consistent >= 0.95,
        format!(
            "consistent at beta = 0.67 in {:.1}% of {replications} replications (>= 95%)",
            100.0 * consistent
        ),
    );
    o.check(
        not_excluded >= 0.95,
        format!(
            "not excluded at beta = 0.10 in {:.1}% of replications (>= 95%)",
            100.0 * not_excluded
        ),
    );
    o.check(
        full == 1.0,
        format!(
            "3x(D1+D2) offset excluded over the full range at beta = 0.95 in {:.1}% (100%)",
            100.0 * full
        ),
    );
    o.details.push(format!(
        "info pooled fraction inside the 0.67 band: {:.4} ({} windows of {WINDOW} per series)",
        inside as f64 / total as f64,
        boxes.len() - WINDOW + 1
    ));
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new("expected verdict patterns on reconstructed fixtures");
    let ni = data::load_dataset(fixture("ni_ni.csv")).unwrap();
    let drude = model_series("drude", &presets::ni_drude(), &presets::ni_drude(), &ni);
    let plasma = model_series("plasma", &presets::ni_plasma(), &presets::ni_plasma(), &ni);
    let (first, last) = (
        ni.points[0].separation_nm,
        ni.points[ni.points.len() - 1].separation_nm,
    );
    let v = classify(&drude, 0.95, WINDOW).unwrap();
    let sub_range = match v.status {
        Status::Excluded { from_nm, to_nm } => Some((from_nm, to_nm)),
        _ => None,
    };
    o.check(
        matches!(sub_range, Some((f, t)) if f >= first && t < last),
        format!("Ni-Ni Drude at beta = 0.95: {:?} (excluded over a proper sub-range of {first}..{last} nm)", v.status),
    );
    let v = classify(&plasma, 0.10, WINDOW).unwrap();
    o.check(
        !v.status.is_excluded(),
        format!("Ni-Ni plasma at beta = 0.10: {:?}", v.status),
    );
    let v = agreement_scan(&plasma, &BETA_GRID, WINDOW).unwrap();
    o.check(
        v.agreement_level.is_some_and(|l| l >= 0.90 - 1e-12),
        format!(
            "Ni-Ni plasma agreement level {:?} (>= 0.90)",
            v.agreement_level
        ),
    );

    let graphene = data::load_dataset(fixture("graphene.csv")).unwrap();
    let theory =
        data::load_external_theory(fixture("graphene_theory.csv"), &graphene.separations())
            .unwrap();
    let series = difference_series(&theory, &graphene, false).unwrap();
    let v10 = classify(&series, 0.10, WINDOW).unwrap();
    let v20 = classify(&series, 0.20, WINDOW).unwrap();
    o.check(
        v10.status.is_excluded(),
        format!("graphene at beta = 0.10: {:?}", v10.status),
    );
    o.check(
        !v20.status.is_excluded(),
        format!("graphene at beta = 0.20: {:?}", v20.status),
    );
    let v = agreement_scan(&series, &BETA_GRID, WINDOW).unwrap();
    o.check(
        v.agreement_level.is_some_and(|l| l >= 0.80 - 1e-12),
        format!("graphene agreement level {:?} (>= 0.80)", v.agreement_level),
    );
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new("property suites");

    // band nesting and the Δ1 + Δ2 cap
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut nesting = true;
    let mut cap = true;
    for _ in 0..20_000 {
        let p = DifferencePoint {
            separation_nm: 300.0,
            difference: 0.0,
            theory_error: rng.gen_range(0.0..5.0),
            experiment_error: rng.gen_range(0.01..5.0),
        };
        let b1: f64 = rng.gen_range(0.01..0.98);
        let b2 = rng.gen_range(b1..0.99);
        let (x1, x2) = (half_width(&p, b1).unwrap(), half_width(&p, b2).unwrap());
        nesting &= x1 <= x2;
        let sum = p.theory_error + p.experiment_error;
        cap &= x2 <= sum;
        let k = k_coefficient(b2, p.theory_error, p.experiment_error).unwrap();
        let root = (p.theory_error.powi(2) + p.experiment_error.powi(2)).sqrt();
        if k * root >= sum {
            cap &= x2 == sum;
        }
    }
    o.check(
        nesting,
        "band nesting Xi(b1) <= Xi(b2) for 20000 random (b1 < b2, D1, D2)".into(),
    );
    o.check(
        cap,
        "Xi <= D1 + D2, with equality whenever k*sqrt(D1^2 + D2^2) >= D1 + D2".into(),
    );

    // plasma above Drude for a nonmagnetic metal with equal plasma frequency
    let thermal = ThermalState::new(300.0).unwrap();
    let q = QuadratureConfig::default();
    let grid: Vec<f64> = (0..=16)
        .map(|i| 200.0 * 25f64.powf(i as f64 / 16.0))
        .collect();
    let ordered: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&a| {
            let geom = Geometry::new(41.3, a).unwrap();
            let p = force_gradient(
                &presets::au_plasma(),
                &presets::au_plasma(),
                geom,
                thermal,
                &q,
            )
            .unwrap();
            let d = force_gradient(
                &presets::au_drude(),
                &presets::au_drude(),
                geom,
                thermal,
                &q,
            )
            .unwrap();
            (a, p, d)
        })
        .collect();
    let bad: Vec<f64> = ordered
        .iter()
        .filter(|(_, p, d)| p.partial_cmp(d) != Some(std::cmp::Ordering::Greater))
        .map(|r| r.0)
        .collect();
    o.check(
        bad.is_empty(),
        format!("Au plasma > Drude gradient at 17 log-spaced separations 200 nm..5 um (violations: {bad:?})"),
    );

    // Kramers-Kronig round trip of a tabulated Drude spectrum
    let n = 400;
    let table = OpticalTable::from_im_eps(
        (0..n).map(|i| {
            let w = 0.01 * 1e6f64.powf(i as f64 / (n - 1) as f64);
            (w, NI_DRUDE.im_eps_real_axis(w))
        }),
        Some(Extrapolation::Drude(NI_DRUDE)),
    )
    .unwrap();
    let worst = (1..=60)
        .map(|l| {
            let xi = matsubara_frequency(300.0, l);
            let kk = table.eps_imag(xi).unwrap();
            let exact = NI_DRUDE.eps_imag(xi).unwrap();
            ((kk - exact) / exact).abs()
        })
        .fold(0.0, f64::max);
    o.check(
        worst < 0.01,
        format!("KK round trip of tabulated Ni Drude data, worst relative error {worst:.2e} over l = 1..60 (< 1%)"),
    );

    // convergence under doubling of the Matsubara cutoff and the node count
    let geom = Geometry::new(61.71, 223.0).unwrap();
    let ni = presets::ni_drude();
    let base = force_gradient(&ni, &ni, geom, thermal, &q).unwrap();
    let more_terms = QuadratureConfig {
        matsubara_cutoff_factor: 2.0 * q.matsubara_cutoff_factor,
        ..q
    };
    let more_nodes = QuadratureConfig {
        k_nodes: 2 * q.k_nodes,
        ..q
    };
    for (what, cfg) in [("Matsubara cutoff", more_terms), ("k nodes", more_nodes)] {
        let g = force_gradient(&ni, &ni, geom, thermal, &cfg).unwrap();
        let change = ((g - base) / base).abs();
        o.check(
            change < q.relative_tolerance,
            format!("doubling the {what} changes the Ni-Ni gradient at 223 nm by {change:.1e} (< {:.0e})", q.relative_tolerance),
        );
    }

    // dataset and bundle round trips
    let ds = data::load_dataset(fixture("ni_ni.csv")).unwrap();
    let again = data::parse_dataset(&data::dataset_to_csv(&ds)).unwrap();
    o.check(again == ds, "dataset CSV write/read identity".into());
    let plasma = theory_curve(
        "plasma",
        &presets::ni_plasma(),
        &presets::ni_plasma(),
        &ds.separations(),
        &setup(ds.sphere_radius_um),
    )
    .unwrap();
    let series = difference_series(&plasma, &ds, false).unwrap();
    let bundle = AnalysisBundle {
        dataset_source: Some("ni_ni.csv".into()),
        dataset: Some(ds),
        verdicts: BETA_GRID
            .iter()
            .map(|&b| classify(&series, b, WINDOW).unwrap())
            .collect(),
        theory_curves: vec![plasma],
        differences: vec![series],
        ..AnalysisBundle::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bundle.json");
    data::save_bundle(&bundle, &path).unwrap();
    let loaded = data::load_bundle(&path).unwrap();
    o.check(
        loaded == bundle,
        "analysis bundle save/load identity".into(),
    );
    o
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
    ];
    let mut failed = 0;
    for (id, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id}: {} {} ({secs:.1} s)",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.name
        );
        for d in &outcome.details {
            println!("    {d}");
        }
        if !outcome.passed {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
