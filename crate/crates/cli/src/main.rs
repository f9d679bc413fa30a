#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use casimir_core::data::{self, AnalysisBundle, BUNDLE_SCHEMA_VERSION};
use casimir_core::lifshitz::{theory_curve, CurveSetup, TheoryCurve, ThermalState};
use casimir_core::stats::{
    self, agreement_scan, classify, confidence_band, difference_series, DifferenceSeries, Verdict,
};
use casimir_core::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_grid, parse_pair, resolve_input, Model, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "casimir",
    version,
    about = "Casimir force gradients and confidence-band model comparison"
)]
struct Cli {
    /// TOML run configuration (materials, quadrature, beta grid, window)
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a theoretical force-gradient curve for a material pair
    Theory(TheoryArgs),
    /// Compare a dataset with one or more models and classify each
    Compare(CompareArgs),
    /// Print k_beta and the band half-width for two error half-widths
    Kcoef(KcoefArgs),
    /// Redraw difference/band plots from a saved analysis bundle
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct Overrides {
    /// Theory error as a percentage of the computed gradient
    #[arg(long)]
    theory_error_percent: Option<f64>,
    /// Multiplicative roughness correction applied to computed gradients
    #[arg(long)]
    roughness: Option<f64>,
}

#[derive(Debug, Args)]
struct TheoryArgs {
    /// Materials as SPHERE:PLATE, e.g. Au:Ni
    #[arg(long)]
    pair: String,
    /// drude, plasma, generalized_plasma or table
    #[arg(long, default_value = "plasma")]
    model: Model,
    /// Separations in nm: from:to:step or a comma-separated list
    #[arg(long)]
    grid: String,
    /// Sphere radius in μm
    #[arg(long)]
    radius: Option<f64>,
    /// Temperature in K
    #[arg(long)]
    temperature: Option<f64>,
    /// Output CSV (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Dataset CSV (relative paths also searched in the fixture directory)
    dataset: PathBuf,
    /// Materials as SPHERE:PLATE for computed models
    #[arg(long)]
    pair: Option<String>,
    /// Comma-separated models to compute for --pair
    #[arg(long, value_delimiter = ',')]
    models: Vec<Model>,
    /// Externally computed theory CSV; may be repeated
    #[arg(long)]
    theory: Vec<PathBuf>,
    /// Confidence probabilities to classify at (default: the configured beta grid)
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    /// Number of consecutive points per window
    #[arg(long)]
    window: Option<usize>,
    /// Fold the separation error into the experimental error via the theory slope
    #[arg(long)]
    fold_separation_error: bool,
    /// Directory for report.json, bundle.json, band CSVs and SVG plots
    #[arg(long, default_value = "casimir-out")]
    out_dir: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct KcoefArgs {
    beta: f64,
    delta1: f64,
    delta2: f64,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Analysis bundle written by `compare`
    bundle: PathBuf,
    /// Confidence probabilities to draw (default: those classified in the bundle)
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    #[arg(long, default_value = "casimir-out")]
    out_dir: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Input(_) | Error::Domain(_) | Error::Io { .. } => 3,
        Error::Numerical { .. } => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = RunConfig::load(cli.config.as_deref()).and_then(|config| match cli.command {
        Command::Theory(args) => cmd_theory(config, args),
        Command::Compare(args) => cmd_compare(config, args),
        Command::Kcoef(args) => cmd_kcoef(args),
        Command::Plot(args) => cmd_plot(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("casimir: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn apply_overrides(config: &mut RunConfig, o: &Overrides) -> Result<()> {
    if let Some(p) = o.theory_error_percent {
        config.theory_error = config::TheoryErrorConfig::Percent { percent: p };
    }
    if let Some(r) = o.roughness {
        config.roughness_factor = r;
    }
    config.validate()
}

fn setup(
    config: &RunConfig,
    radius_um: f64,
    temperature_k: f64,
    grid: &[f64],
) -> Result<CurveSetup> {
    Ok(CurveSetup {
        sphere_radius_um: radius_um,
        thermal: ThermalState::new(temperature_k)?,
        quadrature: config.quadrature,
        error_spec: config.theory_error_spec(grid)?,
        roughness_factor: config.roughness_factor,
    })
}

fn computed_curve(
    config: &RunConfig,
    pair: &str,
    model: Model,
    grid: &[f64],
    setup: &CurveSetup,
) -> Result<TheoryCurve> {
    let (sphere, plate) = parse_pair(pair)?;
    let sphere = config.material(&sphere, model)?;
    let plate = config.material(&plate, model)?;
    theory_curve(model.name(), &sphere, &plate, grid, setup)
}

fn cmd_theory(mut config: RunConfig, args: TheoryArgs) -> Result<()> {
    apply_overrides(&mut config, &args.overrides)?;
    let grid = parse_grid(&args.grid)?;
    let radius = args.radius.unwrap_or(config.sphere_radius_um);
    let temperature = args.temperature.unwrap_or(config.temperature_k);
    let setup = setup(&config, radius, temperature, &grid)?;
    let curve = computed_curve(&config, &args.pair, args.model, &grid, &setup)?;
    let csv = data::theory_to_csv(&curve);
    match args.output {
        Some(path) => data::write_atomic(path, csv.as_bytes()),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_kcoef(args: KcoefArgs) -> Result<()> {
    let k = stats::k_coefficient(args.beta, args.delta1, args.delta2)?;
    let xi = stats::half_width(
        &stats::DifferencePoint {
            separation_nm: 1.0,
            difference: 0.0,
            theory_error: args.delta1,
            experiment_error: args.delta2,
        },
        args.beta,
    )?;
    println!("k_beta = {k:.6}");
    println!("Xi = {xi:.6}");
    Ok(())
}

#[derive(Debug, Serialize)]
struct Report {
    schema_version: u32,
    dataset: String,
    dataset_source: String,
    sphere_radius_um: f64,
    temperature_k: f64,
    window: usize,
    betas: Vec<f64>,
    beta_grid: Vec<f64>,
    fold_separation_error: bool,
    models: Vec<ModelReport>,
}

#[derive(Debug, Serialize)]
struct ModelReport {
    model_label: String,
    source: String,
    interpolated: bool,
    verdicts: Vec<Verdict>,
    /// Smallest grid β at which the model is consistent with the data.
    agreement_beta: Option<f64>,
    agreement_level: Option<f64>,
}

fn sorted_betas(betas: &[f64]) -> Result<Vec<f64>> {
    let mut out = betas.to_vec();
    if let Some(b) = out.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
        return Err(Error::Config(format!("beta must lie in (0, 1), got {b}")));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

fn cmd_compare(mut config: RunConfig, args: CompareArgs) -> Result<()> {
    apply_overrides(&mut config, &args.overrides)?;
    if let Some(w) = args.window {
        config.window = w;
    }
    config.fold_separation_error |= args.fold_separation_error;
    config.validate()?;
    let betas = sorted_betas(if args.beta.is_empty() {
        &config.beta_grid
    } else {
        &args.beta
    })?;

    let dataset_path = resolve_input(&args.dataset);
    let dataset = data::load_dataset(&dataset_path)?;
    let grid = dataset.separations();

    let mut curves: Vec<(TheoryCurve, String)> = Vec::new();
    match (&args.pair, args.models.is_empty()) {
        (Some(pair), false) => {
            let setup = setup(
                &config,
                dataset.sphere_radius_um,
                dataset.temperature_k,
                &grid,
            )?;
            for &model in &args.models {
                log::info!("computing {} curve for {pair}", model.name());
                let curve = computed_curve(&config, pair, model, &grid, &setup)?;
                curves.push((curve, format!("lifshitz {pair}")));
            }
        }
        (Some(_), true) => {
            return Err(Error::Config(
                "--pair needs at least one --models entry".into(),
            ))
        }
        (None, false) => return Err(Error::Config("--models needs --pair".into())),
        (None, true) => {}
    }
    for path in &args.theory {
        let curve = data::load_external_theory(resolve_input(path), &grid)?;
        curves.push((curve, format!("external {}", path.display())));
    }
    if curves.is_empty() {
        return Err(Error::Config(
            "nothing to compare: give --pair with --models, or --theory".into(),
        ));
    }
    let mut labels: Vec<&str> = curves.iter().map(|(c, _)| c.model_label.as_str()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config(
            "two theory curves share a model label".into(),
        ));
    }

    let mut bundle = AnalysisBundle {
        dataset_source: Some(args.dataset.display().to_string()),
        ..AnalysisBundle::default()
    };
    let mut models = Vec::new();
    for (curve, source) in curves {
        let series = difference_series(&curve, &dataset, config.fold_separation_error)?;
        let verdicts = betas
            .iter()
            .map(|&b| classify(&series, b, config.window))
            .collect::<Result<Vec<_>>>()?;
        let scan = agreement_scan(&series, &config.beta_grid, config.window)?;
        models.push(ModelReport {
            model_label: curve.model_label.clone(),
            source,
            interpolated: curve.interpolated,
            verdicts: verdicts.clone(),
            agreement_beta: scan.agreement_level.map(|_| scan.beta),
            agreement_level: scan.agreement_level,
        });
        bundle.verdicts.extend(verdicts);
        bundle.theory_curves.push(curve);
        bundle.differences.push(series);
    }
    let report = Report {
        schema_version: BUNDLE_SCHEMA_VERSION,
        dataset: dataset.label.clone(),
        dataset_source: args.dataset.display().to_string(),
        sphere_radius_um: dataset.sphere_radius_um,
        temperature_k: dataset.temperature_k,
        window: config.window,
        betas: betas.clone(),
        beta_grid: config.beta_grid.clone(),
        fold_separation_error: config.fold_separation_error,
        models,
    };
    bundle.dataset = Some(dataset);

    create_dir(&args.out_dir)?;
    for series in &bundle.differences {
        write_plot(&args.out_dir, series, &betas)?;
    }
    data::save_bundle(&bundle, args.out_dir.join("bundle.json"))?;
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Input(format!("cannot serialize report: {e}")))?;
    json.push('\n');
    data::write_atomic(args.out_dir.join("report.json"), json.as_bytes())?;

    for m in &report.models {
        let statuses: Vec<String> = m
            .verdicts
            .iter()
            .map(|v| format!("beta={}: {}", v.beta, status_text(v)))
            .collect();
        let agreement = m
            .agreement_level
            .map(|l| format!("agreement {l:.2}"))
            .unwrap_or_else(|| "no agreement level".into());
        println!("{}: {}; {agreement}", m.model_label, statuses.join(", "));
    }
    Ok(())
}

fn status_text(v: &Verdict) -> String {
    match &v.status {
        stats::Status::Excluded { from_nm, to_nm } => format!("excluded {from_nm}-{to_nm} nm"),
        stats::Status::Consistent => "consistent".into(),
        stats::Status::NotExcluded => "not excluded".into(),
    }
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let bundle = data::load_bundle(resolve_input(&args.bundle))?;
    if bundle.differences.is_empty() {
        return Err(Error::Input(format!(
            "{}: bundle holds no difference series",
            args.bundle.display()
        )));
    }
    create_dir(&args.out_dir)?;
    for series in &bundle.differences {
        let betas = if args.beta.is_empty() {
            sorted_betas(
                &bundle
                    .verdicts
                    .iter()
                    .filter(|v| v.model_label == series.model_label)
                    .map(|v| v.beta)
                    .collect::<Vec<_>>(),
            )?
        } else {
            sorted_betas(&args.beta)?
        };
        write_plot(&args.out_dir, series, &betas)?;
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `<model>.svg` plus its CSV twins: the differences and one band file per β.
fn write_plot(dir: &Path, series: &DifferenceSeries, betas: &[f64]) -> Result<()> {
    let stem = file_stem(&series.model_label);
    let bands = betas
        .iter()
        .map(|&b| confidence_band(series, b))
        .collect::<Result<Vec<_>>>()?;
    for band in &bands {
        data::write_atomic(
            dir.join(format!("{stem}_band_{}.csv", band.beta)),
            data::band_to_csv(band).as_bytes(),
        )?;
    }
    let mut csv = String::from("a_nm,diff_uN_per_m,theory_err_uN_per_m,expt_err_uN_per_m\n");
    for p in &series.points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            p.separation_nm, p.difference, p.theory_error, p.experiment_error
        ));
    }
    data::write_atomic(dir.join(format!("{stem}_differences.csv")), csv.as_bytes())?;
    let title = format!("{}: theory − experiment", series.model_label);
    data::write_atomic(
        dir.join(format!("{stem}.svg")),
        svg::render(series, &bands, &title).as_bytes(),
    )
}
