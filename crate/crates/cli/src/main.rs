//! `ecd`: batch front end for the calibration toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ecd_core::io::svg::{
    render_ecd_curve_svg, render_histogram_svg, render_reliability_svg, ReliabilityOptions,
};
use ecd_core::io::{self, ReportFormat};
use ecd_core::{
    build_report, ecd_curve, gaussian, reliability_points, run_noise_suite, simulate, BinSpec,
    ClipPolicy, Dataset, SimulationConfig,
};

/// Environment variable naming the default output directory for `suite`.
const OUT_DIR_ENV: &str = "ECD_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "ecd",
    version,
    about = "Entropic calibration difference and companion calibration metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a prediction CSV (columns prob,label) and print a binned report.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic miscalibrated classifier dataset as CSV.
    Simulate(SimulateArgs),
    /// Run the simulation at several noise levels and write reports and plots.
    Suite(SuiteArgs),
    /// NEES and Gaussian ECD for a JSON array of {mean, covariance, truth}.
    Gaussian(GaussianArgs),
    /// Plot per-prediction ECD against probability for both labels.
    Curve(CurveArgs),
}

#[derive(Debug, Args)]
struct Scoring {
    /// Number of equal-width bins.
    #[arg(long, default_value_t = BinSpec::DEFAULT_BINS)]
    bins: usize,
    /// Clip bound used inside logarithms.
    #[arg(long, default_value_t = ClipPolicy::DEFAULT_EPSILON)]
    clip: f64,
}

impl Scoring {
    fn resolve(&self) -> Result<(BinSpec, ClipPolicy), Failure> {
        Ok((
            BinSpec::new(self.bins).map_err(Failure::usage)?,
            ClipPolicy::new(self.clip).map_err(Failure::usage)?,
        ))
    }
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    scoring: Scoring,
    /// json, csv or markdown.
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write reliability.svg and histogram.svg into this directory.
    #[arg(long)]
    plots_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Generator {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Scale applied to the sampled log-odds.
    #[arg(long, default_value_t = 0.5)]
    weight: f64,
    /// Half-width h of the Uniform(-h, h) unscaled log-odds.
    #[arg(long, default_value_t = 10.0)]
    halfwidth: f64,
    /// Mean of the log-odds noise.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    noise_mean: f64,
    /// Required when not attached to a terminal.
    #[arg(long)]
    seed: Option<u64>,
}

impl Generator {
    fn config(&self, sigma: f64) -> Result<SimulationConfig, Failure> {
        let config = SimulationConfig {
            n: self.n,
            logodds_halfwidth: self.halfwidth,
            weight: self.weight,
            noise_mean: self.noise_mean,
            noise_sigma: sigma,
            seed: resolve_seed(self.seed)?,
            stream: 0,
        };
        config.validate().map_err(Failure::usage)?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    generator: Generator,
    /// Standard deviation of the log-odds noise.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    #[arg(long)]
    output: PathBuf,
    /// Add a true_prob column.
    #[arg(long)]
    with_true_prob: bool,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    #[command(flatten)]
    generator: Generator,
    #[command(flatten)]
    scoring: Scoring,
    /// Comma-separated noise standard deviations.
    #[arg(long, value_delimiter = ',', default_values_t = ecd_core::simulation::DEFAULT_SIGMAS)]
    sigmas: Vec<f64>,
    /// Defaults to $ECD_OUT_DIR, then ./ecd-out.
    #[arg(long, env = OUT_DIR_ENV, default_value = "ecd-out")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct GaussianArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long, default_value_t = 2001)]
    grid: usize,
    #[arg(long, default_value_t = ClipPolicy::DEFAULT_EPSILON)]
    clip: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl Failure {
    fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }

    fn data(e: impl Into<anyhow::Error>) -> Self {
        Failure::Data(e.into())
    }
}

fn resolve_seed(seed: Option<u64>) -> Result<u64, Failure> {
    match seed {
        Some(s) => Ok(s),
        None if std::io::stdin().is_terminal() && std::io::stdout().is_terminal() => {
            eprintln!("warning: no --seed given, using 0");
            Ok(0)
        }
        None => Err(Failure::usage(anyhow::anyhow!(
            "--seed is required when not running interactively"
        ))),
    }
}

/// Writes through a temporary file in the destination directory, then renames.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let write = || -> anyhow::Result<()> {
        fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(contents)?;
        tmp.as_file().sync_all()?;
        tmp.persist(path)?;
        Ok(())
    };
    write()
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::data)
}

fn evaluate(args: &EvaluateArgs) -> Result<(), Failure> {
    let (spec, policy) = args.scoring.resolve()?;
    let data = io::load_csv_path(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))
        .map_err(Failure::data)?;
    let report = build_report(&data, spec, policy).map_err(Failure::data)?;
    let text = io::render_report(&report, args.format).map_err(Failure::data)?;
    match &args.output {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    if let Some(dir) = &args.plots_dir {
        write_plots(dir, "", &data, &report, spec)?;
    }
    Ok(())
}

fn write_plots(
    dir: &Path,
    suffix: &str,
    data: &Dataset,
    report: &ecd_core::CalibrationReport,
    spec: BinSpec,
) -> Result<(), Failure> {
    let options = ReliabilityOptions {
        title: format!(
            "Reliability diagram{}",
            if suffix.is_empty() {
                String::new()
            } else {
                format!(" ({suffix})")
            }
        ),
        bin_labels: true,
    };
    let reliability = render_reliability_svg(&reliability_points(&report.bins), &options);
    let name = |stem: &str| {
        if suffix.is_empty() {
            dir.join(format!("{stem}.svg"))
        } else {
            dir.join(format!("{stem}_{suffix}.svg"))
        }
    };
    write_atomic(&name("reliability"), reliability.as_bytes())?;
    let histogram = render_histogram_svg(
        data,
        spec.num_bins(),
        &format!(
            "Predicted probabilities{}",
            if suffix.is_empty() {
                String::new()
            } else {
                format!(" ({suffix})")
            }
        ),
    )
    .map_err(Failure::data)?;
    write_atomic(&name("histogram"), histogram.as_bytes())
}

fn simulate_cmd(args: &SimulateArgs) -> Result<(), Failure> {
    let config = args.generator.config(args.noise_sigma)?;
    let sim = simulate(&config).map_err(Failure::usage)?;
    let mut buf = Vec::new();
    io::write_simulated_csv(&mut buf, &sim, args.with_true_prob).map_err(Failure::data)?;
    write_atomic(&args.output, &buf)
}

fn suite(args: &SuiteArgs) -> Result<(), Failure> {
    let (spec, policy) = args.scoring.resolve()?;
    if args.sigmas.is_empty() || args.sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Failure::usage(anyhow::anyhow!(
            "--sigmas must be non-negative numbers"
        )));
    }
    let base = args.generator.config(0.0)?;
    let runs = run_noise_suite(&base, &args.sigmas, spec, policy).map_err(Failure::usage)?;
    let dir = &args.out_dir;
    for run in &runs {
        let tag = format!("sigma{}", run.sigma);
        let sim = simulate(&run.config).map_err(Failure::data)?;
        let data = sim.dataset();
        let mut csv = Vec::new();
        io::write_simulated_csv(&mut csv, &sim, true).map_err(Failure::data)?;
        write_atomic(&dir.join(format!("data_{tag}.csv")), &csv)?;
        for format in [ReportFormat::Json, ReportFormat::Markdown] {
            let text = io::render_report(&run.report, format).map_err(Failure::data)?;
            write_atomic(
                &dir.join(format!("report_{tag}.{}", format.extension())),
                text.as_bytes(),
            )?;
        }
        write_plots(dir, &tag, &data, &run.report, spec)?;
    }
    let table = io::render_suite_table(&runs);
    write_atomic(&dir.join("suite_table.md"), table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn gaussian_cmd(args: &GaussianArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))
        .map_err(Failure::data)?;
    let preds = gaussian::predictions_from_json(&text).map_err(Failure::data)?;
    let summary = gaussian::summarize(&preds).map_err(Failure::data)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).map_err(Failure::data)?
    );
    Ok(())
}

fn curve(args: &CurveArgs) -> Result<(), Failure> {
    let policy = ClipPolicy::new(args.clip).map_err(Failure::usage)?;
    let points = ecd_curve(args.grid, policy).map_err(Failure::usage)?;
    let svg = render_ecd_curve_svg(&points).map_err(Failure::data)?;
    write_atomic(&args.output, svg.as_bytes())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Evaluate(a) => evaluate(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Suite(a) => suite(a),
        Command::Gaussian(a) => gaussian_cmd(a),
        Command::Curve(a) => curve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
