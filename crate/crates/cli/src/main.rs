//! `phz`: simulate, unwrap, evaluate and benchmark 2D phase unwrapping.

mod bench;
mod error;
mod generators;
mod methods;
mod report;
mod scenario;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use phz_core::datagen::gen_phasenet_dataset;
use phz_core::io::{export_csv, read_grid, write_grid};

use crate::error::{CliError, Result};
use crate::generators::{generate, Distribution, GeneratorKind, SceneParams};
use crate::methods::{run_method, Method, MethodOptions, Profile};
use crate::report::{fmt_db, fmt_rewrap, fmt_ssim, measure};
use crate::scenario::Scenario;

#[derive(Parser, Debug)]
#[command(name = "phz", version, about = "2D phase unwrapping toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic scene or a training dataset.
    Simulate(SimulateArgs),
    /// Unwrap a wrapped-phase grid.
    Unwrap(UnwrapArgs),
    /// Compare estimates against a ground truth; prints CSV.
    Evaluate(EvaluateArgs),
    /// Run a scenario file and print the result table as CSV.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(value_enum)]
    generator: GeneratorKind,
    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side of the square frame.
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Crop angle in degrees (sample-b).
    #[arg(long, default_value_t = 0.0)]
    angle: f64,
    /// Gaussian width in normalized elliptical radius units.
    #[arg(long, default_value_t = 0.45)]
    sigma: f64,
    #[arg(long, default_value_t = 15.0)]
    amplitude: f64,
    /// Vertical semi-axis in pixels; default 80 scaled by size/256.
    #[arg(long)]
    radius_y: Option<f64>,
    /// Horizontal semi-axis in pixels; default 110 scaled by size/256.
    #[arg(long)]
    radius_x: Option<f64>,
    /// Peak value (sample-c).
    #[arg(long = "max", default_value_t = 42.0)]
    max_value: f64,
    /// Seed matrix side (sample-d).
    #[arg(long, default_value_t = 5)]
    matrix_size: usize,
    #[arg(long, value_enum, default_value_t = Distribution::Uniform)]
    distribution: Distribution,
    /// Seed matrix multiplier in radians (sample-d).
    #[arg(long, default_value_t = 6.0 * std::f64::consts::PI)]
    scale: f64,
    /// Signal-to-noise ratio of the speckle (sample-e).
    #[arg(long, default_value_t = 15.7)]
    snr_db: f64,
    /// Sphere radius in µm (phantom).
    #[arg(long, default_value_t = 4.0)]
    radius_um: f64,
    /// Number of tuples (phasenet-data).
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Also write CSV copies of every grid.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Debug)]
struct UnwrapArgs {
    #[arg(short, long, value_enum)]
    method: Method,
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    /// Run log path; defaults to the output path with `.log` appended.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    profile: Profile,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optimization iterations (pudip) or reweighting rounds (irls).
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    refresh_every: Option<usize>,
    #[arg(long)]
    input_channels: Option<usize>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    channels: Option<usize>,
    /// Also write a CSV copy of the result.
    #[arg(long)]
    csv: bool,
    /// Report the wall time on stderr.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(short, long)]
    truth: PathBuf,
    /// Wrapped input, for the rewrap error.
    #[arg(short, long)]
    wrapped: Option<PathBuf>,
    /// Estimates to score, one row each.
    #[arg(required = true)]
    estimates: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    scenario: PathBuf,
    /// Also write the table to this file.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Exit nonzero when any run fails.
    #[arg(long)]
    strict: bool,
    /// Add a wall_ms column; output is then no longer reproducible.
    #[arg(long)]
    timing: bool,
}

fn write_with_csv(path: &Path, grid: &phz_core::Grid2D, csv: bool) -> Result<()> {
    write_grid(path, grid)?;
    if csv {
        fs::write(path.with_extension("csv"), export_csv(grid))?;
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    fs::create_dir_all(&a.out)?;
    if a.generator == GeneratorKind::PhasenetData {
        if a.count == 0 {
            return Err(CliError::Usage("count must be positive".into()));
        }
        if a.size < 11 {
            return Err(CliError::Usage("phasenet-data needs size >= 11".into()));
        }
        let mut manifest = String::from("# index\tseed\tscale\tmatrix_size\tdistribution\twrapped\twrap_count\n");
        for s in gen_phasenet_dataset(a.count, a.seed).with_target_size(a.size) {
            let wrapped = format!("{:05}_wrapped.phz", s.index);
            let count = format!("{:05}_count.phz", s.index);
            write_with_csv(&a.out.join(&wrapped), &s.wrapped, a.csv)?;
            write_with_csv(&a.out.join(&count), &s.wrap_count, a.csv)?;
            manifest.push_str(&s.manifest_line(&[&wrapped, &count]));
            manifest.push('\n');
        }
        fs::write(a.out.join("manifest.tsv"), manifest)?;
        return Ok(());
    }
    let params = SceneParams {
        size: a.size,
        angle: a.angle,
        sigma: a.sigma,
        amplitude: a.amplitude,
        radius_y: a.radius_y,
        radius_x: a.radius_x,
        max_value: a.max_value,
        matrix_size: a.matrix_size,
        distribution: a.distribution,
        scale: a.scale,
        snr_db: a.snr_db,
        radius_um: a.radius_um,
    };
    let (truth, wrapped) = generate(a.generator, &params, a.seed)?;
    write_with_csv(&a.out.join("truth.phz"), &truth, a.csv)?;
    write_with_csv(&a.out.join("wrapped.phz"), &wrapped, a.csv)?;
    let manifest = format!(
        "generator={}\nseed={}\n{:?}\ntruth=truth.phz\nwrapped=wrapped.phz\n",
        a.generator.name(),
        a.seed,
        params
    );
    fs::write(a.out.join("manifest.txt"), manifest)?;
    Ok(())
}

fn unwrap(a: &UnwrapArgs) -> Result<()> {
    let start = Instant::now();
    let psi = read_grid(&a.input)?;
    let opts = MethodOptions {
        profile: a.profile,
        seed: a.seed,
        iterations: a.iters,
        lr: a.lr,
        eps_min: a.eps_min,
        eps_max: a.eps_max,
        refresh_every: a.refresh_every,
        input_channels: a.input_channels,
        stages: a.stages,
        body_channels: a.channels,
    };
    let (out, log) = run_method(a.method, &psi, &opts)?;
    write_with_csv(&a.out, &out, a.csv)?;
    let log_path = a.log.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".log");
        p.into()
    });
    fs::write(log_path, log)?;
    if a.timing {
        eprintln!("wall_ms={}", start.elapsed().as_millis());
    }
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let truth = read_grid(&a.truth)?;
    let wrapped = a.wrapped.as_ref().map(read_grid).transpose()?;
    let mut out = String::from("estimate,rsnr,ssim,rewrap_error\n");
    for path in &a.estimates {
        let est = read_grid(path)?;
        let m = measure(&est, &truth, wrapped.as_ref())?;
        out.push_str(&format!(
            "{},{},{},{}\n",
            path.display(),
            fmt_db(m.rsnr_db),
            fmt_ssim(m.ssim),
            m.rewrap.map_or_else(String::new, fmt_rewrap)
        ));
    }
    print!("{out}");
    Ok(())
}

fn threads() -> Result<Option<usize>> {
    match std::env::var("PHZ_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("PHZ_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn bench(a: &BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&a.scenario)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.scenario.display())))?;
    let scenario = Scenario::parse(&text)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let results = pool.install(|| bench::run_scenario(&scenario));
    let table = bench::table(&scenario, &results, a.timing);
    if let Some(path) = &a.out {
        fs::write(path, &table)?;
    }
    print!("{table}");
    if a.strict {
        if let Some(r) = results.iter().find(|r| r.metrics.is_err()) {
            return Err(CliError::Numerical(format!(
                "{} failed for seed {}: {}",
                r.method.name(),
                r.seed,
                r.metrics.as_ref().unwrap_err()
            )));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Unwrap(a) => unwrap(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phz: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
