use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use fraclab::config::{self, ExperimentConfig, ExperimentKind, RawConfig};
use fraclab::experiments::run_experiment;
use fraclab::tools::{self, OptimizeConfig, SampleArgs, SimulateConfig};
use fraclab_core::FgnMethod;

#[derive(Parser)]
#[command(name = "fraclab", version, about = "Fractional noise in dynamics and gradient descent")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (output file for `sample`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; never changes results.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Flat `key = value` config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct SweepFlags {
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Comma-separated H values, `anti` allowed for optimizer experiments.
    #[arg(long)]
    hs: Option<String>,
    /// Any config key, repeatable: `--set key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one fBM path as CSV.
    Sample {
        #[arg(long)]
        h: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        #[arg(long, default_value = "circulant")]
        method: FgnMethod,
    },
    /// Simulate the fractional OU process described by --config.
    Simulate {
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run fPGD on a registered landscape.
    Optimize {
        #[arg(long)]
        landscape: Option<String>,
        /// Hurst exponent or `anti`.
        #[arg(long)]
        h: Option<String>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        normalize_variance: bool,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Expected suprema over an H grid and their 1/sqrt(H) fit.
    SupScaling(SweepFlags),
    /// Styblinski-Tang exploration: hitting-time CDFs and end-position bars.
    Styblinski(SweepFlags),
    /// Embedded saddle: mean loss curves.
    Saddle(SweepFlags),
    /// Bi-stable landscape: first-exit CDFs and trajectories.
    Bistable(SweepFlags),
    /// Loss curves over a grid of noise scales.
    SigmaSweep(SweepFlags),
    /// Box-counting dimension of sampled fBM paths.
    Dimension(SweepFlags),
}

fn file_layer(cli: &Cli) -> Result<RawConfig> {
    cli.config.as_deref().map_or_else(|| Ok(RawConfig::new()), config::read_file)
}

fn push<T: ToString>(raw: &mut RawConfig, key: &str, v: Option<T>) {
    if let Some(v) = v {
        raw.insert(key.to_string(), v.to_string());
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = file_layer(&cli)?;
    let workers = cli.workers.unwrap_or_else(config::default_workers);
    let mut global = RawConfig::new();
    push(&mut global, "seed", cli.seed);

    let sweep = |kind: ExperimentKind, flags: &SweepFlags| -> Result<()> {
        let mut cli_layer = global.clone();
        push(&mut cli_layer, "runs", flags.runs);
        push(&mut cli_layer, "steps", flags.steps);
        push(&mut cli_layer, "eta", flags.eta);
        push(&mut cli_layer, "sigma", flags.sigma);
        push(&mut cli_layer, "hs", flags.hs.as_ref());
        push(&mut cli_layer, "workers", Some(workers));
        push(&mut cli_layer, "out", cli.out.as_ref().map(|p| p.display().to_string()));
        cli_layer.extend(config::parse_overrides(&flags.set)?);
        let cfg = ExperimentConfig::resolve(kind, &[&file, &cli_layer])?;
        let report = run_experiment(&cfg)?;
        for f in &report.failures {
            eprintln!("warning: {f}");
        }
        println!("{}", report.out.display());
        Ok(())
    };

    match &cli.command {
        Command::Sample { h, n, dt, method } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("fbm.csv"));
            let args = SampleArgs {
                h: *h,
                n: *n,
                dt: *dt,
                seed: cli.seed.unwrap_or(0),
                method: *method,
            };
            tools::sample(&args, &out)?;
            println!("{}", out.display());
        }
        Command::Simulate { runs, set } => {
            let mut cli_layer = global.clone();
            push(&mut cli_layer, "runs", *runs);
            cli_layer.extend(config::parse_overrides(set)?);
            let cfg = SimulateConfig::resolve(&[&file, &cli_layer])?;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out/simulate"));
            tools::simulate(&cfg, &out, workers)?;
            println!("{}", out.display());
        }
        Command::Optimize {
            landscape,
            h,
            eta,
            sigma,
            steps,
            runs,
            normalize_variance,
            set,
        } => {
            let mut cli_layer = global.clone();
            push(&mut cli_layer, "landscape", landscape.as_ref());
            push(&mut cli_layer, "h", h.as_ref());
            push(&mut cli_layer, "eta", *eta);
            push(&mut cli_layer, "sigma", *sigma);
            push(&mut cli_layer, "steps", *steps);
            push(&mut cli_layer, "runs", *runs);
            if *normalize_variance {
                push(&mut cli_layer, "normalize_variance", Some(true));
            }
            cli_layer.extend(config::parse_overrides(set)?);
            let cfg = OptimizeConfig::resolve(&[&file, &cli_layer])?;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out/optimize"));
            tools::optimize(&cfg, &out, workers)?;
            println!("{}", out.display());
        }
        Command::SupScaling(f) => sweep(ExperimentKind::SupScaling, f)?,
        Command::Styblinski(f) => sweep(ExperimentKind::Styblinski, f)?,
        Command::Saddle(f) => sweep(ExperimentKind::Saddle, f)?,
        Command::Bistable(f) => sweep(ExperimentKind::Bistable, f)?,
        Command::SigmaSweep(f) => sweep(ExperimentKind::SigmaSweep, f)?,
        Command::Dimension(f) => sweep(ExperimentKind::Dimension, f)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { fraclab::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(fraclab::exit_code(&e) as u8)
        }
    }
}
