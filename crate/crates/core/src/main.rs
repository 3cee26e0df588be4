use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rcpp::compression::CompressorSpec;
use rcpp::harness::{
    build_instance, estimate_compressor, format_constants, primary_metric, run_on_instance,
    run_suite, theory_report, write_experiment, write_suite, EstimateConfig, ExperimentConfig,
    SuiteConfig,
};
use rcpp::{Error, Result};

/// Worker threads for the per-agent parallel loops. Results do not depend on it.
const THREADS_ENV: &str = "RCPP_THREADS";

#[derive(Parser)]
#[command(name = "rcpp", version, about = "Compressed push-pull gradient tracking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV trace (and SVG).
    Run(RunArgs),
    /// Run a suite of experiments sharing one problem and graph.
    Suite(RunArgs),
    /// Print the provable parameter region for a config.
    Theory {
        #[arg(long)]
        config: PathBuf,
    },
    /// Estimate the compression constants of a compressor empirically.
    EstimateCompressor(EstimateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compressor seed, overriding `run.seed` (or the suite's `seeds`).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    record_every: Option<u64>,
    #[arg(long, value_enum)]
    svg: Option<OnOff>,
}

#[derive(Args)]
struct EstimateArgs {
    /// TOML file with any of `spec`, `dim`, `r`, `samples`, `scale`, `seed`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Compressor, e.g. `qn`, `topk(k=5)`, `compose(infnorm(b=2,norm=stochastic),topk(k=10))`.
    #[arg(long)]
    spec: Option<CompressorSpec>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| format!("{THREADS_ENV} = {value:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => run(&args),
        Command::Suite(args) => suite(&args),
        Command::Theory { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            print!("{}", theory_report(&cfg, &config.display().to_string())?);
            Ok(())
        }
        Command::EstimateCompressor(args) => estimate(args),
    }
}

fn revalidate(config: &ExperimentConfig, path: &Path) -> Result<()> {
    config.validate().map_err(|message| Error::Config {
        path: path.display().to_string(),
        message,
    })
}

fn run(args: &RunArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(dir) = &args.out {
        config.output.dir = dir.clone();
    }
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(every) = args.record_every {
        config.run.record_every = every;
    }
    if let Some(svg) = args.svg {
        config.output.svg = matches!(svg, OnOff::On);
    }
    revalidate(&config, &args.config)?;
    let instance = build_instance(&config)?;
    let result = run_on_instance(&config, &instance)?;
    for path in write_experiment(&result, &instance, &config.output)? {
        println!("wrote {}", path.display());
    }
    let last = result.trace.last();
    println!(
        "k = {}  metric = {:e}  bits = {}",
        last.k,
        primary_metric(config.run.mode, last),
        last.cumulative_bits
    );
    Ok(())
}

fn suite(args: &RunArgs) -> Result<()> {
    let mut suite = SuiteConfig::load(&args.config)?;
    if let Some(dir) = &args.out {
        suite.output.dir = dir.clone();
    }
    if let Some(seed) = args.seed {
        suite.seeds = vec![seed];
    }
    if let Some(svg) = args.svg {
        suite.output.svg = matches!(svg, OnOff::On);
    }
    for run in &mut suite.runs {
        if let Some(every) = args.record_every {
            run.config.run.record_every = every;
        }
        revalidate(&run.config, &args.config)?;
    }
    let result = run_suite(&suite)?;
    for path in write_suite(&result, &suite)? {
        println!("wrote {}", path.display());
    }
    print!("{}", result.summary_csv);
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| Error::Config {
                path: path.display().to_string(),
                message: e.to_string(),
            })?
        }
        None => EstimateConfig::default(),
    };
    if let Some(spec) = args.spec {
        config.spec = spec;
    }
    if let Some(v) = args.dim {
        config.dim = v;
    }
    if let Some(v) = args.r {
        config.r = v;
    }
    if let Some(v) = args.samples {
        config.samples = v;
    }
    if let Some(v) = args.scale {
        config.scale = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    let constants = estimate_compressor(&config)?;
    print!("{}", format_constants(&config.spec, &constants));
    Ok(())
}
