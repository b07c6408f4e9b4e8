//! Command-line front end: dataset generation, sample inspection, the
//! latent magnification demo, and evaluation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use magforge::config::GenerationConfig;
use magforge::pipeline::{debug_sample, evaluate, generate, kernel_demo};
use magforge::Result;

#[derive(Parser)]
#[command(
    name = "magforge",
    version,
    about = "Deterministic synthesis of motion-magnification training triplets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset: PNG triplets plus one manifest.json.
    Generate {
        /// JSON config file; every field is optional, defaults apply.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Global seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (overrides the config; never changes output bytes).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Re-synthesize one sample and emit its intermediates (HR previews,
    /// reference-pose overlay, pre-quantization LR floats).
    Debug {
        /// JSON config file; must match the generation run to reproduce it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Global seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Sample index to inspect.
        #[arg(long)]
        index: usize,
    },
    /// Run the latent magnification chain (identity operators) on a frame
    /// pair and write the fused image.
    Demo {
        /// Directory holding the pair: I_A.png/I_B.png, or unique
        /// *_A.png/*_B.png files.
        #[arg(long)]
        pair: PathBuf,
        /// Magnification factor.
        #[arg(long)]
        alpha: f64,
        /// Output image (defaults to demo.png inside the pair directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare predictions with ground truth; both arguments are image
    /// files or both are directories matched by file name. Emits JSON.
    Evaluate {
        /// Prediction image or directory.
        #[arg(long)]
        pred: PathBuf,
        /// Ground-truth image or directory.
        #[arg(long)]
        gt: PathBuf,
    },
}

fn load_config(
    path: Option<&PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<GenerationConfig> {
    let mut cfg = match path {
        Some(p) => GenerationConfig::load(p)?,
        None => GenerationConfig::default(),
    };
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(workers) = workers {
        cfg.workers = workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            config,
            out,
            seed,
            workers,
        } => {
            let cfg = load_config(config.as_ref(), out, seed, workers)?;
            let report = generate(&cfg)?;
            println!(
                "produced {}/{} samples in {:.2}s -> {}",
                report.produced,
                report.requested,
                report.elapsed_secs,
                report.manifest_path.display()
            );
            if report.success() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "error: only {}/{} samples produced (below the 99% threshold); skipped: {:?}",
                    report.produced, report.requested, report.skipped
                );
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Debug {
            config,
            out,
            seed,
            index,
        } => {
            let cfg = load_config(config.as_ref(), out, seed, None)?;
            let bundle = debug_sample(&cfg, index)?;
            println!("debug bundle -> {}", bundle.dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Demo { pair, alpha, out } => {
            let path = kernel_demo(&pair, alpha, out.as_deref())?;
            println!("demo output -> {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate { pred, gt } => {
            let report = evaluate(&pred, &gt)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
