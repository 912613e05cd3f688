//! `visnet`: fuse images, run scenarios, sweep parameters, and generate
//! synthetic image feeds.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use visnet::fusion::{fuse_pair, FusionProfile};
use visnet::imagecore::{load_pgm, save_pgm, BitDepth};
use visnet::scenario::{run_scenario, sweep_seeds, write_run, ImageFeed, ScenarioConfig};
use visnet::wavelet::Basis;

#[derive(Parser)]
#[command(name = "visnet", version, about = "Visual sensor network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse two registered PGM images into one.
    Fuse {
        first: PathBuf,
        second: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value = "db4")]
        basis: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 3)]
        window: usize,
        /// Output bit depth, 8 or 16; defaults to the input depth.
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Run one scenario and write its CSV files and traces.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario for each value of one configuration key.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long)]
        values: String,
        /// Seeds to take the median over: `A..B` (inclusive) or a comma list.
        #[arg(long, conflicts_with = "seed")]
        seeds: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the synthetic image feed for a configuration as PGM files.
    GenFeed {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("visnet: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut config = match path {
        Some(p) => ScenarioConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty seed range {spec}");
        }
        return Ok((a..=b).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse().with_context(|| format!("bad seed {s:?}")))
        .collect()
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Fuse {
            first,
            second,
            output,
            basis,
            levels,
            window,
            depth,
        } => {
            let a = load_pgm(&first).with_context(|| format!("reading {}", first.display()))?;
            let b = load_pgm(&second).with_context(|| format!("reading {}", second.display()))?;
            let profile = FusionProfile {
                basis: basis.parse::<Basis>()?,
                levels,
                window,
                output_bit_depth: match depth {
                    Some(bits) => BitDepth::from_bits(bits)?,
                    None => a.depth(),
                },
                ..FusionProfile::high_resolution()
            };
            let fused = fuse_pair(&a, &b, &profile)?;
            save_pgm(&fused, &output).with_context(|| format!("writing {}", output.display()))?;
        }
        Command::Run { config, seed, out } => {
            let config = load_config(config.as_deref(), seed)?;
            let output = run_scenario(&config)?;
            write_run(&output, &out)?;
            println!("{}", out.display());
        }
        Command::Sweep {
            config,
            seed,
            axis,
            values,
            seeds,
            out,
        } => {
            let config = load_config(config.as_deref(), seed)?;
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
            let seeds = match seeds {
                Some(spec) => parse_seeds(&spec)?,
                None => vec![config.seed],
            };
            let table = sweep_seeds(&config, &axis, &values, &seeds)?;
            table.write(&out)?;
            println!("{}", out.display());
        }
        Command::GenFeed { config, seed, out } => {
            let config = load_config(config.as_deref(), seed)?;
            ImageFeed::synthetic(&config, config.seed).save(&out)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}
