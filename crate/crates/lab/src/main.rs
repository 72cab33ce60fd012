use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hrisk_core::sweep::SweepKind;
use hrisk_lab::commands::{self, CommonArgs};
use hrisk_lab::config::parse_list;

#[derive(Parser, Debug)]
#[command(name = "hrisk", version, about = "Closed-loop instability sweeps and calibration analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Simulation seed (sweeps) or bootstrap seed (analysis commands)
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated simulation seeds
    #[arg(long, value_parser = seed_list)]
    seeds: Option<SeedList>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Tail quantile level for NIS
    #[arg(long)]
    quantile: Option<f64>,
}

impl From<Common> for CommonArgs {
    fn from(c: Common) -> Self {
        CommonArgs { config: c.config, seed: c.seed, seeds: c.seeds.map(|s| s.0), out: c.out, quantile: c.quantile }
    }
}

#[derive(Debug, Clone)]
struct SeedList(Vec<u64>);

fn seed_list(s: &str) -> Result<SeedList, String> {
    let v: Vec<u64> = parse_list(s).map_err(|bad| format!("invalid seed {bad:?}"))?;
    if v.is_empty() {
        return Err("seed list is empty".to_string());
    }
    Ok(SeedList(v))
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Kind {
    B1,
    B2,
}

impl From<Kind> for SweepKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::B1 => SweepKind::B1AlphaRay,
            Kind::B2 => SweepKind::B2Epsilon,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gain-ray sweep K(α) = αK₀ on the B1 system
    SweepB1(Common),
    /// Observation-angle sweep H = [1 ε] on the B2 system
    SweepB2(Common),
    /// Single-factor ablations of the index
    Ablate {
        #[arg(long, value_enum, default_value = "b2")]
        kind: Kind,
        #[command(flatten)]
        common: Common,
    },
    /// fixed_ref versus dare_per_config on the same grid and seeds
    GainControl {
        #[arg(long, value_enum, default_value = "b2")]
        kind: Kind,
        #[command(flatten)]
        common: Common,
    },
    /// Paired condition deltas against the baseline condition
    Deltas {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// ECE, MCE, Brier and log loss per condition
    Calib {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Correlation summary recomputed from a results CSV
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> hrisk_lab::Result<Vec<PathBuf>> {
    match cli.command {
        Command::SweepB1(c) => commands::sweep(SweepKind::B1AlphaRay, &c.into()),
        Command::SweepB2(c) => commands::sweep(SweepKind::B2Epsilon, &c.into()),
        Command::Ablate { kind, common } => commands::ablate(kind.into(), &common.into()),
        Command::GainControl { kind, common } => commands::gain_control(kind.into(), &common.into()),
        Command::Deltas { input, common } => {
            let (files, unpaired) = commands::deltas(&input, &common.into())?;
            if unpaired > 0 {
                eprintln!("warning: {unpaired} items had no baseline counterpart and were excluded");
            }
            Ok(files)
        }
        Command::Calib { input, common } => commands::calib(&input, &common.into()),
        Command::Report { input, common } => commands::report(&input, &common.into()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
