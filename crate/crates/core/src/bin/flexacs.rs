use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flexacs::cli::{self, CliError, ProjectConfig, RunOptions};
use flexacs::designer::DesignMode;

#[derive(Parser)]
#[command(name = "flexacs", version, about = "Pitch-loop analysis and bending-filter design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bode tables and margins at every check node.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Design JSON to analyse; default is the Phase-1 schedule without a filter.
        #[arg(long)]
        design: Option<PathBuf>,
    },
    /// Design a gain schedule and bending filter.
    Design {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "two-phase")]
        mode: Mode,
    },
    /// Two-phase and integrated designs for filter orders 2 to 6.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    TwoPhase,
    Integrated,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=6))]
    order: Option<u8>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    subcase: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    peak_window: Option<f64>,
    /// Sense the bending contribution to q_m through eta instead of eta-dot.
    #[arg(long)]
    strict_eq12: bool,
}

impl Common {
    fn load(&self) -> Result<(ProjectConfig, RunOptions), CliError> {
        let cfg = ProjectConfig::load(&self.config)?;
        let opts = RunOptions {
            order: self.order,
            subcase: self.subcase,
            seed: self.seed,
            out: self.out.clone(),
            peak_window: self.peak_window,
            strict_eq12: self.strict_eq12,
        };
        Ok((cfg, opts))
    }
}

fn run(cmd: Command) -> Result<Vec<PathBuf>, CliError> {
    match cmd {
        Command::Analyze { common, design } => {
            let (cfg, opts) = common.load()?;
            let d = design.as_deref().map(cli::read_design).transpose()?;
            Ok(cli::analyze(&cfg, &opts, d.as_ref())?.files)
        }
        Command::Design { common, mode } => {
            let (cfg, opts) = common.load()?;
            let mode = match mode {
                Mode::TwoPhase => DesignMode::TwoPhase,
                Mode::Integrated => DesignMode::Integrated,
            };
            Ok(cli::design(&cfg, &opts, mode)?.1)
        }
        Command::Compare { common } => {
            let (cfg, opts) = common.load()?;
            Ok(cli::compare(&cfg, &opts)?.1)
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args.command) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("flexacs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
