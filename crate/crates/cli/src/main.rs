mod commands;
mod cost;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cursed-sig", version, about = "Cursed sequential equilibria of signaling games")]
struct Cli {
    /// Worker threads for grid sweeps.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,

    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate equilibria of a game file at one chi.
    #[command(after_help = "Examples:\n  cursed-sig solve --game kmn.json --chi 0.3\n  cursed-sig solve --game beer_quiche.json --chi 0 --support semi-separating")]
    Solve {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        chi: f64,
        /// Only solve these declared supports (default: all of them).
        #[arg(long = "support")]
        supports: Vec<String>,
        /// Skip the pure-strategy enumeration.
        #[arg(long)]
        no_pure: bool,
    },
    /// Check assessments against the equilibrium conditions.
    #[command(after_help = "Examples:\n  cursed-sig verify --game kmn.json --assessment eq.json\n  cursed-sig solve --game kmn.json --chi 0.3 -o eqs.json && cursed-sig verify --game kmn.json --assessment eqs.json")]
    Verify {
        #[arg(long)]
        game: PathBuf,
        /// One assessment, a list, or the output of `solve`.
        #[arg(long)]
        assessment: PathBuf,
    },
    /// Run the cursed and standard intuitive criteria.
    #[command(after_help = "Examples:\n  cursed-sig refine --game beer_quiche.json --chi 0.6\n  cursed-sig refine --game kmn.json --equilibria eqs.json")]
    Refine {
        #[arg(long)]
        game: PathBuf,
        /// Required unless --equilibria is given.
        #[arg(long)]
        chi: Option<f64>,
        /// Refine these assessments instead of solving.
        #[arg(long)]
        equilibria: Option<PathBuf>,
    },
    /// One CSV row per chi on a grid.
    #[command(after_help = "Examples:\n  cursed-sig sweep --spence --cost linear --theta-l 1 --theta-h 2 --p 0.5 --chi 0:1:0.01 --what regions\n  cursed-sig sweep --kmn --chi 0:1:0.005 --what regimes --jobs 4\n  cursed-sig sweep --continuum --theta-min 1 --mean 2 --chi 0:1:0.25\n  cursed-sig sweep --game beer_quiche.json --chi 0:1:0.1 --what refine")]
    Sweep(SweepArgs),
    /// Closed-form regions, Riley outcome, and surviving candidates at one chi.
    #[command(after_help = "Examples:\n  cursed-sig spence --theta-l 1 --theta-h 2 --p 0.5 --cost linear --chi 0.5\n  cursed-sig spence --theta-l 1 --theta-h 3 --p 0.3 --cost 'e^2/theta + e/theta' --chi 0.2")]
    Spence {
        #[command(flatten)]
        model: SpenceArgs,
        #[arg(long)]
        chi: f64,
        /// Grid steps over each candidate region.
        #[arg(long, default_value_t = 40)]
        candidates: usize,
    },
    /// Separating schedule of the continuum model as CSV.
    #[command(after_help = "Examples:\n  cursed-sig continuum --theta-min 1 --mean 2 --chi 0:1:0.25\n  cursed-sig continuum --theta-min 1 --theta-max 3 --density triangular --mode 2 --chi 0.5 --points 11")]
    Continuum {
        #[command(flatten)]
        model: ContinuumArgs,
        #[arg(long, default_value = "0")]
        chi: String,
        /// Types per schedule.
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Block-level tests of the laboratory investment rates.
    #[command(name = "kmn-stats", after_help = "Examples:\n  cursed-sig kmn-stats\n  cursed-sig kmn-stats --chi 0.7 --format csv\n  cursed-sig kmn-stats --data my_blocks.csv")]
    KmnStats {
        /// CSV files with treatment,block,worker_type,n,mean,sd (default: bundled tables).
        #[arg(long)]
        data: Vec<PathBuf>,
        /// Also test against the cursed prediction at this chi.
        #[arg(long)]
        chi: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum What {
    Regions,
    Regimes,
    Refine,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DensityArg {
    Uniform,
    Triangular,
}

#[derive(Args, Debug, Clone)]
struct SpenceArgs {
    #[arg(long)]
    theta_l: Option<f64>,
    #[arg(long)]
    theta_h: Option<f64>,
    /// Prior probability of the high type.
    #[arg(long)]
    p: Option<f64>,
    /// linear, quadratic, power:K, or an expression in e and theta.
    #[arg(long, default_value = "linear")]
    cost: String,
}

#[derive(Args, Debug, Clone)]
struct ContinuumArgs {
    #[arg(long)]
    theta_min: Option<f64>,
    #[arg(long)]
    theta_max: Option<f64>,
    #[arg(long)]
    mean: Option<f64>,
    #[arg(long, value_enum, default_value_t = DensityArg::Uniform)]
    density: DensityArg,
    /// Mode of the triangular density.
    #[arg(long)]
    mode: Option<f64>,
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false, args = ["spence", "kmn", "continuum", "game"])]
struct SweepArgs {
    /// Two-type education model.
    #[arg(long)]
    spence: bool,
    /// The laboratory game.
    #[arg(long)]
    kmn: bool,
    /// Continuum-of-types model.
    #[arg(long)]
    continuum: bool,
    /// A game file.
    #[arg(long)]
    game: Option<PathBuf>,
    /// start:stop:step, or a single value.
    #[arg(long)]
    chi: String,
    /// Defaults to regions for models and refine for games.
    #[arg(long, value_enum)]
    what: Option<What>,
    #[command(flatten)]
    spence_model: SpenceArgs,
    #[command(flatten)]
    continuum_model: ContinuumArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Ok(seed) = std::env::var("CURSED_SIG_SEED") {
        log::debug!("CURSED_SIG_SEED={seed} is reserved and currently unused");
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource() { 3 } else { 2 })
        }
    }
}
