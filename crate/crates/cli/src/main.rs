use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tautrec_cli::render::{json_output, text_output};
use tautrec_cli::store::write_atomic;
use tautrec_cli::{run, Command, DeltaSwitch, JobConfig, KappaSwitch, CACHE_ENV};

#[derive(Parser)]
#[command(name = "tautrec", version, about = "Tautological relations and universal Gromov-Witten equations")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[arg(long, global = true)]
    g: Option<u32>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    r: Option<u32>,
    /// Comma-separated parts of sigma.
    #[arg(long, global = true, value_delimiter = ',')]
    sigma: Vec<u32>,
    /// Comma-separated insertion indices (default: all zero).
    #[arg(long, global = true, value_delimiter = ',')]
    a: Vec<u32>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    /// Rows absorbed between derivation checkpoints.
    #[arg(long, global = true, default_value_t = 2000)]
    checkpoint_every: usize,
    #[arg(long, global = true, value_enum, default_value_t = KappaSwitch::Printed)]
    kappa_variant: KappaSwitch,
    #[arg(long, global = true, value_enum, default_value_t = DeltaSwitch::Alt)]
    delta_reading: DeltaSwitch,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true, hide = true)]
    halt_after_checkpoints: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Sub {
    /// List stable graphs of type (g, n) with their automorphism counts.
    Graphs,
    /// List the decorated strata basis in codimension r.
    Basis,
    /// Expand one Pixton relation R(g, n, r; sigma, a).
    Pixton,
    /// Derive the relation expressing psi_1^r through the other strata.
    Derive {
        /// Correlator expression whose terms restrict the solution.
        #[arg(long)]
        within: Option<PathBuf>,
    },
    /// Translate a strata relation into a correlator equation.
    Translate { input: PathBuf },
    /// Verify a correlator identity given as JSON.
    Verify { input: PathBuf },
    /// Rank and corank of the relation set.
    Rank,
}

fn config(cli: &Cli) -> JobConfig {
    let (command, input, within) = match &cli.command {
        Sub::Graphs => (Command::Graphs, None, None),
        Sub::Basis => (Command::Basis, None, None),
        Sub::Pixton => (Command::Pixton, None, None),
        Sub::Derive { within } => (Command::Derive, None, within.clone()),
        Sub::Translate { input } => (Command::Translate, Some(input.clone()), None),
        Sub::Verify { input } => (Command::Verify, Some(input.clone()), None),
        Sub::Rank => (Command::Rank, None, None),
    };
    let mut c = JobConfig::new(command);
    c.g = cli.g;
    c.n = cli.n;
    c.r = cli.r;
    c.sigma = cli.sigma.clone();
    c.a = cli.a.clone();
    c.input = input;
    c.within = within;
    c.cache_dir = cli.cache_dir.clone();
    c.checkpoint_every = cli.checkpoint_every;
    c.threads = cli.threads;
    c.kappa_variant = cli.kappa_variant;
    c.delta_reading = cli.delta_reading;
    c.halt_after_checkpoints = cli.halt_after_checkpoints;
    c
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = config(&cli);
    let outcome = match run(&c) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("tautrec: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = match cli.format {
        Format::Json => match json_output(&c, &outcome) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("tautrec: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        Format::Text => text_output(&c, &outcome),
    };
    let written = match &cli.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("tautrec: cannot write output: {e}");
        return ExitCode::from(2);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
