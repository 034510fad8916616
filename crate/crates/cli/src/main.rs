use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use selrisk_cli::commands::{cmd_gen, cmd_risk, cmd_scalarize};
use selrisk_cli::config::RunConfig;
use selrisk_cli::repro::{self, ReproId, ReproOptions};
use selrisk_cli::{exit_code, init_threads, EXIT_ACCEPTANCE, EXIT_OK};
use selrisk_core::{Error, Window};

/// Set-valued risk of multi-asset portfolios with transaction costs.
///
/// Exit codes: 0 success, 1 acceptance failure (repro), 2 configuration or
/// IO error, 3 modeling pathology (the outer bound is the whole plane).
///
/// The environment variable SELRISK_THREADS sets the worker thread count;
/// results do not depend on it.
#[derive(Parser)]
#[command(name = "selrisk", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate scenarios from the config's `data.generate` block into
    /// <out>/scenarios.csv.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Compute inner, outer and marginal regions into <out>/bundle.json and
    /// boundary CSVs.
    Risk {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        /// Window x0,y0,x1,y1 for the windowed distances and boundary CSVs.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<Window>,
    },
    /// Print inf ⟨u, x⟩ over the inner and the outer region of a bundle.
    Scalarize {
        #[arg(long)]
        bundle: PathBuf,
        /// Direction u1,u2 with nonnegative entries.
        #[arg(long, value_delimiter = ',')]
        u: Vec<f64>,
    },
    /// Run a pinned example and compare against its reference values.
    Repro {
        /// intro, nonmargin, normcone, frictionless, liquidity, ball or all.
        example: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
    },
}

fn load(config: &Path, seed: Option<u64>, n: Option<usize>) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(config)?;
    cfg.override_generation(seed, n)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32, Error> {
    init_threads()?;
    match cli.cmd {
        Cmd::Gen { config, out, seed, n } => {
            let cfg = load(&config, seed, n)?;
            print!("{}", cmd_gen(&cfg, out.as_deref())?);
        }
        Cmd::Risk { config, out, seed, n, window } => {
            let cfg = load(&config, seed, n)?;
            let b = cmd_risk(&cfg, out.as_deref(), window)?;
            println!(
                "{}: {} selections, inner {} vertices, marginal {} vertices",
                b.meta.kind,
                b.meta.selections,
                b.inner.vertices().len(),
                b.marginal.vertices().len()
            );
        }
        Cmd::Scalarize { bundle, u } => {
            let (inner, outer) = cmd_scalarize(&bundle, &u)?;
            println!("inner {inner}");
            println!("outer {outer}");
        }
        Cmd::Repro { example, out, seed, n } => {
            let ids: Vec<ReproId> =
                if example == "all" { ReproId::ALL.to_vec() } else { vec![example.parse()?] };
            let opts = ReproOptions { seed, n, out };
            let mut ok = true;
            for id in ids {
                let rep = repro::run(id, &opts)?;
                print!("{rep}");
                ok &= rep.passed();
            }
            return Ok(if ok { EXIT_OK } else { EXIT_ACCEPTANCE });
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
