//! The `catalyq` command line. Exit status is 0 when the report passes, 1 when
//! a check fails or the conversion is refused or out of reach, and 2 for bad
//! input.

pub mod commands;
pub mod params;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::experiments::CampaignConfig;
use commands::{Construction, ConvertOverrides, DivergenceKind, Outcome, Payload, TheoremKind};
use params::Params;

#[derive(Debug, Parser)]
#[command(name = "catalyq", version, about = "Correlated-catalytic conversions with explicit Gibbs-preserving channels")]
struct Cli {
    /// Override a tolerance, e.g. `--tol psd=1e-8`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Where to write the full JSON report (CSV for `stein-scan`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one divergence between two states.
    Divergence {
        #[arg(long, value_enum)]
        kind: DivergenceKind,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "state-a")]
        state_a: PathBuf,
        #[arg(long = "state-b")]
        state_b: PathBuf,
    },
    /// Build and verify a measure-and-prepare channel.
    Construct {
        #[arg(value_enum)]
        which: Construction,
        #[arg(long)]
        params: PathBuf,
    },
    /// Check a channel file for complete positivity, trace preservation and a Gibbs fixed point.
    Verify {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        gibbs: PathBuf,
        /// Output-side Gibbs state when it differs from the input side.
        #[arg(long = "gibbs-out")]
        gibbs_out: Option<PathBuf>,
    },
    /// Run a full catalytic conversion and verify every condition.
    Convert {
        #[arg(value_enum)]
        which: TheoremKind,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        mmax: Option<usize>,
    },
    /// The eight-copy qubit example end to end.
    ToyExample,
    /// `λ*` for the eight-copy example by formula and by bisection.
    AppendixD,
    /// Seeded random conversions.
    Campaign {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
        #[arg(long = "gap-min", default_value_t = 0.3)]
        gap_min: f64,
    },
    /// Per-copy hypothesis-testing rates against the relative entropy.
    SteinScan {
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 40)]
        nmax: usize,
        /// First state; the eight-copy example's state by default.
        #[arg(long = "state-a")]
        state_a: Option<PathBuf>,
        /// Second state; the example's Gibbs state by default.
        #[arg(long = "state-b")]
        state_b: Option<PathBuf>,
    },
}

/// 1 for outcomes the theory allows (refusal, no copy count found, a failed
/// check), 2 for malformed input.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Refused(_) | Error::CopiesInsufficient { .. } | Error::Numerical(_) => 1,
        Error::Dimension(_)
        | Error::Argument(_)
        | Error::Invariant(_)
        | Error::SizeCap { .. }
        | Error::Construction { .. }
        | Error::Io(_)
        | Error::Json(_) => 2,
    }
}

fn thread_pool() -> Result<()> {
    if let Ok(v) = std::env::var("CATALYQ_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Argument(format!("CATALYQ_THREADS must be a positive integer, got {v:?}")))?;
        // A pool already installed by an embedding program wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    thread_pool()?;
    let mut tol = Tolerances::default();
    for spec in &cli.tol {
        tol.apply_override(spec)?;
    }
    match cli.command {
        Command::Divergence { kind, eps, state_a, state_b } => commands::divergence(kind, eps, &state_a, &state_b, &tol),
        Command::Construct { which, params } => commands::construct(which, &Params::read(&params)?, &tol),
        Command::Verify { channel, gibbs, gibbs_out } => commands::verify(&channel, &gibbs, gibbs_out.as_deref(), &tol),
        Command::Convert { which, params, eps, delta, nmax, mmax } => {
            let o = ConvertOverrides { eps, delta, n_max: nmax, m_max: mmax };
            commands::convert(which, &Params::read(&params)?, o, &tol)
        }
        Command::ToyExample => commands::toy(&tol),
        Command::AppendixD => commands::appendix_d(),
        Command::Campaign { count, dim, eps, delta, nmax, gap_min } => {
            let cfg =
                CampaignConfig { seed: cli.seed, count, dim, eps, delta, n_max: nmax, gap_min, ..Default::default() };
            commands::campaign(&cfg, &tol)
        }
        Command::SteinScan { eps, nmax, state_a, state_b } => {
            commands::stein(eps, nmax, state_a.as_deref(), state_b.as_deref(), &tol)
        }
    }
}

fn write_out(path: &PathBuf, payload: &Payload) -> Result<()> {
    let text = match payload {
        Payload::Json(v) => serde_json::to_string_pretty(v)? + "\n",
        Payload::Text(s) => s.clone(),
    };
    std::fs::write(path, text)?;
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn dispatch(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(o) => {
            if let Some(path) = &out {
                if let Err(e) = write_out(path, &o.payload) {
                    eprintln!("error: {e}");
                    return exit_code(&e);
                }
            }
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(o.summary.as_bytes());
            if o.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("catalyq").chain(s.split_whitespace()).map(String::from).collect()
    }

    #[test]
    fn parses_every_subcommand() {
        for line in [
            "divergence --kind kl --state-a a.json --state-b b.json",
            "construct lemma1 --params p.json",
            "verify --channel c.json --gibbs g.json",
            "convert theorem2 --params p.json --mmax 4 --tol psd=1e-9 --tol channel=1e-8",
            "toy-example --out r.json",
            "appendix-d",
            "campaign --seed 3 --count 10",
            "stein-scan --eps 0.01 --nmax 40",
        ] {
            Cli::try_parse_from(argv(line)).unwrap_or_else(|e| panic!("{line}: {e}"));
        }
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(dispatch(argv("frobnicate")), 2);
        assert_eq!(dispatch(argv("divergence --kind kl --state-a /nonexistent/a.json --state-b b.json")), 2);
        assert_eq!(dispatch(argv("appendix-d --tol psd=-1")), 2);
    }

    #[test]
    fn refusal_maps_to_one() {
        assert_eq!(exit_code(&Error::Refused("uphill".into())), 1);
        assert_eq!(exit_code(&Error::CopiesInsufficient { limit: 3, detail: String::new() }), 1);
        assert_eq!(exit_code(&Error::arg("x")), 2);
    }
}
