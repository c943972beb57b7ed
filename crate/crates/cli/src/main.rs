//! `qswap`: simulate small qudit circuits and replay the certified
//! rewrite derivation that turns a state-swapping circuit into the
//! teleportation circuit.
//!
//! Exit codes: 0 when every check in the invocation passed, 1 on a
//! failed check or a runtime error, 2 on usage errors.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qswap_core::rewrite::Pipeline;
use qswap_core::{Dimension, DEFAULT_TOLERANCE};

const AFTER_HELP: &str = "\
Numeric tolerance defaults to 1e-10; set QSWAP_TOLERANCE to override it.

Input specs are comma-separated per-wire tokens, top wire first:
  <digit>        computational basis state 0..d-1
  chi            uniform superposition over all digits
  psi:[a,b,...]  explicit amplitudes (complex literals, normalized here)
  haar:<seed>    seeded Haar-random state

Identities for `verify`:
  fig3         a two-wire coupling equals its four-gate route through a third wire
  fig4         a qubit coupling equals a phase coupling between H rotations (d = 2)
  eq18         a coupling equals a phase coupling between F rotations on its target
  eq19         an inverse coupling equals a phase coupling between F rotations
  eq7          the uniform qubit state is invariant under the shift (d = 2)
  eq14         the uniform state is invariant under every shift power
  fig9-defer   coupling then measuring the control equals measuring then correcting
  cz-symmetry  phase couplings act identically from either wire";

#[derive(Parser)]
#[command(
    name = "qswap",
    version,
    about = "Qudit circuit simulator and certified swap-to-teleport rewrite engine",
    after_help = AFTER_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a named gate identity across dimensions.
    Verify {
        /// Identity name; see the listing under --help.
        #[arg(long)]
        identity: String,
        /// Comma-separated dimensions to check (default depends on the identity).
        #[arg(long, value_delimiter = ',')]
        d: Option<Vec<usize>>,
        /// Emit a JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Replay a derivation pipeline and certify every step.
    Derive {
        /// Pipeline: "qubit" (d = 2 only) or "qudit" (any d).
        #[arg(long)]
        pipeline: String,
        /// Wire dimension.
        #[arg(long)]
        d: usize,
        /// Directory to write the JSON and text reports into.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the JSON report on stdout instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run sampled teleportation trials and report fidelities.
    Teleport {
        /// Wire dimension.
        #[arg(long)]
        d: usize,
        /// Source state: one wire token, or bare "haar" for a fresh
        /// random state per trial.
        #[arg(long)]
        state: String,
        /// Number of trials.
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Master seed; trial states and measurement outcomes derive from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit a JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run a circuit file on an input, sampling measurement outcomes.
    Run {
        /// Circuit file path.
        #[arg(long)]
        circuit: PathBuf,
        /// Input spec, one token per wire.
        #[arg(long)]
        input: String,
        /// Seed for measurement sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit a JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Print the unitary of a measurement-free circuit file, one row per
    /// line, entries comma-separated as re+imi with 17 significant digits.
    Unitary {
        /// Circuit file path.
        #[arg(long)]
        circuit: PathBuf,
        /// Emit a JSON report instead of the plain matrix dump.
        #[arg(long)]
        json: bool,
    },
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("usage error: {message}");
    ExitCode::from(2)
}

fn tolerance_from_env() -> Result<f64, String> {
    match std::env::var("QSWAP_TOLERANCE") {
        Ok(raw) => raw
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite() && *t > 0.0)
            .ok_or(format!("QSWAP_TOLERANCE must be a positive number, got {raw:?}")),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_TOLERANCE),
        Err(e) => Err(format!("QSWAP_TOLERANCE is not readable: {e}")),
    }
}

fn checked_dim(d: usize) -> Result<Dimension, ExitCode> {
    Dimension::new(d).map_err(|e| usage_error(&e.to_string()))
}

fn main() -> ExitCode {
    // Die quietly when stdout closes early (e.g. piped into `head`)
    // instead of panicking on the broken pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = Cli::parse();
    let tolerance = match tolerance_from_env() {
        Ok(t) => t,
        Err(message) => return usage_error(&message),
    };

    let outcome = match cli.command {
        Command::Verify { identity, d, json } => {
            if commands::describe_identity(&identity).is_none() {
                let names: Vec<&str> = commands::IDENTITIES.iter().map(|(n, _)| *n).collect();
                return usage_error(&format!(
                    "unknown identity {identity:?}; expected one of {}",
                    names.join(", ")
                ));
            }
            let dims = d.unwrap_or_else(|| commands::default_dims(&identity));
            for &d in &dims {
                if let Err(code) = checked_dim(d) {
                    return code;
                }
            }
            commands::cmd_verify(&identity, &dims, json, tolerance)
        }
        Command::Derive {
            pipeline,
            d,
            out,
            json,
        } => {
            let pipeline = match Pipeline::parse(&pipeline) {
                Ok(p) => p,
                Err(e) => return usage_error(&e.to_string()),
            };
            let dim = match checked_dim(d) {
                Ok(dim) => dim,
                Err(code) => return code,
            };
            if pipeline == Pipeline::Qubit && dim.get() != 2 {
                return usage_error("the qubit pipeline only runs at d = 2");
            }
            commands::cmd_derive(pipeline, dim, out.as_deref(), json, tolerance)
        }
        Command::Teleport {
            d,
            state,
            trials,
            seed,
            json,
        } => {
            let dim = match checked_dim(d) {
                Ok(dim) => dim,
                Err(code) => return code,
            };
            if trials == 0 {
                return usage_error("--trials must be at least 1");
            }
            commands::cmd_teleport(dim, &state, trials, seed, json)
        }
        Command::Run {
            circuit,
            input,
            seed,
            json,
        } => commands::cmd_run(&circuit, &input, seed, json),
        Command::Unitary { circuit, json } => commands::cmd_unitary(&circuit, json),
    };

    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
