// SPDX-License-Identifier: Apache-2.0

//! `cva`: validate, check and compare contract automata.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod style;
mod views;

/// Exit status for a completed run that found nothing to report.
pub const OK: u8 = 0;
/// Exit status for violations, conflicts or failed comparisons.
pub const FINDING: u8 = 1;
/// Exit status for usage and input errors.
pub const INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "cva", version, about = "Verification engine for two-party contract automata")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Largest alphabet the semantic oracle will enumerate.
    #[arg(long, global = true, default_value_t = 3, value_name = "N")]
    pub max_sigma: usize,
    /// Largest party menu the semantic oracle will enumerate.
    #[arg(long, global = true, default_value_t = 4, value_name = "N")]
    pub max_menu: usize,
    /// Largest clause context the semantic oracle will enumerate.
    #[arg(long, global = true, default_value_t = 3, value_name = "N")]
    pub max_context: usize,
    /// Require an explicit contract arm for every label.
    #[arg(long, global = true)]
    pub strict_totality: bool,
    /// Accept mutually exclusive actions in the synchronisation set.
    #[arg(long, global = true)]
    pub allow_mutex_sync: bool,
    /// Run analyses on a single thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a system file and report diagnostics.
    Validate { file: PathBuf },
    /// Check whether the parties can breach the contract.
    Check {
        file: PathBuf,
        /// `1`, `2`, `both` or a party name.
        #[arg(long, default_value = "both")]
        party: String,
    },
    /// Report states carrying conflicting clauses.
    Conflicts {
        file: PathBuf,
        /// Analyse one contract on its own.
        #[arg(long, value_name = "NAME", conflicts_with = "conjoin")]
        ca: Option<String>,
        /// Analyse the conjunction of two contracts on its own.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        conjoin: Option<Vec<String>>,
        /// Close the conflict relation under oracle-decided strictness.
        #[arg(long)]
        semantic: bool,
    },
    /// Compare two clauses, or two contracts of a file.
    Stricter(StricterArgs),
    /// Write a Graphviz rendering.
    Export {
        file: PathBuf,
        /// Output path, `-` for standard output.
        #[arg(long, value_name = "OUT")]
        dot: PathBuf,
        #[arg(long, value_enum, default_value_t = Layer::Regulated)]
        layer: Layer,
    },
    /// Replay a trace of action sets and report each step.
    Simulate {
        file: PathBuf,
        /// Steps separated by `;`, e.g. `{login,malicious};{logout}`.
        #[arg(long, default_value = "")]
        trace: String,
    },
}

#[derive(Args, Debug)]
pub struct StricterArgs {
    /// The clause claimed to be weaker.
    #[arg(long, requires = "c2", conflicts_with = "file")]
    pub c1: Option<String>,
    /// The clause claimed to be stricter.
    #[arg(long, requires = "c1")]
    pub c2: Option<String>,
    /// Alphabet, comma-separated. Defaults to the actions the clauses and
    /// mutex pairs mention.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<String>>,
    /// Synchronisation set, comma-separated. Defaults to every action not
    /// under mutual exclusion.
    #[arg(long, value_delimiter = ',')]
    pub sync: Option<Vec<String>>,
    /// Mutually exclusive pairs such as `a#b`, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub mutex: Vec<String>,
    /// Decide with the bounded oracle instead of the syntactic rules.
    #[arg(long)]
    pub semantic: bool,
    /// System file holding the contracts to compare.
    #[arg(requires_all = ["ca1", "ca2"])]
    pub file: Option<PathBuf>,
    /// Weaker contract name.
    #[arg(long)]
    pub ca1: Option<String>,
    /// Stricter contract name.
    #[arg(long)]
    pub ca2: Option<String>,
    /// Decide for one party only (`1` or `2`).
    #[arg(long)]
    pub party: Option<u8>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    Parties,
    Contract,
    Regulated,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT } else { OK });
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}: {e:#}", style::paint("error", style::Tone::Bad));
            ExitCode::from(INPUT)
        }
    }
}
