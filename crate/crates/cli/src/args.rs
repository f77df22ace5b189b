use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "gropt", version, about = "Simulate, compile and analyse linear-optical Grover search circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Default)]
pub struct Common {
    /// Flat `key = value` file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; relative paths resolve against $GROPT_OUT_DIR if set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the noise generator; required whenever sigma > 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Oracle phase-noise standard deviation in radians.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Numerical tolerance for the checks a command performs.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Monte-Carlo samples per noisy point.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Default)]
pub struct CircuitArgs {
    /// Built-in name (grover2-uncompiled, grover2-compiled, grover<n>,
    /// grover<n>-compiled) or a circuit file.
    #[arg(long)]
    pub circuit: Option<String>,
    /// `ideal:<bits>` or `eo:<pc>,<lc>`; built-in circuits only.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Grover iterations for grover<n> built-ins.
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Detector distribution of a circuit.
    Simulate(CircuitArgs),
    /// Write a built-in circuit as a circuit file.
    Build(CircuitArgs),
    /// Optimize a circuit and report what was done.
    Compile {
        /// Circuit file or built-in name.
        #[arg(long = "in")]
        input: Option<String>,
        #[arg(long)]
        oracle: Option<String>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Where to write the JSON report; stdout by default.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Net unitaries of the four electro-optic settings and their checks.
    OracleCheck,
    /// Mean readout error against oracle phase noise.
    NoiseSweep {
        /// Comma-separated sigma values in radians.
        #[arg(long)]
        sigmas: Option<String>,
    },
    /// Interaction-free measurement outcome table.
    Ifm,
    /// Success probability of the abstract search.
    GroverAbstract {
        /// Comma-separated database sizes.
        #[arg(long)]
        sizes: Option<String>,
        /// Also tabulate every k from 0 to this value.
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Outer-interferometer visibility against path-length imbalance.
    DecohereSweep {
        /// Comma-separated values of delta_L / L_c.
        #[arg(long)]
        ratios: Option<String>,
        /// Marked element of the oracle in the inner circuit.
        #[arg(long)]
        marked: Option<String>,
    },
    /// Detector probabilities for each electro-optic oracle setting.
    Fig3,
}

/// Contents of a `--config` file. Keys are the flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub sigma: Option<f64>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub circuit: Option<String>,
    pub oracle: Option<String>,
    pub iterations: Option<usize>,
    #[serde(rename = "in")]
    pub input: Option<String>,
    pub report: Option<PathBuf>,
    pub sigmas: Option<String>,
    pub sizes: Option<String>,
    pub k_max: Option<usize>,
    pub ratios: Option<String>,
    pub marked: Option<String>,
}
