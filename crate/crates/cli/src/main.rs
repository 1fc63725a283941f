mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Non-thermal black hole emission spectra, evaporation cascades and
/// information bookkeeping.
///
/// All physical quantities are in Planck units (G = c = ħ = k_B = 1):
/// masses, energies and charges in Planck masses, angular momentum in ħ,
/// entropies and log-weights in nats.
#[derive(Parser, Debug)]
#[command(name = "nonthermal", version, about, long_about)]
struct Cli {
    /// Flat TOML file with the same keys as the long flags (flags win).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads. Output does not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Emission spectrum of one black hole on an energy grid (CSV + manifest).
    Spectrum(SpectrumArgs),
    /// Monte Carlo emission cascades (JSON lines + ensemble report + manifest).
    Cascade(CascadeArgs),
    /// Run invariant suites and report measured values against tolerances.
    Verify(VerifyArgs),
    /// Random pure-state partial-trace experiment.
    Typicality(TypicalityArgs),
}

#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    /// schwarzschild | reissner-nordstrom (rn) | kerr-newman (kn) [default: schwarzschild]
    #[arg(long)]
    pub family: Option<String>,
    /// Mass M, Planck masses.
    #[arg(long)]
    pub mass: Option<f64>,
    /// Charge Q, Planck charges [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub charge: Option<f64>,
    /// Angular momentum J, units of ħ [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub angular_momentum: Option<f64>,
    /// Coefficient of the logarithmic entropy correction [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Lower end of the energy grid (exclusive), Planck energies [default: 0].
    #[arg(long)]
    pub omega_min: Option<f64>,
    /// Upper end of the energy grid (inclusive), at most M [default: M].
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Number of energy nodes [default: 64].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Emitted-charge axis step; enables the charge axis.
    #[arg(long)]
    pub charge_step: Option<f64>,
    /// Emitted-charge axis bounds in units of --charge-step [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub charge_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub charge_max: Option<i64>,
    /// Emitted-angular-momentum axis step; enables the spin axis.
    #[arg(long)]
    pub spin_step: Option<f64>,
    /// Emitted-angular-momentum axis bounds in units of --spin-step [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub spin_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub spin_max: Option<i64>,
    /// raw | unitsum [default: unitsum]
    #[arg(long)]
    pub normalization: Option<String>,
    /// Recorded in the manifest; spectra are deterministic [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output path [default: spectrum.csv].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Manifest path [default: <output stem>.manifest.json].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Also write the information report (JSON) to this path.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CascadeArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Energy quantum ε; (M − stop mass)/ε must be an integer.
    #[arg(long)]
    pub energy_quantum: Option<f64>,
    /// Mass at which a cascade stops [default: 0, or the extremal mass for charged/rotating holes].
    #[arg(long)]
    pub stop_mass: Option<f64>,
    /// Step budget, at least ceil(M/ε) [default: ceil(M/ε)].
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Charge quantum [default: 1].
    #[arg(long)]
    pub charge_quantum: Option<f64>,
    /// Largest |k| for charge moves k·quantum [default: 0].
    #[arg(long)]
    pub charge_moves: Option<u32>,
    /// Angular momentum quantum [default: 1].
    #[arg(long)]
    pub spin_quantum: Option<f64>,
    /// Largest |k| for spin moves k·quantum [default: 0].
    #[arg(long)]
    pub spin_moves: Option<u32>,
    /// Number of cascades [default: 1000].
    #[arg(long)]
    pub samples: Option<u64>,
    /// RNG seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON-lines output path [default: cascade.jsonl].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Ensemble report path [default: <output stem>.ensemble.json].
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    /// Manifest path [default: <output stem>.manifest.json].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// identities | typicality | cascade | info | all [default: all]
    #[arg(long)]
    pub suite: Option<String>,
    /// Base seed for randomized checks [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the JSON report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print the JSON report to stdout instead of one line per check.
    #[arg(long)]
    pub json: bool,
    #[arg(long, hide = true, allow_hyphen_values = true)]
    pub test_alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TypicalityArgs {
    /// System energy levels [default: 2].
    #[arg(long)]
    pub levels: Option<usize>,
    /// Degeneracy of each system level [default: 2].
    #[arg(long)]
    pub degeneracy: Option<u64>,
    /// Environment dimension at the lowest system level; halves per level [default: 4096].
    #[arg(long)]
    pub dim_o: Option<u64>,
    /// Number of random states [default: 100].
    #[arg(long)]
    pub samples: Option<u64>,
    /// First seed; sample i uses seed + i [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON output path [default: stdout].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
