// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;

#[derive(Parser, Debug)]
#[command(name = "chipletpart", version, about = "Cost-driven 2.5D chiplet partitioning")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed; overrides the config's `ga.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a benchmark netlist and a matching config.
    Gen(GenArgs),
    /// Partition a netlist and assign chiplet technologies.
    Partition(PartitionArgs),
    /// Floorplan a chiplet-level netlist.
    Floorplan(FloorplanArgs),
    /// Price an externally produced partition.
    Evaluate(EvaluateArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Template {
    Waferscale,
    Mempool,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "waferscale")]
    pub template: Template,
    #[arg(long, default_value_t = 1)]
    pub tiles: usize,
    #[arg(long, default_value_t = 14)]
    pub cores: usize,
    #[arg(long, default_value_t = 4)]
    pub mems: usize,
    #[arg(long)]
    pub no_router: bool,
    #[arg(long)]
    pub no_crossbar: bool,
    #[arg(long)]
    pub area_scaling: Option<f64>,
    #[arg(long)]
    pub power_scaling: Option<f64>,
    #[arg(long)]
    pub rent_k: Option<f64>,
    #[arg(long)]
    pub rent_p_logic: Option<f64>,
    #[arg(long)]
    pub rent_p_memory: Option<f64>,
    /// IO cell type of the generated nets.
    #[arg(long)]
    pub io: Option<String>,
    /// Comma-separated technology ids to keep in the emitted config.
    #[arg(long, value_delimiter = ',')]
    pub techs: Vec<String>,
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long = "config-out")]
    pub config_out: PathBuf,
}

/// Config file shared by the commands that need one.
#[derive(Args, Debug, Clone)]
pub struct ConfigArg {
    /// System config; built-in defaults when absent.
    #[arg(long, env = "CHIPLETPART_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GaFlags {
    #[arg(long)]
    pub tot_pop: Option<usize>,
    #[arg(long)]
    pub k_pop: Option<usize>,
    #[arg(long)]
    pub zeta: Option<usize>,
    #[arg(long)]
    pub sigma: Option<usize>,
    #[arg(long)]
    pub psi: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<usize>,
    #[arg(long)]
    pub delta_threshold: Option<f64>,
    #[arg(long)]
    pub p_c: Option<f64>,
    #[arg(long)]
    pub p_m: Option<f64>,
    #[arg(long = "K_max", alias = "k-max")]
    pub k_max: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct PartitionArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
    /// Output directory for the result bundle.
    #[arg(long)]
    pub out: PathBuf,
    /// Skip the GA; every chiplet uses this technology.
    #[arg(long)]
    pub homogeneous: Option<String>,
    /// Cost and power weights, e.g. `1,0`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub weights: Option<Vec<f64>>,
    /// Exit 0 even when the solution is infeasible.
    #[arg(long)]
    pub allow_infeasible: bool,
    #[command(flatten)]
    pub ga: GaFlags,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Standard,
    Fast,
}

#[derive(Args, Debug, Clone)]
pub struct FloorplanArgs {
    /// Chiplet-level input file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "standard")]
    pub mode: ModeArg,
    /// Override the reach of every net, mm.
    #[arg(long)]
    pub reach: Option<f64>,
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub allow_infeasible: bool,
}

#[derive(Args, Debug, Clone)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub partition: PathBuf,
    #[arg(long)]
    pub genome: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub weights: Option<Vec<f64>>,
    #[arg(long)]
    pub allow_infeasible: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output location; defaults to the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let outcome = match cli.command {
        Command::Gen(a) => commands::gen(&a).map(|()| true),
        Command::Partition(a) => commands::partition(&a, cli.seed),
        Command::Floorplan(a) => commands::floorplan(&a, cli.seed),
        Command::Evaluate(a) => commands::evaluate(&a, cli.seed),
        Command::Replay(a) => commands::replay(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let chain: Vec<String> = e.chain().map(ToString::to_string).collect();
            eprintln!("{}", serde_json::json!({ "error": chain.join(": ") }));
            ExitCode::from(2)
        }
    }
}
