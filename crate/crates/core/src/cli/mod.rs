//! Command-line front end. `main.rs` only forwards to [`run`].

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dataset::{FrequencyGroup, SplitFilter, SynthConfig};
use crate::{Error, LabelScheme, Result};

#[derive(Debug, Parser)]
#[command(name = "artiforest", version, about = "EEG artifact detection with compact tree ensembles")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommonArgs {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Label scheme used for training.
    #[arg(long, global = true, default_value_t = LabelScheme::Bc)]
    pub scheme: LabelScheme,
    /// Sampling-rate group used when extracting features.
    #[arg(long, global = true, default_value_t = FrequencyGroup::E)]
    pub group: FrequencyGroup,
    /// TOML config file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic annotated corpus.
    Synth(SynthArgs),
    /// Window, featurize and label a corpus into a feature table.
    Features(FeaturesArgs),
    /// Grow a forest and write it as a compact model.
    Train(TrainArgs),
    /// Cost-complexity prune a model to a byte budget or a fixed alpha.
    Prune(PruneArgs),
    /// Accuracy-vs-size curve over pruning strengths.
    Sweep(SweepArgs),
    /// Classification metrics of a model on a feature table.
    Eval(EvalArgs),
    /// Inference throughput and latency of a model.
    Bench(BenchArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Features(_) => "features",
            Command::Train(_) => "train",
            Command::Prune(_) => "prune",
            Command::Sweep(_) => "sweep",
            Command::Eval(_) => "eval",
            Command::Bench(_) => "bench",
        }
    }
}

fn default_synth() -> SynthConfig {
    SynthConfig::default()
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = default_synth().n_patients)]
    pub n_patients: usize,
    #[arg(long, default_value_t = default_synth().n_channels)]
    pub n_channels: usize,
    #[arg(long, default_value_t = default_synth().fs)]
    pub fs: u32,
    #[arg(long, default_value_t = default_synth().duration_s)]
    pub duration_s: f64,
    /// Expected fraction of annotated time.
    #[arg(long, default_value_t = default_synth().artifact_rate)]
    pub artifact_rate: f64,
    /// Artifact classes drawn from `1..=class_count`.
    #[arg(long, default_value_t = default_synth().class_count)]
    pub class_count: u8,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesArgs {
    /// Corpus directory.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Output feature table (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Train, validation and test fractions of the patient-independent split.
    #[arg(long, value_delimiter = ',', default_value = "0.8,0.1,0.1")]
    pub split_ratios: Vec<f64>,
    /// Mark every row as training data.
    #[arg(long)]
    pub no_split: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainArgs {
    /// Feature table (CSV).
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Output model (`.ctf`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trees per output; a multiple of the lane width.
    #[arg(long, default_value_t = 64)]
    pub n_trees: usize,
    #[arg(long, default_value_t = crate::forest::DEFAULT_LANE_WIDTH)]
    pub lane_width: usize,
    #[arg(long, default_value_t = 20)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 1)]
    pub min_samples_leaf: usize,
    /// Candidate features per node; defaults to ceil(sqrt(features)).
    #[arg(long)]
    pub k_features: Option<usize>,
    /// Rows of the feature table to train on.
    #[arg(long, default_value = "train")]
    pub split: SplitFilter,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruneArgs {
    /// Input model (`.ctf`).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Feature table whose rows supply the node statistics.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Output model (`.ctf`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Node payload budget in bytes (9 per node).
    #[arg(long, conflicts_with = "alpha")]
    pub budget: Option<usize>,
    /// Fixed complexity parameter.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Rows used to recompute node statistics; use the training rows.
    #[arg(long, default_value = "train")]
    pub split: SplitFilter,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Rows used to recompute node statistics.
    #[arg(long, default_value = "train")]
    pub fit_split: SplitFilter,
    /// Rows the curve is measured on.
    #[arg(long, default_value = "test")]
    pub eval_split: SplitFilter,
    /// Thin the critical alphas to at most this many points.
    #[arg(long)]
    pub max_points: Option<usize>,
    /// Explicit alpha grid instead of the critical alphas.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "test")]
    pub split: SplitFilter,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "test")]
    pub split: SplitFilter,
    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match resolve(&matches).and_then(|(common, command)| execute(&common, &command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve(matches: &ArgMatches) -> Result<(CommonArgs, Command)> {
    let cli = Cli::from_arg_matches(matches).map_err(|e| Error::invalid(e.to_string()))?;
    let file = cli.common.config.as_deref().map(config::read_config).transpose()?;
    let root = Cli::command();
    let mut common = config::merge(&cli.common, &root, matches, file.as_ref(), true)?;
    common.config = cli.common.config.clone();

    let name = cli.command.name();
    let (_, sub_matches) = matches.subcommand().expect("subcommand is required");
    let sub_command = root.find_subcommand(name).expect("subcommand is defined");
    let section = match file.as_ref().and_then(|f| f.get(name)) {
        Some(toml::Value::Table(t)) => Some(t.clone()),
        Some(_) => return Err(Error::invalid(format!("config key `{name}` must be a table"))),
        None => None,
    };
    let section = section.as_ref();
    macro_rules! merged {
        ($variant:ident, $args:expr) => {
            Command::$variant(config::merge($args, sub_command, sub_matches, section, false)?)
        };
    }
    let command = match &cli.command {
        Command::Synth(a) => merged!(Synth, a),
        Command::Features(a) => merged!(Features, a),
        Command::Train(a) => merged!(Train, a),
        Command::Prune(a) => merged!(Prune, a),
        Command::Sweep(a) => merged!(Sweep, a),
        Command::Eval(a) => merged!(Eval, a),
        Command::Bench(a) => merged!(Bench, a),
    };
    Ok((common, command))
}

/// The resolved run configuration in config-file form.
pub fn resolved_config(common: &CommonArgs, command: &Command) -> Result<String> {
    let mut table = config::to_table(common)?;
    let section = match command {
        Command::Synth(a) => config::to_table(a)?,
        Command::Features(a) => config::to_table(a)?,
        Command::Train(a) => config::to_table(a)?,
        Command::Prune(a) => config::to_table(a)?,
        Command::Sweep(a) => config::to_table(a)?,
        Command::Eval(a) => config::to_table(a)?,
        Command::Bench(a) => config::to_table(a)?,
    };
    table.insert(command.name().to_string(), toml::Value::Table(section));
    Ok(toml::to_string(&table).expect("tables always serialize"))
}

fn execute(common: &CommonArgs, command: &Command) -> Result<()> {
    eprintln!("# resolved config\n{}", resolved_config(common, command)?.trim_end());
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        // a pool that already exists (repeated in-process runs) is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match command {
        Command::Synth(a) => commands::synth(common, a),
        Command::Features(a) => commands::features(common, a),
        Command::Train(a) => commands::train(common, a),
        Command::Prune(a) => commands::prune(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Eval(a) => commands::eval(a),
        Command::Bench(a) => commands::bench(a),
    }
}
