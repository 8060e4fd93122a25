//! Command-line surface over the pipeline: generate graphs, solve the
//! relaxation, round, train the agent, sweep widths, and aggregate results.

use clap::{Args, Parser, Subcommand};
use hypercut::harness::{
    cmd_ablate, cmd_gen_er, cmd_pgw, cmd_report, cmd_solve, cmd_train, RoundingSettings,
    SdpSettings, TrainSettings,
};
use hypercut::{Error, Result};
use serde::Deserialize;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hypercut", version, about = "MaxCut toolkit: relaxation solver, hyperplane rounding, and an on-graph rounding agent")]
struct Cli {
    /// JSON config file with optional "sdp", "rounding", and "train"
    /// sections; explicit flags override config values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Optional setting sections loaded from --config.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    sdp: Option<SdpSettings>,
    rounding: Option<RoundingSettings>,
    train: Option<TrainSettings>,
}

#[derive(Args)]
struct TrainFlags {
    /// Hidden width of the policy network.
    #[arg(long)]
    l: Option<usize>,
    /// Number of parallel rounding chains.
    #[arg(long)]
    chains: Option<usize>,
    /// Total environment steps.
    #[arg(long = "T")]
    total_steps: Option<usize>,
    /// Steps between parameter updates.
    #[arg(long)]
    t_step: Option<usize>,
    /// Optimization epochs per update.
    #[arg(long)]
    n_epochs: Option<usize>,
    /// Minibatch size within an update epoch.
    #[arg(long)]
    minibatch: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Surrogate clip width.
    #[arg(long)]
    eps_clip: Option<f64>,
    /// Discount factor in the TD target.
    #[arg(long)]
    gamma: Option<f64>,
    /// Seed for chains, shuffling, initialization, and the baseline run.
    #[arg(long)]
    seed: Option<u64>,
    /// Use Adam instead of plain gradient descent.
    #[arg(long)]
    adam: bool,
    /// Subtract a running mean of rewards inside TD targets.
    #[arg(long)]
    reward_baseline: bool,
    /// Suppress wall-clock fields so reruns are byte-identical.
    #[arg(long)]
    deterministic: bool,
    /// Write an intermediate checkpoint every this many steps.
    #[arg(long)]
    checkpoint_every: Option<usize>,
}

impl TrainFlags {
    fn merge_into(&self, base: TrainSettings) -> TrainSettings {
        let mut s = base;
        if let Some(v) = self.l {
            s.hidden = v;
        }
        if let Some(v) = self.chains {
            s.chains = v;
        }
        if let Some(v) = self.total_steps {
            s.total_steps = v;
        }
        if let Some(v) = self.t_step {
            s.t_step = v;
        }
        if let Some(v) = self.n_epochs {
            s.n_epochs = v;
        }
        if let Some(v) = self.minibatch {
            s.minibatch = v;
        }
        if let Some(v) = self.lr {
            s.learning_rate = v;
        }
        if let Some(v) = self.eps_clip {
            s.clip_epsilon = v;
        }
        if let Some(v) = self.gamma {
            s.gamma = v;
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if self.adam {
            s.use_adam = true;
        }
        if self.reward_baseline {
            s.reward_baseline = true;
        }
        if self.deterministic {
            s.deterministic = true;
        }
        if let Some(v) = self.checkpoint_every {
            s.checkpoint_every = v;
        }
        s
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded Erdos-Renyi graph as a JSON file.
    #[command(name = "gen-er")]
    GenEr {
        /// Node count.
        #[arg(long)]
        n: usize,
        /// Edge probability.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the low-rank relaxation of a graph file.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        /// Embedding output path; a JSON sidecar lands next to it.
        #[arg(long)]
        out: PathBuf,
        /// Embedding rank (default: the generic-optimality rank for n).
        #[arg(long, conflicts_with = "rank_full")]
        rank: Option<usize>,
        /// Use full rank d = n.
        #[arg(long)]
        rank_full: bool,
        /// Convergence threshold on the largest per-sweep displacement.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_sweeps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Reuse prior solves keyed by graph hash and solver settings.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Round an embedding with a batch of random hyperplanes.
    Pgw {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
        /// Batch size.
        #[arg(long = "B")]
        b: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the result JSON here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the best assignment as a line of +-1 values.
        #[arg(long)]
        incumbent_out: Option<PathBuf>,
    },
    /// Train the rounding agent on one graph and compare against rounding.
    Train {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
        /// Receives metrics.csv, checkpoint.bin, and comparison.json.
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Train once per hidden width and tabulate the results.
    Ablate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Comma-separated hidden widths.
        #[arg(long = "l-list", value_delimiter = ',', default_values_t = [64usize, 128, 256, 512, 1024])]
        l_list: Vec<usize>,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Aggregate every comparison.json under a directory into one CSV.
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::BadFormat(format!("cannot read config {}: {}", p.display(), e)))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::BadFormat(format!("config {}: {}", p.display(), e)))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::GenEr { n, p, seed, out } => {
            let g = cmd_gen_er(n, p, seed, &out)?;
            println!(
                "{}",
                serde_json::json!({ "out": out.display().to_string(), "n": g.n(), "m": g.m() })
            );
        }
        Command::Solve { graph, out, rank, rank_full, tol, max_sweeps, seed, cache_dir } => {
            let mut settings = config.sdp.unwrap_or_default();
            if let Some(r) = rank {
                settings.d = Some(r);
            }
            if rank_full {
                let g = hypercut::harness::load_graph(&graph)?;
                settings.d = Some(g.n());
            }
            if let Some(v) = tol {
                settings.tol = v;
            }
            if let Some(v) = max_sweeps {
                settings.max_sweeps = v;
            }
            if let Some(v) = seed {
                settings.seed = v;
            }
            let outcome = cmd_solve(&graph, &settings, &out, cache_dir.as_deref())?;
            println!(
                "{}",
                serde_json::json!({
                    "out": out.display().to_string(),
                    "objective": outcome.report.objective,
                    "iterations": outcome.report.iterations,
                    "final_delta": outcome.report.final_delta,
                    "converged": outcome.report.converged,
                    "cache_hit": outcome.cache_hit,
                })
            );
        }
        Command::Pgw { graph, embedding, b, seed, out, incumbent_out } => {
            let mut settings = config.rounding.unwrap_or_default();
            if let Some(v) = b {
                settings.b_samples = v;
            }
            if let Some(v) = seed {
                settings.seed = v;
            }
            let (result, doc) = cmd_pgw(&graph, &embedding, &settings, out.as_deref())?;
            if let Some(path) = incumbent_out {
                let line = result
                    .incumbent
                    .values()
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                hypercut::harness::write_atomic(&path, (line + "\n").as_bytes())?;
            }
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::Train { graph, embedding, out_dir, train } => {
            let settings = train.merge_into(config.train.unwrap_or_default());
            let outcome = cmd_train(&graph, &embedding, &settings, &out_dir)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "metrics": outcome.metrics_path.display().to_string(),
                    "checkpoint": outcome.checkpoint_path.display().to_string(),
                    "comparison": outcome.comparison,
                }))?
            );
        }
        Command::Ablate { graph, embedding, out_dir, l_list, train } => {
            let settings = train.merge_into(config.train.unwrap_or_default());
            let table = cmd_ablate(&graph, &embedding, &l_list, &settings, &out_dir)?;
            print!("{}", fs::read_to_string(&table)?);
        }
        Command::Report { dir, out } => {
            let csv = cmd_report(&dir)?;
            if let Some(path) = out {
                hypercut::harness::write_atomic(&path, csv.as_bytes())?;
            }
            print!("{}", csv);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err);
            ExitCode::FAILURE
        }
    }
}
