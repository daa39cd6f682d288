use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Parser, Subcommand};
use morphopt::rl::Algorithm;
use morphopt_harness::{report, runner, BaselineChoice, Command, ExperimentConfig, HarnessError, Heuristic, Overrides, TaskKind};
use serde_json::json;

/// Morphology optimization experiments for a planar 2R arm.
#[derive(Parser)]
#[command(name = "morphopt", version)]
struct Cli {
    /// Task path.
    #[arg(long, global = true, value_parser = PossibleValuesParser::new(["circle", "ellipse", "rect"]).map(|s| s.parse::<TaskKind>().expect("listed value")))]
    task: Option<TaskKind>,
    /// TOML configuration file; unset keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run a single seed (also used by the heuristics).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Training episodes per RL run.
    #[arg(long, global = true)]
    episodes: Option<usize>,
    /// Output root; each task writes into its own subdirectory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Grid sweep of the locus angle on the circle.
    Sweep,
    /// Derivative-free optimizer on the circle.
    Heuristic {
        #[arg(value_enum)]
        method: Heuristic,
    },
    /// Train one RL agent over the configured seeds.
    Rl {
        #[arg(value_parser = PossibleValuesParser::new(["sac", "ddpg", "ppo"]).map(|s| s.parse::<Algorithm>().expect("listed value")))]
        algo: Algorithm,
    },
    /// Score a reference design on the task path.
    Baseline {
        #[arg(value_enum)]
        kind: BaselineChoice,
    },
    /// Every method on every task, or on `--task` only.
    RunAll,
    /// Plot data and charts from finished runs.
    Report {
        /// Run directory; defaults to the output root.
        dir: Option<PathBuf>,
        /// Skip SVG charts.
        #[arg(long)]
        no_svg: bool,
    },
}

fn run(cli: Cli) -> Result<(String, Vec<PathBuf>), HarnessError> {
    let overrides = Overrides { task: cli.task, seed: cli.seed, episodes: cli.episodes, out: cli.out.clone() };
    let cfg = ExperimentConfig::load(cli.config.as_deref())?.resolve(&overrides)?;
    let (name, files) = match cli.cmd {
        Cmd::Report { dir, no_svg } => {
            let dir = dir.unwrap_or_else(|| cfg.out.clone());
            ("report".to_string(), report::report(&dir, cfg.svg && !no_svg)?)
        }
        Cmd::RunAll => {
            let tasks = match cli.task {
                Some(t) => vec![t],
                None => TaskKind::ALL.to_vec(),
            };
            ("run-all".to_string(), runner::run_all(&cfg, &tasks)?)
        }
        cmd => {
            let cmd = match cmd {
                Cmd::Sweep => Command::Sweep,
                Cmd::Heuristic { method } => Command::Heuristic(method),
                Cmd::Rl { algo } => Command::Rl(algo),
                Cmd::Baseline { kind } => Command::Baseline(kind),
                Cmd::RunAll | Cmd::Report { .. } => unreachable!(),
            };
            (cmd.slug(), runner::execute(&cfg, &cmd)?)
        }
    };
    Ok((name, files))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            eprintln!("{}", json!({"error": "usage", "message": msg.trim()}));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok((command, files)) => {
            let files: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
            println!("{}", json!({"status": "ok", "command": command, "files": files}));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
