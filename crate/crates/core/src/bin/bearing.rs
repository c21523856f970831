//! `bearing`: analyze, predict, simulate and generate bearing scenarios.
//!
//! Exit status: 0 when every run passes its assertions, 1 when an assertion
//! fails, 2 on invalid input or a module error.

use std::path::PathBuf;
use std::process::ExitCode;

use bearing_core::scenario::batch::run_batch;
use bearing_core::scenario::run::{apply_overrides, predict};
use bearing_core::scenario::{
    analyze, generate_cube_scenario, generate_localization_scenario, load_scenario, save_scenario, LocalizationParams,
    RunOptions,
};
use bearing_core::simulation::Method;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bearing", version, about = "Bearing rigidity, formation control and localization scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rigidity and spectral report for a scenario.
    Analyze {
        #[arg(long)]
        scenario: PathBuf,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Closed-form final state of a scenario.
    Predict {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Simulate one or more scenarios and check their assertions.
    Run {
        #[arg(long, required = true, num_args = 1..)]
        scenario: Vec<PathBuf>,
        /// Directory for the trajectory CSV and JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-seed random initial states.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dt: Option<f64>,
        /// `euler` or `rk4`.
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        max_time: Option<f64>,
        /// Worker threads for several scenarios.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write a generated scenario file.
    Generate {
        #[command(subcommand)]
        which: Generator,
    },
}

#[derive(Subcommand)]
enum Generator {
    /// 3-D cube formation.
    Cube {
        /// 0 for the leaderless flow.
        #[arg(long, default_value_t = 0)]
        leaders: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random anchored localization network.
    Localization {
        #[arg(long, default_value_t = 50)]
        agents: usize,
        #[arg(long, default_value_t = 3)]
        dimension: usize,
        /// Edge count to pad to; defaults to 269 for the 50-agent 3-D
        /// network and to the minimal rigid edge set otherwise.
        #[arg(long)]
        edges: Option<usize>,
        #[arg(long, default_value_t = 4)]
        anchors: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> bearing_core::Result<bool> {
    match cli.command {
        Command::Analyze { scenario, json } => {
            let s = load_scenario(&scenario)?;
            let a = analyze(&s)?;
            let mut warnings = s.warnings.clone();
            warnings.extend(a.warnings.iter().cloned());
            let value = serde_json::json!({
                "scenario": s.file.name,
                "kind": s.kind(),
                "agents": s.graph.vertex_count(),
                "edges": s.graph.edge_count(),
                "dimension": s.dimension(),
                "rank": a.rank,
                "required_rank": a.required_rank,
                "rigid": a.rigid,
                "nontrivial_motions": a.nontrivial_motions,
                "constraints_feasible": a.constraints_feasible,
                "laplacian_rank": a.laplacian_rank,
                "follower_block_positive_definite": a.follower_block.map(|v| v.positive_definite),
                "system_lambda_max": a.system_lambda_max,
                "system_lambda_min": a.system_lambda_min,
                "warnings": warnings,
            });
            if json {
                println!("{}", serde_json::to_string_pretty(&value).expect("plain json"));
            } else {
                println!("scenario   {} ({})", s.file.name, s.kind());
                println!("agents     {} in {}-D, {} edges", s.graph.vertex_count(), s.dimension(), s.graph.edge_count());
                match a.rank {
                    Some(r) => println!("rank       {r} of {} required", a.required_rank),
                    None => println!("rank       no realizing shape"),
                }
                println!("rigid      {}", a.rigid);
                if let Some(k) = a.nontrivial_motions {
                    println!("flexes     {k}");
                }
                println!("L rank     {}", a.laplacian_rank);
                if let Some(v) = a.follower_block {
                    println!("L_ff       positive definite: {} (lambda_min {:.6e})", v.positive_definite, v.lambda_min);
                }
                println!("lambda_max {:.6e}", a.system_lambda_max);
                for w in &warnings {
                    println!("warning    {w}");
                }
            }
            Ok(true)
        }
        Command::Predict { scenario, seed } => {
            let s = apply_overrides(&load_scenario(&scenario)?, &RunOptions { seed, ..RunOptions::default() })?;
            let a = analyze(&s)?;
            let mut warnings = Vec::new();
            let p = predict(&s, &a, &mut warnings)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let value = serde_json::json!({ "scenario": s.file.name, "prediction": p });
            println!("{}", serde_json::to_string_pretty(&value).expect("plain json"));
            Ok(p.is_some())
        }
        Command::Run { scenario, out, seed, dt, method, max_time, jobs } => {
            let opts = RunOptions { out_dir: out, dt, method, max_time, seed };
            let mut all_passed = true;
            let mut first_error = None;
            for (path, r) in scenario.iter().zip(run_batch(&scenario, &opts, jobs)) {
                match r {
                    Ok(report) => {
                        println!("{report}\n");
                        all_passed &= report.passed;
                    }
                    Err(e) => {
                        eprintln!("error: {}: {e}", path.display());
                        first_error.get_or_insert(e);
                    }
                }
            }
            match first_error {
                Some(e) => Err(e),
                None => Ok(all_passed),
            }
        }
        Command::Generate { which } => {
            let (s, out) = match which {
                Generator::Cube { leaders, seed, out } => (generate_cube_scenario(leaders, seed)?, out),
                Generator::Localization { agents, dimension, edges, anchors, seed, out } => {
                    let target_edges = edges.or((agents == 50 && dimension == 3).then_some(269));
                    let params = LocalizationParams { agents, dimension, target_edges, anchors, seed };
                    (generate_localization_scenario(&params)?, out)
                }
            };
            save_scenario(&s, &out)?;
            println!("wrote {} ({} agents, {} edges)", out.display(), s.graph.vertex_count(), s.graph.edge_count());
            Ok(true)
        }
    }
}
