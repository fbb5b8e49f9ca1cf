use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use scenario_forge::behavior::{describe, BehaviorSet, ClassifierParams};
use scenario_forge::counterfactual::{pipeline, Tables};
use scenario_forge::harness::io::{load_map, load_scene, read_text, to_json, write_text};
use scenario_forge::harness::{build_plan, compute_metrics, execute, parse_instruction, render_bev, EditStatus};
use scenario_forge::map_model::LaneGraph;
use scenario_forge::reviewer::{review, ReviewConfig, DEFAULT_MAX_ITERATIONS};
use scenario_forge::scene_graph::{NodeId, ScenarioGraph};
use scenario_forge::synth::SampleSimulator;
use scenario_forge::validation::{validate, ValidationReport};

#[derive(Parser)]
#[command(name = "scenario-forge", version, about = "Edit driving scenarios at the behavior level")]
struct Cli {
    /// Worker threads for candidate sampling (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SceneArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    map: PathBuf,
}

#[derive(Args)]
struct LoopArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITERATIONS)]
    max_iter: usize,
    /// Candidates per node and iteration.
    #[arg(long, default_value_t = 64)]
    candidates: usize,
}

impl LoopArgs {
    fn config(&self) -> ReviewConfig {
        let mut cfg = ReviewConfig { seed: self.seed, max_iterations: self.max_iter, ..ReviewConfig::default() };
        cfg.synth.num_candidates = self.candidates;
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Behavior tokens of every object (or one).
    Describe {
        #[command(flatten)]
        io: SceneArgs,
        #[arg(long)]
        node: Option<NodeId>,
    },
    /// Feasible counterfactual behavior sets of one object.
    Counterfactuals {
        #[command(flatten)]
        io: SceneArgs,
        #[arg(long)]
        node: NodeId,
    },
    /// Run an edit program end to end.
    Edit {
        #[command(flatten)]
        io: SceneArgs,
        #[arg(long)]
        instruction: String,
        #[command(flatten)]
        run: LoopArgs,
        /// Directory for scene.json, report.json and bev.svg.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Review loop for explicit targets, each given as ID:token,token.
    Review {
        #[command(flatten)]
        io: SceneArgs,
        #[arg(long = "target", required = true)]
        targets: Vec<String>,
        #[command(flatten)]
        run: LoopArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate objects against their requested behavior.
    Validate {
        #[command(flatten)]
        io: SceneArgs,
    },
    /// Aggregate rates over report files or a directory of them.
    Metrics {
        #[arg(long)]
        suite: Option<PathBuf>,
        reports: Vec<PathBuf>,
    },
    /// Bird's-eye SVG of a scene, optionally overlaid with an edited one.
    RenderBev {
        #[command(flatten)]
        io: SceneArgs,
        #[arg(long)]
        edited: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(io: &SceneArgs) -> Result<(ScenarioGraph, LaneGraph)> {
    let scene = load_scene(&io.scene)?;
    let map = load_map(&io.map)?;
    Ok((scene, map))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn texts(set: &BehaviorSet) -> Vec<&'static str> {
    set.sorted_texts()
}

fn parse_target(spec: &str) -> Result<(NodeId, BehaviorSet)> {
    let (id, tokens) = spec.split_once(':').with_context(|| format!("target {spec:?} is not ID:tokens"))?;
    let id: NodeId = id.trim().parse().with_context(|| format!("bad node id in {spec:?}"))?;
    Ok((id, BehaviorSet::parse(tokens)?))
}

fn report_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "json"));
    files.sort();
    Ok(files)
}

/// Accepts a bare validation report or any document with a `validation` field.
fn read_report(path: &Path) -> Result<ValidationReport> {
    let v: Value = serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let v = match v.get("validation") {
        Some(inner) => inner.clone(),
        None => v,
    };
    if v.is_null() {
        bail!("{} has no validation report", path.display());
    }
    serde_json::from_value(v).with_context(|| format!("{} is not a validation report", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let p = ClassifierParams::default();
    match cli.command {
        Command::Describe { io, node } => {
            let (scene, map) = load(&io)?;
            let mut out = BTreeMap::new();
            for n in scene.nodes().filter(|n| node.is_none_or(|id| id == n.id)) {
                out.insert(n.id.to_string(), texts(&describe(&n.trajectory, &map, &p)));
            }
            if out.is_empty() {
                bail!("no node {}", node.unwrap_or_default());
            }
            print!("{}", to_json(&out));
        }
        Command::Counterfactuals { io, node } => {
            let (scene, map) = load(&io)?;
            let n = scene.node(node)?;
            let gt = describe(&n.trajectory, &map, &p);
            let out = pipeline(&gt, &n.trajectory, &map, &Tables::load()?, &p)?;
            let space: Vec<Vec<&str>> = out.space.iter().map(texts).collect();
            print!(
                "{}",
                to_json(&json!({
                    "node": node,
                    "original": texts(&gt),
                    "expanded": out.expanded,
                    "compatible": out.compatible,
                    "contextual": out.contextual,
                    "counterfactuals": space,
                }))
            );
        }
        Command::Edit { io, instruction, run, out } => {
            let (scene, map) = load(&io)?;
            let plan = build_plan(&parse_instruction(&instruction)?);
            let outcome = execute(&plan, &scene, &map, &Tables::load()?, &run.config(), &SampleSimulator)?;
            let report = to_json(&outcome);
            if let Some(dir) = out {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                write_text(&dir.join("scene.json"), &to_json(&outcome.scene))?;
                write_text(&dir.join("report.json"), &report)?;
                write_text(&dir.join("bev.svg"), &render_bev(&outcome.base, &map, Some(&outcome.edited())))?;
            }
            print!("{report}");
            if outcome.status == EditStatus::Rejected {
                for r in &outcome.rejections {
                    eprintln!("rejected statement {}: {}", r.statement, r.reason);
                }
                return Ok(ExitCode::from(1));
            }
        }
        Command::Review { io, targets, run, out } => {
            let (scene, map) = load(&io)?;
            let targets: BTreeMap<NodeId, BehaviorSet> = targets.iter().map(|t| parse_target(t)).collect::<Result<_>>()?;
            let outcome = review(&SampleSimulator, &scene, &map, &targets, &BTreeMap::new(), &run.config())?;
            if let Some(path) = out {
                let mut edited = scene.clone();
                for (&id, t) in &outcome.trajectories {
                    edited = edited.with_trajectory(id, t.clone())?;
                }
                write_text(&path, &to_json(&edited))?;
            }
            print!("{}", to_json(&json!({ "review": outcome, "validation": outcome.report })));
        }
        Command::Validate { io } => {
            let (scene, map) = load(&io)?;
            let targets: BTreeMap<NodeId, BehaviorSet> =
                scene.nodes().map(|n| (n.id, n.requested.clone().unwrap_or_default())).collect();
            let report = validate(&scene, &BTreeMap::new(), &targets, &map, &p)?;
            print!("{}", to_json(&report));
        }
        Command::Metrics { suite, mut reports } => {
            if let Some(dir) = suite {
                reports.extend(report_files(&dir)?);
            }
            if reports.is_empty() {
                bail!("no report files given");
            }
            let parsed: Vec<ValidationReport> = reports.par_iter().map(|f| read_report(f)).collect::<Result<_>>()?;
            print!("{}", to_json(&compute_metrics(&parsed)?));
        }
        Command::RenderBev { io, edited, out } => {
            let (scene, map) = load(&io)?;
            let overlay = match edited {
                Some(path) => {
                    let other = load_scene(&path)?;
                    Some(other.nodes().map(|n| (n.id, n.trajectory.clone())).collect::<BTreeMap<_, _>>())
                }
                None => None,
            };
            emit(out.as_deref(), &render_bev(&scene, &map, overlay.as_ref()))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
