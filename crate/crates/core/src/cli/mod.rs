//! Command-line front end: plan, run, verify and plot.
//!
//! Exit codes: 0 success (or clean), 1 input error, 2 no path found,
//! 3 entanglement found.

pub mod files;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::braid::BraidTable;
use crate::geometry::{build_space_time, extract_crossings, projection_angles, CrossingOptions, CrossingSet, ProjectionAxis, Trajectory};
use crate::harness::{exact_min_distance, run_task_sequence, verify, EntanglementReport, RunMetrics, Scenario, Verdict};
use crate::planner::plan;
use crate::workspace::{map_path_timed, ranks_from_positions};

pub use files::{FileError, PlanFile, ScenarioFile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NO_PATH: u8 = 2;
pub const EXIT_ENTANGLED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "tetherbraid", version, about = "Entanglement-free motion planning for tethered robot teams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan one target set from the initial positions and write a plan file.
    Plan(PlanArgs),
    /// Run every target set in sequence and write a metrics report.
    Run(RunArgs),
    /// Check a trajectory file for entanglement and print the report.
    Verify(VerifyArgs),
    /// Render a plan or trajectory file as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub set_index: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Replicas run concurrently on this many threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Independent replicas with seeds `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    #[arg(long)]
    pub seed_override: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Plan or trajectory file.
    pub trajectories: PathBuf,
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Plan or trajectory file.
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, conflicts_with = "braid", required_unless_present = "braid")]
    pub paths: bool,
    /// Projection index into `{iπ/m}`; m comes from the scenario, else 2.
    #[arg(long)]
    pub braid: Option<usize>,
    /// Supplies the workspace bounds, bases and projection set.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

/// An error to report on stderr, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    fn input(msg: impl ToString) -> Self {
        Self { code: EXIT_INPUT, msg: msg.to_string() }
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        Self::input(e)
    }
}

fn load_scenario(path: &Path, seed_override: Option<u64>) -> Result<Scenario, Failure> {
    ScenarioFile::read(path)?.to_scenario(seed_override).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Plan(a) => cmd_plan(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Plot(a) => cmd_plot(&a),
    }
}

/// Plans target set `set_index` from the initial positions with untangled
/// cables.
pub fn cmd_plan(a: &PlanArgs) -> Result<u8, Failure> {
    let scenario = load_scenario(&a.scenario, None)?;
    let Some(targets) = scenario.target_sets.get(a.set_index) else {
        return Err(Failure::input(format!(
            "--set-index {} out of range ({} target sets)",
            a.set_index,
            scenario.target_sets.len()
        )));
    };
    let config = &scenario.config;
    let start = ranks_from_positions(&scenario.initial_positions, &config.axes).map_err(Failure::input)?;
    let goal = ranks_from_positions(targets, &config.axes).map_err(|e| Failure::input(format!("target_sets[{}]: {e}", a.set_index)))?;
    let clock = Instant::now();
    let outcome = plan(&start, &goal, &BraidTable::identity(scenario.n(), 2), &scenario.planner_config()).map_err(Failure::input)?;
    let elapsed = clock.elapsed().as_secs_f64();
    let (Some(braids), true) = (&outcome.final_braids, outcome.found()) else {
        eprintln!("no path found after {} expansions", outcome.stats.expanded);
        return Ok(EXIT_NO_PATH);
    };
    let mapped = map_path_timed(&outcome.path, config, &scenario.initial_positions, targets).map_err(Failure::input)?;
    let mut file = PlanFile::from_trajectories(&mapped.trajectories);
    file.permutation_path = outcome.path.iter().map(Into::into).collect();
    file.set_braids(braids);
    file.stats = Some(files::PlanStats::new(&outcome.stats, outcome.actions.len(), elapsed));
    file.write(&a.out)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ReplicaReport {
    replicas: usize,
    total: usize,
    successes: usize,
    success_rate: f64,
    runs: Vec<RunMetrics>,
}

/// Runs the scenario, or `replicas` reseeded copies of it, and writes the
/// metrics. Per-set failures are data, not errors.
pub fn cmd_run(a: &RunArgs) -> Result<u8, Failure> {
    let file = ScenarioFile::read(&a.scenario)?;
    let base_seed = a.seed_override.unwrap_or(file.seed);
    if a.replicas == 0 || a.jobs == 0 {
        return Err(Failure::input("--replicas and --jobs must be positive"));
    }
    let scenarios = (0..a.replicas as u64)
        .map(|r| file.to_scenario(Some(base_seed.wrapping_add(r))))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::input(format!("{}: {e}", a.scenario.display())))?;

    let mut results: Vec<Option<Result<RunMetrics, String>>> = vec![None; scenarios.len()];
    let jobs = a.jobs.min(scenarios.len());
    std::thread::scope(|scope| {
        let chunk = scenarios.len().div_ceil(jobs);
        for (sc, out) in scenarios.chunks(chunk).zip(results.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (s, slot) in sc.iter().zip(out) {
                    *slot = Some(run_task_sequence(s).map_err(|e| e.to_string()));
                }
            });
        }
    });
    let runs = results
        .into_iter()
        .map(|r| r.expect("every replica ran"))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::input)?;

    let text = if let [single] = runs.as_slice() {
        to_json(single)
    } else {
        let total = runs.iter().map(|r| r.total).sum();
        let successes = runs.iter().map(|r| r.successes).sum();
        to_json(&ReplicaReport {
            replicas: runs.len(),
            total,
            successes,
            success_rate: if total == 0 { 1.0 } else { successes as f64 / total as f64 },
            runs,
        })
    };
    write_text(&a.out, &text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    #[serde(flatten)]
    report: &'a EntanglementReport,
    min_distance: Option<f64>,
    d_safe: f64,
}

fn load_trajectories(path: &Path, n: Option<usize>) -> Result<Vec<Trajectory>, Failure> {
    let trajs = PlanFile::read(path)?.trajectories(path)?;
    if let Some(n) = n.filter(|&n| n != trajs.len()) {
        return Err(Failure::input(format!("{}: waypoints: {} robots, scenario has {n}", path.display(), trajs.len())));
    }
    Ok(trajs)
}

/// Prints the entanglement report of a trajectory file against the
/// scenario's projection set, starting from untangled cables.
pub fn cmd_verify(a: &VerifyArgs) -> Result<u8, Failure> {
    let scenario = load_scenario(&a.scenario, None)?;
    let trajs = load_trajectories(&a.trajectories, Some(scenario.n()))?;
    let report = verify(&trajs, &scenario).map_err(Failure::input)?;
    let horizon = trajs.iter().map(Trajectory::arrival_time).fold(0.0, f64::max);
    let min_distance = (trajs.len() > 1).then(|| exact_min_distance(&trajs, 0.0, horizon));
    print!("{}", to_json(&VerifyOutput { report: &report, min_distance, d_safe: scenario.config.d_safe }));
    Ok(if report.verdict == Verdict::Clean { EXIT_OK } else { EXIT_ENTANGLED })
}

/// Crossings of `trajs` on projection `axis` of `{iπ/m}`.
pub fn crossings_on(trajs: &[Trajectory], m: usize, axis: usize, height: f64) -> Result<CrossingSet, Failure> {
    let axes = projection_angles(m);
    let Some(proj) = axes.get(axis) else {
        return Err(Failure::input(format!("--braid {axis}: axes are 0..={}", axes.len() - 1)));
    };
    let moving = trajs.iter().any(|t| t.arrival_time() > 0.0);
    if !moving || trajs.len() < 2 {
        let us: Vec<f64> = trajs.iter().map(|t| proj.u(t.start())).collect();
        let ids: Vec<usize> = (0..trajs.len()).collect();
        let order = proj.order(&us, &ids, ProjectionAxis::tie_tolerance(us.iter().copied()));
        return Ok(CrossingSet { axis, initial_order: order.clone(), final_order: order, events: vec![], perturbations: vec![] });
    }
    let lifted = build_space_time(trajs, height).map_err(Failure::input)?;
    extract_crossings(&lifted, proj, axis, &CrossingOptions::default()).map_err(Failure::input)
}

pub fn cmd_plot(a: &PlotArgs) -> Result<u8, Failure> {
    let scenario = a.scenario.as_deref().map(|p| load_scenario(p, None)).transpose()?;
    let trajs = load_trajectories(&a.input, scenario.as_ref().map(Scenario::n))?;
    let text = match a.braid {
        Some(axis) => {
            let (m, height) = scenario.as_ref().map_or((2, 1.0), |s| (s.m, s.config.height));
            svg::braid(&crossings_on(&trajs, m, axis, height)?)
        }
        None => match &scenario {
            Some(s) => svg::paths(&trajs, &s.bases, Some(s.config.region)),
            None => svg::paths(&trajs, &[], None),
        },
    };
    write_text(&a.out, &text)?;
    Ok(EXIT_OK)
}
