//! JSON interchange formats: scenarios in, plans and trajectories out.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::BraidTable;
use crate::geometry::{Point, Trajectory, Waypoint};
use crate::harness::{random_targets, HarnessError, Scenario, DEFAULT_GAMMA_BAR};
use crate::planner::{PermutationState, PlannerConfig, SearchStats};
use crate::workspace::{Rect, WorkspaceConfig};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("{path}: {key}: {msg}")]
    Invalid { path: PathBuf, key: String, msg: String },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let text = fs::read_to_string(path).map_err(|source| FileError::Io { path: path.into(), source })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let msg = if key == "." { e.inner().to_string() } else { format!("{key}: {}", e.inner()) };
        FileError::Parse { path: path.into(), msg }
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| FileError::Io { path: path.into(), source })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceSection {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub height: f64,
}

fn default_gamma_bar() -> f64 {
    DEFAULT_GAMMA_BAR
}

fn default_m() -> usize {
    2
}

fn default_bias() -> f64 {
    PlannerConfig::default().bias
}

fn default_retrace() -> bool {
    true
}

fn default_max_expansions() -> usize {
    PlannerConfig::default().max_expansions
}

/// Scenario document. `random_target_sets`, when present, appends that many
/// target sets drawn from `seed` after the listed ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub workspace: WorkspaceSection,
    pub cell_size: f64,
    pub d_safe: f64,
    pub speed: f64,
    pub bases: Vec<Point>,
    pub initial_positions: Vec<Point>,
    #[serde(default)]
    pub target_sets: Vec<Vec<Point>>,
    pub seed: u64,
    #[serde(default = "default_gamma_bar")]
    pub gamma_bar: f64,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_bias")]
    pub bias: f64,
    #[serde(default = "default_max_expansions")]
    pub max_expansions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_target_sets: Option<usize>,
    #[serde(default = "default_retrace")]
    pub retrace: bool,
}

impl ScenarioFile {
    pub fn read(path: &Path) -> Result<Self, FileError> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<(), FileError> {
        write_json(path, self)
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        let r = s.config.region;
        Self {
            workspace: WorkspaceSection { xmin: r.xmin, xmax: r.xmax, ymin: r.ymin, ymax: r.ymax, height: s.config.height },
            cell_size: s.config.cell_size,
            d_safe: s.config.d_safe,
            speed: s.config.speed,
            bases: s.bases.clone(),
            initial_positions: s.initial_positions.clone(),
            target_sets: s.target_sets.clone(),
            seed: s.seed,
            gamma_bar: s.gamma_bar,
            m: s.m,
            bias: s.bias,
            max_expansions: s.max_expansions,
            random_target_sets: None,
            retrace: s.retrace,
        }
    }

    /// The validated scenario, with random target sets drawn from `seed`
    /// (or `seed_override`).
    pub fn to_scenario(&self, seed_override: Option<u64>) -> Result<Scenario, HarnessError> {
        let w = self.workspace;
        let config = WorkspaceConfig {
            region: Rect { xmin: w.xmin, xmax: w.xmax, ymin: w.ymin, ymax: w.ymax },
            height: w.height,
            cell_size: self.cell_size,
            d_safe: self.d_safe,
            speed: self.speed,
            ..WorkspaceConfig::default()
        };
        let seed = seed_override.unwrap_or(self.seed);
        let mut target_sets = self.target_sets.clone();
        if let Some(k) = self.random_target_sets {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..k {
                target_sets.push(random_targets(&mut rng, &config.region, config.d_safe, self.initial_positions.len())?);
            }
        }
        let scenario = Scenario {
            config,
            bases: self.bases.clone(),
            initial_positions: self.initial_positions.clone(),
            target_sets,
            seed,
            gamma_bar: self.gamma_bar,
            m: self.m,
            bias: self.bias,
            max_expansions: self.max_expansions,
            retrace: self.retrace,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// One state of the permutation path, ranks starting at 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermutationEntry {
    pub axis1: Vec<usize>,
    pub axis2: Vec<usize>,
}

impl From<&PermutationState> for PermutationEntry {
    fn from(p: &PermutationState) -> Self {
        let one_based = |axis| p.ranks(axis).into_iter().map(|r| r + 1).collect();
        Self { axis1: one_based(0), axis2: one_based(1) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BraidEntry {
    /// Index into the planner's two axes.
    pub axis: usize,
    pub robots: Vec<usize>,
    pub word: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanStats {
    pub swaps: usize,
    pub expanded: usize,
    pub generated: usize,
    pub rejected_by_braid: usize,
    pub peak_open: usize,
    pub plan_time_s: f64,
}

impl PlanStats {
    pub fn new(stats: &SearchStats, swaps: usize, plan_time_s: f64) -> Self {
        Self {
            swaps,
            expanded: stats.expanded,
            generated: stats.generated,
            rejected_by_braid: stats.rejected_by_braid,
            peak_open: stats.peak_open,
            plan_time_s,
        }
    }
}

/// Plan document; with only `waypoints` it is a plain trajectory file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    /// Per robot, `[x, y, t]` triples on a shared clock starting at 0.
    pub waypoints: Vec<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub permutation_path: Vec<PermutationEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub braids: Vec<BraidEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<PlanStats>,
}

impl PlanFile {
    pub fn read(path: &Path) -> Result<Self, FileError> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<(), FileError> {
        write_json(path, self)
    }

    pub fn from_trajectories(trajs: &[Trajectory]) -> Self {
        let waypoints = trajs.iter().map(|t| t.waypoints().iter().map(|w| [w.pos.x, w.pos.y, w.t]).collect()).collect();
        Self { waypoints, permutation_path: Vec::new(), braids: Vec::new(), stats: None }
    }

    pub fn set_braids(&mut self, table: &BraidTable) {
        self.braids = table
            .entries()
            .into_iter()
            .map(|(axis, subset, word)| BraidEntry { axis, robots: subset.robots().to_vec(), word: word.to_string() })
            .collect();
    }

    /// Trajectories after schema checks. Consecutive waypoints with the same
    /// time must coincide and are merged.
    pub fn trajectories(&self, path: &Path) -> Result<Vec<Trajectory>, FileError> {
        let invalid = |key: String, msg: &str| FileError::Invalid { path: path.into(), key, msg: msg.into() };
        if self.waypoints.is_empty() {
            return Err(invalid("waypoints".into(), "no robots"));
        }
        self.waypoints
            .iter()
            .enumerate()
            .map(|(i, list)| {
                let key = format!("waypoints[{i}]");
                let Some(first) = list.first() else {
                    return Err(invalid(key, "no waypoints"));
                };
                if list.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(invalid(key, "non-finite value"));
                }
                if first[2] != 0.0 {
                    return Err(invalid(key, "first waypoint time must be 0"));
                }
                let mut out: Vec<Waypoint> = Vec::with_capacity(list.len());
                for &[x, y, t] in list {
                    let w = Waypoint { pos: Point::new(x, y), t };
                    match out.last() {
                        Some(last) if t < last.t => return Err(invalid(key, "waypoint times decrease")),
                        Some(last) if t == last.t && last.pos != w.pos => {
                            return Err(invalid(key, "two positions at the same time"));
                        }
                        Some(last) if t == last.t => {}
                        _ => out.push(w),
                    }
                }
                Trajectory::new(i, out).map_err(|e| invalid(key, &e.to_string()))
            })
            .collect()
    }
}
