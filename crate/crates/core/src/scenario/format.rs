//! On-disk scenario description and its validated in-memory form.
//!
//! Scenario files are TOML. Floats are written in shortest round-trip form,
//! so `load(save(s))` reproduces every coordinate bit for bit.

use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::formation::FormationProblem;
use crate::graph::Graph;
use crate::laplacian::BearingConstraintSet;
use crate::localization::{measure_bearings, LocalizationProblem};
use crate::rigidity::{Configuration, Framework};
use crate::simulation::Method;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    FormationLeaderless,
    FormationLeaderFollower,
    Localization,
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScenarioKind::FormationLeaderless => "formation-leaderless",
            ScenarioKind::FormationLeaderFollower => "formation-leader-follower",
            ScenarioKind::Localization => "localization",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BearingEntry {
    pub from: usize,
    pub to: usize,
    pub g: Vec<f64>,
}

/// A leader (formation) or anchor (localization). Anchors may omit the
/// position, which is then taken from the true configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedAgent {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    Explicit { positions: Vec<Vec<f64>> },
    /// Coordinates drawn uniformly from `[low, high)` with ChaCha8.
    Random { seed: u64, low: f64, high: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default)]
    pub method: Method,
    /// Omitted: `0.5 / lambda_max` of the system matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_max_time")]
    pub max_time: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

fn default_max_time() -> f64 {
    500.0
}
fn default_tolerance() -> f64 {
    1e-9
}
fn default_stride() -> usize {
    10
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection {
            method: Method::Rk4,
            dt: None,
            max_time: default_max_time(),
            tolerance: default_tolerance(),
            record_stride: default_stride(),
        }
    }
}

/// Exploratory measurement noise for localization: each bearing component
/// is shifted by a uniform draw from `[-amplitude, amplitude]` and the
/// bearing renormalized. No convergence guarantee applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub amplitude: f64,
    pub seed: u64,
}

/// Checks evaluated after a run; the exit status is zero only if all pass.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rigid: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Largest coordinate gap between the simulated and predicted final state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction_tolerance: Option<f64>,
    /// Centroid drift relative to `||p(0)||` (leaderless only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroid_drift: Option<f64>,
    /// Final scale may exceed the initial one by at most this much.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bearing_error: Option<f64>,
    /// Accept a predicted reflected formation instead of checking bearings.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_reflection: bool,
    /// Largest estimate error relative to the network diameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_localization_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub kind: ScenarioKind,
    pub dimension: usize,
    pub agents: usize,
    pub edges: Vec<[usize; 2]>,
    /// Target bearings (formation kinds).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bearings: Vec<BearingEntry>,
    /// True positions (localization).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<Vec<f64>>>,
    /// Leaders or anchors.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixed: Vec<FixedAgent>,
    pub initial: InitialState,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    #[serde(default)]
    pub assertions: Assertions,
    #[serde(default, skip_serializing_if = "is_default_output")]
    pub output: OutputSection,
}

fn is_default_output(o: &OutputSection) -> bool {
    o.dir.is_none()
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// The protocol instance a scenario describes.
#[derive(Debug, Clone)]
pub enum Problem {
    Formation(FormationProblem),
    Localization(LocalizationProblem),
}

/// A validated scenario with its random initial state materialized.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub graph: Graph,
    pub problem: Problem,
    pub warnings: Vec<String>,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    Scenario::from_file(ScenarioFile::parse(&text)?)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scenario.file.to_toml()?)?;
    Ok(())
}

fn points_to_config(field: &str, d: usize, n: usize, points: &[Vec<f64>]) -> Result<DVector<f64>> {
    if points.len() != n {
        return Err(validation(field, format!("expected {n} positions, got {}", points.len())));
    }
    let mut out = Vec::with_capacity(n * d);
    for (i, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(validation(field, format!("position {i} has {} components, expected {d}", p.len())));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(validation(field, format!("position {i} is not finite")));
        }
        out.extend_from_slice(p);
    }
    Ok(DVector::from_vec(out))
}

fn materialize(initial: &InitialState, d: usize, n: usize) -> Result<DVector<f64>> {
    match initial {
        InitialState::Explicit { positions } => points_to_config("initial.positions", d, n, positions),
        InitialState::Random { seed, low, high } => {
            if !(low < high) || !low.is_finite() || !high.is_finite() {
                return Err(validation("initial", "random range needs low < high"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(DVector::from_fn(n * d, |_, _| rng.random_range(*low..*high)))
        }
    }
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let d = file.dimension;
        let n = file.agents;
        if d < 2 {
            return Err(validation("dimension", format!("must be at least 2, got {d}")));
        }
        let pairs: Vec<(usize, usize)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        let graph = Graph::new(n, &pairs).map_err(|e| validation("edges", e.to_string()))?;
        if !graph.is_connected() {
            return Err(validation("edges", "graph is not connected"));
        }
        let initial = materialize(&file.initial, d, n)?;
        let tol = Tolerances::default();
        let mut warnings = Vec::new();
        let mut fixed_ids: Vec<usize> = Vec::with_capacity(file.fixed.len());
        for f in &file.fixed {
            if f.id >= n {
                return Err(validation("fixed", format!("agent {} out of range", f.id)));
            }
            if fixed_ids.contains(&f.id) {
                return Err(validation("fixed", format!("agent {} listed twice", f.id)));
            }
            fixed_ids.push(f.id);
        }

        let problem = match file.kind {
            ScenarioKind::FormationLeaderless | ScenarioKind::FormationLeaderFollower => {
                if file.truth.is_some() {
                    return Err(validation("truth", "only localization scenarios have a true configuration"));
                }
                if file.noise.is_some() {
                    return Err(validation("noise", "noise applies to localization only"));
                }
                let mut constraints = BearingConstraintSet::new(d);
                for b in &file.bearings {
                    constraints.insert(b.from, b.to, b.g.clone());
                }
                constraints
                    .validate(&graph, &tol)
                    .map_err(|e| validation("bearings", e.to_string()))?;
                let leaderless = file.kind == ScenarioKind::FormationLeaderless;
                if leaderless && !file.fixed.is_empty() {
                    return Err(validation("fixed", "a leaderless scenario cannot have leaders"));
                }
                if !leaderless && file.fixed.is_empty() {
                    return Err(validation("fixed", "a leader-follower scenario needs leaders"));
                }
                let mut leader_positions = Vec::with_capacity(file.fixed.len() * d);
                for f in &file.fixed {
                    let pos = f
                        .position
                        .as_ref()
                        .ok_or_else(|| validation("fixed", format!("leader {} has no position", f.id)))?;
                    if pos.len() != d {
                        return Err(validation("fixed", format!("leader {} position has wrong dimension", f.id)));
                    }
                    leader_positions.extend_from_slice(pos);
                }
                if fixed_ids.len() == 1 {
                    warnings.push("a single leader leaves the follower block singular; no equilibrium prediction".into());
                }
                Problem::Formation(FormationProblem {
                    graph: graph.clone(),
                    constraints,
                    leaders: fixed_ids,
                    leader_positions: DVector::from_vec(leader_positions),
                    initial,
                })
            }
            ScenarioKind::Localization => {
                if !file.bearings.is_empty() {
                    return Err(validation("bearings", "localization measures bearings from the true configuration"));
                }
                let truth_points = file
                    .truth
                    .as_ref()
                    .ok_or_else(|| validation("truth", "localization needs the true configuration"))?;
                let truth = points_to_config("truth", d, n, truth_points)?;
                if fixed_ids.is_empty() {
                    return Err(validation("fixed", "localization needs at least one anchor"));
                }
                if fixed_ids.len() < 2 {
                    warnings.push("fewer than 2 anchors: the estimate cannot converge to the truth".into());
                }
                for f in &file.fixed {
                    if let Some(pos) = &f.position {
                        let actual = &truth.as_slice()[f.id * d..(f.id + 1) * d];
                        if pos.as_slice() != actual {
                            return Err(validation("fixed", format!("anchor {} position differs from truth", f.id)));
                        }
                    }
                }
                let config = Configuration::new(d, truth).map_err(|e| validation("truth", e.to_string()))?;
                let framework = Framework::new(graph.clone(), config)?;
                let mut measurements =
                    measure_bearings(&framework).map_err(|e| validation("truth", e.to_string()))?;
                if let Some(noise) = file.noise {
                    warnings.push(format!(
                        "bearing noise of amplitude {} is outside the noise-free convergence theory",
                        noise.amplitude
                    ));
                    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
                    let a = noise.amplitude.abs();
                    let perturbed = measurements.stacked().map(|v| {
                        if a > 0.0 {
                            v + rng.random_range(-a..a)
                        } else {
                            v
                        }
                    });
                    measurements = measurements.with_bearings(perturbed);
                }
                Problem::Localization(LocalizationProblem::with_measurements(
                    framework,
                    fixed_ids,
                    initial,
                    measurements,
                )?)
            }
        };
        let s = &file.integrator;
        if let Some(dt) = s.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(validation("integrator.dt", "must be positive"));
            }
        }
        if !(s.max_time > 0.0 && s.max_time.is_finite()) {
            return Err(validation("integrator.max_time", "must be positive"));
        }
        if s.record_stride == 0 {
            return Err(validation("integrator.record_stride", "must be at least 1"));
        }
        Ok(Scenario { file, graph, problem, warnings })
    }

    pub fn kind(&self) -> ScenarioKind {
        self.file.kind
    }

    pub fn dimension(&self) -> usize {
        self.file.dimension
    }

    /// Re-seeds a random initial state; explicit initial states are kept.
    pub fn with_seed(&self, seed: u64) -> Result<Self> {
        let mut file = self.file.clone();
        if let InitialState::Random { seed: s, .. } = &mut file.initial {
            *s = seed;
        }
        Scenario::from_file(file)
    }

    /// Initial state with fixed agents at their known positions.
    pub fn initial_state(&self) -> DVector<f64> {
        match &self.problem {
            Problem::Formation(f) => f.initial_state(),
            Problem::Localization(l) => l.initial_estimate().clone(),
        }
    }
}
