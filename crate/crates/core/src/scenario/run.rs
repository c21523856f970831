//! Scenario execution: pre-checks, closed-form prediction, simulation,
//! post-checks and output.

use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formation::{
    bearing_errors, predict_leader_follower_equilibrium, predict_leaderless_equilibrium, LeaderlessOutcome,
};
use crate::laplacian::{
    assemble_laplacian, check_constraint_feasibility, is_follower_block_positive_definite, partition,
    BearingConstraintSet, BearingLaplacian, DefinitenessVerdict, RolePartition,
};
use crate::localization::localize_closed_form;
use crate::rigidity::{self, is_infinitesimally_bearing_rigid, Configuration, Framework};
use crate::simulation::{
    auto_dt, integrate, stability_check_lambda, IntegratorConfig, Method, Observable, Termination, Trajectory,
};
use crate::tolerance::Tolerances;

use super::format::{Problem, Scenario, ScenarioKind};

/// Rigidity and spectral facts about a scenario, computed before any
/// simulation.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub rank: Option<usize>,
    pub required_rank: usize,
    pub rigid: bool,
    pub nontrivial_motions: Option<usize>,
    /// Formation kinds: whether some configuration realizes the constraints.
    pub constraints_feasible: Option<bool>,
    /// Realizing shape (formation) or true configuration (localization).
    pub target: Option<DVector<f64>>,
    pub laplacian: BearingLaplacian,
    pub laplacian_rank: usize,
    pub partition: Option<RolePartition>,
    pub follower_block: Option<DefinitenessVerdict>,
    /// Largest and smallest nonzero eigenvalue of the matrix driving the
    /// flow: `L` without fixed agents, `L_ff` otherwise.
    pub system_lambda_max: f64,
    pub system_lambda_min: Option<f64>,
    pub warnings: Vec<String>,
}

fn fixed_agents(s: &Scenario) -> &[usize] {
    match &s.problem {
        Problem::Formation(f) => &f.leaders,
        Problem::Localization(l) => l.anchors(),
    }
}

pub fn analyze(s: &Scenario) -> Result<Analysis> {
    let tol = Tolerances::default();
    let d = s.dimension();
    let n = s.graph.vertex_count();
    let mut warnings = Vec::new();
    let (laplacian, target, constraints_feasible) = match &s.problem {
        Problem::Formation(f) => {
            let feas = check_constraint_feasibility(&s.graph, &f.constraints, d, &tol)?;
            if let Some(reason) = &feas.reason {
                warnings.push(format!("constraints are not realizable: {reason}"));
            }
            (assemble_laplacian(&s.graph, &f.constraints)?, feas.representative, Some(feas.feasible))
        }
        Problem::Localization(l) => (
            assemble_laplacian(&s.graph, l.measurements())?,
            Some(l.truth().config().stacked().clone()),
            None,
        ),
    };
    let (rank, rigid, nontrivial_motions) = match &target {
        Some(r) => {
            let fw = Framework::new(s.graph.clone(), Configuration::new(d, r.clone())?)?;
            let rep = is_infinitesimally_bearing_rigid(&fw)?;
            (Some(rep.rank), rep.rigid, Some(rep.nontrivial_motions.ncols()))
        }
        None => (None, false, None),
    };
    let laplacian_rank = laplacian.rank(&tol);
    let fixed = fixed_agents(s);
    let (part, follower_block, lmax, lmin) = if fixed.is_empty() {
        let ev = laplacian.eigenvalues();
        let lmax = *ev.last().unwrap();
        let lmin = laplacian.smallest_nonzero_eigenvalue(&tol);
        (None, None, lmax, lmin)
    } else {
        let part = partition(&laplacian, fixed)?;
        if part.followers().is_empty() {
            (Some(part), None, 0.0, None)
        } else {
            let v = is_follower_block_positive_definite(&part, &tol)?;
            if !v.positive_definite {
                warnings.push(format!(
                    "follower block is singular (lambda_min {:.3e}); no unique equilibrium",
                    v.lambda_min
                ));
            }
            let lmin = v.positive_definite.then_some(v.lambda_min);
            (Some(part), Some(v), v.lambda_max, lmin)
        }
    };
    Ok(Analysis {
        rank,
        required_rank: d * n - d - 1,
        rigid,
        nontrivial_motions,
        constraints_feasible,
        target,
        laplacian,
        laplacian_rank,
        partition: part,
        follower_block,
        system_lambda_max: lmax,
        system_lambda_min: lmin,
        warnings,
    })
}

/// Closed-form limit of the flow from the scenario's initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub final_state: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<LeaderlessOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centroid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leader_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaders_feasible: Option<bool>,
}

/// Returns `None` with a warning pushed when no unique limit exists.
pub fn predict(s: &Scenario, a: &Analysis, warnings: &mut Vec<String>) -> Result<Option<Prediction>> {
    let tol = Tolerances::default();
    let d = s.dimension();
    let p0 = s.initial_state();
    match (&s.problem, &a.partition) {
        (Problem::Formation(_), None) => {
            let Some(r) = &a.target else {
                warnings.push("no realizing shape, leaderless limit not predicted".into());
                return Ok(None);
            };
            let pr = predict_leaderless_equilibrium(d, &p0, r)?;
            if pr.outcome != LeaderlessOutcome::Target {
                warnings.push(format!("initial state leads to the {:?} outcome", pr.outcome).to_lowercase());
            }
            Ok(Some(Prediction {
                final_state: pr.final_state.as_slice().to_vec(),
                outcome: Some(pr.outcome),
                centroid: Some(pr.centroid.as_slice().to_vec()),
                scale: Some(pr.scale),
                leader_residual: None,
                leaders_feasible: None,
            }))
        }
        (Problem::Formation(_), Some(part)) => {
            if part.special().len() < 2 {
                warnings.push("fewer than 2 leaders, leader-follower limit not predicted".into());
                return Ok(None);
            }
            let pl = part.gather_special(&p0);
            let pr = match predict_leader_follower_equilibrium(part, &pl, &tol) {
                Ok(pr) => pr,
                Err(Error::SingularFollowerBlock) => return Ok(None),
                Err(e) => return Err(e),
            };
            if !pr.feasibility.feasible {
                warnings.push(format!(
                    "leader positions fail the feasibility test (residual {:.3e}, tolerance {:.3e}{})",
                    pr.feasibility.residual,
                    pr.feasibility.tolerance,
                    if pr.feasibility.coincident_leaders { ", coincident leaders" } else { "" }
                ));
            }
            Ok(Some(Prediction {
                final_state: pr.final_state.as_slice().to_vec(),
                outcome: None,
                centroid: None,
                scale: None,
                leader_residual: Some(pr.feasibility.residual),
                leaders_feasible: Some(pr.feasibility.feasible),
            }))
        }
        (Problem::Localization(l), part) => {
            let part = part.as_ref().expect("localization always has anchors");
            if part.special().len() < 2 {
                warnings.push("fewer than 2 anchors, estimate limit not predicted".into());
                return Ok(None);
            }
            // Anchors and partition special set are both sorted.
            let pa = l.anchor_positions();
            let pf = match localize_closed_form(part, &pa, &tol) {
                Ok(pf) => pf,
                Err(Error::SingularFollowerBlock) => return Ok(None),
                Err(e) => return Err(e),
            };
            Ok(Some(Prediction {
                final_state: part.scatter(&pa, &pf).as_slice().to_vec(),
                outcome: None,
                centroid: None,
                scale: None,
                leader_residual: None,
                leaders_feasible: None,
            }))
        }
    }
}

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub dt: Option<f64>,
    pub method: Option<Method>,
    pub max_time: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssertionResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigiditySummary {
    pub rank: Option<usize>,
    pub required_rank: usize,
    pub rigid: bool,
    pub laplacian_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraints_feasible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub follower_block_positive_definite: Option<bool>,
    pub system_lambda_max: f64,
    pub system_lambda_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Achieved {
    pub final_state: Vec<f64>,
    pub final_time: f64,
    pub steps: usize,
    pub termination: Termination,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_bearing_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_localization_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centroid_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    /// FNV-1a hash of the scenario file as run (after overrides).
    pub digest: String,
    pub kind: ScenarioKind,
    pub dimension: usize,
    pub agents: usize,
    pub edges: usize,
    pub rigidity: RigiditySummary,
    pub integrator: IntegratorConfig,
    pub prediction: Option<Prediction>,
    pub achieved: Achieved,
    pub assertions: Vec<AssertionResult>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

pub struct RunOutcome {
    pub report: RunReport,
    pub trajectory: Trajectory,
    /// Files written when an output directory was given.
    pub files: Vec<PathBuf>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Applies overrides and returns the effective scenario.
pub fn apply_overrides(s: &Scenario, opts: &RunOptions) -> Result<Scenario> {
    let mut s = match opts.seed {
        Some(seed) => s.with_seed(seed)?,
        None => s.clone(),
    };
    if let Some(dt) = opts.dt {
        s.file.integrator.dt = Some(dt);
    }
    if let Some(m) = opts.method {
        s.file.integrator.method = m;
    }
    if let Some(t) = opts.max_time {
        s.file.integrator.max_time = t;
    }
    Ok(s)
}

/// Resolves the step size and refuses one outside the method's stability
/// region.
pub fn integrator_config(s: &Scenario, a: &Analysis) -> Result<IntegratorConfig> {
    let sec = &s.file.integrator;
    let lmax = a.system_lambda_max;
    let dt = match sec.dt {
        Some(dt) => dt,
        None if lmax > 0.0 => auto_dt(lmax),
        None => 1e-2,
    };
    let cfg = IntegratorConfig {
        method: sec.method,
        dt,
        max_time: sec.max_time,
        tolerance: sec.tolerance,
        record_stride: sec.record_stride,
    };
    cfg.validate()?;
    let v = stability_check_lambda(lmax, cfg.method, cfg.dt);
    if !v.stable {
        return Err(Error::InvalidIntegrator(format!(
            "dt {} is unstable for {:?} (lambda_max {:.6e}, limit {:.6e}); suggested dt {:.6e}",
            cfg.dt, cfg.method, v.lambda_max, v.dt_max, v.suggested_dt
        )));
    }
    Ok(cfg)
}

/// Runs one scenario. Module errors are returned; a run that completes but
/// fails an assertion returns a report with `passed == false`.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutcome> {
    let s = apply_overrides(scenario, opts)?;
    let a = analyze(&s)?;
    let mut warnings = s.warnings.clone();
    warnings.extend(a.warnings.iter().cloned());
    let cfg = integrator_config(&s, &a)?;
    let prediction = predict(&s, &a, &mut warnings)?;

    let d = s.dimension();
    let x0 = s.initial_state();
    let p0_norm = x0.norm();
    let c0 = rigidity::centroid(d, &x0);
    let s0 = rigidity::centered(d, &x0).norm();

    let trajectory = match &s.problem {
        Problem::Formation(f) => {
            let field = f.field()?;
            let graph = &f.graph;
            let constraints = &f.constraints;
            let c0 = c0.clone();
            let observers = [
                Observable::new("max_bearing_error", move |p| Ok(bearing_errors(graph, p, constraints)?.max)),
                Observable::new("scale", move |p| Ok(rigidity::centered(d, p).norm())),
                Observable::new("centroid_drift", move |p| Ok((rigidity::centroid(d, p) - &c0).norm())),
            ];
            integrate(|x| Ok(field.eval(x)), &x0, &cfg, &observers)?
        }
        Problem::Localization(l) => {
            let field = l.field()?;
            let observers = [Observable::new("max_localization_error", |p| Ok(l.errors(p)?.max))];
            integrate(|x| Ok(field.eval(x)), &x0, &cfg, &observers)?
        }
    };
    if let Termination::Error(e) = &trajectory.termination {
        warnings.push(format!("simulation stopped early: {e}"));
    }

    let pf = trajectory.final_state().clone();
    let prediction_deviation = prediction
        .as_ref()
        .map(|p| (DVector::from_column_slice(&p.final_state) - &pf).amax());
    let mut achieved = Achieved {
        final_state: pf.as_slice().to_vec(),
        final_time: trajectory.final_time(),
        steps: trajectory.steps,
        termination: trajectory.termination.clone(),
        convergence_time: (trajectory.termination == Termination::Converged).then(|| trajectory.final_time()),
        prediction_deviation,
        max_bearing_error: None,
        max_localization_error: None,
        centroid_drift: None,
        initial_scale: None,
        final_scale: None,
    };
    let asrt = s.file.assertions;
    let mut checks = Vec::new();
    let mut check = |name: &str, value: f64, limit: f64, passed: bool| {
        checks.push(AssertionResult { name: name.into(), passed, value, limit });
    };
    if let Some(want) = asrt.rigid {
        check("rigid", f64::from(u8::from(a.rigid)), f64::from(u8::from(want)), a.rigid == want);
    }
    if let Some(want) = asrt.rank {
        let got = a.rank.map_or(f64::NAN, |r| r as f64);
        check("rank", got, want as f64, a.rank == Some(want));
    }
    if let Some(want) = asrt.converged {
        let got = trajectory.termination == Termination::Converged;
        check("converged", f64::from(u8::from(got)), f64::from(u8::from(want)), got == want);
    }
    if let Some(t) = asrt.prediction_tolerance {
        let v = prediction_deviation.unwrap_or(f64::NAN);
        check("prediction_deviation", v, t, v <= t);
    }

    match &s.problem {
        Problem::Formation(f) => {
            let outcome = prediction.as_ref().and_then(|p| p.outcome);
            let reflected = outcome == Some(LeaderlessOutcome::Reflected);
            let reference = if reflected && asrt.allow_reflection {
                let mut rev = BearingConstraintSet::new(d);
                for (&(i, j), g) in f.constraints.entries() {
                    rev.insert(i, j, g.iter().map(|v| -v).collect());
                }
                rev
            } else {
                f.constraints.clone()
            };
            let be = bearing_errors(&f.graph, &pf, &reference).map(|e| e.max).unwrap_or(f64::NAN);
            achieved.max_bearing_error = Some(be);
            let sf = rigidity::centered(d, &pf).norm();
            achieved.initial_scale = Some(s0);
            achieved.final_scale = Some(sf);
            if f.leaders.is_empty() {
                let drift = (rigidity::centroid(d, &pf) - &c0).norm();
                achieved.centroid_drift = Some(drift);
                if let Some(t) = asrt.centroid_drift {
                    check("centroid_drift", drift, t * p0_norm, drift <= t * p0_norm);
                }
                if let Some(t) = asrt.scale_slack {
                    check("scale_nonincreasing", sf, s0 + t, sf <= s0 + t);
                }
            }
            if let Some(t) = asrt.max_bearing_error {
                check("max_bearing_error", be, t, be <= t);
            }
        }
        Problem::Localization(l) => {
            let err = l.errors(&pf)?.max;
            achieved.max_localization_error = Some(err);
            if let Some(t) = asrt.max_localization_error {
                let limit = t * l.truth().config().diameter();
                check("max_localization_error", err, limit, err <= limit);
            }
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    let digest = format!("{:016x}", fnv1a(s.file.to_toml()?.as_bytes()));
    let report = RunReport {
        scenario: s.file.name.clone(),
        digest,
        kind: s.kind(),
        dimension: d,
        agents: s.graph.vertex_count(),
        edges: s.graph.edge_count(),
        rigidity: RigiditySummary {
            rank: a.rank,
            required_rank: a.required_rank,
            rigid: a.rigid,
            laplacian_rank: a.laplacian_rank,
            constraints_feasible: a.constraints_feasible,
            follower_block_positive_definite: a.follower_block.map(|v| v.positive_definite),
            system_lambda_max: a.system_lambda_max,
            system_lambda_min: a.system_lambda_min,
        },
        integrator: cfg,
        prediction,
        achieved,
        assertions: checks,
        warnings,
        passed,
    };

    let mut files = Vec::new();
    let out_dir = opts.out_dir.clone().or_else(|| s.file.output.dir.as_ref().map(PathBuf::from));
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir)?;
        let csv_path = dir.join(format!("{}.csv", report.scenario));
        write_trajectory_csv(&csv_path, &trajectory, d)?;
        let json_path = dir.join(format!("{}.report.json", report.scenario));
        let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(&json_path, json + "\n")?;
        files.push(csv_path);
        files.push(json_path);
    }
    Ok(RunOutcome { report, trajectory, files })
}

/// Column names of the trajectory CSV: `time`, `p{agent}_{axis}` for every
/// coordinate, then the observables.
pub fn trajectory_header(traj: &Trajectory, d: usize) -> Vec<String> {
    let n = traj.states.first().map_or(0, |x| x.len() / d);
    let mut header = vec!["time".to_string()];
    for i in 0..n {
        for k in 0..d {
            header.push(format!("p{i}_{k}"));
        }
    }
    header.extend(traj.observable_names.iter().cloned());
    header
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory, d: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(trajectory_header(traj, d)).map_err(|e| Error::Io(e.to_string()))?;
    for ((t, x), obs) in traj.times.iter().zip(&traj.states).zip(&traj.observations) {
        let mut row = Vec::with_capacity(1 + x.len() + obs.len());
        row.push(t.to_string());
        row.extend(x.iter().map(f64::to_string));
        row.extend(obs.iter().map(f64::to_string));
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario   {} ({}) digest {}", self.scenario, self.kind, self.digest)?;
        writeln!(f, "agents     {} in {}-D, {} edges", self.agents, self.dimension, self.edges)?;
        let r = &self.rigidity;
        match r.rank {
            Some(rank) => writeln!(f, "rigidity   rank {rank} of {} required, rigid: {}", r.required_rank, r.rigid)?,
            None => writeln!(f, "rigidity   no realizing shape")?,
        }
        writeln!(
            f,
            "integrator {:?} dt {:.6e} up to t = {} (lambda_max {:.6e})",
            self.integrator.method, self.integrator.dt, self.integrator.max_time, r.system_lambda_max
        )?;
        let a = &self.achieved;
        let how = match &a.termination {
            Termination::Converged => "converged".to_string(),
            Termination::MaxTime => "reached max time".to_string(),
            Termination::Error(e) => format!("stopped: {e}"),
        };
        writeln!(f, "simulation {how} at t = {:.6} after {} steps", a.final_time, a.steps)?;
        if let Some(p) = &self.prediction {
            if let Some(o) = p.outcome {
                writeln!(f, "prediction outcome {o:?}, scale {:.6e}", p.scale.unwrap_or(f64::NAN))?;
            }
        }
        if let Some(v) = a.prediction_deviation {
            writeln!(f, "deviation  {v:.3e} from the closed-form limit")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning    {w}")?;
        }
        for c in &self.assertions {
            writeln!(
                f,
                "{}       {} = {:.6e} (limit {:.6e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.limit
            )?;
        }
        write!(f, "result     {}", if self.passed { "PASS" } else { "FAIL" })
    }
}
