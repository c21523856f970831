//! Built-in scenario generators.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::laplacian::assemble_laplacian;
use crate::rigidity::{bearing_function, is_infinitesimally_bearing_rigid, Configuration, Framework};
use crate::tolerance::Tolerances;

use super::format::{
    Assertions, BearingEntry, FixedAgent, InitialState, IntegratorSection, Scenario, ScenarioFile, ScenarioKind,
};

/// Corner `i` of the unit cube, `(i & 1, (i >> 1) & 1, (i >> 2) & 1)`.
pub fn cube_vertex(i: usize) -> [f64; 3] {
    [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]
}

/// The 12 cube edges. Their bearings are invariant under independent
/// scaling of each axis, so this framework alone is not rigid.
pub fn cube_frame_edges() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..8usize {
        for b in 0..3 {
            let j = i ^ (1 << b);
            if i < j {
                out.push((i, j));
            }
        }
    }
    out.sort_unstable();
    out
}

fn cube_config() -> Configuration {
    let pts: Vec<Vec<f64>> = (0..8).map(|i| cube_vertex(i).to_vec()).collect();
    Configuration::from_points(3, &pts).expect("eight distinct corners")
}

fn rank_of(n: usize, edges: &[(usize, usize)], config: &Configuration) -> Result<(usize, bool)> {
    let fw = Framework::new(Graph::new(n, edges)?, config.clone())?;
    let r = is_infinitesimally_bearing_rigid(&fw)?;
    Ok((r.rank, r.rigid))
}

/// Cube frame plus diagonals added greedily, space diagonals before face
/// diagonals, each kept only if it raises the rank, until the framework is
/// rigid (rank 20).
pub fn cube_edges() -> Vec<(usize, usize)> {
    let config = cube_config();
    let mut edges = cube_frame_edges();
    let mut candidates: Vec<(usize, usize)> = (0..4).map(|i| (i, 7 - i)).collect();
    for i in 0..8usize {
        for j in i + 1..8 {
            if (i ^ j).count_ones() == 2 {
                candidates.push((i, j));
            }
        }
    }
    let (mut rank, mut rigid) = rank_of(8, &edges, &config).expect("cube frame is valid");
    for c in candidates {
        if rigid {
            break;
        }
        edges.push(c);
        let (r, ok) = rank_of(8, &edges, &config).expect("candidate edge is new");
        if r > rank {
            rank = r;
            rigid = ok;
        } else {
            edges.pop();
        }
    }
    edges.sort_unstable();
    edges
}

fn points(d: usize, p: &DVector<f64>) -> Vec<Vec<f64>> {
    p.as_slice().chunks(d).map(|c| c.to_vec()).collect()
}

/// Cube formation in 3-D with the first `leaders` corners as leaders (0 for
/// the leaderless flow). Leaders sit on their own target corners.
/// Followers start uniformly in `[-2, 2)^3` drawn from `seed`.
pub fn generate_cube_scenario(leaders: usize, seed: u64) -> Result<Scenario> {
    if leaders > 8 {
        return Err(Error::GenerationFailure(format!("cube has 8 agents, asked for {leaders} leaders")));
    }
    let edges = cube_edges();
    let config = cube_config();
    let fw = Framework::new(Graph::new(8, &edges)?, config)?;
    let bv = bearing_function(&fw)?;
    let bearings = bv
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| BearingEntry { from: e.tail, to: e.head, g: bv.bearing(k).to_vec() })
        .collect();
    let fixed = (0..leaders).map(|i| FixedAgent { id: i, position: Some(cube_vertex(i).to_vec()) }).collect();
    let (kind, name, assertions) = if leaders == 0 {
        (
            ScenarioKind::FormationLeaderless,
            "cube-leaderless".to_string(),
            Assertions {
                rigid: Some(true),
                rank: Some(20),
                converged: Some(true),
                prediction_tolerance: Some(1e-6),
                centroid_drift: Some(1e-10),
                scale_slack: Some(1e-9),
                max_bearing_error: Some(1e-6),
                allow_reflection: true,
                ..Assertions::default()
            },
        )
    } else {
        (
            ScenarioKind::FormationLeaderFollower,
            format!("cube-{leaders}-leaders"),
            Assertions {
                rigid: Some(true),
                rank: Some(20),
                converged: Some(true),
                prediction_tolerance: Some(1e-6),
                max_bearing_error: Some(1e-6),
                ..Assertions::default()
            },
        )
    };
    Scenario::from_file(ScenarioFile {
        name,
        kind,
        dimension: 3,
        agents: 8,
        edges: edges.iter().map(|&(i, j)| [i, j]).collect(),
        bearings,
        truth: None,
        fixed,
        initial: InitialState::Random { seed, low: -2.0, high: 2.0 },
        integrator: IntegratorSection::default(),
        noise: None,
        assertions,
        output: Default::default(),
    })
}

/// Parameters of a random localization network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationParams {
    pub agents: usize,
    pub dimension: usize,
    /// Pad the minimal rigid edge set up to this many edges.
    pub target_edges: Option<usize>,
    pub anchors: usize,
    pub seed: u64,
}

impl Default for LocalizationParams {
    fn default() -> Self {
        LocalizationParams { agents: 50, dimension: 3, target_edges: Some(269), anchors: 4, seed: 1 }
    }
}

/// Smallest prefix of the pairs, sorted by length, whose graph is
/// connected and rigid. `None` when even the complete graph is not.
///
/// Rigidity is probed through the rank of the bearing Laplacian, which
/// shares its null space with the rigidity matrix and is much smaller.
fn minimal_rigid_prefix(n: usize, pairs: &[(usize, usize)], config: &Configuration) -> Result<Option<usize>> {
    let d = config.dimension();
    let tol = Tolerances::default();
    let ok = |k: usize| -> Result<bool> {
        let g = Graph::new(n, &pairs[..k])?;
        if !g.is_connected() {
            return Ok(false);
        }
        let b = bearing_function(&Framework::new(g.clone(), config.clone())?)?;
        Ok(assemble_laplacian(&g, &b)?.rank(&tol) == d * n - d - 1)
    };
    if !ok(pairs.len())? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (n - 1, pairs.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Some(hi))
}

/// Random localization network: positions uniform in the unit box, edges
/// added shortest first until the graph is connected and rigid, then padded
/// with the next shortest pairs up to `target_edges`. Anchors are agents
/// `0..anchors`; the initial estimate is uniform in the unit box.
pub fn generate_localization_scenario(params: &LocalizationParams) -> Result<Scenario> {
    let (n, d) = (params.agents, params.dimension);
    if n < 2 || d < 2 {
        return Err(Error::GenerationFailure("need at least 2 agents in at least 2 dimensions".into()));
    }
    if params.anchors == 0 || params.anchors > n {
        return Err(Error::GenerationFailure(format!("anchor count {} out of 1..={n}", params.anchors)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for _ in 0..16 {
        let p = DVector::from_fn(n * d, |_, _| rng.random_range(0.0..1.0));
        let config = Configuration::new(d, p.clone())?;
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                pairs.push(((p.rows(i * d, d) - p.rows(j * d, d)).norm(), i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs[0].0 < 1e-3 {
            continue;
        }
        let pairs: Vec<(usize, usize)> = pairs.iter().map(|&(_, i, j)| (i, j)).collect();
        let Some(min_m) = minimal_rigid_prefix(n, &pairs, &config)? else {
            continue;
        };
        let m = params.target_edges.unwrap_or(min_m).clamp(min_m, pairs.len());
        let mut edges: Vec<[usize; 2]> = pairs[..m].iter().map(|&(i, j)| [i, j]).collect();
        edges.sort_unstable();
        let file = ScenarioFile {
            name: format!("localization-n{n}-d{d}-a{}-s{}", params.anchors, params.seed),
            kind: ScenarioKind::Localization,
            dimension: d,
            agents: n,
            edges,
            bearings: Vec::new(),
            truth: Some(points(d, &p)),
            fixed: (0..params.anchors).map(|id| FixedAgent { id, position: None }).collect(),
            initial: InitialState::Random { seed: params.seed.wrapping_add(1), low: 0.0, high: 1.0 },
            integrator: IntegratorSection::default(),
            noise: None,
            assertions: Assertions {
                rigid: Some(true),
                converged: Some(params.anchors >= 2),
                prediction_tolerance: (params.anchors >= 2).then_some(1e-6),
                max_localization_error: (params.anchors >= 2).then_some(1e-6),
                ..Assertions::default()
            },
            output: Default::default(),
        };
        return Scenario::from_file(file);
    }
    Err(Error::GenerationFailure("no rigid network found after 16 draws".into()))
}
