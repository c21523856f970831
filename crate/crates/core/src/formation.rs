//! Leaderless and leader-follower bearing formation control.
//!
//! Both controllers move agent `i` with
//! `u_i = -sum_{j in N_i} P_{g*_ij} (p_i - p_j)`; leaders stay put. The
//! closed-loop systems are linear (`p' = -L p`, and `p_f' = -L_ff p_f - L_fl p_l`)
//! so their limits have closed forms, computed here alongside the fields.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::laplacian::{
    check_leader_feasibility, BearingConstraintSet, BearingSource, LeaderFeasibility, RolePartition,
};
use crate::rigidity::{self, unit_projector};
use crate::tolerance::Tolerances;

/// Role of an agent in a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Fixed agent in formation control.
    Leader,
    /// Agent with known position in localization.
    Anchor,
    Follower,
}

impl Role {
    pub fn is_pinned(self) -> bool {
        !matches!(self, Role::Follower)
    }
}

/// The right-hand side shared by the controllers and the estimator, with
/// per-edge projectors precomputed.
#[derive(Debug, Clone)]
pub struct ProtocolField {
    d: usize,
    edges: Vec<Edge>,
    projectors: Vec<f64>,
    roles: Vec<Role>,
}

impl ProtocolField {
    /// `pinned` vertices get `pinned_role`; all others are followers.
    pub fn new(
        graph: &Graph,
        bearings: &impl BearingSource,
        pinned: &[usize],
        pinned_role: Role,
    ) -> Result<Self> {
        let og = graph.orient();
        let d = bearings.dimension();
        let stacked = bearings.stacked_bearings(&og, &Tolerances::default())?;
        let n = graph.vertex_count();
        let mut roles = vec![Role::Follower; n];
        for &v in pinned {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            roles[v] = pinned_role;
        }
        let mut projectors = Vec::with_capacity(og.edge_count() * d * d);
        for k in 0..og.edge_count() {
            let p = unit_projector(&stacked.as_slice()[k * d..(k + 1) * d]);
            projectors.extend(p.transpose().iter());
        }
        Ok(ProtocolField { d, edges: og.edges().to_vec(), projectors, roles })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn state_len(&self) -> usize {
        self.roles.len() * self.d
    }

    pub fn eval(&self, p: &DVector<f64>) -> DVector<f64> {
        let mut u = DVector::zeros(p.len());
        self.eval_into(p, &mut u);
        u
    }

    pub fn eval_into(&self, p: &DVector<f64>, u: &mut DVector<f64>) {
        let d = self.d;
        u.fill(0.0);
        let mut diff = [0.0f64; 16];
        let mut heap;
        let diff: &mut [f64] = if d <= 16 {
            &mut diff[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let ps = p.as_slice();
        for (k, e) in self.edges.iter().enumerate() {
            let (i, j) = (e.tail * d, e.head * d);
            for a in 0..d {
                diff[a] = ps[i + a] - ps[j + a];
            }
            let proj = &self.projectors[k * d * d..(k + 1) * d * d];
            let tail_free = !self.roles[e.tail].is_pinned();
            let head_free = !self.roles[e.head].is_pinned();
            for a in 0..d {
                let row = &proj[a * d..(a + 1) * d];
                let w: f64 = row.iter().zip(diff.iter()).map(|(x, y)| x * y).sum();
                if tail_free {
                    u[i + a] -= w;
                }
                if head_free {
                    u[j + a] += w;
                }
            }
        }
    }
}

/// Leaderless controller velocities for every agent.
pub fn leaderless_field(
    graph: &Graph,
    p: &DVector<f64>,
    constraints: &BearingConstraintSet,
) -> Result<DVector<f64>> {
    leader_follower_field(graph, p, constraints, &[])
}

/// Leader-follower controller: zero on leaders, the leaderless law on
/// followers.
pub fn leader_follower_field(
    graph: &Graph,
    p: &DVector<f64>,
    constraints: &BearingConstraintSet,
    leaders: &[usize],
) -> Result<DVector<f64>> {
    let field = ProtocolField::new(graph, constraints, leaders, Role::Leader)?;
    check_len(field.state_len(), p.len())?;
    Ok(field.eval(p))
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::SizeMismatch { expected, actual });
    }
    Ok(())
}

/// Sign of `(r*)^T p(0)`, deciding what the leaderless flow converges to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeaderlessOutcome {
    /// Positive: the target bearings are reached.
    Target,
    /// Negative: the point reflection of the target, every bearing reversed.
    Reflected,
    /// Zero: all agents meet at the centroid; bearings are undefined.
    Rendezvous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderlessPrediction {
    pub final_state: DVector<f64>,
    pub centroid: DVector<f64>,
    pub scale: f64,
    /// `(r*)^T p(0) / ||r*||`.
    pub projection: f64,
    pub outcome: LeaderlessOutcome,
}

/// Limit of `p' = -L p`: the orthogonal projection of `p0` onto
/// `span{1 ⊗ I_d, r*}`. `r*` need not be centered.
pub fn predict_leaderless_equilibrium(
    d: usize,
    p0: &DVector<f64>,
    r_star: &DVector<f64>,
) -> Result<LeaderlessPrediction> {
    check_len(r_star.len(), p0.len())?;
    // Only the part of r* orthogonal to translations matters.
    let raw_norm = r_star.norm();
    let r_star = rigidity::centered(d, r_star);
    let r_norm = r_star.norm();
    if !(r_norm > 1e-12 * raw_norm) {
        return Err(Error::DegenerateTarget);
    }
    let unit = &r_star / r_norm;
    let centroid = rigidity::centroid(d, p0);
    let projection = unit.dot(p0);
    let mut final_state = &unit * projection;
    for i in 0..p0.len() / d {
        let mut block = final_state.rows_mut(i * d, d);
        block += &centroid;
    }
    let s0 = rigidity::centered(d, p0).norm();
    let outcome = if projection.abs() <= 1e-12 * s0 {
        LeaderlessOutcome::Rendezvous
    } else if projection > 0.0 {
        LeaderlessOutcome::Target
    } else {
        LeaderlessOutcome::Reflected
    };
    Ok(LeaderlessPrediction {
        final_state,
        centroid,
        scale: projection.abs(),
        projection,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderFollowerPrediction {
    /// `-L_ff^{-1} L_fl p_l`, stacked in follower order.
    pub followers: DVector<f64>,
    /// Leaders and predicted followers in original vertex order.
    pub final_state: DVector<f64>,
    /// Necessary-condition check on the leader positions. An infeasible
    /// verdict is a warning: the equilibrium exists but need not satisfy the
    /// constraints.
    pub feasibility: LeaderFeasibility,
}

/// Limit of the leader-follower flow. Refuses when `L_ff` is singular
/// (fewer than two leaders).
pub fn predict_leader_follower_equilibrium(
    part: &RolePartition,
    p_leaders: &DVector<f64>,
    tol: &Tolerances,
) -> Result<LeaderFollowerPrediction> {
    check_len(part.special().len() * part.dimension(), p_leaders.len())?;
    let chol = part.cholesky_ff(tol)?;
    let followers = -chol.solve(&(&part.l_fs * p_leaders));
    let feasibility = check_leader_feasibility(part, p_leaders, tol)?;
    let final_state = part.scatter(p_leaders, &followers);
    Ok(LeaderFollowerPrediction { followers, final_state, feasibility })
}

/// Centroid, centered configuration and scale.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationObservables {
    pub centroid: DVector<f64>,
    pub centered: DVector<f64>,
    pub scale: f64,
    /// `(r*)^T p / ||r*||` when a target is supplied.
    pub target_projection: Option<f64>,
}

pub fn observables(d: usize, p: &DVector<f64>, r_star: Option<&DVector<f64>>) -> FormationObservables {
    let centroid = rigidity::centroid(d, p);
    let centered = rigidity::centered(d, p);
    let scale = centered.norm();
    let target_projection = r_star.map(|r| r.dot(p) / r.norm());
    FormationObservables { centroid, centered, scale, target_projection }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BearingErrors {
    /// `||g_ij(p) - g*_ij||` per edge, canonical order.
    pub per_edge: Vec<f64>,
    pub max: f64,
}

pub fn bearing_errors(
    graph: &Graph,
    p: &DVector<f64>,
    constraints: &BearingConstraintSet,
) -> Result<BearingErrors> {
    let og = graph.orient();
    let d = constraints.dimension();
    check_len(graph.vertex_count() * d, p.len())?;
    let target = constraints.stacked_bearings(&og, &Tolerances::default())?;
    let eps = Tolerances::default().coincident_rel * rigidity::diameter(d, p);
    let mut per_edge = Vec::with_capacity(og.edge_count());
    for (k, e) in og.edges().iter().enumerate() {
        let v = p.rows(e.head * d, d) - p.rows(e.tail * d, d);
        let len = v.norm();
        if !(len > eps) {
            return Err(Error::CoincidentPoints { edge: k, tail: e.tail, head: e.head });
        }
        per_edge.push((v / len - target.rows(k * d, d)).norm());
    }
    let max = per_edge.iter().copied().fold(0.0, f64::max);
    Ok(BearingErrors { per_edge, max })
}

/// A formation-control instance: graph, constraints, leaders and start.
#[derive(Debug, Clone)]
pub struct FormationProblem {
    pub graph: Graph,
    pub constraints: BearingConstraintSet,
    pub leaders: Vec<usize>,
    /// Leader positions stacked in the order of `leaders`.
    pub leader_positions: DVector<f64>,
    pub initial: DVector<f64>,
}

impl FormationProblem {
    pub fn dimension(&self) -> usize {
        self.constraints.dimension()
    }

    /// Initial state with leaders overwritten by their fixed positions.
    pub fn initial_state(&self) -> DVector<f64> {
        let d = self.dimension();
        let mut p = self.initial.clone();
        for (k, &v) in self.leaders.iter().enumerate() {
            p.rows_mut(v * d, d).copy_from(&self.leader_positions.rows(k * d, d));
        }
        p
    }

    pub fn field(&self) -> Result<ProtocolField> {
        ProtocolField::new(&self.graph, &self.constraints, &self.leaders, Role::Leader)
    }
}
