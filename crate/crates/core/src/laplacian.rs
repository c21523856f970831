//! The matrix-weighted bearing Laplacian shared by the formation controller
//! and the localization estimator, its leader/anchor partition, and the
//! definiteness and feasibility tests built on it.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::graph::{Graph, OrientedGraph};
use crate::linalg;
use crate::rigidity::{self, unit_projector, BearingVector};
use crate::tolerance::Tolerances;

/// Desired bearings `g*_ij` keyed by ordered vertex pair.
///
/// Either direction of an edge may be given; a missing direction is read as
/// the negation of the other. When both are given they must be opposite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BearingConstraintSet {
    d: usize,
    entries: BTreeMap<(usize, usize), Vec<f64>>,
}

impl BearingConstraintSet {
    pub fn new(d: usize) -> Self {
        BearingConstraintSet { d, entries: BTreeMap::new() }
    }

    /// Constraints equal to the bearings of a framework (tail towards head).
    pub fn from_bearings(bearings: &BearingVector) -> Self {
        let mut set = BearingConstraintSet::new(bearings.dimension());
        for (k, e) in bearings.edges().iter().enumerate() {
            set.entries.insert((e.tail, e.head), bearings.bearing(k).to_vec());
        }
        set
    }

    pub fn insert(&mut self, from: usize, to: usize, g: Vec<f64>) {
        self.entries.insert((from, to), g);
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Entries exactly as given, keyed by `(from, to)`.
    pub fn entries(&self) -> &BTreeMap<(usize, usize), Vec<f64>> {
        &self.entries
    }

    /// `g*_ij`, taken directly or as `-g*_ji`.
    pub fn bearing(&self, i: usize, j: usize) -> Option<Vec<f64>> {
        if let Some(g) = self.entries.get(&(i, j)) {
            return Some(g.clone());
        }
        self.entries
            .get(&(j, i))
            .map(|g| g.iter().map(|v| -v).collect())
    }

    /// Checks coverage, unit norm and antisymmetry against `graph`.
    pub fn validate(&self, graph: &Graph, tol: &Tolerances) -> Result<()> {
        for (&(i, j), g) in &self.entries {
            if !graph.has_edge(i, j) {
                return Err(Error::BearingOnNonEdge(i, j));
            }
            if g.len() != self.d {
                return Err(Error::BearingDimension {
                    tail: i,
                    head: j,
                    expected: self.d,
                    actual: g.len(),
                });
            }
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !((norm - 1.0).abs() <= tol.bearing_abs) {
                return Err(Error::NonUnitBearing { tail: i, head: j, norm });
            }
            if i < j {
                if let Some(rev) = self.entries.get(&(j, i)) {
                    let gap = g.iter().zip(rev).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
                    if !(gap <= tol.bearing_abs) {
                        return Err(Error::AntisymmetryViolation(i, j));
                    }
                }
            }
        }
        for &(i, j) in graph.edges() {
            if !self.entries.contains_key(&(i, j)) && !self.entries.contains_key(&(j, i)) {
                return Err(Error::MissingBearing(i, j));
            }
        }
        Ok(())
    }
}

/// Anything that supplies one unit bearing per oriented edge.
pub trait BearingSource {
    fn dimension(&self) -> usize;

    /// Bearings stacked in the edge order of `og`, each pointing tail to head.
    fn stacked_bearings(&self, og: &OrientedGraph, tol: &Tolerances) -> Result<DVector<f64>>;
}

impl BearingSource for BearingConstraintSet {
    fn dimension(&self) -> usize {
        self.d
    }

    fn stacked_bearings(&self, og: &OrientedGraph, tol: &Tolerances) -> Result<DVector<f64>> {
        self.validate(og.graph(), tol)?;
        let d = self.d;
        let mut out = DVector::zeros(og.edge_count() * d);
        for (k, e) in og.edges().iter().enumerate() {
            let g = self
                .bearing(e.tail, e.head)
                .ok_or(Error::MissingBearing(e.tail, e.head))?;
            out.rows_mut(k * d, d).copy_from_slice(&g);
        }
        Ok(out)
    }
}

impl BearingSource for BearingVector {
    fn dimension(&self) -> usize {
        BearingVector::dimension(self)
    }

    fn stacked_bearings(&self, og: &OrientedGraph, _tol: &Tolerances) -> Result<DVector<f64>> {
        if self.edges() != og.edges() {
            let e = og
                .edges()
                .iter()
                .find(|e| !self.edges().contains(e))
                .copied()
                .unwrap_or(og.edges()[0]);
            return Err(Error::MissingBearing(e.tail, e.head));
        }
        Ok(self.stacked().clone())
    }
}

/// `dn x dn` Laplacian with edge blocks `-P_{g_ij}` and diagonal blocks
/// `sum_j P_{g_ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BearingLaplacian {
    d: usize,
    n: usize,
    matrix: DMatrix<f64>,
}

impl BearingLaplacian {
    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::symmetric_eigenvalues(&self.matrix)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn rank(&self, tol: &Tolerances) -> usize {
        linalg::numeric_rank(&self.matrix, tol.rank_rel)
    }

    /// Smallest eigenvalue above the rank cutoff.
    pub fn smallest_nonzero_eigenvalue(&self, tol: &Tolerances) -> Option<f64> {
        let ev = self.eigenvalues();
        let cut = ev.last().copied().unwrap_or(0.0) * tol.rank_rel;
        ev.into_iter().find(|&l| l > cut)
    }

    /// `-L p`.
    pub fn apply_negated(&self, p: &DVector<f64>) -> DVector<f64> {
        -(&self.matrix * p)
    }
}

/// Blockwise assembly, one projector per edge.
pub fn assemble_laplacian(graph: &Graph, bearings: &impl BearingSource) -> Result<BearingLaplacian> {
    assemble_with(graph, bearings, &Tolerances::default())
}

pub fn assemble_with(
    graph: &Graph,
    bearings: &impl BearingSource,
    tol: &Tolerances,
) -> Result<BearingLaplacian> {
    let og = graph.orient();
    let d = bearings.dimension();
    let stacked = bearings.stacked_bearings(&og, tol)?;
    let n = graph.vertex_count();
    let mut matrix = DMatrix::zeros(d * n, d * n);
    for (k, e) in og.edges().iter().enumerate() {
        let p = unit_projector(&stacked.as_slice()[k * d..(k + 1) * d]);
        let (i, j) = (e.tail * d, e.head * d);
        let mut block = matrix.view_mut((i, i), (d, d));
        block += &p;
        let mut block = matrix.view_mut((j, j), (d, d));
        block += &p;
        let mut block = matrix.view_mut((i, j), (d, d));
        block -= &p;
        let mut block = matrix.view_mut((j, i), (d, d));
        block -= &p;
    }
    Ok(BearingLaplacian { d, n, matrix })
}

/// The same Laplacian computed as `(H ⊗ I_d)^T diag(P_{g_k}) (H ⊗ I_d)`.
pub fn assemble_laplacian_factored(
    graph: &Graph,
    bearings: &impl BearingSource,
) -> Result<BearingLaplacian> {
    let og = graph.orient();
    let d = bearings.dimension();
    let stacked = bearings.stacked_bearings(&og, &Tolerances::default())?;
    let m = og.edge_count();
    let hbar = og.incidence_matrix().kron_identity(d);
    let mut weights = DMatrix::zeros(d * m, d * m);
    for k in 0..m {
        let p = unit_projector(&stacked.as_slice()[k * d..(k + 1) * d]);
        weights.view_mut((k * d, k * d), (d, d)).copy_from(&p);
    }
    let matrix = hbar.transpose() * weights * hbar;
    Ok(BearingLaplacian { d, n: graph.vertex_count(), matrix })
}

/// Block decomposition of `L` into special (leader/anchor) and follower
/// parts: `[[L_ss, L_sf], [L_fs, L_ff]]`.
#[derive(Debug, Clone)]
pub struct RolePartition {
    d: usize,
    special: Vec<usize>,
    followers: Vec<usize>,
    pub l_ss: DMatrix<f64>,
    pub l_sf: DMatrix<f64>,
    pub l_fs: DMatrix<f64>,
    pub l_ff: DMatrix<f64>,
    laplacian_norm: f64,
}

pub fn partition(l: &BearingLaplacian, special: &[usize]) -> Result<RolePartition> {
    let n = l.n;
    let d = l.d;
    let mut is_special = vec![false; n];
    for &v in special {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        is_special[v] = true;
    }
    let special: Vec<usize> = (0..n).filter(|&v| is_special[v]).collect();
    let followers: Vec<usize> = (0..n).filter(|&v| !is_special[v]).collect();
    let block = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len() * d, cols.len() * d, |r, c| {
            l.matrix[(rows[r / d] * d + r % d, cols[c / d] * d + c % d)]
        })
    };
    Ok(RolePartition {
        d,
        l_ss: block(&special, &special),
        l_sf: block(&special, &followers),
        l_fs: block(&followers, &special),
        l_ff: block(&followers, &followers),
        special,
        followers,
        laplacian_norm: l.matrix.norm(),
    })
}

impl RolePartition {
    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Leader or anchor vertices, increasing.
    pub fn special(&self) -> &[usize] {
        &self.special
    }

    pub fn followers(&self) -> &[usize] {
        &self.followers
    }

    /// Vertex order of the block form: special vertices then followers.
    pub fn permutation(&self) -> Vec<usize> {
        self.special.iter().chain(&self.followers).copied().collect()
    }

    /// Frobenius norm of the full Laplacian.
    pub fn laplacian_norm(&self) -> f64 {
        self.laplacian_norm
    }

    /// Reassembles `L` in the original vertex order.
    pub fn recompose(&self) -> DMatrix<f64> {
        let d = self.d;
        let n = self.special.len() + self.followers.len();
        let mut out = DMatrix::zeros(n * d, n * d);
        let parts: [(&[usize], &[usize], &DMatrix<f64>); 4] = [
            (&self.special, &self.special, &self.l_ss),
            (&self.special, &self.followers, &self.l_sf),
            (&self.followers, &self.special, &self.l_fs),
            (&self.followers, &self.followers, &self.l_ff),
        ];
        for (rows, cols, m) in parts {
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    out[(rows[r / d] * d + r % d, cols[c / d] * d + c % d)] = m[(r, c)];
                }
            }
        }
        out
    }

    /// Stacks the blocks of `p` belonging to the special vertices.
    pub fn gather_special(&self, p: &DVector<f64>) -> DVector<f64> {
        gather(self.d, p, &self.special)
    }

    pub fn gather_followers(&self, p: &DVector<f64>) -> DVector<f64> {
        gather(self.d, p, &self.followers)
    }

    /// Inverse of gathering: builds a full stacked vector.
    pub fn scatter(&self, p_special: &DVector<f64>, p_followers: &DVector<f64>) -> DVector<f64> {
        let d = self.d;
        let n = self.special.len() + self.followers.len();
        let mut out = DVector::zeros(n * d);
        for (k, &v) in self.special.iter().enumerate() {
            out.rows_mut(v * d, d).copy_from(&p_special.rows(k * d, d));
        }
        for (k, &v) in self.followers.iter().enumerate() {
            out.rows_mut(v * d, d).copy_from(&p_followers.rows(k * d, d));
        }
        out
    }

    pub(crate) fn cholesky_ff(&self, tol: &Tolerances) -> Result<Cholesky<f64, Dyn>> {
        let pd = is_follower_block_positive_definite(self, tol)?;
        if !pd.positive_definite {
            return Err(Error::SingularFollowerBlock);
        }
        Cholesky::new(self.l_ff.clone()).ok_or(Error::SingularFollowerBlock)
    }
}

pub(crate) fn gather(d: usize, p: &DVector<f64>, vertices: &[usize]) -> DVector<f64> {
    let mut out = DVector::zeros(vertices.len() * d);
    for (k, &v) in vertices.iter().enumerate() {
        out.rows_mut(k * d, d).copy_from(&p.rows(v * d, d));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefinitenessVerdict {
    pub positive_definite: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// `L_ff ≻ 0` under the relative eigenvalue cutoff.
pub fn is_follower_block_positive_definite(
    part: &RolePartition,
    tol: &Tolerances,
) -> Result<DefinitenessVerdict> {
    if part.followers.is_empty() {
        return Err(Error::EmptyFollowerSet);
    }
    let ev = linalg::symmetric_eigenvalues(&part.l_ff);
    let lambda_min = ev[0];
    let lambda_max = *ev.last().unwrap();
    Ok(DefinitenessVerdict {
        positive_definite: lambda_max > 0.0 && lambda_min > tol.pd_rel * lambda_max,
        lambda_min,
        lambda_max,
    })
}

/// Result of the necessary leader-position test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderFeasibility {
    /// `||(L_ss - L_sf L_ff^{-1} L_fs) p_s||`.
    pub residual: f64,
    pub tolerance: f64,
    /// Two special vertices share a position. Such positions pass the
    /// residual test (they are a translation) but no formation with
    /// distinct points can contain them.
    pub coincident_leaders: bool,
    pub feasible: bool,
}

pub fn check_leader_feasibility(
    part: &RolePartition,
    p_special: &DVector<f64>,
    tol: &Tolerances,
) -> Result<LeaderFeasibility> {
    let d = part.d;
    if p_special.len() != part.special.len() * d {
        return Err(Error::SizeMismatch {
            expected: part.special.len() * d,
            actual: p_special.len(),
        });
    }
    let schur_p = if part.followers.is_empty() {
        &part.l_ss * p_special
    } else {
        let chol = part.cholesky_ff(tol)?;
        let rhs = &part.l_fs * p_special;
        &part.l_ss * p_special - &part.l_sf * chol.solve(&rhs)
    };
    let residual = schur_p.norm();
    let tolerance = tol.feasibility_rel * part.laplacian_norm * p_special.norm();
    let scale = p_special.amax();
    let ns = part.special.len();
    let mut coincident_leaders = false;
    for a in 0..ns {
        for b in a + 1..ns {
            let gap = (p_special.rows(a * d, d) - p_special.rows(b * d, d)).norm();
            if !(gap > tol.coincident_rel * scale) {
                coincident_leaders = true;
            }
        }
    }
    Ok(LeaderFeasibility {
        residual,
        tolerance,
        coincident_leaders,
        feasible: residual <= tolerance && !coincident_leaders,
    })
}

/// Outcome of the constructive feasibility test for a set of bearing
/// constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintFeasibility {
    pub feasible: bool,
    /// Null space of `L(G, g*)` is exactly translations plus one scaling
    /// direction, so the realizing shape is unique.
    pub rigid: bool,
    pub nullity: usize,
    /// Centered, unit-scale configuration whose bearings equal `+g*`.
    pub representative: Option<DVector<f64>>,
    pub reason: Option<String>,
}

/// Searches `Null(L(G, g*))` for a configuration whose every edge vector is a
/// positive multiple of its constraint bearing.
pub fn check_constraint_feasibility(
    graph: &Graph,
    constraints: &BearingConstraintSet,
    d: usize,
    tol: &Tolerances,
) -> Result<ConstraintFeasibility> {
    if constraints.dimension() != d {
        return Err(Error::InvalidDimension(constraints.dimension()));
    }
    if !graph.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let og = graph.orient();
    let n = graph.vertex_count();
    let stacked = constraints.stacked_bearings(&og, tol)?;
    let unit = rigidity::unit_bearings(d, og.edges().to_vec(), stacked);
    let reduced = rigidity::projected_incidence(n, &unit);
    let null = linalg::null_space(&reduced, tol.rank_rel);
    let nullity = null.ncols();
    let rigid = nullity == d + 1;

    let w = 1.0 / (n as f64).sqrt();
    let translations: Vec<DVector<f64>> = (0..d)
        .map(|k| DVector::from_fn(n * d, |r, _| if r % d == k { w } else { 0.0 }))
        .collect();
    let shape_dirs = linalg::orthonormalize(
        &translations,
        null.column_iter().map(|c| c.clone_owned()),
        1e-8,
    );
    let infeasible = |reason: &str| ConstraintFeasibility {
        feasible: false,
        rigid,
        nullity,
        representative: None,
        reason: Some(reason.to_string()),
    };
    if shape_dirs.is_empty() {
        return Ok(infeasible("only translations preserve the constraints"));
    }

    // Row k of `margins` maps shape coordinates y to g*_k . e_k(Q y).
    let q = linalg::columns_to_matrix(n * d, &shape_dirs);
    let m = og.edge_count();
    let mut margins = DMatrix::zeros(m, q.ncols());
    for (k, e) in og.edges().iter().enumerate() {
        let g = unit.bearing(k);
        for c in 0..q.ncols() {
            margins[(k, c)] = (0..d)
                .map(|a| g[a] * (q[(e.head * d + a, c)] - q[(e.tail * d + a, c)]))
                .sum::<f64>();
        }
    }
    let Some(y) = positive_direction(&margins) else {
        return Ok(infeasible("no configuration realizes every bearing with the given sign"));
    };
    let mut r = &q * y;
    r /= r.norm();

    // every edge vector of r must be a positive multiple of g*
    let fw_bearings = rigidity::bearings_of(d, og.edges(), &r);
    let worst = match fw_bearings {
        Some(b) => (b - &unit.stacked().clone())
            .as_slice()
            .chunks(d)
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max),
        None => f64::INFINITY,
    };
    if !(worst < 1e-6) {
        return Ok(infeasible("recovered configuration does not reproduce the bearings"));
    }
    Ok(ConstraintFeasibility {
        feasible: true,
        rigid,
        nullity,
        representative: Some(r),
        reason: None,
    })
}

/// Finds `y` with `A y > 0` componentwise (perceptron on normalized rows).
fn positive_direction(a: &DMatrix<f64>) -> Option<DVector<f64>> {
    let rows: Vec<DVector<f64>> = a
        .row_iter()
        .map(|r| {
            let v = r.transpose();
            let norm = v.norm();
            if norm > 0.0 {
                v / norm
            } else {
                v
            }
        })
        .collect();
    if rows.iter().any(|r| r.norm() == 0.0) {
        return None;
    }
    let mut y = rows.iter().fold(DVector::zeros(a.ncols()), |acc, r| acc + r);
    if a.ncols() == 1 {
        // a single shape direction: only the sign is free
        let s = if y[0] >= 0.0 { 1.0 } else { -1.0 };
        let y = DVector::from_element(1, s);
        let ok = rows.iter().all(|r| r.dot(&y) > 1e-9);
        return ok.then_some(y);
    }
    for _ in 0..200_000 {
        let norm = y.norm();
        let (worst, margin) = rows
            .iter()
            .enumerate()
            .map(|(k, r)| (k, r.dot(&y)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if norm > 0.0 && margin > 1e-9 * norm {
            return Some(y);
        }
        y += &rows[worst];
    }
    None
}
