//! Projection operator, bearing function, bearing rigidity matrix and the
//! infinitesimal bearing rigidity test.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, OrientedGraph};
use crate::linalg;
use crate::tolerance::Tolerances;

/// Vectors at or below this norm have no direction.
pub const PROJECTION_MIN_NORM: f64 = 1e-12;

/// `P_x = I - x x^T / ||x||^2`, the orthogonal projector onto `x`'s
/// orthogonal complement.
pub fn project(x: &[f64]) -> Result<DMatrix<f64>> {
    project_with_min_norm(x, PROJECTION_MIN_NORM)
}

pub fn project_with_min_norm(x: &[f64], min_norm: f64) -> Result<DMatrix<f64>> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > min_norm) {
        return Err(Error::DegenerateVector(norm));
    }
    let d = x.len();
    Ok(DMatrix::from_fn(d, d, |r, c| {
        let delta = if r == c { 1.0 } else { 0.0 };
        delta - (x[r] / norm) * (x[c] / norm)
    }))
}

/// Projector for an already normalized vector; no norm check.
pub(crate) fn unit_projector(g: &[f64]) -> DMatrix<f64> {
    let d = g.len();
    DMatrix::from_fn(d, d, |r, c| if r == c { 1.0 } else { 0.0 } - g[r] * g[c])
}

/// Points `p_1..p_n` in `R^d`, stored stacked in vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    d: usize,
    coords: DVector<f64>,
}

impl Configuration {
    pub fn new(d: usize, coords: DVector<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::SizeMismatch {
                expected: (coords.len() / d + 1) * d,
                actual: coords.len(),
            });
        }
        if coords.len() / d < 2 {
            return Err(Error::TooFewVertices(coords.len() / d));
        }
        Ok(Configuration { d, coords })
    }

    pub fn from_points(d: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * d);
        for p in points {
            if p.len() != d {
                return Err(Error::SizeMismatch { expected: d, actual: p.len() });
            }
            coords.extend_from_slice(p);
        }
        Configuration::new(d, DVector::from_vec(coords))
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn point_count(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords.as_slice()[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.point_count()).map(|i| self.point(i).to_vec()).collect()
    }

    pub fn stacked(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_stacked(self) -> DVector<f64> {
        self.coords
    }

    /// Largest distance between any two points.
    pub fn diameter(&self) -> f64 {
        diameter(self.d, &self.coords)
    }
}

pub(crate) fn diameter(d: usize, p: &DVector<f64>) -> f64 {
    let n = p.len() / d;
    let s = p.as_slice();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let dist2: f64 = (0..d).map(|k| (s[j * d + k] - s[i * d + k]).powi(2)).sum();
            best = best.max(dist2);
        }
    }
    best.sqrt()
}

/// A graph embedded at a configuration.
#[derive(Debug, Clone)]
pub struct Framework {
    oriented: OrientedGraph,
    config: Configuration,
    tolerances: Tolerances,
}

impl Framework {
    pub fn new(graph: Graph, config: Configuration) -> Result<Self> {
        if graph.vertex_count() != config.point_count() {
            return Err(Error::SizeMismatch {
                expected: graph.vertex_count(),
                actual: config.point_count(),
            });
        }
        Ok(Framework {
            oriented: graph.orient(),
            config,
            tolerances: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn graph(&self) -> &Graph {
        self.oriented.graph()
    }

    pub fn oriented(&self) -> &OrientedGraph {
        &self.oriented
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn dimension(&self) -> usize {
        self.config.d
    }

    /// Same graph, different positions.
    pub fn with_config(&self, config: Configuration) -> Result<Self> {
        Framework::new(self.graph().clone(), config).map(|f| f.with_tolerances(self.tolerances))
    }
}

/// Stacked unit bearings `g_1..g_m` in canonical edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct BearingVector {
    d: usize,
    edges: Vec<Edge>,
    stacked: DVector<f64>,
    lengths: Vec<f64>,
}

impl BearingVector {
    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Bearing of the `k`-th oriented edge, from tail towards head.
    pub fn bearing(&self, k: usize) -> &[f64] {
        &self.stacked.as_slice()[k * self.d..(k + 1) * self.d]
    }

    pub fn stacked(&self) -> &DVector<f64> {
        &self.stacked
    }

    /// `||e_k||` for every edge.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Replaces the stacked bearings, keeping edges and lengths. Each block
    /// is renormalized to unit length.
    pub(crate) fn with_bearings(&self, stacked: DVector<f64>) -> Self {
        let mut out = self.clone();
        for k in 0..self.edges.len() {
            let mut block = stacked.rows(k * self.d, self.d).clone_owned();
            let norm = block.norm();
            if norm > 0.0 {
                block /= norm;
            }
            out.stacked.rows_mut(k * self.d, self.d).copy_from(&block);
        }
        out
    }
}

/// `F_B(p)`: the bearings of every edge under the canonical orientation.
pub fn bearing_function(fw: &Framework) -> Result<BearingVector> {
    let d = fw.dimension();
    let p = fw.config.coords.as_slice();
    let eps = fw.tolerances.coincident_rel * fw.config.diameter();
    let edges = fw.oriented.edges().to_vec();
    let mut stacked = DVector::zeros(edges.len() * d);
    let mut lengths = Vec::with_capacity(edges.len());
    for (k, e) in edges.iter().enumerate() {
        let mut len2 = 0.0;
        for c in 0..d {
            let v = p[e.head * d + c] - p[e.tail * d + c];
            stacked[k * d + c] = v;
            len2 += v * v;
        }
        let len = len2.sqrt();
        if !(len > eps) {
            return Err(Error::CoincidentPoints { edge: k, tail: e.tail, head: e.head });
        }
        for c in 0..d {
            stacked[k * d + c] /= len;
        }
        lengths.push(len);
    }
    Ok(BearingVector { d, edges, stacked, lengths })
}

/// Wraps stacked unit bearings that were not measured from a configuration;
/// edge lengths are recorded as 1.
pub(crate) fn unit_bearings(d: usize, edges: Vec<Edge>, stacked: DVector<f64>) -> BearingVector {
    let lengths = vec![1.0; edges.len()];
    BearingVector { d, edges, stacked, lengths }
}

/// Stacked bearings of `p` over `edges`, or `None` if an edge collapses.
pub(crate) fn bearings_of(d: usize, edges: &[Edge], p: &DVector<f64>) -> Option<DVector<f64>> {
    let eps = Tolerances::default().coincident_rel * diameter(d, p);
    let mut out = DVector::zeros(edges.len() * d);
    for (k, e) in edges.iter().enumerate() {
        let v = p.rows(e.head * d, d) - p.rows(e.tail * d, d);
        let len = v.norm();
        if !(len > eps) {
            return None;
        }
        out.rows_mut(k * d, d).copy_from(&(v / len));
    }
    Some(out)
}

/// `diag(w_k P_{g_k}) (H ⊗ I_d)` assembled block by block.
fn weighted_projected_incidence(
    n: usize,
    bearings: &BearingVector,
    weight: impl Fn(usize) -> f64,
) -> DMatrix<f64> {
    let d = bearings.d;
    let mut r = DMatrix::zeros(bearings.len() * d, n * d);
    for (k, e) in bearings.edges.iter().enumerate() {
        let block = unit_projector(bearings.bearing(k)) * weight(k);
        r.view_mut((k * d, e.head * d), (d, d)).copy_from(&block);
        r.view_mut((k * d, e.tail * d), (d, d)).copy_from(&(-block));
    }
    r
}

/// `diag(P_{g_k}) (H ⊗ I_d)`: the rigidity matrix without the `1/||e_k||`
/// factors. It has the same rank and null space as `R_B`, and depends only
/// on the bearings.
pub fn projected_incidence(n: usize, bearings: &BearingVector) -> DMatrix<f64> {
    weighted_projected_incidence(n, bearings, |_| 1.0)
}

/// Bearing rigidity matrix with its rank and null space.
#[derive(Debug, Clone)]
pub struct BearingRigidityMatrix {
    pub matrix: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Orthonormal columns spanning `Null(R_B)`.
    pub null_space: DMatrix<f64>,
}

pub fn bearing_rigidity_matrix(fw: &Framework) -> Result<BearingRigidityMatrix> {
    let bearings = bearing_function(fw)?;
    let matrix =
        weighted_projected_incidence(fw.config.point_count(), &bearings, |k| 1.0 / bearings.lengths[k]);
    let rel = fw.tolerances.rank_rel;
    let singular_values = linalg::singular_values(&matrix);
    let cut = linalg::rank_cutoff(&singular_values, rel);
    let rank = singular_values.iter().filter(|&&s| s > cut).count();
    let null_space = linalg::null_space(&matrix, rel);
    Ok(BearingRigidityMatrix { matrix, singular_values, rank, null_space })
}

/// Orthonormal basis of the trivial motions: `d` translations followed by
/// the normalized centered configuration (the scaling direction).
pub fn trivial_motion_basis(config: &Configuration) -> Result<DMatrix<f64>> {
    let d = config.d;
    let n = config.point_count();
    let mut basis = DMatrix::zeros(d * n, d + 1);
    let w = 1.0 / (n as f64).sqrt();
    for k in 0..d {
        for i in 0..n {
            basis[(i * d + k, k)] = w;
        }
    }
    let r = centered(d, &config.coords);
    let s = r.norm();
    // relative to the largest coordinate so tiny configurations still count
    if !(s > 1e-14 * config.coords.amax()) {
        return Err(Error::DegenerateConfiguration);
    }
    basis.set_column(d, &(r / s));
    Ok(basis)
}

pub(crate) fn centroid(d: usize, p: &DVector<f64>) -> DVector<f64> {
    let n = p.len() / d;
    let mut c = DVector::zeros(d);
    for i in 0..n {
        c += p.rows(i * d, d);
    }
    c / n as f64
}

pub(crate) fn centered(d: usize, p: &DVector<f64>) -> DVector<f64> {
    let c = centroid(d, p);
    let mut r = p.clone();
    for i in 0..p.len() / d {
        let mut block = r.rows_mut(i * d, d);
        block -= &c;
    }
    r
}

/// Outcome of the infinitesimal bearing rigidity test.
#[derive(Debug, Clone)]
pub struct RigidityReport {
    pub rigid: bool,
    pub rank: usize,
    /// `dn - d - 1`.
    pub required_rank: usize,
    /// Orthonormal columns spanning the infinitesimal bearing motions that
    /// are neither translations nor scaling. Empty when rigid.
    pub nontrivial_motions: DMatrix<f64>,
}

pub fn is_infinitesimally_bearing_rigid(fw: &Framework) -> Result<RigidityReport> {
    let rb = bearing_rigidity_matrix(fw)?;
    let d = fw.dimension();
    let n = fw.config.point_count();
    let required_rank = d * n - d - 1;
    let trivial = trivial_motion_basis(&fw.config)?;
    let trivial_cols: Vec<DVector<f64>> = trivial.column_iter().map(|c| c.clone_owned()).collect();
    let extra = linalg::orthonormalize(
        &trivial_cols,
        rb.null_space.column_iter().map(|c| c.clone_owned()),
        1e-8,
    );
    Ok(RigidityReport {
        rigid: rb.rank == required_rank,
        rank: rb.rank,
        required_rank,
        nontrivial_motions: linalg::columns_to_matrix(d * n, &extra),
    })
}
