//! Anchor-based bearing-only network localization.
//!
//! Followers update their estimates with the same projected-difference law
//! as the formation controller, using measured bearings in place of target
//! bearings; anchors hold their known positions.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::formation::{check_len, ProtocolField, Role};
use crate::graph::Graph;
use crate::laplacian::RolePartition;
use crate::rigidity::{bearing_function, BearingVector, Framework};
use crate::tolerance::Tolerances;

/// Noise-free bearings of the true network.
pub fn measure_bearings(truth: &Framework) -> Result<BearingVector> {
    bearing_function(truth)
}

/// Estimator velocities: zero on anchors, projected differences of
/// estimates on followers.
pub fn estimator_field(
    graph: &Graph,
    estimates: &DVector<f64>,
    measurements: &BearingVector,
    anchors: &[usize],
) -> Result<DVector<f64>> {
    let field = ProtocolField::new(graph, measurements, anchors, Role::Anchor)?;
    check_len(field.state_len(), estimates.len())?;
    Ok(field.eval(estimates))
}

/// Equilibrium of the estimator, `-L_ff^{-1} L_fa p_a`, in follower order.
pub fn localize_closed_form(
    part: &RolePartition,
    anchor_positions: &DVector<f64>,
    tol: &Tolerances,
) -> Result<DVector<f64>> {
    let n_a = part.special().len();
    if n_a < 2 {
        return Err(Error::TooFewAnchors(n_a));
    }
    check_len(n_a * part.dimension(), anchor_positions.len())?;
    if part.followers().is_empty() {
        return Ok(DVector::zeros(0));
    }
    let chol = part.cholesky_ff(tol)?;
    Ok(-chol.solve(&(&part.l_fs * anchor_positions)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationErrors {
    /// `||p̂_i - p_i||` per agent.
    pub per_agent: Vec<f64>,
    pub max: f64,
}

pub fn localization_errors(
    d: usize,
    estimates: &DVector<f64>,
    truth: &DVector<f64>,
) -> Result<LocalizationErrors> {
    check_len(truth.len(), estimates.len())?;
    let per_agent: Vec<f64> = (0..truth.len() / d)
        .map(|i| (estimates.rows(i * d, d) - truth.rows(i * d, d)).norm())
        .collect();
    let max = per_agent.iter().copied().fold(0.0, f64::max);
    Ok(LocalizationErrors { per_agent, max })
}

/// Ground truth, anchors, measurements and starting estimate.
///
/// The truth is only used to produce measurements and to score estimates;
/// [`LocalizationProblem::field`] sees measurements and anchor positions
/// only.
#[derive(Debug, Clone)]
pub struct LocalizationProblem {
    truth: Framework,
    anchors: Vec<usize>,
    measurements: BearingVector,
    initial: DVector<f64>,
}

impl LocalizationProblem {
    /// `initial` entries at anchors are replaced by the anchors' true
    /// positions.
    pub fn new(truth: Framework, anchors: Vec<usize>, initial: DVector<f64>) -> Result<Self> {
        let measurements = measure_bearings(&truth)?;
        Self::with_measurements(truth, anchors, initial, measurements)
    }

    /// Same as [`LocalizationProblem::new`] with externally supplied
    /// measurements (for example perturbed ones).
    pub fn with_measurements(
        truth: Framework,
        mut anchors: Vec<usize>,
        mut initial: DVector<f64>,
        measurements: BearingVector,
    ) -> Result<Self> {
        let n = truth.graph().vertex_count();
        let d = truth.dimension();
        check_len(n * d, initial.len())?;
        anchors.sort_unstable();
        anchors.dedup();
        if let Some(&v) = anchors.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        if anchors.is_empty() {
            return Err(Error::TooFewAnchors(0));
        }
        for &a in &anchors {
            initial.rows_mut(a * d, d).copy_from_slice(truth.config().point(a));
        }
        Ok(LocalizationProblem { truth, anchors, measurements, initial })
    }

    pub fn truth(&self) -> &Framework {
        &self.truth
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    pub fn measurements(&self) -> &BearingVector {
        &self.measurements
    }

    pub fn initial_estimate(&self) -> &DVector<f64> {
        &self.initial
    }

    pub fn anchor_positions(&self) -> DVector<f64> {
        let d = self.truth.dimension();
        let mut out = DVector::zeros(self.anchors.len() * d);
        for (k, &a) in self.anchors.iter().enumerate() {
            out.rows_mut(k * d, d).copy_from_slice(self.truth.config().point(a));
        }
        out
    }

    pub fn field(&self) -> Result<ProtocolField> {
        ProtocolField::new(self.truth.graph(), &self.measurements, &self.anchors, Role::Anchor)
    }

    pub fn errors(&self, estimates: &DVector<f64>) -> Result<LocalizationErrors> {
        localization_errors(self.truth.dimension(), estimates, self.truth.config().stacked())
    }
}
