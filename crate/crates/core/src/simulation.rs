//! Fixed-step integration of protocol fields with convergence detection.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplacian::BearingLaplacian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(rename = "euler", alias = "explicit-euler")]
    Euler,
    #[default]
    Rk4,
}

impl Method {
    /// Largest stable `dt * lambda_max` for `x' = -L x`.
    pub fn stability_bound(self) -> f64 {
        match self {
            Method::Euler => 2.0,
            Method::Rk4 => 2.78,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" | "explicit-euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::InvalidIntegrator(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub max_time: f64,
    /// Stop once `||f(x)|| < tolerance * (1 + ||x||)`.
    pub tolerance: f64,
    /// Steps between stored samples.
    pub record_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            dt: 1e-2,
            max_time: 100.0,
            tolerance: 1e-9,
            record_stride: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidIntegrator(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.max_time > 0.0 && self.max_time.is_finite()) {
            return Err(Error::InvalidIntegrator(format!(
                "max time must be positive, got {}",
                self.max_time
            )));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidIntegrator("tolerance must be non-negative".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidIntegrator("record stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Step size used when none is given and the system matrix is known.
pub fn auto_dt(lambda_max: f64) -> f64 {
    0.5 / lambda_max
}

/// Fallback step size when no system matrix is available.
pub fn auto_dt_from_speed(diameter: f64, max_speed: f64) -> f64 {
    if max_speed > 0.0 && diameter > 0.0 {
        1e-2 * diameter / max_speed
    } else {
        1e-2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub lambda_max: f64,
    /// Largest stable step for the method.
    pub dt_max: f64,
    pub suggested_dt: f64,
}

pub fn stability_check(l: &BearingLaplacian, cfg: &IntegratorConfig) -> StabilityVerdict {
    stability_check_lambda(l.lambda_max(), cfg.method, cfg.dt)
}

pub fn stability_check_lambda(lambda_max: f64, method: Method, dt: f64) -> StabilityVerdict {
    if !(lambda_max > 0.0) {
        return StabilityVerdict {
            stable: true,
            lambda_max,
            dt_max: f64::INFINITY,
            suggested_dt: dt,
        };
    }
    let dt_max = method.stability_bound() / lambda_max;
    StabilityVerdict {
        stable: dt < dt_max,
        lambda_max,
        dt_max,
        suggested_dt: auto_dt(lambda_max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "reason", content = "detail")]
pub enum Termination {
    Converged,
    MaxTime,
    Error(String),
}

/// A named scalar evaluated at every stored sample. Failures are stored as
/// NaN.
type ObservableFn<'a> = Box<dyn Fn(&DVector<f64>) -> Result<f64> + 'a>;

pub struct Observable<'a> {
    pub name: String,
    pub eval: ObservableFn<'a>,
}

impl<'a> Observable<'a> {
    pub fn new(name: impl Into<String>, eval: impl Fn(&DVector<f64>) -> Result<f64> + 'a) -> Self {
        Observable { name: name.into(), eval: Box::new(eval) }
    }
}

/// Name of the field-norm column present in every trajectory.
pub const FIELD_NORM: &str = "field_norm";

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// `field_norm` first, then the observers in order.
    pub observable_names: Vec<String>,
    pub observations: Vec<Vec<f64>>,
    pub termination: Termination,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has an initial sample")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has an initial sample")
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.observable_names.iter().position(|n| n == name)?;
        Some(self.observations.iter().map(|row| row[idx]).collect())
    }
}

/// Integrates `x' = field(x)` from `x0` with a fixed step.
///
/// Samples are stored every `record_stride` steps plus the final state. A
/// failing field evaluation ends the run with [`Termination::Error`].
pub fn integrate<F>(
    mut field: F,
    x0: &DVector<f64>,
    cfg: &IntegratorConfig,
    observers: &[Observable<'_>],
) -> Result<Trajectory>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    cfg.validate()?;
    let mut names = vec![FIELD_NORM.to_string()];
    names.extend(observers.iter().map(|o| o.name.clone()));
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        observable_names: names,
        observations: Vec::new(),
        termination: Termination::MaxTime,
        steps: 0,
    };
    let record = |traj: &mut Trajectory, t: f64, x: &DVector<f64>, fnorm: f64| {
        let mut row = Vec::with_capacity(observers.len() + 1);
        row.push(fnorm);
        row.extend(observers.iter().map(|o| (o.eval)(x).unwrap_or(f64::NAN)));
        traj.times.push(t);
        traj.states.push(x.clone());
        traj.observations.push(row);
    };

    let mut x = x0.clone();
    let mut f = match field(&x) {
        Ok(f) => f,
        Err(e) => {
            record(&mut traj, 0.0, &x, f64::NAN);
            traj.termination = Termination::Error(e.to_string());
            return Ok(traj);
        }
    };
    record(&mut traj, 0.0, &x, f.norm());
    let mut t = 0.0;
    let mut step = 0usize;
    let end = cfg.max_time * (1.0 - 1e-12);
    loop {
        if f.norm() < cfg.tolerance * (1.0 + x.norm()) {
            traj.termination = Termination::Converged;
            break;
        }
        if t >= end {
            traj.termination = Termination::MaxTime;
            break;
        }
        let h = cfg.dt.min(cfg.max_time - t);
        let next = match cfg.method {
            Method::Euler => Ok(&x + &f * h),
            Method::Rk4 => rk4_step(&mut field, &x, &f, h),
        };
        let next_f = next.and_then(|xn| field(&xn).map(|fx| (xn, fx)));
        match next_f {
            Ok((xn, fx)) => {
                x = xn;
                f = fx;
                step += 1;
                t = (step as f64 * cfg.dt).min(cfg.max_time);
            }
            Err(e) => {
                traj.termination = Termination::Error(e.to_string());
                break;
            }
        }
        if step.is_multiple_of(cfg.record_stride) {
            record(&mut traj, t, &x, f.norm());
        }
    }
    traj.steps = step;
    if traj.times.last() != Some(&t) {
        record(&mut traj, t, &x, f.norm());
    }
    Ok(traj)
}

fn rk4_step<F>(field: &mut F, x: &DVector<f64>, k1: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let k2 = field(&(x + k1 * (h / 2.0)))?;
    let k3 = field(&(x + &k2 * (h / 2.0)))?;
    let k4 = field(&(x + &k3 * h))?;
    Ok(x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0))
}
