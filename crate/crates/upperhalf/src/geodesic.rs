//! Geodesic integration on the upper half-space from the closed-form
//! Christoffel symbols, with evaluation of soliton residuals along
//! trajectories.

use alloc::vec::Vec;

use crate::error::Error;
use crate::fields::field_value_at;
use crate::geometry::Point;
use crate::soliton::{residual_stats, SolitonProblem};

/// Integration aborts once the last coordinate drops below this floor,
/// tighter than the grid floor because trajectories may legitimately dive
/// toward the boundary.
pub const GEODESIC_FLOOR: f64 = 1e-6;

const MAX_STEPS: usize = 10_000_000;

/// Position and coordinate velocity of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    point: Point,
    velocity: Vec<f64>,
}

impl GeodesicState {
    pub fn new(point: Point, velocity: Vec<f64>) -> Result<Self, Error> {
        if velocity.len() != point.dim() {
            return Err(Error::LengthMismatch {
                what: "velocity",
                expected: point.dim(),
                found: velocity.len(),
            });
        }
        if velocity.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "velocity components",
            });
        }
        Ok(GeodesicState { point, velocity })
    }

    pub fn point(&self) -> &Point {
        &self.point
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegrationStatus {
    Completed,
    /// The next step would have taken xn below the floor; `t_last` is the
    /// parameter of the last accepted sample.
    ExitedDomain { t_last: f64 },
}

/// Samples of an integrated geodesic, strictly increasing in t.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<(f64, GeodesicState)>,
    dt: f64,
    integrator: &'static str,
    status: IntegrationStatus,
}

impl Trajectory {
    pub fn samples(&self) -> &[(f64, GeodesicState)] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn integrator(&self) -> &'static str {
        self.integrator
    }

    pub fn status(&self) -> IntegrationStatus {
        self.status
    }

    pub fn last(&self) -> &(f64, GeodesicState) {
        self.samples.last().expect("trajectory holds >= 1 sample")
    }
}

/// Acceleration from the geodesic equation x''^k = -Gamma^k_ij x'^i x'^j:
///
/// ```text
/// k < n:  x''_k = (2/xn) x'_k x'_n
/// k = n:  x''_n = ((x'_n)^2 - sum_{i<n} (x'_i)^2) / xn
/// ```
pub fn geodesic_acceleration(state: &GeodesicState) -> Vec<f64> {
    let n = state.dim();
    let xn = state.point.last();
    let v = &state.velocity;
    accel_raw(n, xn, v)
}

fn accel_raw(n: usize, xn: f64, v: &[f64]) -> Vec<f64> {
    let vn = v[n - 1];
    let mut out = Vec::with_capacity(n);
    for vk in v.iter().take(n - 1) {
        out.push(2.0 * vk * vn / xn);
    }
    let horiz: f64 = v.iter().take(n - 1).map(|vi| vi * vi).sum();
    out.push((vn * vn - horiz) / xn);
    out
}

/// g(v, v) = sum_i v_i^2 / xn^2. Conserved along exact geodesics.
pub fn speed_squared(state: &GeodesicState) -> f64 {
    let xn = state.point.last();
    let s: f64 = state.velocity.iter().map(|v| v * v).sum();
    s / (xn * xn)
}

/// One classical RK4 step on the first-order system (x, v). Returns None if
/// any stage leaves the open half-space, which makes the vector field
/// undefined.
fn rk4_step(n: usize, x: &[f64], v: &[f64], dt: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let stage = |x: &[f64], v: &[f64]| -> Option<(Vec<f64>, Vec<f64>)> {
        let xn = x[n - 1];
        if xn <= 0.0 {
            return None;
        }
        Some((v.to_vec(), accel_raw(n, xn, v)))
    };
    let shift = |base: &[f64], dir: &[f64], h: f64| -> Vec<f64> {
        base.iter().zip(dir).map(|(b, d)| b + h * d).collect()
    };

    let (k1x, k1v) = stage(x, v)?;
    let (k2x, k2v) = stage(&shift(x, &k1x, dt / 2.0), &shift(v, &k1v, dt / 2.0))?;
    let (k3x, k3v) = stage(&shift(x, &k2x, dt / 2.0), &shift(v, &k2v, dt / 2.0))?;
    let (k4x, k4v) = stage(&shift(x, &k3x, dt), &shift(v, &k3v, dt))?;

    let combine = |base: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| base[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    };
    Some((combine(x, &k1x, &k2x, &k3x, &k4x), combine(v, &k1v, &k2v, &k3v, &k4v)))
}

/// Fixed-step RK4 integration from `start` to `t_max`. Samples sit at
/// t = 0, dt, 2dt, ...; a final partial step lands exactly on t_max. If a
/// step would take xn below [`GEODESIC_FLOOR`] the run stops early with
/// `ExitedDomain`.
pub fn integrate_geodesic(
    start: GeodesicState,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory, Error> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidStep { value: dt });
    }
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::InvalidStep { value: t_max });
    }
    let steps_needed = t_max / dt;
    if steps_needed > MAX_STEPS as f64 {
        return Err(Error::TooManySteps {
            steps: steps_needed,
            limit: MAX_STEPS,
        });
    }

    let n = start.dim();
    let full = libm::floor(steps_needed) as usize;
    let rem = t_max - full as f64 * dt;
    let partial = rem > dt * 1e-12;

    let mut samples = Vec::with_capacity(full + 2);
    samples.push((0.0, start));
    let mut status = IntegrationStatus::Completed;

    for k in 0..full + usize::from(partial) {
        let (t_prev, state) = samples.last().expect("non-empty");
        let h = if k < full { dt } else { rem };
        let t_next = if k + 1 < full + usize::from(partial) {
            (k + 1) as f64 * dt
        } else {
            t_max
        };
        let stepped = rk4_step(n, state.point().coords(), state.velocity(), h);
        let accepted = stepped.and_then(|(x, v)| {
            if x[n - 1] >= GEODESIC_FLOOR {
                Some((x, v))
            } else {
                None
            }
        });
        match accepted {
            Some((x, v)) => {
                let point = Point::new(x)?;
                samples.push((t_next, GeodesicState::new(point, v)?));
            }
            None => {
                status = IntegrationStatus::ExitedDomain { t_last: *t_prev };
                break;
            }
        }
    }

    Ok(Trajectory {
        samples,
        dt,
        integrator: "rk4",
        status,
    })
}

/// Residual magnitude and field g-norm per trajectory sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEvalRow {
    pub t: f64,
    pub residual_max_abs: f64,
    /// |X|_g = sqrt(sum X_i^2) / xn; for gradient problems X is the metric
    /// gradient of the potential.
    pub field_norm: f64,
}

/// Evaluates the problem's residual and its field norm at every sample.
pub fn evaluate_along_geodesic(
    prob: &SolitonProblem,
    traj: &Trajectory,
) -> Result<Vec<TrajectoryEvalRow>, Error> {
    let field = prob
        .field()
        .expect("every problem kind carries a vector field");
    let mut rows = Vec::with_capacity(traj.samples().len());
    for (t, state) in traj.samples() {
        let p = state.point();
        let (max_abs, _) = residual_stats(prob, p)?;
        let comps = field_value_at(field, p)?;
        let sq: f64 = comps.iter().map(|c| c * c).sum();
        rows.push(TrajectoryEvalRow {
            t: *t,
            residual_max_abs: max_abs,
            field_norm: libm::sqrt(sq) / p.last(),
        });
    }
    Ok(rows)
}
