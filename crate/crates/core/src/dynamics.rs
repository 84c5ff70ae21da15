//! Equations of motion of a rigid body about a fixed point in potential and
//! gyroscopic fields, and their fixed-step integration.
//!
//! With diagonal inertia `𝐀 = diag(A₁, A₂, A₃)`, gyroscopic coefficients `k`
//! and a potential `Π(α)`, the Euler equations read, for `(i, j, l)` cyclic,
//!
//! ```text
//! A_i ω̇_i + (A_l − A_j) ω_j ω_l + k_l ω_j − k_j ω_l = M_i
//! ```
//!
//! where `M = Σ_rows r × ∂Π/∂r` is the potential torque, closed by the Poisson
//! equations `ṙ = r × ω` for every row `r` of `Q`.

use crate::forms::{max_closedness_residual, InvariantTwoForm, SphereScalarField, TAU_CLOSED};
use crate::so3::{hat, project_to_so3, BodyState, RotationMatrix, TAU_ORTH};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("principal moments must be positive, got ({0}, {1}, {2})")]
    NonPositiveInertia(f64, f64, f64),
    #[error("gyroscopic form is not closed: residual {residual:.3e} at alpha = ({:.6}, {:.6}, {:.6})", alpha.x, alpha.y, alpha.z)]
    NotClosed { residual: f64, alpha: Vector3<f64> },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },
    #[error("reduced integration needs fields of alpha only: {0}")]
    NonInvariantData(String),
    #[error("window holds {samples} samples; at least 3 are needed")]
    WindowTooShort { samples: usize },
}

/// Principal moments of inertia.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaTensor {
    moments: Vector3<f64>,
}

impl InertiaTensor {
    /// Rejects non-positive moments. Violations of the triangle inequalities
    /// are logged and accepted.
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self, DynamicsError> {
        if !(a1 > 0.0 && a2 > 0.0 && a3 > 0.0) || !(a1 + a2 + a3).is_finite() {
            return Err(DynamicsError::NonPositiveInertia(a1, a2, a3));
        }
        let t = InertiaTensor {
            moments: Vector3::new(a1, a2, a3),
        };
        if !t.satisfies_triangle_inequalities() {
            log::warn!("inertia ({a1}, {a2}, {a3}) violates the triangle inequalities");
        }
        Ok(t)
    }

    pub fn moments(&self) -> Vector3<f64> {
        self.moments
    }

    /// `𝐀ω`.
    pub fn apply(&self, omega: &Vector3<f64>) -> Vector3<f64> {
        self.moments.component_mul(omega)
    }

    pub fn satisfies_triangle_inequalities(&self) -> bool {
        let a = self.moments;
        a.x + a.y >= a.z && a.y + a.z >= a.x && a.z + a.x >= a.y
    }
}

/// The system `(SO(3), 𝐀, Π, κ)`.
#[derive(Debug, Clone)]
pub struct GyroSystem {
    pub inertia: InertiaTensor,
    pub potential: SphereScalarField,
    pub kappa: InvariantTwoForm,
    pub label: String,
    closed: bool,
}

impl GyroSystem {
    /// Builds a system, rejecting gyroscopic forms whose closedness residual
    /// exceeds [`TAU_CLOSED`] on the screening grid.
    pub fn new(
        label: impl Into<String>,
        inertia: InertiaTensor,
        potential: SphereScalarField,
        kappa: InvariantTwoForm,
    ) -> Result<Self, DynamicsError> {
        let (residual, q) = max_closedness_residual(&kappa);
        if !(residual <= TAU_CLOSED) {
            return Err(DynamicsError::NotClosed {
                residual,
                alpha: q.alpha(),
            });
        }
        Ok(GyroSystem {
            inertia,
            potential,
            kappa,
            label: label.into(),
            closed: true,
        })
    }

    /// Skips the closedness screen. The equations of motion are still
    /// well-defined, but they no longer come from a symplectic structure; this
    /// exists for counterexample experiments with non-closed forms.
    pub fn new_unchecked(
        label: impl Into<String>,
        inertia: InertiaTensor,
        potential: SphereScalarField,
        kappa: InvariantTwoForm,
    ) -> Self {
        GyroSystem {
            inertia,
            potential,
            kappa,
            label: label.into(),
            closed: false,
        }
    }

    /// Whether the closedness screen was run and passed.
    pub fn is_certified_closed(&self) -> bool {
        self.closed
    }

    pub fn is_psi_invariant(&self) -> bool {
        self.kappa.is_sphere()
    }
}

/// Σ_rows r × ∂Π/∂r. Potentials here depend on the first row only, so callers
/// pass zero gradients for the other two rows.
fn potential_torque(rows: &[Vector3<f64>; 3], row_gradients: &[Vector3<f64>; 3]) -> Vector3<f64> {
    rows.iter()
        .zip(row_gradients)
        .map(|(r, g)| r.cross(g))
        .fold(Vector3::zeros(), |acc, t| acc + t)
}

fn omega_rate(sys: &GyroSystem, omega: &Vector3<f64>, rows: &[Vector3<f64>; 3], k: &Vector3<f64>) -> Vector3<f64> {
    let a = sys.inertia.moments();
    let grads = [sys.potential.gradient(&rows[0]), Vector3::zeros(), Vector3::zeros()];
    let m = potential_torque(rows, &grads);
    let w = omega;
    let mut out = Vector3::zeros();
    for i in 0..3 {
        let j = (i + 1) % 3;
        let l = (i + 2) % 3;
        out[i] = (-(a[l] - a[j]) * w[j] * w[l] - (k[l] * w[j] - k[j] * w[l]) + m[i]) / a[i];
    }
    out
}

/// `(dω/dt, dQ/dt)` at `state`, with `dQ/dt = Q·hat(ω)`.
pub fn equations_rhs(sys: &GyroSystem, state: &BodyState) -> (Vector3<f64>, Matrix3<f64>) {
    rhs_matrix(sys, state.q.matrix(), &state.omega)
}

fn rhs_matrix(sys: &GyroSystem, q: &Matrix3<f64>, omega: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let rot = RotationMatrix::from_matrix_unchecked(*q);
    let rows = rot.rows();
    let k = sys.kappa.coefficients_at(&rot);
    (omega_rate(sys, omega, &rows, &k), q * hat(omega))
}

fn rhs_reduced(sys: &GyroSystem, alpha: &Vector3<f64>, omega: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let k = sys.kappa.coefficients_at_alpha(alpha);
    let rows = [*alpha, Vector3::zeros(), Vector3::zeros()];
    (omega_rate(sys, omega, &rows, &k), alpha.cross(omega))
}

/// Poisson equations: `ṙ = r × ω` for the three rows.
pub fn poisson_row_rates(state: &BodyState) -> [Vector3<f64>; 3] {
    state.q.rows().map(|r| r.cross(&state.omega))
}

pub fn kinetic_energy(inertia: &InertiaTensor, omega: &Vector3<f64>) -> f64 {
    0.5 * inertia.apply(omega).dot(omega)
}

/// `H = ½𝐀ω·ω + Π(α)`.
pub fn energy(sys: &GyroSystem, state: &BodyState) -> f64 {
    energy_at(sys, &state.q.alpha(), &state.omega)
}

fn energy_at(sys: &GyroSystem, alpha: &Vector3<f64>, omega: &Vector3<f64>) -> f64 {
    kinetic_energy(&sys.inertia, omega) + sys.potential.value(alpha)
}

/// `G̃ = 𝐀ω·α`, the momentum about the first space axis.
pub fn momentum_about_axis(inertia: &InertiaTensor, omega: &Vector3<f64>, alpha: &Vector3<f64>) -> f64 {
    inertia.apply(omega).dot(alpha)
}

/// `G = 𝐀ω·α + f(α)`.
pub fn area_integral(sys: &GyroSystem, state: &BodyState, f: &SphereScalarField) -> f64 {
    let alpha = state.q.alpha();
    momentum_about_axis(&sys.inertia, &state.omega, &alpha) + f.value(&alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// RK4 on `(ω, Q)` with projection onto SO(3) after each step.
    Rk4Projected,
    /// RK4 on `(ω, α)` with renormalization of `α`.
    #[default]
    ReducedEulerPoisson,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4Projected => "rk4-projected",
            Method::ReducedEulerPoisson => "reduced-euler-poisson",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rk4-projected" => Ok(Method::Rk4Projected),
            "reduced-euler-poisson" => Ok(Method::ReducedEulerPoisson),
            _ => Err(format!(
                "unknown method '{s}' (expected rk4-projected or reduced-euler-poisson)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub method: Method,
    pub t_end: f64,
    /// Record every `stride`-th step.
    pub stride: usize,
    pub tau_orth: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            method: Method::default(),
            t_end: 10.0,
            stride: 10,
            tau_orth: TAU_ORTH,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(DynamicsError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(DynamicsError::InvalidConfig(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.stride == 0 {
            return Err(DynamicsError::InvalidConfig("stride must be at least 1".into()));
        }
        if !(self.tau_orth > 0.0) {
            return Err(DynamicsError::InvalidConfig("tau_orth must be positive".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// One recorded sample of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    /// Full attitude; absent for the reduced method, which only tracks α.
    pub attitude: Option<RotationMatrix>,
    pub omega: Vector3<f64>,
    pub alpha: Vector3<f64>,
    pub energy: f64,
    /// `G`, present when an area potential `f` was supplied.
    pub area: Option<f64>,
    /// `max|QᵀQ − I|` for the full method, `||α| − 1|` for the reduced one.
    pub orth_err: f64,
}

impl TrajectoryPoint {
    pub fn state(&self) -> Option<BodyState> {
        self.attitude.map(|q| BodyState::new(q, self.omega))
    }
}

/// Integrates from `initial` with classical RK4 at fixed step.
///
/// Samples are recorded at steps `0, stride, 2·stride, …` up to
/// `round(t_end/dt)`, so the output is uniformly spaced. When `area` is given,
/// each sample carries `G = 𝐀ω·α + f(α)`.
pub fn integrate(
    sys: &GyroSystem,
    initial: &BodyState,
    cfg: &IntegratorConfig,
    area: Option<&SphereScalarField>,
) -> Result<Vec<TrajectoryPoint>, DynamicsError> {
    cfg.validate()?;
    match cfg.method {
        Method::Rk4Projected => integrate_full(sys, initial, cfg, area),
        Method::ReducedEulerPoisson => {
            if !sys.is_psi_invariant() {
                return Err(DynamicsError::NonInvariantData(
                    "gyroscopic coefficients depend on the full attitude".into(),
                ));
            }
            integrate_reduced(sys, initial, cfg, area)
        }
    }
}

fn sample(
    sys: &GyroSystem,
    t: f64,
    attitude: Option<RotationMatrix>,
    omega: Vector3<f64>,
    alpha: Vector3<f64>,
    orth_err: f64,
    area: Option<&SphereScalarField>,
) -> TrajectoryPoint {
    TrajectoryPoint {
        t,
        attitude,
        omega,
        alpha,
        energy: energy_at(sys, &alpha, &omega),
        area: area.map(|f| momentum_about_axis(&sys.inertia, &omega, &alpha) + f.value(&alpha)),
        orth_err,
    }
}

fn integrate_full(
    sys: &GyroSystem,
    initial: &BodyState,
    cfg: &IntegratorConfig,
    area: Option<&SphereScalarField>,
) -> Result<Vec<TrajectoryPoint>, DynamicsError> {
    let dt = cfg.dt;
    let mut q = *initial.q.matrix();
    let mut w = initial.omega;
    let steps = cfg.steps();
    let mut out = Vec::with_capacity(steps / cfg.stride + 1);
    let first = initial.q;
    out.push(sample(sys, 0.0, Some(first), w, first.alpha(), first.orthonormality_error(), area));
    for n in 1..=steps {
        let (k1w, k1q) = rhs_matrix(sys, &q, &w);
        let (k2w, k2q) = rhs_matrix(sys, &(q + k1q * (0.5 * dt)), &(w + k1w * (0.5 * dt)));
        let (k3w, k3q) = rhs_matrix(sys, &(q + k2q * (0.5 * dt)), &(w + k2w * (0.5 * dt)));
        let (k4w, k4q) = rhs_matrix(sys, &(q + k3q * dt), &(w + k3w * dt));
        let w_next = w + (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * (dt / 6.0);
        let q_next = q + (k1q + k2q * 2.0 + k3q * 2.0 + k4q) * (dt / 6.0);
        let t = n as f64 * dt;
        if !w_next.iter().all(|x| x.is_finite()) {
            return Err(DynamicsError::StepRejected {
                t,
                reason: "angular velocity became non-finite".into(),
            });
        }
        let projected = project_to_so3(&q_next).map_err(|e| DynamicsError::StepRejected {
            t,
            reason: e.to_string(),
        })?;
        let err = projected.orthonormality_error();
        if err > cfg.tau_orth {
            return Err(DynamicsError::StepRejected {
                t,
                reason: format!("orthonormality error {err:.3e} after projection"),
            });
        }
        q = projected.into_inner();
        w = w_next;
        if n % cfg.stride == 0 {
            out.push(sample(sys, t, Some(projected), w, projected.alpha(), err, area));
        }
    }
    Ok(out)
}

fn integrate_reduced(
    sys: &GyroSystem,
    initial: &BodyState,
    cfg: &IntegratorConfig,
    area: Option<&SphereScalarField>,
) -> Result<Vec<TrajectoryPoint>, DynamicsError> {
    let dt = cfg.dt;
    let mut a = initial.q.alpha();
    let mut w = initial.omega;
    let steps = cfg.steps();
    let mut out = Vec::with_capacity(steps / cfg.stride + 1);
    out.push(sample(sys, 0.0, None, w, a, (a.norm() - 1.0).abs(), area));
    for n in 1..=steps {
        let (k1w, k1a) = rhs_reduced(sys, &a, &w);
        let (k2w, k2a) = rhs_reduced(sys, &(a + k1a * (0.5 * dt)), &(w + k1w * (0.5 * dt)));
        let (k3w, k3a) = rhs_reduced(sys, &(a + k2a * (0.5 * dt)), &(w + k2w * (0.5 * dt)));
        let (k4w, k4a) = rhs_reduced(sys, &(a + k3a * dt), &(w + k3w * dt));
        let w_next = w + (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * (dt / 6.0);
        let a_next = a + (k1a + k2a * 2.0 + k3a * 2.0 + k4a) * (dt / 6.0);
        let t = n as f64 * dt;
        let norm = a_next.norm();
        if !(norm > 0.5 && norm < 1.5) || !w_next.iter().all(|x| x.is_finite()) {
            return Err(DynamicsError::StepRejected {
                t,
                reason: format!("cannot restore |alpha| = 1 from |alpha| = {norm:.6e}"),
            });
        }
        a = a_next / norm;
        let err = (a.norm() - 1.0).abs();
        if err > cfg.tau_orth {
            return Err(DynamicsError::StepRejected {
                t,
                reason: format!("|alpha| error {err:.3e} after renormalization"),
            });
        }
        w = w_next;
        if n % cfg.stride == 0 {
            out.push(sample(sys, t, None, w, a, err, area));
        }
    }
    Ok(out)
}

/// Closed time interval selecting trajectory samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    pub fn all() -> Self {
        TimeWindow {
            start: f64::NEG_INFINITY,
            end: f64::INFINITY,
        }
    }

    pub fn new(start: f64, end: f64) -> Self {
        TimeWindow { start, end }
    }

    fn select<'a>(&self, traj: &'a [TrajectoryPoint]) -> Result<&'a [TrajectoryPoint], DynamicsError> {
        let lo = traj.partition_point(|p| p.t < self.start);
        let hi = traj.partition_point(|p| p.t <= self.end);
        let slice = &traj[lo..hi.max(lo)];
        if slice.len() < 3 {
            return Err(DynamicsError::WindowTooShort { samples: slice.len() });
        }
        Ok(slice)
    }
}

fn central_difference_max(
    traj: &[TrajectoryPoint],
    value: impl Fn(&TrajectoryPoint) -> f64,
    reference: impl Fn(&TrajectoryPoint) -> f64,
) -> f64 {
    traj.windows(3)
        .map(|w| {
            let rate = (value(&w[2]) - value(&w[0])) / (w[2].t - w[0].t);
            (rate - reference(&w[1])).abs()
        })
        .fold(0.0, f64::max)
}

fn kappa_at(sys: &GyroSystem, p: &TrajectoryPoint) -> Vector3<f64> {
    match &p.attitude {
        Some(q) => sys.kappa.coefficients_at(q),
        None => sys.kappa.coefficients_at_alpha(&p.alpha),
    }
}

/// Largest gap between the central-difference rate of `G̃ = 𝐀ω·α` and the
/// predicted rate `(α × k)·ω` over the samples in `window`. Decays as the
/// square of the sample spacing.
pub fn lemma1_residual(
    sys: &GyroSystem,
    traj: &[TrajectoryPoint],
    window: TimeWindow,
) -> Result<f64, DynamicsError> {
    let pts = window.select(traj)?;
    Ok(central_difference_max(
        pts,
        |p| momentum_about_axis(&sys.inertia, &p.omega, &p.alpha),
        |p| p.alpha.cross(&kappa_at(sys, p)).dot(&p.omega),
    ))
}

/// Largest central-difference rate of `G = 𝐀ω·α + f(α)` over `window`.
pub fn area_rate_residual(
    sys: &GyroSystem,
    traj: &[TrajectoryPoint],
    f: &SphereScalarField,
    window: TimeWindow,
) -> Result<f64, DynamicsError> {
    let pts = window.select(traj)?;
    Ok(central_difference_max(
        pts,
        |p| momentum_about_axis(&sys.inertia, &p.omega, &p.alpha) + f.value(&p.alpha),
        |_| 0.0,
    ))
}

/// Least-squares slope of `log(error)` against `log(step)`.
pub fn convergence_order(steps: &[f64], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .zip(errors)
        .map(|(h, e)| (h.ln(), e.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Largest `|x(t) − x(0)|` of a sampled quantity.
pub fn max_drift(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let Some(first) = it.next() else { return 0.0 };
    it.map(|v| (v - first).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{InvariantTwoForm, SphereScalarField};
    use crate::so3::{Axis, RotationSampler};
    use approx::assert_abs_diff_eq;

    fn system(a: [f64; 3], potential: SphereScalarField, kappa: InvariantTwoForm) -> GyroSystem {
        GyroSystem::new("test", InertiaTensor::new(a[0], a[1], a[2]).unwrap(), potential, kappa).unwrap()
    }

    fn free(a: [f64; 3]) -> GyroSystem {
        system(a, SphereScalarField::zero(), InvariantTwoForm::zero())
    }

    #[test]
    fn inertia_validation() {
        assert!(InertiaTensor::new(1.0, 0.0, 1.0).is_err());
        assert!(InertiaTensor::new(-1.0, 1.0, 1.0).is_err());
        let t = InertiaTensor::new(1.0, 1.0, 5.0).unwrap();
        assert!(!t.satisfies_triangle_inequalities());
        assert!(InertiaTensor::new(1.0, 2.0, 3.0).unwrap().satisfies_triangle_inequalities());
    }

    #[test]
    fn non_closed_kappa_is_rejected() {
        let k = InvariantTwoForm::from_sphere([
            SphereScalarField::coordinate(Axis::Y),
            SphereScalarField::zero(),
            SphereScalarField::zero(),
        ]);
        let r = GyroSystem::new("bad", InertiaTensor::new(1.0, 1.0, 1.0).unwrap(), SphereScalarField::zero(), k);
        assert!(matches!(r, Err(DynamicsError::NotClosed { .. })));
    }

    #[test]
    fn euler_equation_examples() {
        let q = RotationMatrix::identity();
        let (wd, _) = equations_rhs(&free([1.0; 3]), &BodyState::new(q, Vector3::new(0.3, -2.0, 1.1)));
        assert_eq!(wd, Vector3::zeros());
        let (wd, _) = equations_rhs(&free([1.0, 2.0, 3.0]), &BodyState::new(q, Vector3::new(1.0, 1.0, 1.0)));
        assert_abs_diff_eq!(wd, Vector3::new(-1.0, 1.0, -1.0 / 3.0), epsilon = 1e-15);
        // gyrostat: ω̇ = k × ω
        let c = 0.7;
        let sys = system([1.0; 3], SphereScalarField::zero(), InvariantTwoForm::constant(Vector3::new(0.0, 0.0, c)));
        let (wd, _) = equations_rhs(&sys, &BodyState::new(q, Vector3::new(0.4, 0.9, 0.0)));
        assert_abs_diff_eq!(wd, Vector3::new(-c * 0.9, c * 0.4, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn potential_torque_is_alpha_cross_gradient() {
        let sys = system([1.0, 1.0, 2.0], SphereScalarField::coordinate(Axis::Z), InvariantTwoForm::zero());
        let mut s = RotationSampler::new(4);
        let q = s.sample();
        let (wd, _) = equations_rhs(&sys, &BodyState::new(q, Vector3::zeros()));
        let m = q.alpha().cross(&Vector3::z());
        assert_abs_diff_eq!(wd, Vector3::new(m.x, m.y, m.z / 2.0), epsilon = 1e-15);
    }

    #[test]
    fn attitude_rate_reproduces_poisson_equations() {
        let sys = free([1.0, 2.0, 3.0]);
        let mut s = RotationSampler::new(5);
        for _ in 0..10 {
            let state = BodyState::new(s.sample(), s.sample().alpha() * 2.0);
            let (_, qd) = equations_rhs(&sys, &state);
            let rows = poisson_row_rates(&state);
            for (r, row) in rows.iter().enumerate() {
                assert_abs_diff_eq!(qd.row(r).transpose(), *row, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn energy_examples() {
        let q = RotationMatrix::identity();
        let sys = free([1.0, 2.0, 3.0]);
        assert_eq!(energy(&sys, &BodyState::new(q, Vector3::zeros())), 0.0);
        assert_eq!(energy(&sys, &BodyState::new(q, Vector3::new(1.0, 1.0, 1.0))), 3.0);
        assert_eq!(area_integral(&sys, &BodyState::new(q, Vector3::zeros()), &SphereScalarField::zero()), 0.0);
    }

    #[test]
    fn principal_axis_spin_is_equilibrium() {
        let sys = free([1.0, 2.0, 3.0]);
        let cfg = IntegratorConfig {
            t_end: 5.0,
            method: Method::Rk4Projected,
            ..Default::default()
        };
        let traj = integrate(&sys, &BodyState::new(RotationMatrix::identity(), Vector3::x()), &cfg, None).unwrap();
        for p in &traj {
            assert_eq!(p.omega, Vector3::x());
        }
    }

    #[test]
    fn gyrostat_circle_matches_closed_form() {
        let c = 0.5;
        let sys = system([1.0; 3], SphereScalarField::zero(), InvariantTwoForm::constant(Vector3::new(0.0, 0.0, c)));
        let w0 = Vector3::new(0.8, -0.3, 0.0);
        let cfg = IntegratorConfig {
            t_end: 10.0,
            ..Default::default()
        };
        let traj = integrate(&sys, &BodyState::new(RotationMatrix::identity(), w0), &cfg, None).unwrap();
        for p in &traj {
            let (s, co) = (c * p.t).sin_cos();
            let expected = Vector3::new(co * w0.x - s * w0.y, s * w0.x + co * w0.y, 0.0);
            assert!((p.omega - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn gyroscopic_forces_do_no_work() {
        let kappa = InvariantTwoForm::from_sphere([
            SphereScalarField::coordinate(Axis::X),
            SphereScalarField::coordinate(Axis::Y),
            SphereScalarField::coordinate(Axis::Z),
        ]);
        let sys = system([1.0, 2.0, 3.0], SphereScalarField::zero(), kappa);
        let q = RotationSampler::new(6).sample();
        let traj = integrate(&sys, &BodyState::new(q, Vector3::new(0.5, -0.4, 0.9)), &IntegratorConfig::default(), None)
            .unwrap();
        let drift = max_drift(traj.iter().map(|p| kinetic_energy(&sys.inertia, &p.omega)));
        assert!(drift < 1e-10, "{drift}");
    }

    #[test]
    fn full_and_reduced_paths_agree() {
        let sys = system(
            [1.0, 1.5, 2.0],
            SphereScalarField::coordinate(Axis::Z),
            InvariantTwoForm::constant(Vector3::new(0.1, 0.0, 0.5)),
        );
        let init = BodyState::new(RotationSampler::new(7).sample(), Vector3::new(0.3, 1.0, -0.5));
        let mut cfg = IntegratorConfig {
            t_end: 10.0,
            ..Default::default()
        };
        let reduced = integrate(&sys, &init, &cfg, None).unwrap();
        cfg.method = Method::Rk4Projected;
        let full = integrate(&sys, &init, &cfg, None).unwrap();
        assert_eq!(reduced.len(), full.len());
        for (a, b) in reduced.iter().zip(&full) {
            assert!((a.alpha - b.alpha).norm() < 1e-6);
            assert!((a.omega - b.omega).norm() < 1e-6);
        }
    }

    #[test]
    fn reduced_rejects_attitude_dependent_kappa() {
        use crate::forms::ScalarField;
        let k = InvariantTwoForm::new([
            ScalarField::group("c", |_| 1.0),
            ScalarField::zero(),
            ScalarField::zero(),
        ]);
        let sys = GyroSystem::new_unchecked("q", InertiaTensor::new(1.0, 1.0, 1.0).unwrap(), SphereScalarField::zero(), k);
        let r = integrate(&sys, &BodyState::new(RotationMatrix::identity(), Vector3::x()), &IntegratorConfig::default(), None);
        assert!(matches!(r, Err(DynamicsError::NonInvariantData(_))));
    }

    #[test]
    fn config_validation() {
        let bad = IntegratorConfig {
            dt: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig {
            stride: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!("rk4-projected".parse::<Method>().unwrap(), Method::Rk4Projected);
        assert!("euler".parse::<Method>().is_err());
    }

    #[test]
    fn sampling_is_uniform_and_windows_check_length() {
        let sys = free([1.0, 2.0, 3.0]);
        let cfg = IntegratorConfig {
            dt: 0.01,
            t_end: 1.0,
            stride: 7,
            ..Default::default()
        };
        let traj = integrate(&sys, &BodyState::new(RotationMatrix::identity(), Vector3::y()), &cfg, None).unwrap();
        assert_eq!(traj.len(), 100 / 7 + 1);
        for (n, p) in traj.iter().enumerate() {
            assert!((p.t - n as f64 * 0.07).abs() < 1e-12);
        }
        let r = lemma1_residual(&sys, &traj, TimeWindow::new(0.0, 0.1));
        assert!(matches!(r, Err(DynamicsError::WindowTooShort { samples: 2 })));
    }

    #[test]
    fn free_body_invariants() {
        let sys = free([1.0, 2.0, 3.0]);
        let init = BodyState::new(RotationSampler::new(8).sample(), Vector3::new(0.7, 0.2, -0.5));
        let cfg = IntegratorConfig {
            t_end: 20.0,
            method: Method::Rk4Projected,
            ..Default::default()
        };
        let traj = integrate(&sys, &init, &cfg, Some(&SphereScalarField::zero())).unwrap();
        let h0 = traj[0].energy;
        let l0 = sys.inertia.apply(&traj[0].omega).norm();
        for p in &traj {
            assert!((p.energy - h0).abs() < 1e-9);
            assert!((sys.inertia.apply(&p.omega).norm() - l0).abs() < 1e-9);
            assert!((p.area.unwrap() - traj[0].area.unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_error_is_fourth_order() {
        let sys = system(
            [1.0, 1.5, 2.0],
            SphereScalarField::coordinate(Axis::Z),
            InvariantTwoForm::constant(Vector3::new(0.0, 0.3, 0.5)),
        );
        let init = BodyState::new(RotationSampler::new(9).sample(), Vector3::new(1.0, 2.0, -1.5));
        let dts = [2e-2, 1e-2, 5e-3];
        let drifts: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let cfg = IntegratorConfig {
                    dt,
                    t_end: 10.0,
                    stride: 1,
                    method: Method::Rk4Projected,
                    ..Default::default()
                };
                let traj = integrate(&sys, &init, &cfg, None).unwrap();
                max_drift(traj.iter().map(|p| p.energy))
            })
            .collect();
        let order = convergence_order(&dts, &drifts);
        assert!(order >= 3.8, "{drifts:?} -> {order}");
    }

    #[test]
    fn order_fit_recovers_power_law() {
        let hs = [0.1, 0.05, 0.025];
        let es: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        assert!((convergence_order(&hs, &es) - 2.0).abs() < 1e-12);
    }
}
