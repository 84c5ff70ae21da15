//! Rotation-group primitives.
//!
//! An attitude is stored as a 3×3 matrix whose rows are the space-fixed axes
//! expressed in body coordinates. The first row `α` is the Poisson vector; the
//! second and third rows are written `α′` and `α″` in the docs. Equivalently the
//! columns are the body axes expressed in the space frame, so `Q` maps body
//! coordinates to space coordinates. Readers used to the transposed convention
//! (rows = body axes) should replace `Q` by `Qᵀ` throughout.
//!
//! With `hat(v)·u = v × u` the motion of the body reads `dQ/dt = Q·hat(ω)`,
//! where `ω` is the angular velocity in body components, and each row obeys
//! `dr/dt = r × ω`.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::ops::Mul;
use thiserror::Error;

/// Default orthonormality tolerance used when validating attitudes.
pub const TAU_ORTH: f64 = 1e-9;
/// Default tolerance for `‖S + Sᵀ‖` when a matrix must be skew.
pub const TAU_SKEW: f64 = 1e-9;
/// Iteration cap for the polar orthonormalization.
pub const PROJECTION_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum So3Error {
    #[error("matrix is not a rotation: orthonormality error {error:.3e}, determinant {det:.12}")]
    NotOrthonormal { error: f64, det: f64 },
    #[error("matrix is not skew-symmetric: |S + S^T| = {asymmetry:.3e}")]
    NotSkew { asymmetry: f64 },
    #[error("vector is not tangent to SO(3) at Q: |Q^T V + V^T Q| = {asymmetry:.3e}")]
    NotTangent { asymmetry: f64 },
    #[error("cannot project onto SO(3): {0}")]
    Degenerate(String),
}

/// Body-fixed axis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }

    pub fn unit(self) -> Vector3<f64> {
        let mut e = Vector3::zeros();
        e[self.index()] = 1.0;
        e
    }

    /// The next axis in the cyclic order X → Y → Z → X.
    pub fn next(self) -> Axis {
        Axis::ALL[(self.index() + 1) % 3]
    }
}

/// `hat(v)·u = v × u`.
pub fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`], rejecting matrices that are not skew within [`TAU_SKEW`].
pub fn vee(s: &Matrix3<f64>) -> Result<Vector3<f64>, So3Error> {
    vee_with_tolerance(s, TAU_SKEW)
}

pub fn vee_with_tolerance(s: &Matrix3<f64>, tol: f64) -> Result<Vector3<f64>, So3Error> {
    let asymmetry = (s + s.transpose()).norm();
    if asymmetry > tol || !asymmetry.is_finite() {
        return Err(So3Error::NotSkew { asymmetry });
    }
    Ok(skew_part_vector(s))
}

/// Vector of the skew part of `s`, without any check.
fn skew_part_vector(s: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (s[(2, 1)] - s[(1, 2)]),
        0.5 * (s[(0, 2)] - s[(2, 0)]),
        0.5 * (s[(1, 0)] - s[(0, 1)]),
    )
}

/// `exp(hat(v))` by the Rodrigues formula.
pub fn exp_so3(v: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = v.norm_squared();
    let k = hat(v);
    let (a, b) = if theta2 < 1e-12 {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        let theta = theta2.sqrt();
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Matrix3::identity() + k * a + k * k * b
}

/// Rotation matrix of an attitude.
#[derive(Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl fmt::Debug for RotationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RotationMatrix(")?;
        for r in 0..3 {
            write!(
                f,
                "[{:.6}, {:.6}, {:.6}]{}",
                self.0[(r, 0)],
                self.0[(r, 1)],
                self.0[(r, 2)],
                if r < 2 { ", " } else { "" }
            )?;
        }
        write!(f, ")")
    }
}

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Matrix3::identity())
    }

    /// Validates `m` against [`TAU_ORTH`].
    pub fn new(m: Matrix3<f64>) -> Result<Self, So3Error> {
        Self::with_tolerance(m, TAU_ORTH)
    }

    pub fn with_tolerance(m: Matrix3<f64>, tol: f64) -> Result<Self, So3Error> {
        let error = orthonormality_error(&m);
        let det = m.determinant();
        if error > tol || (det - 1.0).abs() > tol || !error.is_finite() {
            return Err(So3Error::NotOrthonormal { error, det });
        }
        Ok(RotationMatrix(m))
    }

    /// Row-major construction from nine entries `[α₁, α₂, α₃, α′₁, …, α″₃]`.
    pub fn from_row_slice(entries: &[f64; 9]) -> Result<Self, So3Error> {
        Self::new(Matrix3::from_row_slice(entries))
    }

    /// Wraps `m` without validation. Intended for integrator internals that
    /// project and validate right after.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        RotationMatrix(m)
    }

    /// `exp(hat(v))`.
    pub fn exp(v: &Vector3<f64>) -> Self {
        RotationMatrix(exp_so3(v))
    }

    /// Canonical attitude whose first row is `alpha` (normalized).
    ///
    /// The second row is the unit vector orthogonal to `alpha` obtained from the
    /// coordinate axis least aligned with it; the third completes a right-handed
    /// frame. Any other completion differs by [`symmetry_action`].
    pub fn complete_from_alpha(alpha: &Vector3<f64>) -> Result<Self, So3Error> {
        let n = alpha.norm();
        if !(n > 1e-12) || !n.is_finite() {
            return Err(So3Error::Degenerate(format!(
                "cannot complete a frame from |alpha| = {n:.3e}"
            )));
        }
        let a = alpha / n;
        let pick = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
            Vector3::x()
        } else if a.y.abs() <= a.z.abs() {
            Vector3::y()
        } else {
            Vector3::z()
        };
        let b = (pick - a * a.dot(&pick)).normalize();
        let c = a.cross(&b);
        Ok(RotationMatrix(Matrix3::from_rows(&[
            a.transpose(),
            b.transpose(),
            c.transpose(),
        ])))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix3<f64> {
        self.0
    }

    /// Row `i` (0 = α, 1 = α′, 2 = α″) as a column vector.
    pub fn row(&self, i: usize) -> Vector3<f64> {
        self.0.row(i).transpose()
    }

    /// The Poisson vector α (first row).
    pub fn alpha(&self) -> Vector3<f64> {
        self.row(0)
    }

    pub fn rows(&self) -> [Vector3<f64>; 3] {
        [self.row(0), self.row(1), self.row(2)]
    }

    pub fn transpose(&self) -> RotationMatrix {
        RotationMatrix(self.0.transpose())
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

/// Max-entry norm of `MᵀM − I`.
pub fn orthonormality_error(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).amax()
}

/// Attitude plus body-frame angular velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub q: RotationMatrix,
    pub omega: Vector3<f64>,
}

impl BodyState {
    pub fn new(q: RotationMatrix, omega: Vector3<f64>) -> Self {
        BodyState { q, omega }
    }
}

/// The frame fields `Ω₁, Ω₂, Ω₃` at `Q`, as matrices in the nine-component
/// ambient representation. `Ω_i` rotates every row `r` by `r ↦ r × e_i`.
pub fn frame_fields(q: &RotationMatrix) -> [Matrix3<f64>; 3] {
    let m = q.matrix();
    let mut out = [Matrix3::zeros(); 3];
    for r in 0..3 {
        let (a1, a2, a3) = (m[(r, 0)], m[(r, 1)], m[(r, 2)]);
        // Ω₁ = a3 ∂/∂a2 − a2 ∂/∂a3
        out[0][(r, 1)] = a3;
        out[0][(r, 2)] = -a2;
        // Ω₂ = a1 ∂/∂a3 − a3 ∂/∂a1
        out[1][(r, 2)] = a1;
        out[1][(r, 0)] = -a3;
        // Ω₃ = a2 ∂/∂a1 − a1 ∂/∂a2
        out[2][(r, 0)] = a2;
        out[2][(r, 1)] = -a1;
    }
    out
}

/// Evaluates the coframe `λ₁, λ₂, λ₃` on the ambient tangent vector `v` at `q`.
///
/// For the velocity of a motion this returns the body angular velocity.
pub fn coframe_eval(q: &RotationMatrix, v: &Matrix3<f64>) -> Result<Vector3<f64>, So3Error> {
    let m = q.matrix();
    let s = m.transpose() * v;
    let asymmetry = (s + s.transpose()).norm();
    if asymmetry > TAU_SKEW || !asymmetry.is_finite() {
        return Err(So3Error::NotTangent { asymmetry });
    }
    let mut lambda = Vector3::zeros();
    for r in 0..3 {
        // λ₁ = Σ a3 da2, λ₂ = Σ a1 da3, λ₃ = Σ a2 da1 over the three rows
        lambda.x += m[(r, 2)] * v[(r, 1)];
        lambda.y += m[(r, 0)] * v[(r, 2)];
        lambda.z += m[(r, 1)] * v[(r, 0)];
    }
    Ok(lambda)
}

/// `exp(τ·hat(e₁))`: rotation by `tau` about the first space axis.
pub fn space_axis_rotation(tau: f64) -> Matrix3<f64> {
    let (s, c) = tau.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// The symmetry group: rotation of the body about the first space-fixed axis,
/// `Q ↦ exp(τ·hat(e₁))·Q`. The Poisson vector α is left untouched.
pub fn symmetry_action(tau: f64, q: &RotationMatrix) -> RotationMatrix {
    RotationMatrix(space_axis_rotation(tau) * q.matrix())
}

/// Generating field of [`symmetry_action`]: `v(Q) = Q·hat(α)`.
pub fn symmetry_generator(q: &RotationMatrix) -> Matrix3<f64> {
    q.matrix() * hat(&q.alpha())
}

/// Nearest rotation to `m` (polar factor).
///
/// Uses the Newton–Schulz style iteration `M ← M(3I − MᵀM)/2`, falling back to
/// an SVD-based polar decomposition when the iteration stalls.
pub fn project_to_so3(m: &Matrix3<f64>) -> Result<RotationMatrix, So3Error> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(So3Error::Degenerate("non-finite entries".into()));
    }
    let det = m.determinant();
    let scale = m.amax();
    if scale == 0.0 || det.abs() <= 1e-12 * scale.powi(3) {
        return Err(So3Error::Degenerate(format!("singular matrix (det = {det:.3e})")));
    }
    if det < 0.0 {
        return Err(So3Error::Degenerate(format!(
            "negative determinant {det:.3e}: no nearby rotation"
        )));
    }

    let mut x = *m;
    let three = Matrix3::identity() * 3.0;
    for _ in 0..PROJECTION_MAX_ITERS {
        let err = orthonormality_error(&x);
        if err <= 4.0 * f64::EPSILON {
            return Ok(RotationMatrix(x));
        }
        if err > 1.0 {
            // outside the convergence basin
            break;
        }
        x = x * (three - x.transpose() * x) * 0.5;
    }
    if orthonormality_error(&x) <= 1e-14 {
        return Ok(RotationMatrix(x));
    }
    polar_by_svd(m)
}

fn polar_by_svd(m: &Matrix3<f64>) -> Result<RotationMatrix, So3Error> {
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(So3Error::Degenerate("SVD did not converge".into())),
    };
    let r = u * v_t;
    if r.determinant() <= 0.0 {
        return Err(So3Error::Degenerate("polar factor is a reflection".into()));
    }
    Ok(RotationMatrix(r))
}

/// Haar-uniform rotation from a normalized Gaussian 4-vector.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> RotationMatrix {
    loop {
        let w: f64 = rng.sample(StandardNormal);
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        let q = Quaternion::new(w, x, y, z);
        if q.norm() > 1e-8 {
            let u = UnitQuaternion::from_quaternion(q);
            return RotationMatrix(u.to_rotation_matrix().into_inner());
        }
    }
}

/// Seeded source of Haar-random rotations.
#[derive(Debug, Clone)]
pub struct RotationSampler {
    rng: ChaCha8Rng,
}

impl RotationSampler {
    pub fn new(seed: u64) -> Self {
        RotationSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self) -> RotationMatrix {
        random_rotation(&mut self.rng)
    }

    /// Uniform point on the unit sphere.
    pub fn sphere_point(&mut self) -> Vector3<f64> {
        self.sample().alpha()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl Iterator for RotationSampler {
    type Item = RotationMatrix;

    fn next(&mut self) -> Option<RotationMatrix> {
        Some(self.sample())
    }
}
