//! Exterior calculus in the left-invariant coframe `λ₁, λ₂, λ₃` on SO(3).
//!
//! Forms are stored by their coefficient functions in fixed bases:
//!
//! * 1-forms: `θ = c₁λ₁ + c₂λ₂ + c₃λ₃`;
//! * 2-forms: `κ = k₁·λ₃∧λ₂ + k₂·λ₁∧λ₃ + k₃·λ₂∧λ₁`.
//!
//! The 2-form basis is the one in which `dλ_i` is the i-th basis element and in
//! which `i_a κ` has coefficient vector `a × k`, so the gyroscopic force on a
//! body spinning with `ω` is `ω × k` in the Euler equations.
//!
//! The frame fields act on functions of the Poisson vector through
//! `Ω₁α = (0, α₃, −α₂)`, `Ω₂α = (−α₃, 0, α₁)`, `Ω₃α = (α₂, −α₁, 0)`, i.e.
//! `Ω_i F = (α × e_i)·∇F`. Only tangential combinations of ambient gradients are
//! ever used, so the radial part of a supplied gradient is irrelevant.

use crate::so3::{exp_so3, Axis, RotationMatrix};
use nalgebra::Vector3;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Allowed deviation of `|α|` from 1 for sphere-point arguments.
pub const SPHERE_TOLERANCE: f64 = 1e-9;
/// Relative step of the central-difference fallback gradient.
pub const FD_GRADIENT_STEP: f64 = 1e-6;
/// Step along frame flows for fields defined on the whole group.
pub const FD_FLOW_STEP: f64 = 1e-5;
/// Default closedness threshold for gyroscopic forms.
pub const TAU_CLOSED: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("point is off the unit sphere: |alpha| = {norm:.12}")]
    OffSphere { norm: f64 },
}

pub type SphereFn = Arc<dyn Fn(&Vector3<f64>) -> f64 + Send + Sync>;
pub type SphereGradientFn = Arc<dyn Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync>;
pub type GroupFn = Arc<dyn Fn(&RotationMatrix) -> f64 + Send + Sync>;

pub(crate) fn check_on_sphere(alpha: &Vector3<f64>) -> Result<(), FormError> {
    let norm = alpha.norm();
    if (norm - 1.0).abs() > SPHERE_TOLERANCE || !norm.is_finite() {
        return Err(FormError::OffSphere { norm });
    }
    Ok(())
}

/// Function of the Poisson vector `(α₁, α₂, α₃)`, with an optional analytic
/// ambient gradient.
///
/// Such functions are exactly the functions on SO(3) invariant under rotations
/// about the first space axis. The value callable is evaluated off the sphere
/// by the finite-difference fallback, so it should be a smooth ambient formula.
#[derive(Clone)]
pub struct SphereScalarField {
    name: String,
    value: SphereFn,
    gradient: Option<SphereGradientFn>,
}

impl fmt::Debug for SphereScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereScalarField")
            .field("name", &self.name)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl SphereScalarField {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&Vector3<f64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SphereScalarField {
            name: name.into(),
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn from_parts(name: impl Into<String>, value: SphereFn, gradient: Option<SphereGradientFn>) -> Self {
        SphereScalarField {
            name: name.into(),
            value,
            gradient,
        }
    }

    pub fn constant(c: f64) -> Self {
        SphereScalarField::new(format!("{c}"), move |_| c).with_gradient(|_| Vector3::zeros())
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `α_i`.
    pub fn coordinate(axis: Axis) -> Self {
        let i = axis.index();
        SphereScalarField::new(format!("a{}", i + 1), move |a| a[i]).with_gradient(move |_| axis.unit())
    }

    /// `c·α`.
    pub fn linear(c: Vector3<f64>) -> Self {
        SphereScalarField::new(format!("({}, {}, {})·a", c.x, c.y, c.z), move |a| c.dot(a))
            .with_gradient(move |_| c)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn value(&self, alpha: &Vector3<f64>) -> f64 {
        (self.value)(alpha)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// Ambient gradient: the analytic one when available, else central differences.
    pub fn gradient(&self, alpha: &Vector3<f64>) -> Vector3<f64> {
        match &self.gradient {
            Some(g) => g(alpha),
            None => self.fd_gradient(alpha),
        }
    }

    pub fn fd_gradient(&self, alpha: &Vector3<f64>) -> Vector3<f64> {
        let h = FD_GRADIENT_STEP * alpha.amax().max(1.0);
        let mut g = Vector3::zeros();
        for i in 0..3 {
            let mut p = *alpha;
            let mut m = *alpha;
            p[i] += h;
            m[i] -= h;
            g[i] = (self.value(&p) - self.value(&m)) / (2.0 * h);
        }
        g
    }

    /// `Ω_i F` at `alpha`, with no sphere check.
    pub fn frame_derivative_unchecked(&self, axis: Axis, alpha: &Vector3<f64>) -> f64 {
        alpha.cross(&axis.unit()).dot(&self.gradient(alpha))
    }

    /// All three frame derivatives, `∇F × α`.
    pub fn frame_gradient(&self, alpha: &Vector3<f64>) -> Vector3<f64> {
        self.gradient(alpha).cross(alpha)
    }

    /// Largest relative mismatch between the analytic gradient and central
    /// differences over `points`, or `None` when no analytic gradient is set.
    pub fn gradient_mismatch(&self, points: &[Vector3<f64>]) -> Option<f64> {
        let g = self.gradient.as_ref()?;
        Some(
            points
                .iter()
                .map(|p| {
                    let a = g(p);
                    let b = self.fd_gradient(p);
                    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
                })
                .fold(0.0, f64::max),
        )
    }
}

/// `(Ω_i F)(α)` from the frame-field table, requiring `|α| = 1`.
pub fn frame_derivative(field: &SphereScalarField, axis: Axis, alpha: &Vector3<f64>) -> Result<f64, FormError> {
    check_on_sphere(alpha)?;
    Ok(field.frame_derivative_unchecked(axis, alpha))
}

/// Value and frame derivatives of a field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub frame: Vector3<f64>,
}

type JetFn = Arc<dyn Fn(&[Jet], &Vector3<f64>) -> f64 + Send + Sync>;

/// Scalar function on SO(3): either a function of the Poisson vector alone or a
/// general function of the attitude.
#[derive(Clone)]
pub enum ScalarField {
    Sphere(SphereScalarField),
    Group { name: String, value: GroupFn },
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Sphere(s) => s.fmt(f),
            ScalarField::Group { name, .. } => f.debug_struct("GroupField").field("name", name).finish(),
        }
    }
}

impl From<SphereScalarField> for ScalarField {
    fn from(s: SphereScalarField) -> Self {
        ScalarField::Sphere(s)
    }
}

impl ScalarField {
    pub fn group(name: impl Into<String>, value: impl Fn(&RotationMatrix) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Group {
            name: name.into(),
            value: Arc::new(value),
        }
    }

    pub fn constant(c: f64) -> Self {
        SphereScalarField::constant(c).into()
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn name(&self) -> &str {
        match self {
            ScalarField::Sphere(s) => s.name(),
            ScalarField::Group { name, .. } => name,
        }
    }

    pub fn as_sphere(&self) -> Option<&SphereScalarField> {
        match self {
            ScalarField::Sphere(s) => Some(s),
            ScalarField::Group { .. } => None,
        }
    }

    /// True when the field is a function of α by construction.
    pub fn is_sphere(&self) -> bool {
        matches!(self, ScalarField::Sphere(_))
    }

    pub fn value_at(&self, q: &RotationMatrix) -> f64 {
        match self {
            ScalarField::Sphere(s) => s.value(&q.alpha()),
            ScalarField::Group { value, .. } => value(q),
        }
    }

    /// Value at any attitude with first row `alpha`. Exact for sphere fields;
    /// for group fields the canonical completion of `alpha` is used.
    pub fn value_at_alpha(&self, alpha: &Vector3<f64>) -> f64 {
        match self {
            ScalarField::Sphere(s) => s.value(alpha),
            ScalarField::Group { value, .. } => value(&completion(alpha)),
        }
    }

    /// `(Ω_i g)(Q)`; central differences along `Q·exp(t·hat(e_i))` for group fields.
    pub fn frame_derivative_at(&self, axis: Axis, q: &RotationMatrix) -> f64 {
        match self {
            ScalarField::Sphere(s) => s.frame_derivative_unchecked(axis, &q.alpha()),
            ScalarField::Group { value, .. } => {
                let h = FD_FLOW_STEP;
                let step = exp_so3(&(axis.unit() * h));
                let back = step.transpose();
                let p = RotationMatrix::from_matrix_unchecked(q.matrix() * step);
                let m = RotationMatrix::from_matrix_unchecked(q.matrix() * back);
                (value(&p) - value(&m)) / (2.0 * h)
            }
        }
    }

    pub fn frame_gradient_at(&self, q: &RotationMatrix) -> Vector3<f64> {
        match self {
            ScalarField::Sphere(s) => s.frame_gradient(&q.alpha()),
            _ => Vector3::from_fn(|i, _| self.frame_derivative_at(Axis::ALL[i], q)),
        }
    }

    /// Derivative along the symmetry generator `v = Σ α_i Ω_i`.
    pub fn symmetry_derivative_at(&self, q: &RotationMatrix) -> f64 {
        match self {
            // v·α = α × α = 0
            ScalarField::Sphere(_) => 0.0,
            _ => q.alpha().dot(&self.frame_gradient_at(q)),
        }
    }

    fn jet_sphere(s: &SphereScalarField, alpha: &Vector3<f64>, derivatives: bool) -> Jet {
        Jet {
            value: s.value(alpha),
            frame: if derivatives {
                s.frame_gradient(alpha)
            } else {
                Vector3::zeros()
            },
        }
    }

    fn jet_at(&self, q: &RotationMatrix, derivatives: bool) -> Jet {
        match self {
            ScalarField::Sphere(s) => Self::jet_sphere(s, &q.alpha(), derivatives),
            _ => Jet {
                value: self.value_at(q),
                frame: if derivatives {
                    self.frame_gradient_at(q)
                } else {
                    Vector3::zeros()
                },
            },
        }
    }

    /// Builds a field pointwise from the jets of `inputs` and the Poisson vector.
    /// The result is a sphere field when every input is one.
    pub fn from_jets(
        name: impl Into<String>,
        inputs: Vec<ScalarField>,
        derivatives: bool,
        f: impl Fn(&[Jet], &Vector3<f64>) -> f64 + Send + Sync + 'static,
    ) -> ScalarField {
        let f: JetFn = Arc::new(f);
        let name = name.into();
        if let Some(spheres) = inputs.iter().map(|x| x.as_sphere().cloned()).collect::<Option<Vec<_>>>() {
            let value = move |a: &Vector3<f64>| {
                let jets: Vec<Jet> = spheres.iter().map(|s| Self::jet_sphere(s, a, derivatives)).collect();
                f(&jets, a)
            };
            ScalarField::Sphere(SphereScalarField::new(name, value))
        } else {
            let value = move |q: &RotationMatrix| {
                let jets: Vec<Jet> = inputs.iter().map(|s| s.jet_at(q, derivatives)).collect();
                f(&jets, &q.alpha())
            };
            ScalarField::group(name, value)
        }
    }
}

fn completion(alpha: &Vector3<f64>) -> RotationMatrix {
    RotationMatrix::complete_from_alpha(alpha).unwrap_or_else(|_| RotationMatrix::identity())
}

/// `θ = c₁λ₁ + c₂λ₂ + c₃λ₃`.
#[derive(Clone, Debug)]
pub struct InvariantOneForm {
    pub coefficients: [ScalarField; 3],
}

/// `κ = k₁·λ₃∧λ₂ + k₂·λ₁∧λ₃ + k₃·λ₂∧λ₁`.
#[derive(Clone, Debug)]
pub struct InvariantTwoForm {
    pub coefficients: [ScalarField; 3],
}

fn eval3(fields: &[ScalarField; 3], q: &RotationMatrix) -> Vector3<f64> {
    Vector3::new(fields[0].value_at(q), fields[1].value_at(q), fields[2].value_at(q))
}

fn eval3_alpha(fields: &[ScalarField; 3], alpha: &Vector3<f64>) -> Vector3<f64> {
    if fields.iter().all(ScalarField::is_sphere) {
        Vector3::from_fn(|i, _| fields[i].value_at_alpha(alpha))
    } else {
        eval3(fields, &completion(alpha))
    }
}

impl InvariantOneForm {
    pub fn new(c: [ScalarField; 3]) -> Self {
        InvariantOneForm { coefficients: c }
    }

    pub fn from_sphere(c: [SphereScalarField; 3]) -> Self {
        let [a, b, c] = c;
        Self::new([a.into(), b.into(), c.into()])
    }

    pub fn zero() -> Self {
        Self::new([ScalarField::zero(), ScalarField::zero(), ScalarField::zero()])
    }

    /// The coframe form `λ_i`.
    pub fn basis(axis: Axis) -> Self {
        let e = axis.unit();
        Self::new([
            ScalarField::constant(e.x),
            ScalarField::constant(e.y),
            ScalarField::constant(e.z),
        ])
    }

    pub fn coefficients_at(&self, q: &RotationMatrix) -> Vector3<f64> {
        eval3(&self.coefficients, q)
    }

    pub fn coefficients_at_alpha(&self, alpha: &Vector3<f64>) -> Vector3<f64> {
        eval3_alpha(&self.coefficients, alpha)
    }

    /// `θ(a)` for a vector with coframe components `a`.
    pub fn pair(&self, q: &RotationMatrix, a: &Vector3<f64>) -> f64 {
        self.coefficients_at(q).dot(a)
    }

    pub fn is_sphere(&self) -> bool {
        self.coefficients.iter().all(ScalarField::is_sphere)
    }
}

impl InvariantTwoForm {
    pub fn new(k: [ScalarField; 3]) -> Self {
        InvariantTwoForm { coefficients: k }
    }

    pub fn from_sphere(k: [SphereScalarField; 3]) -> Self {
        let [a, b, c] = k;
        Self::new([a.into(), b.into(), c.into()])
    }

    pub fn zero() -> Self {
        Self::new([ScalarField::zero(), ScalarField::zero(), ScalarField::zero()])
    }

    /// Constant coefficient vector (the gyrostat case).
    pub fn constant(k: Vector3<f64>) -> Self {
        Self::new([
            ScalarField::constant(k.x),
            ScalarField::constant(k.y),
            ScalarField::constant(k.z),
        ])
    }

    pub fn coefficients_at(&self, q: &RotationMatrix) -> Vector3<f64> {
        eval3(&self.coefficients, q)
    }

    pub fn coefficients_at_alpha(&self, alpha: &Vector3<f64>) -> Vector3<f64> {
        eval3_alpha(&self.coefficients, alpha)
    }

    /// `κ(a, b) = k·(b × a)` for vectors with coframe components `a`, `b`.
    pub fn evaluate(&self, q: &RotationMatrix, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        self.coefficients_at(q).dot(&b.cross(a))
    }

    pub fn is_sphere(&self) -> bool {
        self.coefficients.iter().all(ScalarField::is_sphere)
    }

    pub fn sphere_coefficients(&self) -> Option<[SphereScalarField; 3]> {
        Some([
            self.coefficients[0].as_sphere()?.clone(),
            self.coefficients[1].as_sphere()?.clone(),
            self.coefficients[2].as_sphere()?.clone(),
        ])
    }
}

/// Coframe components of the vector field fed to an interior product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameComponents {
    /// A left-invariant field `Σ a_i Ω_i` with constant `a`.
    Constant(Vector3<f64>),
    /// The symmetry generator `v = Q·hat(α)`, whose components are `α`.
    SymmetryGenerator,
}

impl FrameComponents {
    fn at(&self, alpha: &Vector3<f64>) -> Vector3<f64> {
        match self {
            FrameComponents::Constant(a) => *a,
            FrameComponents::SymmetryGenerator => *alpha,
        }
    }
}

/// `dF = Σ (Ω_i F) λ_i`.
pub fn exterior_derivative_scalar(f: &ScalarField) -> InvariantOneForm {
    let c = Axis::ALL.map(|axis| {
        ScalarField::from_jets(
            format!("Omega{} {}", axis.index() + 1, f.name()),
            vec![f.clone()],
            true,
            move |j, _| j[0].frame[axis.index()],
        )
    });
    InvariantOneForm::new(c)
}

/// `dθ` via `d(c_i λ_i) = dc_i ∧ λ_i + c_i dλ_i` with `dλ₁ = λ₃∧λ₂` and cyclic:
/// `k₁ = Ω₃c₂ − Ω₂c₃ + c₁` and cyclic.
pub fn exterior_derivative_oneform(theta: &InvariantOneForm) -> InvariantTwoForm {
    let inputs: Vec<ScalarField> = theta.coefficients.to_vec();
    let k = Axis::ALL.map(|axis| {
        let i = axis.index();
        let j = axis.next().index();
        let l = axis.next().next().index();
        ScalarField::from_jets(format!("d(theta)_{}", i + 1), inputs.clone(), true, move |c, _| {
            c[j].frame[l] - c[l].frame[j] + c[i].value
        })
    });
    InvariantTwoForm::new(k)
}

/// `i_a κ`: coefficient vector `a × k`.
pub fn interior_product(kappa: &InvariantTwoForm, a: FrameComponents) -> InvariantOneForm {
    let inputs: Vec<ScalarField> = kappa.coefficients.to_vec();
    let c = Axis::ALL.map(|axis| {
        let i = axis.index();
        ScalarField::from_jets(format!("i(kappa)_{}", i + 1), inputs.clone(), false, move |k, alpha| {
            let kv = Vector3::new(k[0].value, k[1].value, k[2].value);
            a.at(alpha).cross(&kv)[i]
        })
    });
    InvariantOneForm::new(c)
}

/// `i_a θ = a·c`.
pub fn interior_product_oneform(theta: &InvariantOneForm, a: FrameComponents) -> ScalarField {
    ScalarField::from_jets("i(theta)", theta.coefficients.to_vec(), false, move |c, alpha| {
        a.at(alpha).dot(&Vector3::new(c[0].value, c[1].value, c[2].value))
    })
}

/// The closedness residual `Ω₁k₁ + Ω₂k₂ + Ω₃k₃` at `q`; `dκ = −(residual)·λ₁∧λ₂∧λ₃`.
pub fn closedness_residual_at(kappa: &InvariantTwoForm, q: &RotationMatrix) -> f64 {
    Axis::ALL
        .iter()
        .map(|&axis| kappa.coefficients[axis.index()].frame_derivative_at(axis, q))
        .sum()
}

/// Closedness residual at a sphere point; group coefficients are evaluated at
/// the canonical completion of `alpha`.
pub fn closedness_residual(kappa: &InvariantTwoForm, alpha: &Vector3<f64>) -> Result<f64, FormError> {
    check_on_sphere(alpha)?;
    if let Some(k) = kappa.sphere_coefficients() {
        Ok(Axis::ALL
            .iter()
            .map(|&axis| k[axis.index()].frame_derivative_unchecked(axis, alpha))
            .sum())
    } else {
        Ok(closedness_residual_at(kappa, &completion(alpha)))
    }
}

/// Independent route for α-only coefficients: `−α·(∇ × k)` from ambient gradients.
/// Returns `None` when a coefficient depends on more than α.
pub fn curl_closedness_residual(kappa: &InvariantTwoForm, alpha: &Vector3<f64>) -> Option<f64> {
    let k = kappa.sphere_coefficients()?;
    let g = [k[0].gradient(alpha), k[1].gradient(alpha), k[2].gradient(alpha)];
    // g[i][j] = ∂k_i/∂α_j
    let curl = Vector3::new(g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]);
    Some(-alpha.dot(&curl))
}

/// Quasi-uniform points on the unit sphere (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Rotations used for closedness screening: completions of a Fibonacci set,
/// each also turned about the first space axis so that coefficients depending
/// on the full attitude are probed.
pub fn standard_check_rotations() -> Vec<RotationMatrix> {
    let mut out = vec![];
    for a in fibonacci_sphere(128) {
        let q = completion(&a);
        for tau in [0.0, 2.1, 4.3] {
            out.push(crate::so3::symmetry_action(tau, &q));
        }
    }
    out
}

/// Worst closedness residual over [`standard_check_rotations`], with the
/// attitude where it occurs.
pub fn max_closedness_residual(kappa: &InvariantTwoForm) -> (f64, RotationMatrix) {
    let rotations = if kappa.is_sphere() {
        fibonacci_sphere(256).iter().map(completion).collect()
    } else {
        standard_check_rotations()
    };
    rotations
        .into_iter()
        .map(|q| (closedness_residual_at(kappa, &q).abs(), q))
        .fold((0.0, RotationMatrix::identity()), |acc, x| if x.0 > acc.0 || x.0.is_nan() { x } else { acc })
}

/// `L_v θ = d(i_v θ) + i_v dθ` along the symmetry generator.
pub fn lie_derivative_oneform(theta: &InvariantOneForm) -> InvariantOneForm {
    let v = FrameComponents::SymmetryGenerator;
    let d_iv = exterior_derivative_scalar(&interior_product_oneform(theta, v));
    let iv_d = interior_product(&exterior_derivative_oneform(theta), v);
    add_oneforms(&d_iv, &iv_d)
}

/// `L_v κ = d(i_v κ) + i_v dκ`, where `i_v dκ` has coefficient vector `ρ·α`
/// with `ρ` the closedness residual.
pub fn lie_derivative_twoform(kappa: &InvariantTwoForm) -> InvariantTwoForm {
    let d_iv = exterior_derivative_oneform(&interior_product(kappa, FrameComponents::SymmetryGenerator));
    let rho = ScalarField::from_jets("rho", kappa.coefficients.to_vec(), true, |j, _| {
        j[0].frame[0] + j[1].frame[1] + j[2].frame[2]
    });
    let k = Axis::ALL.map(|axis| {
        let i = axis.index();
        ScalarField::from_jets(
            format!("L_v(kappa)_{}", i + 1),
            vec![d_iv.coefficients[i].clone(), rho.clone()],
            false,
            move |j, alpha| j[0].value + j[1].value * alpha[i],
        )
    });
    InvariantTwoForm::new(k)
}

fn add_oneforms(a: &InvariantOneForm, b: &InvariantOneForm) -> InvariantOneForm {
    let c = Axis::ALL.map(|axis| {
        let i = axis.index();
        ScalarField::from_jets(
            format!("{} + {}", a.coefficients[i].name(), b.coefficients[i].name()),
            vec![a.coefficients[i].clone(), b.coefficients[i].clone()],
            false,
            |j, _| j[0].value + j[1].value,
        )
    });
    InvariantOneForm::new(c)
}
