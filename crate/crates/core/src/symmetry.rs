//! Invariance tests for the rotation group about the first space axis, the
//! decomposition `k = F·α + ∇f` of invariant gyroscopic coefficients, and the
//! involution test for candidate first integrals.
//!
//! Exactness of the tangential part `k_t = k − (k·α)α` on the Poisson sphere
//! is detected through circulations on a latitude–longitude mesh. Colatitude
//! `θ` is measured from the north pole `α = e₃` and longitude `φ` from the
//! `α₁` axis; a parallel is traversed with increasing `φ`.

use crate::forms::{
    interior_product, max_closedness_residual, FrameComponents, InvariantTwoForm, ScalarField, SphereScalarField,
    TAU_CLOSED,
};
use crate::poly::{f_alpha_plus_gradient_components, monomials, Polynomial};
use crate::so3::{symmetry_action, RotationMatrix, RotationSampler};
use nalgebra::{DMatrix, Vector3};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Invariance threshold for analytic fields.
pub const TAU_INV: f64 = 1e-9;
/// Cell circulation allowed per unit enclosed area.
pub const TAU_CIRC: f64 = 1e-7;
/// Allowed `|(k − ∇f) × α|` on the verification points.
pub const TAU_DEC: f64 = 1e-6;
/// Samples used when checking coefficients for invariance.
pub const INVARIANCE_SAMPLES: usize = 256;

/// Quadrature panels along a meridian when evaluating the reconstructed `f`.
const F_PANELS: usize = 32;
const SAMPLING_SEED: u64 = 0x5eed_0fa1;
const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("coefficient {component} is not invariant: deviation {deviation:.3e}")]
    NotInvariant { component: usize, deviation: f64 },
    #[error("grid {n_lat}x{n_lon} is too coarse near the poles (need at least 4x8)")]
    PoleSingular { n_lat: usize, n_lon: usize },
    #[error("gyroscopic form is not closed: residual {residual:.3e}")]
    NotClosed { residual: f64 },
}

/// Gauss–Legendre quadrature of `g` over `[a, b]` split into `pieces` panels.
fn quadrature(a: f64, b: f64, pieces: usize, g: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / pieces as f64;
    let mut sum = 0.0;
    for p in 0..pieces {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
            sum += w * g(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// Unit vector at colatitude `theta`, longitude `phi`.
pub fn spherical_point(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

/// `(θ, φ)` of a nonzero vector, with `φ ∈ [0, 2π)`.
pub fn spherical_coordinates(x: &Vector3<f64>) -> (f64, f64) {
    let rho = x.x.hypot(x.y);
    let theta = rho.atan2(x.z);
    let phi = x.y.atan2(x.x).rem_euclid(TAU);
    (theta, phi)
}

fn d_theta(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(ct * cp, ct * sp, -st)
}

fn d_phi(theta: f64, phi: f64) -> Vector3<f64> {
    let st = theta.sin();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(-st * sp, st * cp, 0.0)
}

type VectorField = Arc<dyn Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync>;

/// `∫ v·dα` along the meridian `φ` from colatitude `t0` to `t1`.
fn meridian_integral(v: &VectorField, phi: f64, t0: f64, t1: f64, pieces: usize) -> f64 {
    quadrature(t0, t1, pieces, |t| v(&spherical_point(t, phi)).dot(&d_theta(t, phi)))
}

/// `∫ v·dα` along the parallel `θ` from longitude `p0` to `p1`.
fn parallel_integral(v: &VectorField, theta: f64, p0: f64, p1: f64, pieces: usize) -> f64 {
    quadrature(p0, p1, pieces, |p| v(&spherical_point(theta, p)).dot(&d_phi(theta, p)))
}

/// `∮ v·dα` around the full parallel at colatitude `theta`, increasing `φ`.
pub fn latitude_circulation(v: impl Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync + 'static, theta: f64) -> f64 {
    let v: VectorField = Arc::new(v);
    parallel_integral(&v, theta, 0.0, TAU, 64)
}

/// Latitude–longitude mesh with `n_lat` bands and `n_lon` sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereGrid {
    pub n_lat: usize,
    pub n_lon: usize,
}

impl Default for SphereGrid {
    fn default() -> Self {
        SphereGrid { n_lat: 180, n_lon: 360 }
    }
}

impl SphereGrid {
    pub fn new(n_lat: usize, n_lon: usize) -> Self {
        SphereGrid { n_lat, n_lon }
    }

    pub fn theta(&self, i: usize) -> f64 {
        PI * i as f64 / self.n_lat as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_lon as f64
    }

    /// Node `(i, j)`; row 0 is the north pole and row `n_lat` the south pole.
    pub fn node(&self, i: usize, j: usize) -> Vector3<f64> {
        spherical_point(self.theta(i), self.phi(j))
    }

    fn validate(&self) -> Result<(), SymmetryError> {
        if self.n_lat < 4 || self.n_lon < 8 {
            return Err(SymmetryError::PoleSingular {
                n_lat: self.n_lat,
                n_lon: self.n_lon,
            });
        }
        Ok(())
    }
}

/// Largest `|field(ψ^τ Q) − field(Q)|` over `samples` seeded random `(Q, τ)`.
pub fn check_psi_invariance(field: impl Fn(&RotationMatrix) -> f64, samples: usize) -> f64 {
    let mut s = RotationSampler::new(SAMPLING_SEED);
    (0..samples.max(1))
        .map(|_| {
            let q = s.sample();
            let tau = s.rng().random_range(0.0..TAU);
            (field(&symmetry_action(tau, &q)) - field(&q)).abs()
        })
        .fold(0.0, f64::max)
}

/// Coefficients as functions of α, after certifying invariance of any
/// coefficient given on the full group.
fn sphere_coefficients(kappa: &InvariantTwoForm) -> Result<[SphereScalarField; 3], SymmetryError> {
    if let Some(k) = kappa.sphere_coefficients() {
        return Ok(k);
    }
    let mut out = Vec::with_capacity(3);
    for (i, c) in kappa.coefficients.iter().enumerate() {
        if let Some(s) = c.as_sphere() {
            out.push(s.clone());
            continue;
        }
        let deviation = check_psi_invariance(|q| c.value_at(q), INVARIANCE_SAMPLES);
        if !(deviation <= TAU_INV) {
            return Err(SymmetryError::NotInvariant { component: i + 1, deviation });
        }
        let c = c.clone();
        out.push(SphereScalarField::new(c.name().to_string(), move |a| {
            match RotationMatrix::complete_from_alpha(&a.normalize()) {
                Ok(q) => c.value_at(&q),
                Err(_) => f64::NAN,
            }
        }));
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

fn vector_field(k: [SphereScalarField; 3]) -> VectorField {
    Arc::new(move |a| Vector3::new(k[0].value(a), k[1].value(a), k[2].value(a)))
}

fn tangential(k: VectorField) -> VectorField {
    Arc::new(move |a| {
        let v = k(a);
        v - a * v.dot(a)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Exists,
    Fails,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Exists => "exists",
            Verdict::Fails => "fails",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionOptions {
    pub grid: SphereGrid,
    pub tau_circ: f64,
    pub tau_dec: f64,
    /// Random points on which `(k − ∇f) × α` is checked.
    pub verify_points: usize,
    pub seed: u64,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        DecompositionOptions {
            grid: SphereGrid::default(),
            tau_circ: TAU_CIRC,
            tau_dec: TAU_DEC,
            verify_points: 128,
            seed: SAMPLING_SEED,
        }
    }
}

impl DecompositionOptions {
    pub fn with_grid(grid: SphereGrid) -> Self {
        DecompositionOptions {
            grid,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub verdict: Verdict,
    /// Radial part `F = k·α`.
    pub big_f: SphereScalarField,
    /// Meridian reconstruction from the north pole, `f(e₃) = 0`, extended
    /// radially as a constant. A potential only when the verdict is `Exists`.
    pub f: SphereScalarField,
    /// Largest absolute circulation over mesh cells and parallels.
    pub max_circulation: f64,
    /// Largest circulation per unit enclosed area; exceeds `tau_circ` on `Fails`.
    pub max_circulation_density: f64,
    /// `max |(k − ∇f) × α|` on the verification points; computed when the
    /// circulation test passes.
    pub residual: Option<f64>,
    /// Largest gap at mesh nodes between reconstructions from the north and the
    /// south pole.
    pub path_discrepancy: f64,
    pub grid: SphereGrid,
    f_nodes: Vec<f64>,
}

impl DecompositionResult {
    pub fn exists(&self) -> bool {
        self.verdict == Verdict::Exists
    }

    /// The certified potential `f`, if any.
    pub fn potential(&self) -> Option<&SphereScalarField> {
        self.exists().then_some(&self.f)
    }

    /// Reconstructed `f` at mesh node `(i, j)`, `0 ≤ i ≤ n_lat`, `0 ≤ j < n_lon`.
    pub fn f_at_node(&self, i: usize, j: usize) -> f64 {
        self.f_nodes[i * self.grid.n_lon + j]
    }

    /// `(α, f(α))` at every mesh node, one entry per pole.
    pub fn f_table(&self) -> Vec<(Vector3<f64>, f64)> {
        let g = self.grid;
        let mut out = vec![(g.node(0, 0), self.f_at_node(0, 0))];
        for i in 1..g.n_lat {
            for j in 0..g.n_lon {
                out.push((g.node(i, j), self.f_at_node(i, j)));
            }
        }
        out.push((g.node(g.n_lat, 0), self.f_at_node(g.n_lat, 0)));
        out
    }
}

/// Splits `k` into `F·α` and a tangential gradient, or reports the circulation
/// that rules a gradient out.
///
/// `F = k·α`; `k_t = k − Fα` is tested for exactness by cell circulations
/// (Gauss–Legendre per edge, pole cells as triangles) and by the circulation
/// of every parallel. `f` is then integrated down meridians from the north
/// pole and checked against `k` at random points.
pub fn decompose_kappa(
    kappa: &InvariantTwoForm,
    options: &DecompositionOptions,
) -> Result<DecompositionResult, SymmetryError> {
    let k = sphere_coefficients(kappa)?;
    decompose_field(vector_field(k), options)
}

fn decompose_field(full: VectorField, options: &DecompositionOptions) -> Result<DecompositionResult, SymmetryError> {
    let grid = options.grid;
    grid.validate()?;
    let (n_lat, n_lon) = (grid.n_lat, grid.n_lon);
    let kt = tangential(full.clone());

    let radial = full.clone();
    let big_f = SphereScalarField::new("F", move |a| radial(a).dot(a));

    let dphi = TAU / n_lon as f64;
    // meridian[i][j]: from θ_i to θ_{i+1} along φ_j
    let meridian: Vec<f64> = (0..n_lat)
        .into_par_iter()
        .flat_map_iter(|i| {
            let kt = kt.clone();
            (0..n_lon).map(move |j| meridian_integral(&kt, grid.phi(j), grid.theta(i), grid.theta(i + 1), 1))
        })
        .collect();
    // parallel[i][j]: from φ_j to φ_{j+1} along θ_i; rows 0 and n_lat are poles
    let parallel: Vec<f64> = (0..=n_lat)
        .into_par_iter()
        .flat_map_iter(|i| {
            let kt = kt.clone();
            (0..n_lon).map(move |j| {
                if i == 0 || i == n_lat {
                    0.0
                } else {
                    parallel_integral(&kt, grid.theta(i), grid.phi(j), grid.phi(j + 1), 1)
                }
            })
        })
        .collect();
    let m = |i: usize, j: usize| meridian[i * n_lon + j % n_lon];
    let p = |i: usize, j: usize| parallel[i * n_lon + j];

    let mut max_abs: f64 = 0.0;
    let mut max_density: f64 = 0.0;
    for i in 0..n_lat {
        let area = (grid.theta(i).cos() - grid.theta(i + 1).cos()) * dphi;
        for j in 0..n_lon {
            let circ = m(i, j) + p(i + 1, j) - m(i, j + 1) - p(i, j);
            max_abs = max_abs.max(circ.abs());
            max_density = max_density.max(circ.abs() / area);
        }
    }
    for i in 1..n_lat {
        let circ: f64 = (0..n_lon).map(|j| p(i, j)).sum();
        let c = grid.theta(i).cos();
        let cap = TAU * (1.0 - c).min(1.0 + c);
        max_abs = max_abs.max(circ.abs());
        max_density = max_density.max(circ.abs() / cap);
    }
    if max_abs.is_nan() {
        max_abs = f64::INFINITY;
        max_density = f64::INFINITY;
    }

    let mut f_nodes = vec![0.0; (n_lat + 1) * n_lon];
    for j in 0..n_lon {
        for i in 0..n_lat {
            f_nodes[(i + 1) * n_lon + j] = f_nodes[i * n_lon + j] + m(i, j);
        }
    }
    let south = f_nodes[n_lat * n_lon];
    let mut path_discrepancy: f64 = 0.0;
    for j in 0..n_lon {
        let mut from_south = south;
        for i in (0..=n_lat).rev() {
            if i < n_lat {
                from_south -= m(i, j);
            }
            path_discrepancy = path_discrepancy.max((from_south - f_nodes[i * n_lon + j]).abs());
        }
    }

    let fkt = kt.clone();
    let f = SphereScalarField::new("f", move |x| {
        let (theta, phi) = spherical_coordinates(x);
        meridian_integral(&fkt, phi, 0.0, theta, F_PANELS)
    });

    let circulation_ok = max_density <= options.tau_circ;
    let residual = circulation_ok.then(|| verify_gradient(&full, &f, options));
    let verdict = match residual {
        Some(r) if r <= options.tau_dec => Verdict::Exists,
        _ => Verdict::Fails,
    };
    Ok(DecompositionResult {
        verdict,
        big_f,
        f,
        max_circulation: max_abs,
        max_circulation_density: max_density,
        residual,
        path_discrepancy,
        grid,
        f_nodes,
    })
}

/// `max |(k − ∇f) × α|` over seeded random points, with `∇f` from central
/// differences of the radially constant extension of `f`.
fn verify_gradient(k: &VectorField, f: &SphereScalarField, options: &DecompositionOptions) -> f64 {
    let mut s = RotationSampler::new(options.seed);
    let points: Vec<Vector3<f64>> = (0..options.verify_points).map(|_| s.sphere_point()).collect();
    let h = 1e-5;
    points
        .par_iter()
        .map(|a| {
            let mut g = Vector3::zeros();
            for i in 0..3 {
                let mut e = Vector3::zeros();
                e[i] = h;
                g[i] = (f.value(&(a + e)) - f.value(&(a - e))) / (2.0 * h);
            }
            (k(a) - g).cross(a).norm()
        })
        .reduce(|| 0.0, f64::max)
}

/// Exactness of `i_vκ` for the symmetry generator `v`.
///
/// `i_vκ` has coefficients `c = α × k`, whose tangential companion `c × α` is
/// `k_t`; the verdict is that of [`decompose_kappa`] applied to `k_t`, which
/// makes the two exactness conditions literally the same test. The returned
/// `F` is the radial part of the original `k`.
pub fn exactness_verdict(
    kappa: &InvariantTwoForm,
    options: &DecompositionOptions,
) -> Result<DecompositionResult, SymmetryError> {
    let (residual, _) = max_closedness_residual(kappa);
    if !(residual <= TAU_CLOSED) {
        return Err(SymmetryError::NotClosed { residual });
    }
    let k = sphere_coefficients(kappa)?;
    let invariant = InvariantTwoForm::from_sphere(k.clone());
    let iv = interior_product(&invariant, FrameComponents::SymmetryGenerator);
    let c: Vec<SphereScalarField> = iv
        .coefficients
        .iter()
        .map(|x| x.as_sphere().cloned().expect("interior product of sphere fields"))
        .collect();
    let c = vector_field([c[0].clone(), c[1].clone(), c[2].clone()]);
    let mut result = decompose_field(Arc::new(move |a| c(a).cross(a)), options)?;
    let full = vector_field(k);
    result.big_f = SphereScalarField::new("F", move |a| full(a).dot(a));
    Ok(result)
}

/// A function of `(Q, ω)`.
pub type PhaseFunction = Arc<dyn Fn(&RotationMatrix, &Vector3<f64>) -> f64 + Send + Sync>;

/// Largest `|K(ψ^τ Q, ω) − K(Q, ω)|` over seeded random `(Q, ω, τ)`; the lifted
/// action leaves body components of ω unchanged. `K` is in involution with
/// `G` exactly when this vanishes.
pub fn involution_check(k: impl Fn(&RotationMatrix, &Vector3<f64>) -> f64, samples: usize) -> f64 {
    let mut s = RotationSampler::new(SAMPLING_SEED ^ 0x1);
    (0..samples.max(1))
        .map(|_| {
            let q = s.sample();
            let rng = s.rng();
            let w = Vector3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let tau = rng.random_range(0.0..TAU);
            (k(&symmetry_action(tau, &q), &w) - k(&q, &w)).abs()
        })
        .fold(0.0, f64::max)
}

/// An invariant `K` rewritten in the reduced variables `(α, ω)`: it is
/// evaluated at the canonical attitude with first row `α`, which differs from
/// any other such attitude by the symmetry action.
pub fn reduce_to_alpha(k: PhaseFunction) -> impl Fn(&Vector3<f64>, &Vector3<f64>) -> f64 {
    move |alpha, omega| match RotationMatrix::complete_from_alpha(alpha) {
        Ok(q) => k(&q, omega),
        Err(_) => f64::NAN,
    }
}

/// `{K, G} = v_T K` by central differences along the lifted symmetry flow with
/// parameter step `h`, at attitude `q` and body rate `omega`.
pub fn poisson_bracket_fd(
    k: &dyn Fn(&RotationMatrix, &Vector3<f64>) -> f64,
    q: &RotationMatrix,
    omega: &Vector3<f64>,
    h: f64,
) -> f64 {
    (k(&symmetry_action(h, q), omega) - k(&symmetry_action(-h, q), omega)) / (2.0 * h)
}

/// Random `(F, f)` with `κ = F·α + ∇f`.
#[derive(Debug, Clone)]
pub struct FAlphaPlusGradient {
    pub big_f: Polynomial,
    pub f: Polynomial,
    pub components: [Polynomial; 3],
}

impl FAlphaPlusGradient {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_degree: u32, scale: f64) -> Self {
        let big_f = Polynomial::random(rng, max_degree, scale);
        let f = Polynomial::random(rng, max_degree, scale);
        let components = f_alpha_plus_gradient_components(&big_f, &f);
        FAlphaPlusGradient { big_f, f, components }
    }

    pub fn kappa(&self) -> InvariantTwoForm {
        let c = &self.components;
        InvariantTwoForm::from_sphere([c[0].to_field("k1"), c[1].to_field("k2"), c[2].to_field("k3")])
    }
}

/// One nullspace direction examined by [`search_closed_counterexample`].
#[derive(Debug, Clone)]
pub struct SearchCandidate {
    pub components: [Polynomial; 3],
    pub closedness: f64,
    pub max_circulation: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct CounterexampleSearch {
    pub max_degree: u32,
    pub basis_size: usize,
    pub candidates: Vec<SearchCandidate>,
}

impl CounterexampleSearch {
    /// The first closed candidate whose decomposition fails.
    pub fn found(&self) -> Option<&SearchCandidate> {
        self.candidates
            .iter()
            .find(|c| c.verdict == Verdict::Fails && c.closedness <= TAU_CLOSED)
    }

    /// Largest circulation among the closed candidates.
    pub fn max_circulation(&self) -> f64 {
        self.candidates.iter().map(|c| c.max_circulation).fold(0.0, f64::max)
    }
}

/// Brute-force search for polynomial `k` of degree ≤ `max_degree` that is
/// closed on the sphere but whose tangential part is not a gradient.
///
/// Closedness `Σ (∇k_i × α)_i = 0` is linear in the coefficients; it is imposed
/// at Fibonacci points and the nullspace of the collocation matrix is taken
/// from its SVD. Every nullspace direction is decomposed on `grid`.
pub fn search_closed_counterexample(max_degree: u32, grid: SphereGrid) -> Result<CounterexampleSearch, SymmetryError> {
    let monos = monomials(max_degree);
    let basis: Vec<(usize, [u32; 3])> = (0..3).flat_map(|i| monos.iter().map(move |e| (i, *e))).collect();
    let points = crate::forms::fibonacci_sphere(4 * basis.len() + 64);
    let mut a = DMatrix::zeros(points.len(), basis.len());
    for (r, x) in points.iter().enumerate() {
        for (c, (i, e)) in basis.iter().enumerate() {
            let g = Polynomial::from_terms([(*e, 1.0)]).gradient(x);
            a[(r, c)] = g.cross(x)[*i];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    let tol = 1e-10 * smax.max(1.0);
    let mut candidates = vec![];
    let opts = DecompositionOptions::with_grid(grid);
    for (idx, sigma) in svd.singular_values.iter().enumerate() {
        if *sigma > tol {
            continue;
        }
        let row = v_t.row(idx);
        let mut terms: [Vec<([u32; 3], f64)>; 3] = [vec![], vec![], vec![]];
        for (c, (i, e)) in basis.iter().enumerate() {
            if row[c].abs() > 1e-14 {
                terms[*i].push((*e, row[c]));
            }
        }
        let components = terms.map(Polynomial::from_terms);
        candidates.push(examine(components, &opts)?);
    }
    // directions with zero singular value beyond the matrix rank
    for idx in svd.singular_values.len()..basis.len() {
        let row = v_t.row(idx);
        let mut terms: [Vec<([u32; 3], f64)>; 3] = [vec![], vec![], vec![]];
        for (c, (i, e)) in basis.iter().enumerate() {
            terms[*i].push((*e, row[c]));
        }
        candidates.push(examine(terms.map(Polynomial::from_terms), &opts)?);
    }
    Ok(CounterexampleSearch {
        max_degree,
        basis_size: basis.len(),
        candidates,
    })
}

fn examine(components: [Polynomial; 3], opts: &DecompositionOptions) -> Result<SearchCandidate, SymmetryError> {
    let kappa = InvariantTwoForm::from_sphere([
        components[0].to_field("k1"),
        components[1].to_field("k2"),
        components[2].to_field("k3"),
    ]);
    let (closedness, _) = max_closedness_residual(&kappa);
    let r = decompose_kappa(&kappa, opts)?;
    Ok(SearchCandidate {
        components,
        closedness,
        max_circulation: r.max_circulation,
        verdict: r.verdict,
    })
}

/// Least-squares fit `f ≈ c·α + c₀` over the mesh nodes; returns `(c, c₀, max
/// misfit)`.
pub fn fit_linear(result: &DecompositionResult) -> (Vector3<f64>, f64, f64) {
    let table = result.f_table();
    let mut a = DMatrix::zeros(table.len(), 4);
    let mut b = nalgebra::DVector::zeros(table.len());
    for (r, (x, f)) in table.iter().enumerate() {
        a[(r, 0)] = x.x;
        a[(r, 1)] = x.y;
        a[(r, 2)] = x.z;
        a[(r, 3)] = 1.0;
        b[r] = *f;
    }
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| nalgebra::DVector::zeros(4));
    let misfit = (a * &sol - b).amax();
    (Vector3::new(sol[0], sol[1], sol[2]), sol[3], misfit)
}

/// [`check_psi_invariance`] of a scalar field with the default sample count.
pub fn scalar_field_deviation(field: &ScalarField) -> f64 {
    check_psi_invariance(|q| field.value_at(q), INVARIANCE_SAMPLES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{kinetic_energy, InertiaTensor};
    use crate::so3::Axis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coarse() -> DecompositionOptions {
        DecompositionOptions::with_grid(SphereGrid::new(60, 120))
    }

    fn rotational() -> InvariantTwoForm {
        InvariantTwoForm::from_sphere([
            SphereScalarField::new("-a2", |a| -a.y),
            SphereScalarField::coordinate(Axis::X),
            SphereScalarField::zero(),
        ])
    }

    #[test]
    fn quadrature_is_exact_for_degree_nine() {
        let v = quadrature(0.0, 2.0, 1, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-11);
    }

    #[test]
    fn invariance_examples() {
        assert!(check_psi_invariance(|q| q.alpha().z, 1000) < 1e-12);
        assert!(check_psi_invariance(|q| q.row(1).x, 1000) > 0.1);
        assert_eq!(check_psi_invariance(|_| 2.5, 10), 0.0);
    }

    #[test]
    fn spherical_coordinates_round_trip() {
        let mut s = RotationSampler::new(1);
        for _ in 0..100 {
            let a = s.sphere_point();
            let (t, p) = spherical_coordinates(&a);
            assert!((spherical_point(t, p) - a).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_kappa_gives_linear_potential() {
        let c = Vector3::new(0.3, -0.2, 0.5);
        let r = decompose_kappa(&InvariantTwoForm::constant(c), &coarse()).unwrap();
        assert!(r.exists());
        assert!(r.residual.unwrap() < 1e-8);
        let mut s = RotationSampler::new(2);
        for _ in 0..50 {
            let a = s.sphere_point();
            assert!((r.f.value(&a) - (c.dot(&a) - c.z)).abs() < 1e-10);
            assert!((r.big_f.value(&a) - c.dot(&a)).abs() < 1e-15);
        }
        let (lin, c0, misfit) = fit_linear(&r);
        assert!((lin - c).norm() < 1e-9 && (c0 + c.z).abs() < 1e-9 && misfit < 1e-9);
    }

    #[test]
    fn radial_kappa_has_constant_potential() {
        let g = |a: &Vector3<f64>| 1.0 + a.x * a.y;
        let kappa = InvariantTwoForm::from_sphere([0, 1, 2].map(|i| SphereScalarField::new("k", move |a| g(a) * a[i])));
        let r = decompose_kappa(&kappa, &coarse()).unwrap();
        assert!(r.exists());
        assert!(r.max_circulation < 1e-12);
        for (_, f) in r.f_table() {
            assert!(f.abs() < 1e-12);
        }
        let a = Vector3::new(0.6, 0.0, 0.8);
        assert!((r.big_f.value(&a) - g(&a)).abs() < 1e-15);
    }

    #[test]
    fn rotational_field_fails_with_analytic_circulation() {
        let r = decompose_kappa(&rotational(), &coarse()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!((r.max_circulation - TAU).abs() < 1e-9);
        assert!(r.residual.is_none());
        for theta in [0.3, 1.0, PI / 2.0, 2.5] {
            let c = latitude_circulation(|a| Vector3::new(-a.y, a.x, 0.0), theta);
            assert!((c - TAU * theta.sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let r = decompose_kappa(&InvariantTwoForm::zero(), &DecompositionOptions::with_grid(SphereGrid::new(2, 4)));
        assert!(matches!(r, Err(SymmetryError::PoleSingular { .. })));
    }

    #[test]
    fn attitude_dependent_coefficients_are_rejected() {
        let k = InvariantTwoForm::new([ScalarField::group("b1", |q| q.row(1).x), ScalarField::zero(), ScalarField::zero()]);
        assert!(matches!(
            decompose_kappa(&k, &coarse()),
            Err(SymmetryError::NotInvariant { component: 1, .. })
        ));
        // α-only data written on the group is accepted
        let k = InvariantTwoForm::new([ScalarField::zero(), ScalarField::zero(), ScalarField::group("c", |_| 0.5)]);
        assert!(decompose_kappa(&k, &coarse()).unwrap().exists());
    }

    #[test]
    fn random_f_alpha_plus_gradient_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2 {
            let sample = FAlphaPlusGradient::random(&mut rng, 3, 1.0);
            let r = decompose_kappa(&sample.kappa(), &coarse()).unwrap();
            assert!(r.exists(), "{:?}", r.max_circulation_density);
            assert!(r.residual.unwrap() < 1e-6);
            let north = sample.f.eval(&Vector3::z());
            let g = r.grid;
            for i in (0..=g.n_lat).step_by(7) {
                for j in (0..g.n_lon).step_by(11) {
                    let expect = sample.f.eval(&g.node(i, j)) - north;
                    assert!((r.f_at_node(i, j) - expect).abs() < 1e-9);
                }
            }
            assert!(r.path_discrepancy < 1e-9);
        }
    }

    #[test]
    fn exactness_verdict_cases() {
        assert!(exactness_verdict(&InvariantTwoForm::zero(), &coarse()).unwrap().exists());
        let gyro = exactness_verdict(&InvariantTwoForm::constant(Vector3::new(0.0, 0.0, 0.5)), &coarse()).unwrap();
        assert!(gyro.exists());
        let a = Vector3::new(0.0, 0.6, 0.8);
        assert!((gyro.f.value(&a) - 0.5 * (a.z - 1.0)).abs() < 1e-10);
        assert!((gyro.big_f.value(&a) - 0.4).abs() < 1e-15);
        assert!(matches!(
            exactness_verdict(&rotational(), &coarse()),
            Err(SymmetryError::NotClosed { .. })
        ));
    }

    #[test]
    fn closed_polynomial_fields_are_exact() {
        let search = search_closed_counterexample(1, SphereGrid::new(24, 48)).unwrap();
        assert_eq!(search.basis_size, 12);
        assert!(!search.candidates.is_empty());
        assert!(search.found().is_none());
    }

    #[test]
    fn involution_examples() {
        let inertia = InertiaTensor::new(1.0, 2.0, 3.0).unwrap();
        let h = move |q: &RotationMatrix, w: &Vector3<f64>| kinetic_energy(&inertia, w) + q.alpha().z;
        let g = move |q: &RotationMatrix, w: &Vector3<f64>| inertia.apply(w).dot(&q.alpha());
        assert!(involution_check(h, 2000) < 1e-12);
        assert!(involution_check(g, 2000) < 1e-12);
        assert!(involution_check(|_, w| w.x * w.x, 100) == 0.0);
        assert!(involution_check(|q, w| w.x * q.row(1).y, 2000) > 0.05);
    }

    #[test]
    fn bracket_converges_to_flow_derivative() {
        let k = |q: &RotationMatrix, w: &Vector3<f64>| w.x * q.row(1).y;
        let q = RotationSampler::new(3).sample();
        let w = Vector3::new(1.0, 0.5, -0.2);
        // d/dτ row1(ψ^τ Q) at τ = 0: rows 1, 2 rotate as (c r1 − s r2, s r1 + c r2)
        let exact = -w.x * q.row(2).y;
        let e1 = (poisson_bracket_fd(&k, &q, &w, 0.1) - exact).abs();
        let e2 = (poisson_bracket_fd(&k, &q, &w, 0.05) - exact).abs();
        assert!((e1 / e2 - 4.0).abs() < 0.05);
    }

    #[test]
    fn reduced_observable_agrees_for_invariant_functions() {
        let k: PhaseFunction = Arc::new(|q, w| w.dot(&q.alpha()) + q.alpha().z.powi(2));
        let reduced = reduce_to_alpha(k.clone());
        let mut s = RotationSampler::new(4);
        for _ in 0..20 {
            let q = s.sample();
            let w = Vector3::new(0.1, 0.2, 0.3);
            assert!((reduced(&q.alpha(), &w) - k(&q, &w)).abs() < 1e-12);
        }
    }
}
