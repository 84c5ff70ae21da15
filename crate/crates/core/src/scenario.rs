//! Scenario files: TOML descriptions of a system, its initial state and the
//! integrator settings.
//!
//! ```toml
//! name = "gyrostat"
//! inertia = [1.0, 1.5, 2.0]
//! potential = "a3"
//! kappa = { constant = [0.0, 0.0, 0.5] }
//!
//! [initial]
//! alpha = [0.6, 0.0, 0.8]
//! omega = [0.4, -0.3, 1.0]
//!
//! [integrator]
//! method = "rk4-projected"
//! dt = 1e-3
//! t_end = 100.0
//! ```
//!
//! `kappa` is one of `{ constant = [..] }`, `{ expressions = ["..", "..", ".."] }`
//! or `{ f_alpha_plus_gradient = { degree = 2, scale = 0.5 } }`; the last draws random
//! polynomials `F`, `f` from `seed` and uses `k = F·α + ∇f`. The initial
//! attitude is either `q` (nine numbers, row-major) or `alpha` with an optional
//! angle `psi` about the first space axis. The formal schema lives in
//! `scenarios/scenario.schema.json`.

use crate::dynamics::{DynamicsError, GyroSystem, InertiaTensor, IntegratorConfig, Method};
use crate::expr::{ExprError, Expression};
use crate::forms::{max_closedness_residual, InvariantTwoForm, SphereScalarField, TAU_CLOSED};
use crate::so3::{symmetry_action, BodyState, RotationMatrix, TAU_ORTH};
use crate::symmetry::FAlphaPlusGradient;
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable naming a directory searched for `<name>.toml`.
pub const SCENARIO_DIR_ENV: &str = "GYROSYM_SCENARIO_DIR";

const BUILTINS: &[(&str, &str)] = &[
    ("free-body", include_str!("../scenarios/free-body.toml")),
    ("spherical-free-body", include_str!("../scenarios/spherical-free-body.toml")),
    ("lagrange-top", include_str!("../scenarios/lagrange-top.toml")),
    ("gyrostat", include_str!("../scenarios/gyrostat.toml")),
    ("f-alpha-plus-gradient", include_str!("../scenarios/f-alpha-plus-gradient.toml")),
    ("rotational-kappa", include_str!("../scenarios/rotational-kappa.toml")),
    ("principal-axis-spin", include_str!("../scenarios/principal-axis-spin.toml")),
];

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid {field}: {message}")]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("validation error: {0}")]
    Validation(#[from] ValidationError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no scenario file or built-in named '{0}'")]
    NotFound(String),
}

fn invalid(field: &str, message: impl Into<String>) -> ValidationError {
    ValidationError {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaSpec {
    Constant([f64; 3]),
    Expressions([String; 3]),
    FAlphaPlusGradient { degree: u32, scale: f64 },
}

impl Default for KappaSpec {
    fn default() -> Self {
        KappaSpec::Constant([0.0; 3])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<[f64; 9]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub psi: f64,
    pub omega: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            method: Method::default(),
            dt: default_dt(),
            t_end: default_t_end(),
            stride: default_stride(),
        }
    }
}

fn default_dt() -> f64 {
    1e-3
}

fn default_t_end() -> f64 {
    10.0
}

fn default_stride() -> usize {
    10
}

fn default_potential() -> String {
    "0".into()
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

fn is_zero_u64(x: &u64) -> bool {
    *x == 0
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_empty(s: &str) -> bool {
    s.is_empty()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "is_empty")]
    pub description: String,
    pub inertia: [f64; 3],
    #[serde(default = "default_potential")]
    pub potential: String,
    #[serde(default)]
    pub kappa: KappaSpec,
    /// Accept a non-closed `kappa`. The run is then a diagnostic of a
    /// non-Hamiltonian system.
    #[serde(default, skip_serializing_if = "is_false")]
    pub diagnostic_open_kappa: bool,
    #[serde(default, skip_serializing_if = "is_zero_u64")]
    pub seed: u64,
    pub initial: InitialSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Places an expression error inside the file, at the first occurrence of the
/// quoted expression.
fn expression_error(text: &str, field: &str, source: &str, e: ExprError) -> ScenarioError {
    if let Some(name) = e.unknown_identifier {
        return invalid(
            field,
            format!("'{name}' is not a Poisson-vector component; expressions may use a1, a2, a3 only"),
        )
        .into();
    }
    let quoted = format!("\"{source}\"");
    let (line, column) = match text.find(&quoted) {
        Some(at) => {
            let (l, c) = line_column(text, at);
            (l, c + e.column)
        }
        None => (0, e.column),
    };
    ParseError {
        line,
        column,
        message: format!("in {field}: {}", e.message),
    }
    .into()
}

/// Parses scenario text, including the syntax of every expression.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let spec: ScenarioSpec = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ParseError {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    Expression::parse(&spec.potential).map_err(|e| expression_error(text, "potential", &spec.potential, e))?;
    if let KappaSpec::Expressions(k) = &spec.kappa {
        for (i, src) in k.iter().enumerate() {
            Expression::parse(src).map_err(|e| expression_error(text, &format!("kappa[{i}]"), src, e))?;
        }
    }
    Ok(spec)
}

impl ScenarioSpec {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario specs always serialize")
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.integrator.dt,
            method: self.integrator.method,
            t_end: self.integrator.t_end,
            stride: self.integrator.stride,
            tau_orth: TAU_ORTH,
        }
    }

    /// Validates the spec and assembles the system.
    pub fn build(&self) -> Result<Scenario, ScenarioError> {
        let [a1, a2, a3] = self.inertia;
        let inertia = InertiaTensor::new(a1, a2, a3).map_err(|e| invalid("inertia", e.to_string()))?;
        let potential = Expression::parse(&self.potential)
            .map_err(|e| invalid("potential", e.to_string()))?
            .to_field(self.potential.clone());

        let mut generator = None;
        let kappa = match &self.kappa {
            KappaSpec::Constant(c) => InvariantTwoForm::constant(Vector3::from(*c)),
            KappaSpec::Expressions(k) => {
                let mut fields = Vec::with_capacity(3);
                for (i, src) in k.iter().enumerate() {
                    let e = Expression::parse(src).map_err(|e| invalid(&format!("kappa[{i}]"), e.to_string()))?;
                    fields.push(e.to_field(src.clone()));
                }
                InvariantTwoForm::from_sphere([fields[0].clone(), fields[1].clone(), fields[2].clone()])
            }
            KappaSpec::FAlphaPlusGradient { degree, scale } => {
                if *degree > 6 || !(scale.is_finite() && *scale > 0.0) {
                    return Err(invalid("kappa", "f_alpha_plus_gradient needs degree <= 6 and a positive scale").into());
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let sample = FAlphaPlusGradient::random(&mut rng, *degree, *scale);
                let kappa = sample.kappa();
                generator = Some(sample);
                kappa
            }
        };

        let (closedness, worst) = max_closedness_residual(&kappa);
        let system = if self.diagnostic_open_kappa {
            if closedness > TAU_CLOSED {
                log::warn!("{}: kappa is not closed (residual {closedness:.3e}); running as a diagnostic", self.name);
            }
            GyroSystem::new_unchecked(self.name.clone(), inertia, potential, kappa)
        } else {
            GyroSystem::new(self.name.clone(), inertia, potential, kappa).map_err(|e| match e {
                DynamicsError::NotClosed { residual, .. } => {
                    let a = worst.alpha();
                    invalid(
                        "kappa",
                        format!(
                            "not closed: residual {residual:.3e} at alpha = ({:.6}, {:.6}, {:.6}) exceeds {TAU_CLOSED:e}",
                            a.x, a.y, a.z
                        ),
                    )
                }
                other => invalid("kappa", other.to_string()),
            })?
        };

        let q = self.initial_attitude()?;
        let integrator = self.integrator_config();
        integrator.validate().map_err(|e| invalid("integrator", e.to_string()))?;
        Ok(Scenario {
            spec: self.clone(),
            system,
            initial: BodyState::new(q, Vector3::from(self.initial.omega)),
            integrator,
            closedness_residual: closedness,
            generator,
        })
    }

    fn initial_attitude(&self) -> Result<RotationMatrix, ValidationError> {
        let init = &self.initial;
        let q = match (&init.q, &init.alpha) {
            (Some(q), None) => RotationMatrix::from_row_slice(q).map_err(|e| invalid("initial.q", e.to_string()))?,
            (None, Some(a)) => {
                let a = Vector3::from(*a);
                if (a.norm() - 1.0).abs() > 1e-6 {
                    return Err(invalid("initial.alpha", format!("|alpha| = {} is not 1", a.norm())));
                }
                RotationMatrix::complete_from_alpha(&a.normalize()).map_err(|e| invalid("initial.alpha", e.to_string()))?
            }
            _ => return Err(invalid("initial", "give exactly one of q and alpha")),
        };
        if init.psi != 0.0 && init.q.is_some() {
            return Err(invalid("initial.psi", "psi applies only together with alpha"));
        }
        if !init.omega.iter().all(|w| w.is_finite()) {
            return Err(invalid("initial.omega", "components must be finite"));
        }
        Ok(symmetry_action(init.psi, &q))
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub system: GyroSystem,
    pub initial: BodyState,
    pub integrator: IntegratorConfig,
    pub closedness_residual: f64,
    /// The polynomials behind a `f_alpha_plus_gradient` kappa.
    pub generator: Option<FAlphaPlusGradient>,
}

impl Scenario {
    pub fn potential(&self) -> &SphereScalarField {
        &self.system.potential
    }
}

/// Parses and validates.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    parse_scenario(text)?.build()
}

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

pub fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn builtin(name: &str) -> Option<ScenarioSpec> {
    builtin_text(name).map(|t| parse_scenario(t).expect("built-in scenarios parse"))
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Resolves a command-line scenario argument: an existing file, then
/// `<dir>/<name>.toml` in `scenario_dir`, then a built-in name.
pub fn resolve_scenario(arg: &str, scenario_dir: Option<&Path>) -> Result<ScenarioSpec, ScenarioError> {
    let path = Path::new(arg);
    if path.is_file() {
        return parse_scenario(&read(path)?);
    }
    if let Some(dir) = scenario_dir {
        let candidate = dir.join(format!("{arg}.toml"));
        if candidate.is_file() {
            return parse_scenario(&read(&candidate)?);
        }
    }
    builtin(arg).ok_or_else(|| ScenarioError::NotFound(arg.to_string()))
}

/// Names of the `.toml` files in `dir`, sorted.
pub fn directory_scenarios(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .filter_map(|e| {
            let p = e.path();
            (p.extension()? == "toml").then(|| p.file_stem()?.to_str().map(str::to_string))?
        })
        .collect();
    names.sort();
    names
}
