//! Command-line front end: simulation runs with conservation diagnostics,
//! decomposition reports and the area-rate convergence harness.
//!
//! Exit codes: 0 success, 1 usage or I/O failure, 2 parse or validation
//! error, 3 rejected integration step, 4 area-rate convergence order below 1.9.

use crate::dynamics::{
    convergence_order, integrate, lemma1_residual, max_drift, DynamicsError, Method, TimeWindow, TrajectoryPoint,
};
use crate::forms::{SphereScalarField, TAU_CLOSED};
use crate::scenario::{
    builtin, builtin_names, directory_scenarios, resolve_scenario, Scenario, ScenarioError, ScenarioSpec,
    SCENARIO_DIR_ENV,
};
use crate::symmetry::{
    check_psi_invariance, decompose_kappa, exactness_verdict, fit_linear, scalar_field_deviation,
    DecompositionOptions, DecompositionResult, SphereGrid, SymmetryError, Verdict,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_STEP_REJECTED: i32 = 3;
pub const EXIT_LEMMA1: i32 = 4;

/// Order area-rate residuals must reach.
pub const LEMMA1_MIN_ORDER: f64 = 1.9;
/// Residuals below this are treated as round-off, for which no order is fitted.
pub const LEMMA1_NOISE_FLOOR: f64 = 1e-9;
/// `f` counts as linear in α when the least-squares misfit is below this.
pub const LINEAR_FIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Scenario(ScenarioError::Parse(_) | ScenarioError::Validation(_)) => EXIT_INVALID,
            HarnessError::Scenario(_) => EXIT_USAGE,
            HarnessError::Dynamics(DynamicsError::StepRejected { .. }) => EXIT_STEP_REJECTED,
            HarnessError::Dynamics(_) | HarnessError::Symmetry(_) => EXIT_INVALID,
            HarnessError::Io { .. } | HarnessError::Usage(_) => EXIT_USAGE,
        }
    }
}

fn io_error(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let context = context.into();
    move |source| HarnessError::Io { context, source }
}

/// The decomposition used to decide whether `G` exists: the exactness verdict
/// for closed forms, the bare decomposition for diagnostic open ones.
pub fn area_decomposition(
    scenario: &Scenario,
    options: &DecompositionOptions,
) -> Result<DecompositionResult, SymmetryError> {
    if scenario.system.is_certified_closed() {
        exactness_verdict(&scenario.system.kappa, options)
    } else {
        decompose_kappa(&scenario.system.kappa, options)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub name: String,
    pub method: String,
    pub samples: usize,
    /// `max |ΔH| / |H(0)|`.
    pub energy_drift: f64,
    /// `max |ΔG| / max(1, |G(0)|)`, when `G` exists.
    pub area_drift: Option<f64>,
    pub note: Option<String>,
    pub max_orth_err: f64,
}

impl fmt::Display for SimulationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({}, {} samples)", self.name, self.method, self.samples)?;
        writeln!(f, "  max |dH|/|H(0)|         {:.3e}", self.energy_drift)?;
        match self.area_drift {
            Some(d) => writeln!(f, "  max |dG|/max(1,|G(0)|)  {d:.3e}")?,
            None => writeln!(f, "  G                       omitted")?,
        }
        writeln!(f, "  max orthonormality err  {:.3e}", self.max_orth_err)?;
        if let Some(note) = &self.note {
            writeln!(f, "  note: {note}")?;
        }
        Ok(())
    }
}

fn relative_energy_drift(traj: &[TrajectoryPoint]) -> f64 {
    let h0 = traj[0].energy;
    max_drift(traj.iter().map(|p| p.energy)) / if h0 == 0.0 { 1.0 } else { h0.abs() }
}

/// Integrates `scenario` and writes the CSV time series to `out`.
pub fn run_simulate(scenario: &Scenario, out: &Path) -> Result<SimulationSummary, HarnessError> {
    let decomposition = area_decomposition(scenario, &DecompositionOptions::default())?;
    let f = decomposition.potential();
    let note = match decomposition.verdict {
        Verdict::Exists => None,
        Verdict::Fails => Some(format!(
            "area integral does not exist (max circulation {:.3e})",
            decomposition.max_circulation
        )),
    };
    let traj = integrate(&scenario.system, &scenario.initial, &scenario.integrator, f)?;
    write_csv(&traj, out)?;
    let area_drift = f.map(|_| {
        let g0 = traj[0].area.unwrap_or(0.0);
        max_drift(traj.iter().map(|p| p.area.unwrap_or(f64::NAN))) / g0.abs().max(1.0)
    });
    Ok(SimulationSummary {
        name: scenario.spec.name.clone(),
        method: scenario.integrator.method.to_string(),
        samples: traj.len(),
        energy_drift: relative_energy_drift(&traj),
        area_drift,
        note,
        max_orth_err: traj.iter().map(|p| p.orth_err).fold(0.0, f64::max),
    })
}

/// `t,w1,w2,w3,a1,a2,a3,H[,G],orth_err`, 17 significant digits.
pub fn write_csv(traj: &[TrajectoryPoint], out: &Path) -> Result<(), HarnessError> {
    let file = File::create(out).map_err(io_error(format!("cannot create {}", out.display())))?;
    let mut w = BufWriter::new(file);
    let with_g = traj.first().is_some_and(|p| p.area.is_some());
    let mut write = || -> std::io::Result<()> {
        w.write_all(b"t,w1,w2,w3,a1,a2,a3,H,")?;
        if with_g {
            w.write_all(b"G,")?;
        }
        w.write_all(b"orth_err\n")?;
        for p in traj {
            write!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},",
                p.t, p.omega.x, p.omega.y, p.omega.z, p.alpha.x, p.alpha.y, p.alpha.z, p.energy
            )?;
            if let Some(g) = p.area.filter(|_| with_g) {
                write!(w, "{g:.16e},")?;
            }
            writeln!(w, "{:.16e}", p.orth_err)?;
        }
        w.flush()
    };
    write().map_err(io_error(format!("cannot write {}", out.display())))
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearFit {
    pub coefficients: [f64; 3],
    pub offset: f64,
    pub misfit: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub closedness_residual: f64,
    pub closed: bool,
    pub potential_invariance_deviation: f64,
    pub kappa_invariance_deviation: [f64; 3],
    pub verdict: String,
    pub max_circulation: f64,
    pub max_circulation_density: f64,
    pub residual: Option<f64>,
    pub path_discrepancy: f64,
    /// Range of `F = k·α` over the mesh nodes.
    pub big_f_range: [f64; 2],
    /// Range of `F` when `f` is linear, `f ≈ c·α + c₀`, and extended linearly
    /// off the sphere, so that `∇f = c`.
    pub big_f_linear_gauge_range: Option<[f64; 2]>,
    pub f_fit: LinearFit,
    /// `f ≈ ...` when the linear fit is exact within tolerance.
    pub f_formula: Option<String>,
    pub g_formula: Option<String>,
    pub f_table: Option<PathBuf>,
}

fn range(values: impl Iterator<Item = f64>) -> [f64; 2] {
    values.fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], v| [lo.min(v), hi.max(v)])
}

fn format_linear(c: &Vector3<f64>, offset: f64) -> String {
    let mut s = String::new();
    for (i, v) in c.iter().enumerate() {
        if v.abs() < 1e-9 {
            continue;
        }
        let sign = if v < &0.0 { "-" } else { "+" };
        if s.is_empty() {
            if *v < 0.0 {
                s.push('-');
            }
        } else {
            write!(s, " {sign} ").unwrap();
        }
        write!(s, "{}*a{}", round_sig(v.abs()), i + 1).unwrap();
    }
    if s.is_empty() {
        s.push('0');
    }
    if offset.abs() >= 1e-9 {
        let sign = if offset < 0.0 { "-" } else { "+" };
        write!(s, " {sign} {}", round_sig(offset.abs())).unwrap();
    }
    s
}

fn round_sig(x: f64) -> f64 {
    format!("{x:.9e}").parse().unwrap_or(x)
}

/// Closedness, invariance and decomposition report. When `f_table` is given,
/// `a1,a2,a3,F,f` is written there for every mesh node.
pub fn run_check(
    scenario: &Scenario,
    grid: SphereGrid,
    f_table: Option<&Path>,
) -> Result<CheckReport, HarnessError> {
    let sys = &scenario.system;
    let decomposition = area_decomposition(scenario, &DecompositionOptions::with_grid(grid))?;
    let kappa_dev = [0, 1, 2].map(|i| scalar_field_deviation(&sys.kappa.coefficients[i]));
    let potential = sys.potential.clone();
    let potential_dev = check_psi_invariance(|q| potential.value(&q.alpha()), 256);
    let table = decomposition.f_table();
    let (c, offset, misfit) = fit_linear(&decomposition);
    let linear = decomposition.exists() && misfit <= LINEAR_FIT_TOLERANCE;
    let k_at = |a: &Vector3<f64>| sys.kappa.coefficients_at_alpha(a);
    let big_f_range = range(table.iter().map(|(a, _)| decomposition.big_f.value(a)));
    let big_f_linear_gauge_range = linear.then(|| range(table.iter().map(|(a, _)| (k_at(a) - c).dot(a))));
    let f_formula = linear.then(|| format_linear(&c, offset));
    let g_formula = decomposition.exists().then(|| {
        let m = sys.inertia.moments();
        let f = f_formula.clone().unwrap_or_else(|| "f(a), tabulated".into());
        format!("G = {}*w1*a1 + {}*w2*a2 + {}*w3*a3 + f,  f = {f}", m.x, m.y, m.z)
    });
    if let Some(path) = f_table {
        write_f_table(&decomposition, &table, path)?;
    }
    Ok(CheckReport {
        name: scenario.spec.name.clone(),
        closedness_residual: scenario.closedness_residual,
        closed: scenario.closedness_residual <= TAU_CLOSED,
        potential_invariance_deviation: potential_dev,
        kappa_invariance_deviation: kappa_dev,
        verdict: decomposition.verdict.to_string(),
        max_circulation: decomposition.max_circulation,
        max_circulation_density: decomposition.max_circulation_density,
        residual: decomposition.residual,
        path_discrepancy: decomposition.path_discrepancy,
        big_f_range,
        big_f_linear_gauge_range,
        f_fit: LinearFit {
            coefficients: [c.x, c.y, c.z],
            offset,
            misfit,
        },
        f_formula,
        g_formula,
        f_table: f_table.map(Path::to_path_buf),
    })
}

fn write_f_table(d: &DecompositionResult, table: &[(Vector3<f64>, f64)], path: &Path) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(io_error(format!("cannot create {}", path.display())))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "a1,a2,a3,F,f")?;
        for (a, f) in table {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                a.x,
                a.y,
                a.z,
                d.big_f.value(a),
                f
            )?;
        }
        w.flush()
    };
    write().map_err(io_error(format!("cannot write {}", path.display())))
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario            {}", self.name)?;
        writeln!(
            f,
            "closedness          {:.3e} ({})",
            self.closedness_residual,
            if self.closed { "closed" } else { "NOT closed" }
        )?;
        writeln!(f, "invariance  Pi      {:.3e}", self.potential_invariance_deviation)?;
        let k = self.kappa_invariance_deviation;
        writeln!(f, "invariance  k       {:.3e} {:.3e} {:.3e}", k[0], k[1], k[2])?;
        writeln!(f, "verdict             {}", self.verdict)?;
        writeln!(
            f,
            "max circulation     {:.3e} (per unit area {:.3e})",
            self.max_circulation, self.max_circulation_density
        )?;
        if let Some(r) = self.residual {
            writeln!(f, "residual |(k-grad f) x a|  {r:.3e}")?;
        }
        writeln!(f, "path discrepancy    {:.3e}", self.path_discrepancy)?;
        writeln!(f, "F = k.a in          [{:.6}, {:.6}]", self.big_f_range[0], self.big_f_range[1])?;
        if let Some([lo, hi]) = self.big_f_linear_gauge_range {
            writeln!(f, "F, linear f         [{lo:.6}, {hi:.6}]")?;
        }
        if let Some(ff) = &self.f_formula {
            writeln!(f, "f ~ {ff}")?;
        }
        if let Some(g) = &self.g_formula {
            writeln!(f, "{g}")?;
        }
        if let Some(p) = &self.f_table {
            writeln!(f, "f table             {}", p.display())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Report {
    pub name: String,
    /// Sample spacings `h, h/2, h/4` in time units.
    pub spacings: [f64; 3],
    pub residuals: [f64; 3],
    pub order: f64,
    pub noise_floor: bool,
    pub passed: bool,
}

impl fmt::Display for Lemma1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario  {}", self.name)?;
        for (h, r) in self.spacings.iter().zip(self.residuals) {
            writeln!(f, "  h = {h:.4e}  residual {r:.4e}")?;
        }
        if self.noise_floor {
            writeln!(f, "  residuals at round-off level; dG~/dt vanishes")?;
        } else {
            writeln!(f, "  fitted order {:.3}", self.order)?;
        }
        writeln!(f, "  {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

/// Compares the central-difference rate of `G̃ = 𝐀ω·α` with `(α×k)·ω` at
/// sample spacings `h = 4·stride·dt`, `h/2`, `h/4` over one integration.
pub fn run_lemma1(scenario: &Scenario) -> Result<Lemma1Report, HarnessError> {
    let cfg = scenario.integrator;
    let traj = integrate(&scenario.system, &scenario.initial, &cfg, None)?;
    let mut residuals = [0.0; 3];
    let mut spacings = [0.0; 3];
    for (n, every) in [4usize, 2, 1].into_iter().enumerate() {
        let sub: Vec<TrajectoryPoint> = traj.iter().step_by(every).copied().collect();
        residuals[n] = lemma1_residual(&scenario.system, &sub, TimeWindow::all())?;
        spacings[n] = (every * cfg.stride) as f64 * cfg.dt;
    }
    let noise_floor = residuals.iter().all(|r| *r <= LEMMA1_NOISE_FLOOR);
    let order = convergence_order(&spacings, &residuals);
    Ok(Lemma1Report {
        name: scenario.spec.name.clone(),
        spacings,
        residuals,
        order,
        noise_floor,
        passed: noise_floor || order >= LEMMA1_MIN_ORDER,
    })
}

#[derive(Parser, Debug)]
#[command(name = "gyrosym", version, about = "Rigid body with gyroscopic forces: simulation and area-integral checks")]
pub struct Cli {
    /// Directory searched for <name>.toml scenario files.
    #[arg(long, global = true, env = SCENARIO_DIR_ENV)]
    pub scenario_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Overrides {
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Seed for randomized scenario data.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

impl Overrides {
    pub fn apply(&self, spec: &mut ScenarioSpec) {
        if let Some(dt) = self.dt {
            spec.integrator.dt = dt;
        }
        if let Some(t) = self.t_end {
            spec.integrator.t_end = t;
        }
        if let Some(m) = self.method {
            spec.integrator.method = m;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate one or more scenarios and write CSV time series.
    Simulate {
        /// Scenario files or names.
        #[arg(required = true)]
        specs: Vec<String>,
        /// Output CSV (single scenario).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output directory; each scenario writes <name>.csv.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Scenarios run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Report closedness, invariance and the area-integral verdict.
    Check {
        spec: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Where to tabulate f (default <name>_f.csv).
        #[arg(long)]
        f_table: Option<PathBuf>,
        /// Mesh as <bands>x<sectors>.
        #[arg(long, default_value = "180x360", value_parser = parse_grid)]
        grid: SphereGrid,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Convergence test of dG~/dt = (a x k).w at three sample spacings.
    Lemma1 {
        spec: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List built-in scenarios and those in the scenario directory.
    ListScenarios,
}

fn parse_grid(s: &str) -> Result<SphereGrid, String> {
    let (a, b) = s.split_once('x').ok_or("expected <bands>x<sectors>")?;
    let n_lat = a.trim().parse().map_err(|e| format!("{e}"))?;
    let n_lon = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(SphereGrid::new(n_lat, n_lon))
}

fn load(arg: &str, dir: Option<&Path>, overrides: &Overrides) -> Result<Scenario, HarnessError> {
    let mut spec = resolve_scenario(arg, dir)?;
    overrides.apply(&mut spec);
    Ok(spec.build()?)
}

fn emit<T: Serialize + fmt::Display>(value: &T, format: Format) {
    match format {
        Format::Text => print!("{value}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("reports serialize")),
    }
}

fn report(err: &HarnessError) -> i32 {
    eprintln!("error: {err}");
    err.exit_code()
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let dir = cli.scenario_dir.as_deref();
    match cli.command {
        Command::Simulate {
            specs,
            out,
            out_dir,
            jobs,
            overrides,
        } => simulate_command(&specs, out, out_dir, jobs, dir, &overrides),
        Command::Check {
            spec,
            format,
            f_table,
            grid,
            overrides,
        } => {
            let result = load(&spec, dir, &overrides).and_then(|s| {
                let path = f_table.unwrap_or_else(|| PathBuf::from(format!("{}_f.csv", s.spec.name)));
                run_check(&s, grid, Some(&path))
            });
            match result {
                Ok(r) => {
                    emit(&r, format);
                    EXIT_OK
                }
                Err(e) => report(&e),
            }
        }
        Command::Lemma1 {
            spec,
            format,
            overrides,
        } => match load(&spec, dir, &overrides).and_then(|s| run_lemma1(&s)) {
            Ok(r) => {
                emit(&r, format);
                if r.passed {
                    EXIT_OK
                } else {
                    EXIT_LEMMA1
                }
            }
            Err(e) => report(&e),
        },
        Command::ListScenarios => {
            for name in builtin_names() {
                let spec = builtin(name).expect("built-in");
                println!("{name:<24} {}", spec.description);
            }
            if let Some(d) = dir {
                for name in directory_scenarios(d) {
                    println!("{name:<24} ({})", d.join(format!("{name}.toml")).display());
                }
            }
            EXIT_OK
        }
    }
}

fn simulate_command(
    specs: &[String],
    out: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    jobs: usize,
    dir: Option<&Path>,
    overrides: &Overrides,
) -> i32 {
    let targets: Result<Vec<(Scenario, PathBuf)>, HarnessError> = (|| {
        let scenarios = specs
            .iter()
            .map(|s| load(s, dir, overrides))
            .collect::<Result<Vec<_>, _>>()?;
        let paths: Vec<PathBuf> = match (&out, &out_dir) {
            (Some(o), None) if scenarios.len() == 1 => vec![o.clone()],
            (None, Some(d)) => scenarios.iter().map(|s| d.join(format!("{}.csv", s.spec.name))).collect(),
            (None, None) => scenarios.iter().map(|s| PathBuf::from(format!("{}.csv", s.spec.name))).collect(),
            _ => {
                return Err(HarnessError::Usage(
                    "use --out with a single scenario, or --out-dir for several".into(),
                ))
            }
        };
        let mut seen = HashSet::new();
        for p in &paths {
            if !seen.insert(p.clone()) {
                return Err(HarnessError::Usage(format!("two scenarios would write {}", p.display())));
            }
        }
        Ok(scenarios.into_iter().zip(paths).collect())
    })();
    let targets = match targets {
        Ok(t) => t,
        Err(e) => return report(&e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => return report(&HarnessError::Usage(e.to_string())),
    };
    let results: Vec<Result<SimulationSummary, HarnessError>> =
        pool.install(|| targets.par_iter().map(|(s, p)| run_simulate(s, p)).collect());
    let mut code = EXIT_OK;
    for (r, (_, path)) in results.iter().zip(&targets) {
        match r {
            Ok(summary) => {
                print!("{summary}");
                println!("  csv: {}", path.display());
            }
            Err(e) => code = code.max(report(e)),
        }
    }
    code
}

/// `f` certified for the scenario, if the area integral exists.
pub fn certified_potential(scenario: &Scenario) -> Result<Option<SphereScalarField>, HarnessError> {
    let d = area_decomposition(scenario, &DecompositionOptions::default())?;
    Ok(d.potential().cloned())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(name: &str) -> Scenario {
        builtin(name).unwrap().build().unwrap()
    }

    #[test]
    fn linear_formula_rendering() {
        assert_eq!(format_linear(&Vector3::new(0.0, 0.0, 0.5), -0.5), "0.5*a3 - 0.5");
        assert_eq!(format_linear(&Vector3::new(-1.0, 2.0, 0.0), 0.0), "-1*a1 + 2*a2");
        assert_eq!(format_linear(&Vector3::zeros(), 0.0), "0");
    }

    #[test]
    fn gyrostat_check_report() {
        let r = run_check(&scenario("gyrostat"), SphereGrid::new(60, 120), None).unwrap();
        assert_eq!(r.verdict, "exists");
        assert!((r.f_fit.coefficients[2] - 0.5).abs() < 1e-6);
        assert!(r.f_fit.coefficients[0].abs() < 1e-6 && r.f_fit.coefficients[1].abs() < 1e-6);
        let [lo, hi] = r.big_f_linear_gauge_range.unwrap();
        assert!(lo.abs() < 1e-6 && hi.abs() < 1e-6);
        assert!(r.g_formula.unwrap().contains("0.5*a3"));
    }

    #[test]
    fn rotational_check_fails() {
        let r = run_check(&scenario("rotational-kappa"), SphereGrid::new(60, 120), None).unwrap();
        assert_eq!(r.verdict, "fails");
        assert!(!r.closed);
        assert!(r.max_circulation >= 1e-3);
        assert!(r.g_formula.is_none());
    }

    #[test]
    fn lemma1_free_body_is_at_noise_floor() {
        let mut spec = builtin("free-body").unwrap();
        spec.integrator.t_end = 2.0;
        let r = run_lemma1(&spec.build().unwrap()).unwrap();
        assert!(r.noise_floor && r.passed, "{r:?}");
    }

    #[test]
    fn exit_codes() {
        let e = HarnessError::Dynamics(DynamicsError::StepRejected {
            t: 1.0,
            reason: "x".into(),
        });
        assert_eq!(e.exit_code(), EXIT_STEP_REJECTED);
        let e = HarnessError::Scenario(ScenarioError::NotFound("x".into()));
        assert_eq!(e.exit_code(), EXIT_USAGE);
    }
}
