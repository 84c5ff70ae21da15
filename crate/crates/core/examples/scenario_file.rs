//! Scenario text to a validated system, a simulation and a check report.

use gyrosym::harness::{run_check, run_simulate};
use gyrosym::scenario::{load_scenario, parse_scenario};
use gyrosym::symmetry::SphereGrid;

const TEXT: &str = r#"
name = "tilted-gyrostat"
inertia = [2.0, 2.5, 1.0]
potential = "a1 + 0.2*a3^2"
kappa = { expressions = ["0.3 + a1", "a2", "a3 - 0.1"] }

[initial]
alpha = [0.0, 0.0, 1.0]
psi = 0.4
omega = [0.2, 0.1, 1.5]

[integrator]
method = "rk4-projected"
dt = 2e-3
t_end = 20.0
stride = 5
"#;

fn main() {
    let scenario = load_scenario(TEXT).unwrap();
    let out = std::env::temp_dir().join("tilted-gyrostat.csv");
    print!("{}", run_simulate(&scenario, &out).unwrap());
    println!("  csv: {}", out.display());
    print!("{}", run_check(&scenario, SphereGrid::new(90, 180), None).unwrap());

    let broken = TEXT.replace("\"a2\"", "\"a3\"");
    match load_scenario(&broken) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("edited file rejected: {e}"),
    }
    let typo = TEXT.replace("0.2*a3^2", "0.2*a3^^2");
    println!("typo: {}", parse_scenario(&typo).unwrap_err());
}
