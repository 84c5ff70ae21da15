//! Heavy symmetric top: energy and the momentum about the vertical along an
//! RK4 trajectory, and the fourth-order decay of the energy error.

use gyrosym::dynamics::{convergence_order, integrate, max_drift, IntegratorConfig, Method};
use gyrosym::forms::SphereScalarField;
use gyrosym::scenario::builtin;

fn main() {
    let s = builtin("lagrange-top").unwrap().build().unwrap();
    let f = SphereScalarField::zero();
    let traj = integrate(&s.system, &s.initial, &s.integrator, Some(&f)).unwrap();
    let h0 = traj[0].energy;
    let g0 = traj[0].area.unwrap();
    println!("t_end = {}, dt = {}", s.integrator.t_end, s.integrator.dt);
    println!("relative energy drift {:.2e}", max_drift(traj.iter().map(|p| p.energy)) / h0.abs());
    println!("relative G drift      {:.2e}", max_drift(traj.iter().map(|p| p.area.unwrap())) / g0.abs());

    let dts = [1e-2, 5e-3, 2.5e-3];
    let drifts: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let cfg = IntegratorConfig { dt, stride: 1, method: Method::Rk4Projected, ..s.integrator };
            let traj = integrate(&s.system, &s.initial, &cfg, None).unwrap();
            max_drift(traj.iter().map(|p| p.energy))
        })
        .collect();
    for (dt, d) in dts.iter().zip(&drifts) {
        println!("dt = {dt:<7} energy drift {d:.3e}");
    }
    println!("order {:.2}", convergence_order(&dts, &drifts));
}
