//! Gyrostat with a constant rotor moment: the decomposition finds f = k.a, and
//! G = sum (A_i w_i + k_i) a_i is conserved.

use gyrosym::dynamics::{integrate, max_drift};
use gyrosym::scenario::builtin;
use gyrosym::symmetry::{exactness_verdict, fit_linear, DecompositionOptions, SphereGrid};

fn main() {
    let s = builtin("gyrostat").unwrap().build().unwrap();
    let r = exactness_verdict(&s.system.kappa, &DecompositionOptions::with_grid(SphereGrid::new(90, 180))).unwrap();
    let (c, c0, misfit) = fit_linear(&r);
    println!("verdict {}, residual {:.1e}", r.verdict, r.residual.unwrap());
    println!("f = {:.6} a1 + {:.6} a2 + {:.6} a3 + {:.6}  (misfit {misfit:.1e})", c.x, c.y, c.z, c0);

    let f = r.potential().unwrap();
    let traj = integrate(&s.system, &s.initial, &s.integrator, Some(f)).unwrap();
    println!("G(0) = {:.12}", traj[0].area.unwrap());
    println!("max |G(t) - G(0)| over t <= {}: {:.2e}", s.integrator.t_end, max_drift(traj.iter().map(|p| p.area.unwrap())));
}
