//! dG~/dt = (a x k).w along trajectories, checked by central differences at
//! three sample spacings.

use gyrosym::harness::run_lemma1;
use gyrosym::scenario::builtin;

fn main() {
    for (name, seed) in [("gyrostat", 0), ("f-alpha-plus-gradient", 7), ("f-alpha-plus-gradient", 8), ("free-body", 0)] {
        let mut spec = builtin(name).unwrap();
        spec.seed = seed;
        spec.integrator.t_end = 10.0;
        let report = run_lemma1(&spec.build().unwrap()).unwrap();
        print!("{report}");
    }
}
