//! Looks for polynomial k that is closed but not of the form F a + grad f.
//! Every closed direction found turns out to be exact.

use gyrosym::symmetry::{search_closed_counterexample, SphereGrid};

fn main() {
    for degree in [1, 2] {
        let search = search_closed_counterexample(degree, SphereGrid::new(60, 120)).unwrap();
        println!(
            "degree <= {degree}: {} basis fields, {} closed directions, largest circulation {:.1e}, counterexample: {}",
            search.basis_size,
            search.candidates.len(),
            search.max_circulation(),
            if search.found().is_some() { "found" } else { "none" }
        );
    }
}
