//! Body-rotation frame fields, the dual coframe, and the symmetry action.

use gyrosym::so3::{coframe_eval, frame_fields, hat, symmetry_action, Axis, RotationSampler};

fn main() {
    let mut sampler = RotationSampler::new(42);
    let q = sampler.sample();
    let omega = frame_fields(&q);

    println!("lambda_j(Omega_i):");
    for field in &omega {
        let row = coframe_eval(&q, field).unwrap();
        println!("  {:+.3e} {:+.3e} {:+.3e}", row.x, row.y, row.z);
    }

    // Left-invariant fields bracket like the body axes: [Omega_2, Omega_3] = Omega_1.
    let (e2, e3) = (hat(&Axis::Y.unit()), hat(&Axis::Z.unit()));
    let bracket = q.matrix() * (e2 * e3 - e3 * e2);
    println!("lambda([Omega_2, Omega_3]) = {:?}", coframe_eval(&q, &bracket).unwrap().as_slice());

    let moved = symmetry_action(1.3, &q);
    println!("alpha before  {:?}", q.alpha().as_slice());
    println!("alpha after   {:?}", moved.alpha().as_slice());
    println!("second row changes by {:.3}", (moved.row(1) - q.row(1)).norm());
}
