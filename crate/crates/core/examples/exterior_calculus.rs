//! Exterior derivatives of invariant forms and the closedness test.

use gyrosym::forms::{
    closedness_residual, exterior_derivative_oneform, exterior_derivative_scalar, InvariantOneForm,
    InvariantTwoForm, ScalarField, SphereScalarField,
};
use gyrosym::poly::{f_alpha_plus_gradient_components, Polynomial};
use gyrosym::so3::{Axis, RotationSampler};
use gyrosym::Vector3;

fn main() {
    for axis in Axis::ALL {
        let d = exterior_derivative_oneform(&InvariantOneForm::basis(axis));
        println!("d(lambda_{}) has coefficients {:?}", axis.index() + 1, d.coefficients_at_alpha(&Vector3::z()).as_slice());
    }

    let f = Polynomial::from_terms([([1, 1, 0], 1.0), ([0, 0, 3], -0.5)]);
    println!("F = {}", f.to_expression());
    let df = exterior_derivative_scalar(&ScalarField::from(f.to_field("F")));
    let ddf = exterior_derivative_oneform(&df);
    let mut s = RotationSampler::new(1);
    let q = s.sample();
    println!("dF at a sample   {:?}", df.coefficients_at(&q).as_slice());
    println!("d(dF) at a sample {:.2e}", ddf.coefficients_at(&q).amax());

    // k = F a + grad f is always closed
    let big_f = Polynomial::from_terms([([0, 1, 0], 2.0)]);
    let small_f = Polynomial::from_terms([([1, 0, 1], 1.0)]);
    let k = f_alpha_plus_gradient_components(&big_f, &small_f);
    let kappa = InvariantTwoForm::from_sphere([k[0].to_field("k1"), k[1].to_field("k2"), k[2].to_field("k3")]);
    let a = s.sphere_point();
    println!("closedness of F a + grad f: {:.2e}", closedness_residual(&kappa, &a).unwrap());

    // the rotational field e3 x a is not
    let rot = InvariantTwoForm::from_sphere([
        SphereScalarField::new("-a2", |a| -a.y),
        SphereScalarField::coordinate(Axis::X),
        SphereScalarField::zero(),
    ]);
    println!("closedness of e3 x a: {:.6} (expected -2 a3 = {:.6})", closedness_residual(&rot, &a).unwrap(), -2.0 * a.z);
}
