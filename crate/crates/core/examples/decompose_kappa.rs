//! Recovering f from k = F a + grad f, and the failure of the test on the
//! rotational field e3 x a.

use gyrosym::forms::{InvariantTwoForm, SphereScalarField};
use gyrosym::so3::Axis;
use gyrosym::symmetry::{decompose_kappa, latitude_circulation, DecompositionOptions, FAlphaPlusGradient};
use gyrosym::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sample = FAlphaPlusGradient::random(&mut rng, 3, 1.0);
    println!("F = {}", sample.big_f.to_expression());
    println!("f = {}", sample.f.to_expression());

    let opts = DecompositionOptions::default();
    let r = decompose_kappa(&sample.kappa(), &opts).unwrap();
    let north = sample.f.eval(&Vector3::z());
    let g = r.grid;
    let mut err: f64 = 0.0;
    for i in 0..=g.n_lat {
        for j in 0..g.n_lon {
            err = err.max((r.f_at_node(i, j) - sample.f.eval(&g.node(i, j)) + north).abs());
        }
    }
    println!("verdict {}, sup error of f {err:.2e}, residual {:.2e}", r.verdict, r.residual.unwrap());

    let rot = InvariantTwoForm::from_sphere([
        SphereScalarField::new("-a2", |a| -a.y),
        SphereScalarField::coordinate(Axis::X),
        SphereScalarField::zero(),
    ]);
    let r = decompose_kappa(&rot, &opts).unwrap();
    println!("e3 x a: verdict {}, max circulation {:.6}", r.verdict, r.max_circulation);
    for theta in [0.5f64, 1.0, 1.5] {
        let c = latitude_circulation(|a| Vector3::new(-a.y, a.x, 0.0), theta);
        println!("  parallel at colatitude {theta}: {c:.12} vs 2 pi sin^2 = {:.12}", std::f64::consts::TAU * theta.sin().powi(2));
    }
}
