//! Functions in involution with G are exactly those invariant under the lifted
//! symmetry; the bracket {K, G} is the derivative along that action.

use gyrosym::so3::{RotationMatrix, RotationSampler};
use gyrosym::symmetry::{involution_check, poisson_bracket_fd};
use gyrosym::Vector3;

type K = fn(&RotationMatrix, &Vector3<f64>) -> f64;

fn main() {
    let candidates: [(&str, K); 4] = [
        ("H", |q, w| 0.5 * (w.x * w.x + 2.0 * w.y * w.y + 3.0 * w.z * w.z) + q.alpha().z),
        ("A w . a", |q, w| w.x * q.alpha().x + 2.0 * w.y * q.alpha().y + 3.0 * w.z * q.alpha().z),
        ("w1^2", |_, w| w.x * w.x),
        ("w1 a'2", |q, w| w.x * q.row(1).y),
    ];
    let q = RotationSampler::new(5).sample();
    let w = Vector3::new(0.3, -0.7, 1.1);
    for (name, k) in candidates {
        let dev = involution_check(k, 10_000);
        let brackets: Vec<String> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| format!("{:+.6}", poisson_bracket_fd(&k, &q, &w, h)))
            .collect();
        println!("{name:<8} deviation {dev:.2e}  bracket at h = 0.1, 0.05, 0.025: {}", brackets.join(" "));
    }
}
