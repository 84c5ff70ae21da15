//! Polynomials in `(a1, a2, a3)`, used to build reproducible test fields such as
//! `κ = F·α + ∇f` with random polynomial `F`, `f`.

use crate::forms::SphereScalarField;
use nalgebra::Vector3;
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt::Write;

/// Sparse polynomial; exponents map to coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<[u32; 3], f64>,
}

/// Exponent triples of total degree at most `max_degree`, graded order.
pub fn monomials(max_degree: u32) -> Vec<[u32; 3]> {
    let mut out = vec![];
    for d in 0..=max_degree {
        for i in (0..=d).rev() {
            for j in (0..=d - i).rev() {
                out.push([i, j, d - i - j]);
            }
        }
    }
    out
}

fn monomial_value(e: &[u32; 3], a: &Vector3<f64>) -> f64 {
    a.x.powi(e[0] as i32) * a.y.powi(e[1] as i32) * a.z.powi(e[2] as i32)
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ([u32; 3], f64)>) -> Self {
        let mut p = Polynomial::zero();
        for (e, c) in terms {
            *p.terms.entry(e).or_insert(0.0) += c;
        }
        p.terms.retain(|_, c| *c != 0.0);
        p
    }

    /// Every monomial of degree ≤ `max_degree` with a coefficient uniform in
    /// `[-scale, scale]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_degree: u32, scale: f64) -> Self {
        Self::from_terms(
            monomials(max_degree)
                .into_iter()
                .map(|e| (e, rng.random_range(-scale..=scale))),
        )
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &f64)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, a: &Vector3<f64>) -> f64 {
        let d = self.degree() as usize;
        if d > 8 {
            return self.terms.iter().map(|(e, c)| c * monomial_value(e, a)).sum();
        }
        let mut pows = [[1.0; 9]; 3];
        for (i, row) in pows.iter_mut().enumerate() {
            for n in 1..=d {
                row[n] = row[n - 1] * a[i];
            }
        }
        self.terms
            .iter()
            .map(|(e, c)| c * pows[0][e[0] as usize] * pows[1][e[1] as usize] * pows[2][e[2] as usize])
            .sum()
    }

    pub fn partial(&self, i: usize) -> Polynomial {
        Self::from_terms(self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
            let mut d = *e;
            d[i] -= 1;
            (d, c * e[i] as f64)
        }))
    }

    pub fn gradient(&self, a: &Vector3<f64>) -> Vector3<f64> {
        let mut g = Vector3::zeros();
        for (e, c) in &self.terms {
            for i in 0..3 {
                if e[i] > 0 {
                    let mut d = *e;
                    d[i] -= 1;
                    g[i] += c * e[i] as f64 * monomial_value(&d, a);
                }
            }
        }
        g
    }

    /// Multiplication by `a_{i+1}`.
    pub fn times_coordinate(&self, i: usize) -> Polynomial {
        Self::from_terms(self.terms.iter().map(|(e, c)| {
            let mut d = *e;
            d[i] += 1;
            (d, *c)
        }))
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).map(|(e, c)| (*e, *c)))
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c * s)))
    }

    /// Source text in the scenario expression language. Coefficients are
    /// printed in shortest round-trip form, so parsing reproduces them exactly.
    pub fn to_expression(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if k == 0 {
                if sign == "-" {
                    s.push('-');
                }
            } else {
                write!(s, " {sign} ").unwrap();
            }
            write!(s, "{mag:?}").unwrap();
            for (i, p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(s, "*a{}", i + 1).unwrap(),
                    _ => write!(s, "*a{}^{}", i + 1, p).unwrap(),
                }
            }
        }
        s
    }

    pub fn to_field(&self, name: impl Into<String>) -> SphereScalarField {
        let v = self.clone();
        let g = self.clone();
        SphereScalarField::new(name, move |a| v.eval(a)).with_gradient(move |a| g.gradient(a))
    }
}

/// Coefficients of `κ = F·α + ∇f` as three polynomials.
pub fn f_alpha_plus_gradient_components(big_f: &Polynomial, f: &Polynomial) -> [Polynomial; 3] {
    [0, 1, 2].map(|i| big_f.times_coordinate(i).add(&f.partial(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(0).len(), 1);
        assert_eq!(monomials(2).len(), 10);
        assert_eq!(monomials(3).len(), 20);
    }

    #[test]
    fn gradient_matches_partials_and_expression_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Polynomial::random(&mut rng, 3, 1.0);
        assert_eq!(p.degree(), 3);
        let a = Vector3::new(0.2, -0.7, 0.4);
        let g = p.gradient(&a);
        for i in 0..3 {
            assert!((p.partial(i).eval(&a) - g[i]).abs() < 1e-14);
        }
        let e = Expression::parse(&p.to_expression()).unwrap();
        assert!((e.eval(&a) - p.eval(&a)).abs() < 1e-14);
        assert!((e.gradient(&a) - g).norm() < 1e-13);
    }

    #[test]
    fn f_alpha_plus_gradient_components_evaluate() {
        let big_f = Polynomial::from_terms([([1, 0, 0], 2.0)]);
        let f = Polynomial::from_terms([([0, 2, 0], 1.0)]);
        let k = f_alpha_plus_gradient_components(&big_f, &f);
        let a = Vector3::new(0.5, 0.5, 0.0);
        // k = 2 a1 (a1, a2, a3) + (0, 2 a2, 0)
        assert_eq!(k[0].eval(&a), 0.5);
        assert_eq!(k[1].eval(&a), 1.5);
        assert_eq!(k[2].eval(&a), 0.0);
        assert_eq!(Polynomial::zero().to_expression(), "0");
    }
}
