#![allow(dead_code)]

use gauge_forms::chartcalc::{Jet, ScalarField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sparse polynomial with plain f64 evaluation alongside the jet field.
#[derive(Clone, Debug)]
pub struct Poly {
    pub dim: usize,
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Poly {
    pub fn random(rng: &mut impl Rng, dim: usize, degree: u32, nterms: usize) -> Self {
        let terms = (0..nterms)
            .map(|_| {
                let c = rng.gen_range(-1.0..1.0);
                let mut left = degree;
                let mut pows = vec![0u32; dim];
                for p in pows.iter_mut() {
                    let e = rng.gen_range(0..=left);
                    *p = e;
                    left -= e;
                }
                // avoid biasing the first variable
                let shift = rng.gen_range(0..dim);
                pows.rotate_left(shift);
                (c, pows)
            })
            .collect();
        Poly { dim, terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, p)| c * p.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product::<f64>())
            .sum()
    }

    /// Exact partial derivative along axis `k`.
    pub fn deriv(&self, k: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(_, p)| p[k] > 0)
            .map(|(c, p)| {
                let mut q = p.clone();
                q[k] -= 1;
                (c * p[k] as f64, q)
            })
            .collect();
        Poly { dim: self.dim, terms }
    }

    pub fn field(&self) -> ScalarField {
        let terms = self.terms.clone();
        ScalarField::new(self.dim, move |x| {
            let mut s = Jet::constant(0.0);
            for (c, p) in &terms {
                let mut t = Jet::constant(*c);
                for (k, &e) in p.iter().enumerate() {
                    if e > 0 {
                        t = t * x[k].powi(e as i32);
                    }
                }
                s += t;
            }
            s
        })
    }
}

pub fn random_point(rng: &mut impl Rng, dim: usize, r: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-r..r)).collect()
}
