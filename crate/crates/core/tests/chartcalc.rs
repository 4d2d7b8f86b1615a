mod common;

use common::{random_point, rng, Poly};
use gauge_forms::chartcalc::{
    curl, curl_field, divergence, gradient, gradient_field, laplacian, Chart, Jet, ScalarField, VectorField,
};
use proptest::prelude::*;

fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Vec<f64> {
    (0..p.len())
        .map(|k| {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[k] += h;
            b[k] -= h;
            let mut a2 = p.to_vec();
            let mut b2 = p.to_vec();
            a2[k] += 2.0 * h;
            b2[k] -= 2.0 * h;
            (8.0 * (f(&a) - f(&b)) - (f(&a2) - f(&b2))) / (12.0 * h)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_gradient_matches_differences(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let poly = Poly::random(&mut r, 3, 4, 6);
        let f = poly.field().map(|j| j.sin() * j.exp());
        let oracle = |x: &[f64]| { let v = poly.eval(x); v.sin() * v.exp() };
        let p = random_point(&mut r, 3, 0.8);
        let g = gradient(&f, &p).unwrap();
        let fd = fd_gradient(&oracle, &p, 1e-3);
        for (a, b) in g.iter().zip(&fd) {
            prop_assert!((a - b).abs() < 1e-7 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn jet_hessian_is_symmetric_and_matches_differences(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let poly = Poly::random(&mut r, 4, 3, 5);
        let f = poly.field().map(|j| (j * 0.5).cos());
        let p = random_point(&mut r, 4, 1.0);
        let j = f.jet(&p, 2).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                prop_assert_eq!(j.dd(a, b), j.dd(b, a));
                let da = f.partial(a);
                let h = 1e-4;
                let mut hi = p.clone();
                let mut lo = p.clone();
                hi[b] += h;
                lo[b] -= h;
                let fd = (da.value(&hi).unwrap() - da.value(&lo).unwrap()) / (2.0 * h);
                prop_assert!((j.dd(a, b) - fd).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }
}

#[test]
fn curl_of_gradient_and_divergence_of_curl_vanish() {
    let mut r = rng(7);
    let chart = Chart::euclidean(3);
    for _ in 0..20 {
        let phi = Poly::random(&mut r, 3, 4, 8).field();
        let grad = gradient_field(&chart, &phi).unwrap();
        let v = VectorField::new(chart.clone(), (0..3).map(|_| Poly::random(&mut r, 3, 3, 6).field()).collect()).unwrap();
        let cv = curl_field(&v).unwrap();
        for _ in 0..5 {
            let p = random_point(&mut r, 3, 1.5);
            let c = curl(&grad, &p).unwrap();
            assert!(c.iter().all(|x| x.abs() < 1e-12), "{c:?}");
            assert!(divergence(&cv, &p).unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn laplacian_is_divergence_of_gradient() {
    let mut r = rng(11);
    let chart = Chart::euclidean(3);
    for _ in 0..20 {
        let f = Poly::random(&mut r, 3, 4, 8).field();
        let p = random_point(&mut r, 3, 1.0);
        let lap = laplacian(&chart, &f, &p).unwrap();
        let dg = divergence(&gradient_field(&chart, &f).unwrap(), &p).unwrap();
        assert!((lap - dg).abs() < 1e-11 * (1.0 + lap.abs()));
    }
}

#[test]
fn harmonic_inverse_distance() {
    let chart = Chart::euclidean(3);
    let f = ScalarField::new(3, |x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).powf(-0.5));
    for p in [[1.0, 0.2, -0.3], [0.1, 2.0, 0.7], [-3.0, -1.0, 0.5]] {
        assert!(laplacian(&chart, &f, &p).unwrap().abs() < 1e-12);
    }
}

#[test]
fn chain_rule_through_composition() {
    let inner = [Jet::variable(0.3, 0, 2, 2), Jet::variable(-1.2, 1, 2, 2)];
    let g = |x: &[Jet]| (x[0] * x[1]).sin() + x[1].exp();
    let direct = g(&inner);
    // the same function evaluated through an intermediate field
    let f = ScalarField::new(2, move |x| (x[0] * x[1]).sin() + x[1].exp());
    let via = f.eval_jets(&inner).unwrap();
    assert!((direct.value() - via.value()).abs() < 1e-15);
    for a in 0..2 {
        assert!((direct.d(a) - via.d(a)).abs() < 1e-14);
        for b in 0..2 {
            assert!((direct.dd(a, b) - via.dd(a, b)).abs() < 1e-14);
        }
    }
}
