mod common;

use common::{random_point, rng, Poly};
use gauge_forms::chartcalc::ScalarField;
use gauge_forms::maxwell::{
    assemble_f, field_tensor, fields_from_tensor, gauge_shift, homogeneous_residual, inhomogeneous_residual,
    invariant_density, laplace_solve, lorentz_force_at, lorenz_gauge_residual, plane_wave, poynting_budget,
    radial_divergence_test, BoxRegion, EMField, FourPotential, LaplaceProblem, PoyntingSpec, SampleLattice,
    SourceConvention, SourceDensity,
};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

fn random_potential(r: &mut impl Rng) -> ([Poly; 4], FourPotential) {
    let polys: [Poly; 4] = std::array::from_fn(|_| Poly::random(r, 4, 3, 5));
    let a = FourPotential::from_components(std::array::from_fn(|i| polys[i].field())).unwrap();
    (polys, a)
}

#[test]
fn plane_waves_satisfy_both_laws_in_either_direction() {
    let lat = SampleLattice::default();
    for sign in [1.0, -1.0] {
        for e0 in [1.0, 0.37] {
            let f = assemble_f(&plane_wave(e0, sign, 1.0).unwrap(), 1.0).unwrap();
            assert!(homogeneous_residual(&f, &lat).unwrap().sup < 1e-10);
            let r = inhomogeneous_residual(&f, &SourceDensity::vacuum(), SourceConvention::Gaussian, &lat).unwrap();
            assert!(r.sup < 1e-10);
            assert_eq!(r.points, 625);
        }
    }
}

#[test]
fn mismatched_plane_wave_fails_the_source_law() {
    // E travelling one way, B the other
    let good = plane_wave(1.0, 1.0, 1.0).unwrap();
    let bad = EMField::new(good.e.clone(), [-&good.b[0], good.b[1].clone(), good.b[2].clone()]).unwrap();
    let f = assemble_f(&bad, 1.0).unwrap();
    let lat = SampleLattice::default();
    assert!(homogeneous_residual(&f, &lat).unwrap().sup > 0.1);
    let r = inhomogeneous_residual(&f, &SourceDensity::vacuum(), SourceConvention::Gaussian, &lat).unwrap();
    assert!(r.sup > 0.1);
}

#[test]
fn field_tensor_matches_potential_derivatives() {
    let mut r = rng(31);
    for _ in 0..20 {
        let (a, pot) = random_potential(&mut r);
        let em = fields_from_tensor(&field_tensor(&pot).unwrap()).unwrap();
        for _ in 0..5 {
            let p = random_point(&mut r, 4, 1.0);
            let e = em.e_at(&p).unwrap();
            let b = em.b_at(&p).unwrap();
            for i in 0..3 {
                let want = a[0].deriv(i + 1).eval(&p) - a[i + 1].deriv(0).eval(&p);
                assert!((e[i] - want).abs() < 1e-12);
            }
            let curl = [
                a[3].deriv(2).eval(&p) - a[2].deriv(3).eval(&p),
                a[1].deriv(3).eval(&p) - a[3].deriv(1).eval(&p),
                a[2].deriv(1).eval(&p) - a[1].deriv(2).eval(&p),
            ];
            for i in 0..3 {
                assert!((b[i] - curl[i]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn potentials_satisfy_homogeneous_law_and_sourced_law_with_matching_current() {
    let mut r = rng(37);
    let lat = SampleLattice::cube([0.0; 4], 0.8, 3);
    for _ in 0..10 {
        let (_, pot) = random_potential(&mut r);
        let f = field_tensor(&pot).unwrap();
        assert!(homogeneous_residual(&f, &lat).unwrap().sup < 1e-12);
        // Gaussian sources read off the fields: rho = div E / 4 pi, J = (curl B - dE/dt) / 4 pi
        let em = fields_from_tensor(&f).unwrap();
        let k = 1.0 / (4.0 * PI);
        let rho = (&(&em.e[0].partial(1) + &em.e[1].partial(2)) + &em.e[2].partial(3)).scale(k);
        let curl = [
            &em.b[2].partial(2) - &em.b[1].partial(3),
            &em.b[0].partial(3) - &em.b[2].partial(1),
            &em.b[1].partial(1) - &em.b[0].partial(2),
        ];
        let j: [ScalarField; 3] = std::array::from_fn(|i| (&curl[i] - &em.e[i].partial(0)).scale(k));
        let src = SourceDensity::new(rho, j).unwrap();
        let res = inhomogeneous_residual(&f, &src, SourceConvention::Gaussian, &lat).unwrap();
        assert!(res.sup < 1e-11, "{res:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gauge_shift_leaves_field_unchanged(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let (_, pot) = random_potential(&mut r);
        let phi = Poly::random(&mut r, 4, 4, 6).field().map(|j| j.sin());
        let shifted = gauge_shift(&pot, &phi).unwrap();
        let gap = field_tensor(&shifted).unwrap().sub(&field_tensor(&pot).unwrap()).unwrap();
        for _ in 0..4 {
            let p = random_point(&mut r, 4, 1.0);
            prop_assert!(gap.max_abs_at(&p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn lorentz_force_power_balance(seed in 0u64..10_000, c in 0.5f64..5.0) {
        let mut r = rng(seed);
        let e: [f64; 3] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let b: [f64; 3] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let dir: [f64; 3] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        let speed = r.gen_range(0.0..0.95) * c;
        let v = dir.map(|x| x / n * speed);
        let q = r.gen_range(-2.0..2.0);
        let f = assemble_f(&EMField::uniform(e, b), c).unwrap();
        let force = lorentz_force_at(&f, v, q, c, &[0.0; 4]).unwrap();
        let gamma = 1.0 / (1.0 - (speed / c).powi(2)).sqrt();
        let vxb = [v[1] * b[2] - v[2] * b[1], v[2] * b[0] - v[0] * b[2], v[0] * b[1] - v[1] * b[0]];
        for i in 0..3 {
            let want = gamma * q * (e[i] + vxb[i] / c);
            prop_assert!((force[i + 1] - want).abs() < 1e-12 * (1.0 + want.abs()));
        }
        let power = force[1] * v[0] + force[2] * v[1] + force[3] * v[2];
        prop_assert!((force[0] + power / (c * c)).abs() < 1e-12 * (1.0 + power.abs()));
    }

    #[test]
    fn field_invariant_is_boost_invariant(seed in 0u64..10_000, beta in -0.95f64..0.95) {
        let mut r = rng(seed);
        let e: [f64; 3] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let b: [f64; 3] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let g = 1.0 / (1.0 - beta * beta).sqrt();
        let e2 = [e[0], g * (e[1] - beta * b[2]), g * (e[2] + beta * b[1])];
        let b2 = [b[0], g * (b[1] + beta * e[2]), g * (b[2] - beta * e[1])];
        let p = [0.0; 4];
        let before = invariant_density(&EMField::uniform(e, b), &p).unwrap();
        let after = invariant_density(&EMField::uniform(e2, b2), &p).unwrap();
        let closed = 2.0 * (b.iter().map(|x| x * x).sum::<f64>() - e.iter().map(|x| x * x).sum::<f64>());
        prop_assert!((before - closed).abs() < 1e-13);
        prop_assert!((before - after).abs() < 1e-12 * (1.0 + g * g));
    }
}

#[test]
fn lorenz_gauge_can_be_reached() {
    // A0 = t^2 has residual 2t; phi = -t x^2 cancels it
    let a = FourPotential::from_components([
        ScalarField::new(4, |x| x[0] * x[0]),
        ScalarField::zero(4),
        ScalarField::zero(4),
        ScalarField::zero(4),
    ])
    .unwrap();
    let p = [0.7, 0.1, -0.2, 0.3];
    assert!((lorenz_gauge_residual(&a, &p).unwrap() - 1.4).abs() < 1e-14);
    let phi = ScalarField::new(4, |x| x[0] * x[1] * x[1] * -1.0);
    let shifted = gauge_shift(&a, &phi).unwrap();
    assert!(lorenz_gauge_residual(&shifted, &p).unwrap().abs() < 1e-14);
}

#[test]
fn poynting_budget_closes_for_plane_waves_on_random_boxes() {
    let mut r = rng(41);
    for _ in 0..5 {
        let lower: [f64; 3] = std::array::from_fn(|_| r.gen_range(-1.0..0.0));
        let upper: [f64; 3] = std::array::from_fn(|i| lower[i] + r.gen_range(0.5..1.5));
        let spec = PoyntingSpec::vacuum(BoxRegion { lower, upper });
        let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let em = plane_wave(r.gen_range(0.5..2.0), sign, 1.0).unwrap();
        let t = r.gen_range(0.0..3.0);
        let b = poynting_budget(&em, &SourceDensity::vacuum(), &spec, t).unwrap();
        let scale = b.field_energy_rate.abs().max(b.surface_flux.abs()).max(1e-3);
        assert!(b.residual.abs() < 1e-8 * scale.max(1.0), "{b:?}");
    }
}

#[test]
fn radial_field_divergence_discriminates_the_exponent() {
    let radii: Vec<f64> = (0..20).map(|i| 0.2 * 1.3f64.powi(i)).collect();
    let flat = radial_divergence_test(0.0, 1.0, &radii).unwrap();
    assert!(flat.max_abs_divergence < 1e-12);
    for p in [1e-3, 0.01, 0.2, -0.1] {
        let rep = radial_divergence_test(p, 2.0, &radii).unwrap();
        assert_eq!(rep.samples.len(), 20);
        assert!(rep.max_rel_error < 1e-9, "{p}: {}", rep.max_rel_error);
        for s in &rep.samples {
            let want = -p * 2.0 * s.radius.powf(-3.0 - p);
            assert!((s.divergence - want).abs() <= 1e-9 * want.abs());
        }
    }
}

fn shielding_problem(n: usize, potential: f64) -> LaplaceProblem {
    let h = 1.0 / (n - 1) as f64;
    let mut prob = LaplaceProblem::new(&[n, n], h).unwrap();
    prob.set_boundary(|i| {
        let (x, y) = (i[0] as f64 * h, i[1] as f64 * h);
        (3.0 * x).sin() + (2.0 * y + 0.5).cos() * 2.0
    });
    let (lo, hi) = (n / 3, 2 * n / 3);
    prob.set_conductor(
        move |i| {
            let inside = |k: usize| k >= lo && k <= hi;
            let cavity = |k: usize| k > lo + 1 && k < hi - 1;
            inside(i[0]) && inside(i[1]) && !(cavity(i[0]) && cavity(i[1]))
        },
        potential,
    );
    prob.tol = 1e-13;
    prob
}

#[test]
fn conducting_shell_shields_its_cavity() {
    let n = 64;
    let sol = laplace_solve(&shielding_problem(n, 0.7)).unwrap();
    let (lo, hi) = (n / 3, 2 * n / 3);
    let interior = sol.max_gradient_in(|i| i.iter().all(|&k| k > lo + 1 && k < hi - 1));
    let outside = sol.max_gradient_in(|i| i.iter().any(|&k| k < lo || k > hi));
    assert!(outside > 0.1);
    assert!(interior < 1e-6 * outside, "{interior} vs {outside}");
    assert_eq!(sol.max_principle_violation(), 0.0);
    let h = sol.spacing;
    // conductor corners carry r^(2/3) singularities; the O(h^2) bound holds away from them
    let away = |i: &[usize]| {
        let d = |k: usize| if k < lo { lo - k } else if k > hi { k - hi } else { 0 };
        let outside = i.iter().any(|&k| k < lo || k > hi);
        outside && d(i[0]).max(d(i[1])) > 4
    };
    assert!(sol.mean_value_defect_in(away) < h * h);
    assert!(sol.mean_value_defect_in(|i| i.iter().all(|&k| k > lo + 1 && k < hi - 1)) < 1e-10);
}

#[test]
fn mean_value_defect_shrinks_with_the_grid() {
    let defect = |n: usize| {
        let h = 1.0 / (n - 1) as f64;
        let mut p = LaplaceProblem::new(&[n, n], h).unwrap();
        // harmonic boundary data: Re exp(z)
        p.set_boundary(|i| (i[0] as f64 * h).exp() * (i[1] as f64 * h).cos());
        p.tol = 1e-14;
        laplace_solve(&p).unwrap().mean_value_defect()
    };
    let (a, b) = (defect(17), defect(33));
    assert!(a < 1e-4 && b < a / 3.0, "{a} {b}");
}
