mod common;

use common::rng;
use gauge_forms::chartcalc::{Jet, ScalarField, UnitSystem};
use gauge_forms::quantum::{
    ab_period, ab_probability, analytic_uncertainty, commutator, commutator_xp, eigenbasis, evolve_cn, evolve_exact,
    expectation, gauge_equivalence_check, hamiltonian, measure_ab_period, momentum_operator, path_integral_step,
    position_operator, spectrum, variance, Cutoff, ExactPropagator, Grid1D, HamiltonianSpec, PathIntegralOptions,
    Propagation, WaveFunction,
};
use gauge_forms::Error;
use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use std::f64::consts::PI;

fn natural() -> UnitSystem {
    UnitSystem::natural(1.0).unwrap()
}

fn gauged_spec() -> HamiltonianSpec {
    HamiltonianSpec::free(1.0, UnitSystem::natural(0.7).unwrap())
        .unwrap()
        .with_potential(ScalarField::new(1, |x| x[0] * x[0] * 0.05))
        .with_vector_potential(ScalarField::new(1, |x| x[0].sin() * 0.3 + 0.1))
}

/// Free evolution of grid samples of a periodic, band-limited state by exact
/// multiplication in Fourier space.
fn spectral_free(psi: &WaveFunction, t: f64, hbar: f64, m: f64) -> WaveFunction {
    let n = psi.grid.n;
    let mut buf = psi.samples.clone();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let dk = 2.0 * PI / (n as f64 * psi.grid.dx);
    for (j, z) in buf.iter_mut().enumerate() {
        let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * dk;
        *z *= Complex64::from_polar(1.0 / n as f64, -hbar * k * k * t / (2.0 * m));
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    WaveFunction::new(psi.grid, buf).unwrap()
}

#[test]
fn crank_nicolson_preserves_the_norm() {
    let grid = Grid1D::walled(-8.0, 8.0, 256).unwrap();
    let spec = gauged_spec();
    let h = hamiltonian(&spec, grid).unwrap();
    let psi = WaveFunction::gaussian(grid, -1.0, 0.7, 2.0).unwrap();
    let out = evolve_cn(&h, &psi, 1.0, 1000, 1.0).unwrap();
    assert!((out.norm() - 1.0).abs() < 1e-10, "{}", out.norm() - 1.0);
    let pgrid = Grid1D::periodic(-8.0, 8.0, 256).unwrap();
    let hp = hamiltonian(&HamiltonianSpec::free(1.0, natural()).unwrap(), pgrid).unwrap();
    let out = evolve_cn(&hp, &WaveFunction::gaussian(pgrid, 0.0, 0.5, 3.0).unwrap(), 1.0, 1000, 1.0).unwrap();
    assert!((out.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn exact_propagator_is_unitary() {
    let grid = Grid1D::walled(-6.0, 6.0, 256).unwrap();
    let h = hamiltonian(&gauged_spec(), grid).unwrap();
    assert!(h.hermiticity_defect() < 1e-12);
    let u = ExactPropagator::new(&h, 1.0).unwrap();
    let s = 1.0 / grid.dx.sqrt();
    let cols: Vec<WaveFunction> = (0..grid.n)
        .map(|j| {
            let mut v = vec![Complex64::new(0.0, 0.0); grid.n];
            v[j] = Complex64::new(s, 0.0);
            u.apply(&WaveFunction::new(grid, v).unwrap(), 0.83)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for a in 0..grid.n {
        for b in a..grid.n {
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((cols[a].inner(&cols[b]) - want).norm());
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn exact_and_crank_nicolson_agree_to_second_order() {
    let grid = Grid1D::walled(-8.0, 8.0, 256).unwrap();
    let h = hamiltonian(&gauged_spec(), grid).unwrap();
    let psi = WaveFunction::gaussian(grid, 0.5, 0.8, -1.0).unwrap();
    let exact = evolve_exact(&h, &psi, 1.0, 1.0).unwrap();
    let e1 = evolve_cn(&h, &psi, 1.0, 200, 1.0).unwrap().distance(&exact);
    let e2 = evolve_cn(&h, &psi, 1.0, 400, 1.0).unwrap().distance(&exact);
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.1, "{order}");
}

#[test]
fn spectral_gaps_do_not_see_an_energy_shift() {
    let grid = Grid1D::walled(-5.0, 5.0, 200).unwrap();
    let h = hamiltonian(&gauged_spec(), grid).unwrap();
    let base = spectrum(&h, 20).unwrap();
    for k in [-3.0, 0.5, 100.0] {
        let shifted = spectrum(&h.shifted(k), 20).unwrap();
        for i in 0..19 {
            let gap = base[i + 1] - base[i];
            let gap2 = shifted[i + 1] - shifted[i];
            assert!((gap - gap2).abs() < 1e-10);
        }
        assert!((shifted[0] - base[0] - k).abs() < 1e-10);
    }
}

#[test]
fn box_spectrum_matches_the_stencil_and_the_continuum() {
    let (l, n, m) = (2.0, 400, 1.5);
    let grid = Grid1D::walled(0.0, l, n).unwrap();
    let h = hamiltonian(&HamiltonianSpec::free(m, natural()).unwrap(), grid).unwrap();
    let ev = spectrum(&h, 6).unwrap();
    let kappa = 1.0 / (2.0 * m * grid.dx * grid.dx);
    for (i, e) in ev.iter().enumerate() {
        let k = (i + 1) as f64;
        let stencil = 2.0 * kappa * (1.0 - (k * PI / (n + 1) as f64).cos());
        assert!((e - stencil).abs() < 1e-10 * stencil);
        let continuum = (k * PI / grid.extent()).powi(2) / (2.0 * m);
        // leading discretization error -(k pi dx / L)^2 / 12
        let lead = (k * PI / (n + 1) as f64).powi(2) / 12.0;
        assert!(((continuum - e) / continuum - lead).abs() < 1e-2 * lead);
    }
    // gaps grow as 2n + 1
    let e1 = ev[0];
    for i in 1..5 {
        let gap = (ev[i] - ev[i - 1]) / e1;
        assert!((gap - (2 * i + 1) as f64).abs() < 1e-2);
    }
}

#[test]
fn gauge_equivalence_at_reference_resolution() {
    let grid = Grid1D::walled(-8.0, 8.0, 256).unwrap();
    let spec = gauged_spec();
    let lambda = ScalarField::new(1, |x| x[0] * x[0] * 0.5 + (x[0] * 2.0).sin());
    let psi = WaveFunction::gaussian(grid, -0.5, 0.9, 1.5).unwrap();
    let cn = gauge_equivalence_check(&spec, &lambda, &psi, 1.0, Propagation::CrankNicolson { steps: 1000 }).unwrap();
    assert!(cn.density_gap < 1e-8, "{cn:?}");
    assert!(cn.l2_gap < 1e-8);
    let ex = gauge_equivalence_check(&spec, &lambda, &psi, 1.0, Propagation::Exact).unwrap();
    assert!(ex.density_gap < 1e-8, "{ex:?}");
    // the untransformed state evolved under the shifted potential is a different state
    let h1 = hamiltonian(&spec, grid).unwrap();
    let h2 = hamiltonian(&spec.gauge_shifted(&lambda), grid).unwrap();
    let a = evolve_exact(&h1, &psi, 1.0, 1.0).unwrap();
    let b = evolve_exact(&h2, &psi, 1.0, 1.0).unwrap();
    let gap = a.density().iter().zip(b.density()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(gap > 1e-3);
}

fn path_integral_error(eps: f64, cutoff: Cutoff) -> f64 {
    let grid = Grid1D::periodic(-10.0, 10.0, 16384).unwrap();
    let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 1.0).unwrap();
    let spec = HamiltonianSpec::free(1.0, natural()).unwrap();
    let opts = PathIntegralOptions { cutoff, ..Default::default() };
    let slice = path_integral_step(&spec, &psi, eps, opts).unwrap();
    slice.distance(&spectral_free(&psi, eps, 1.0, 1.0))
}

#[test]
fn path_integral_slice_converges_to_the_free_propagator() {
    let epsilons = [1e-3, 5e-4, 2.5e-4];
    let errs: Vec<f64> = epsilons.iter().map(|&e| path_integral_error(e, Cutoff::Length(0.6))).collect();
    assert!(errs[0] <= 1e-3, "{errs:?}");
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.0, "{errs:?}");
    }
    let default = path_integral_error(1e-3, PathIntegralOptions::default().cutoff);
    assert!(default <= 1e-3, "{default}");
}

#[test]
fn path_integral_slice_applies_the_potential_phase() {
    let grid = Grid1D::periodic(-10.0, 10.0, 8192).unwrap();
    let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 0.0).unwrap();
    let v0 = 2.5;
    let spec = HamiltonianSpec::free(1.0, natural()).unwrap().with_potential(ScalarField::constant(1, v0));
    let free = HamiltonianSpec::free(1.0, natural()).unwrap();
    let eps = 1e-3;
    let a = path_integral_step(&spec, &psi, eps, PathIntegralOptions::default()).unwrap();
    let b = path_integral_step(&free, &psi, eps, PathIntegralOptions::default()).unwrap();
    let phase = Complex64::from_polar(1.0, -eps * v0);
    assert!(a.distance(&b.scaled(phase)) < 1e-13);
    let wide = PathIntegralOptions { cutoff: Cutoff::Length(11.0), ..Default::default() };
    assert!(matches!(path_integral_step(&free, &psi, eps, wide), Err(Error::CutoffTooWide { .. })));
    let coarse = Grid1D::periodic(-10.0, 10.0, 256).unwrap();
    let psi = WaveFunction::gaussian(coarse, 0.0, 1.0, 0.0).unwrap();
    assert!(matches!(
        path_integral_step(&free, &psi, eps, PathIntegralOptions::default()),
        Err(Error::KernelUndersampled { .. })
    ));
}

#[test]
fn commutator_is_second_order_accurate() {
    let err = |n: usize| {
        let grid = Grid1D::walled(-8.0, 8.0, n).unwrap();
        let psi = WaveFunction::gaussian(grid, 0.3, 0.8, 1.0).unwrap();
        let c = commutator_xp(grid, 1.0, &psi);
        let gap: Vec<Complex64> = c.iter().zip(&psi.samples).map(|(a, b)| a - b * Complex64::i()).collect();
        WaveFunction::new(grid, gap).unwrap().norm()
    };
    let (a, b) = (err(200), err(400));
    assert!(a < 1e-2);
    let order = (a / b).log2();
    assert!((order - 2.0).abs() < 0.1, "{order}");
}

#[test]
fn gaussian_spreads_at_the_free_rate() {
    let grid = Grid1D::walled(-15.0, 15.0, 1200).unwrap();
    let (sigma, m) = (0.6, 1.3);
    let psi = WaveFunction::gaussian(grid, 0.0, sigma, 0.5).unwrap();
    let h = hamiltonian(&HamiltonianSpec::free(m, natural()).unwrap(), grid).unwrap();
    let x = position_operator(grid);
    for t in [0.5, 1.5] {
        let out = evolve_cn(&h, &psi, t, 400, 1.0).unwrap();
        let var = variance(&x, &out).re;
        let want = sigma * sigma * (1.0 + (t / (2.0 * m * sigma * sigma)).powi(2));
        assert!((var - want).abs() < 2e-3 * want, "{var} vs {want}");
    }
}

fn random_grid_state(r: &mut impl Rng, grid: Grid1D) -> WaveFunction {
    let samples = (0..grid.n).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    WaveFunction::new(grid, samples).unwrap().normalized().unwrap()
}

#[test]
fn eigenbasis_is_complete() {
    let grid = Grid1D::walled(-4.0, 4.0, 120).unwrap();
    let h = hamiltonian(&gauged_spec(), grid).unwrap();
    let (vals, vecs) = eigenbasis(&h).unwrap();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    let mut r = rng(17);
    let psi = random_grid_state(&mut r, grid);
    let mut rebuilt = vec![Complex64::new(0.0, 0.0); grid.n];
    let mut weight = 0.0;
    for v in &vecs {
        let c = v.inner(&psi);
        weight += c.norm_sqr();
        for (slot, z) in rebuilt.iter_mut().zip(&v.samples) {
            *slot += c * z;
        }
    }
    assert!((weight - 1.0).abs() < 1e-12);
    assert!(WaveFunction::new(grid, rebuilt).unwrap().distance(&psi) < 1e-12);
    for (k, v) in vecs.iter().enumerate().step_by(17) {
        assert!((expectation(&h, v).re - vals[k]).abs() < 1e-10 * (1.0 + vals[k].abs()));
    }
}

#[test]
fn robertson_bound_on_grid_states() {
    let grid = Grid1D::periodic(-5.0, 5.0, 96).unwrap();
    let x = position_operator(grid);
    let p = momentum_operator(grid, 1.0);
    let c = commutator(&x, &p);
    let mut r = rng(23);
    for _ in 0..50 {
        let psi = random_grid_state(&mut r, grid);
        let lhs = variance(&x, &psi).re * variance(&p, &psi).re;
        let rhs = 0.25 * expectation(&c, &psi).norm_sqr();
        assert!(lhs - rhs > -1e-12 * rhs.max(1.0), "{lhs} < {rhs}");
    }
}

fn random_analytic_state(r: &mut impl Rng) -> ScalarField<Complex64> {
    let bumps: Vec<[f64; 5]> = (0..r.gen_range(1..4))
        .map(|_| {
            [
                r.gen_range(0.2..1.0),
                r.gen_range(-2.0..2.0),
                r.gen_range(0.3..1.2),
                r.gen_range(-3.0..3.0),
                r.gen_range(-0.5..0.5),
            ]
        })
        .collect();
    ScalarField::from_jets(1, move |x: &[Jet<Complex64>]| {
        let mut s = Jet::constant(Complex64::new(0.0, 0.0));
        for &[amp, c, w, k, chirp] in &bumps {
            let d = x[0] - c;
            let arg = d * d * Complex64::new(-1.0 / (4.0 * w * w), chirp) + x[0] * Complex64::new(0.0, k);
            s += arg.exp() * amp;
        }
        s
    })
}

#[test]
fn uncertainty_product_bound_and_gaussian_equality() {
    let mut r = rng(29);
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let psi = random_analytic_state(&mut r);
        let u = analytic_uncertainty(&psi, -16.0, 16.0, 400, 1.0).unwrap();
        worst = worst.min(u.slack);
    }
    assert!(worst > -1e-12, "{worst}");
    for (sigma, k0, hbar) in [(0.5, 0.0, 1.0), (1.3, 2.0, 1.0), (0.8, -1.0, 0.3)] {
        let psi = ScalarField::from_jets(1, move |x: &[Jet<Complex64>]| {
            let arg = x[0] * x[0] * Complex64::new(-1.0 / (4.0 * sigma * sigma), 0.0) + x[0] * Complex64::new(0.0, k0);
            arg.exp()
        });
        let u = analytic_uncertainty(&psi, -12.0 * sigma, 12.0 * sigma, 200, hbar).unwrap();
        assert!((u.var_x - sigma * sigma).abs() < 1e-9);
        assert!((u.product - hbar * hbar / 4.0).abs() < 1e-6 * hbar * hbar / 4.0);
    }
}

#[test]
fn aharonov_bohm_period() {
    for e in [1.0, 0.3, 2.5] {
        let units = UnitSystem::natural(e).unwrap();
        let want = 2.0 * PI / e;
        assert!((ab_period(&units) - want).abs() < 1e-15 * want);
        let measured = measure_ab_period(0.6, 0.4, &units, 7.5 * want, 1000).unwrap();
        assert!((measured - want).abs() < 1e-9 * want, "{measured} vs {want}");
        // the probability repeats with the period and swings between (a - b)^2 and (a + b)^2
        let p0 = ab_probability(0.6, 0.4, 0.37, &units).unwrap();
        let p1 = ab_probability(0.6, 0.4, 0.37 + want, &units).unwrap();
        assert!((p0 - p1).abs() < 1e-14);
        assert!((ab_probability(0.6, 0.4, 0.0, &units).unwrap() - 1.0).abs() < 1e-15);
        assert!((ab_probability(0.6, 0.4, 0.5 * want, &units).unwrap() - 0.04).abs() < 1e-14);
    }
    let cgs = UnitSystem::gaussian_cgs();
    let period = ab_period(&cgs);
    assert!((period - 4.135e-7).abs() < 1e-3 * 4.135e-7, "{period}");
    let measured = measure_ab_period(0.5, 0.5, &cgs, 5.0 * period, 500).unwrap();
    assert!((measured - period).abs() < 1e-9 * period);
}
