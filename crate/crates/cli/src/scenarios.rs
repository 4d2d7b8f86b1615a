use std::f64::consts::{FRAC_PI_2, PI};

use gauge_forms::bundle::{connection_apply, curvature_commutator, horizontal_basis, split_determinant, BundlePoint, ConnectionForm};
use gauge_forms::chartcalc::{Curve, Jet, ScalarField, UnitSystem};
use gauge_forms::geometry::{
    coordinate_acceleration, effective_light_speed, geodesic_polygon, holonomy_angle, jacobi_deviation,
    parallel_transport, weak_field_metric, GeodesicState, MetricField, SphereFrame, StepControl,
};
use gauge_forms::maxwell::{
    assemble_f, homogeneous_residual, inhomogeneous_residual, laplace_solve, plane_wave, radial_divergence_test,
    EMField, FourPotential, LaplaceProblem, SampleLattice, SourceConvention, SourceDensity,
};
use gauge_forms::mechanics::{integrate_with_energy_guard, noether_charge, LagrangianSpec, Symmetry};
use gauge_forms::numerics::d2_five_point;
use gauge_forms::quantum::{
    ab_period, ab_probability, evolve_cn, evolve_exact, gauge_equivalence_check, gauge_transform, hamiltonian,
    measure_ab_period_on, Grid1D, HamiltonianSpec, Propagation, WaveFunction,
};
use gauge_forms::relativity::{compose, interval2, Boost, CompositionLaw, FourVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::params::{config_err, Params};
use crate::report::Check;

pub struct Series {
    pub file: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    fn new(file: &'static str, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Series {
            file,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }
}

pub struct Outcome {
    pub checks: Vec<Check>,
    pub series: Vec<Series>,
}

pub struct Context {
    pub seed: u64,
    pub monopole: bool,
}

type Runner = fn(&mut Params, &Context) -> anyhow::Result<Outcome>;

pub const SCENARIOS: [(&str, Runner); 11] = [
    ("maxwell-vacuum", maxwell_vacuum),
    ("coulomb-divergence", coulomb_divergence),
    ("shielding", shielding),
    ("relativity-group", relativity_group),
    ("noether-orbit", noether_orbit),
    ("sphere-holonomy", sphere_holonomy),
    ("jacobi-sphere", jacobi_sphere),
    ("weak-field", weak_field),
    ("quantum-gauge", quantum_gauge),
    ("ab-scan", ab_scan),
    ("bundle-commutator", bundle_commutator),
];

pub fn lookup(name: &str) -> Option<Runner> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}

fn maxwell_vacuum(p: &mut Params, ctx: &Context) -> anyhow::Result<Outcome> {
    let e0 = p.f64("e0", 1.0)?;
    let c = p.positive("c", 1.0)?;
    let points = p.usize("points", 5)?;
    let half = p.positive("half-width", 1.0)?;
    let tol = p.positive("tol", 1e-10)?;
    p.finish()?;
    if points < 2 {
        return Err(config_err("--points must be at least 2"));
    }
    let lattice = SampleLattice::cube([0.0; 4], half, points);
    let mut checks = Vec::new();
    let mut waves = Vec::new();
    for (label, sign) in [("+x", 1.0), ("-x", -1.0)] {
        let mut em = plane_wave(e0, sign, c)?;
        if ctx.monopole {
            // uniform magnetic charge density: div B = 1
            let b: [ScalarField; 3] = std::array::from_fn(|i| &em.b[i] + &ScalarField::coordinate(4, i + 1).scale(1.0 / 3.0));
            em = EMField::new(em.e.clone(), b)?;
        }
        let f = assemble_f(&em, c)?;
        let h = homogeneous_residual(&f, &lattice)?;
        let s = inhomogeneous_residual(&f, &SourceDensity::vacuum(), SourceConvention::Gaussian, &lattice)?;
        checks.push(Check::below(&format!("dF = 0, wave along {label}"), h.sup, tol));
        checks.push(Check::below(&format!("d*F = 0, wave along {label}"), s.sup, tol));
        waves.push(em);
    }
    let rows = (0..=40)
        .map(|i| {
            let x = -half + 2.0 * half * i as f64 / 40.0;
            let at = [0.0, x, 0.0, 0.0];
            let mut row = vec![x];
            for em in &waves {
                row.push(em.e_at(&at).map_or(f64::NAN, |e| e[1]));
                row.push(em.b_at(&at).map_or(f64::NAN, |b| b[2]));
            }
            row
        })
        .collect();
    Ok(Outcome {
        checks,
        series: vec![Series::new("wave.csv", &["x", "ey_plus", "bz_plus", "ey_minus", "bz_minus"], rows)],
    })
}

fn coulomb_divergence(p: &mut Params, _: &Context) -> anyhow::Result<Outcome> {
    let exponent = p.f64("p", 0.01)?;
    let k = p.f64("k", 1.0)?;
    let count = p.usize("radii", 20)?;
    let r_min = p.positive("r-min", 0.2)?;
    let ratio = p.positive("ratio", 1.3)?;
    let tol = p.positive("tol", 1e-9)?;
    let zero_tol = p.positive("zero-tol", 1e-12)?;
    p.finish()?;
    if count == 0 || k == 0.0 {
        return Err(config_err("need at least one radius and a non-zero charge"));
    }
    let radii: Vec<f64> = (0..count).map(|i| r_min * ratio.powi(i as i32)).collect();
    let flat = radial_divergence_test(0.0, k, &radii)?;
    let mut checks = vec![Check::below("divergence of the inverse-square field", flat.max_abs_divergence, zero_tol)];
    let rep = radial_divergence_test(exponent, k, &radii)?;
    if exponent != 0.0 {
        checks.push(Check::below("relative error vs -p k r^(-3-p)", rep.max_rel_error, tol));
    }
    let rows = rep.samples.iter().map(|s| vec![s.radius, s.divergence, s.closed_form, s.rel_error]).collect();
    Ok(Outcome {
        checks,
        series: vec![Series::new("divergence.csv", &["radius", "divergence", "closed_form", "rel_error"], rows)],
    })
}

fn shielding(p: &mut Params, _: &Context) -> anyhow::Result<Outcome> {
    let n = p.usize("n", 64)?;
    let potential = p.f64("potential", 0.7)?;
    let shield = p.positive("shield-tol", 1e-6)?;
    let relax = p.positive("relax-tol", 1e-13)?;
    p.finish()?;
    if n < 16 {
        return Err(config_err("--n must be at least 16"));
    }
    let h = 1.0 / (n - 1) as f64;
    let mut prob = LaplaceProblem::new(&[n, n], h)?;
    prob.set_boundary(|i| {
        let (x, y) = (i[0] as f64 * h, i[1] as f64 * h);
        (3.0 * x).sin() + (2.0 * y + 0.5).cos() * 2.0
    });
    let (lo, hi) = (n / 3, 2 * n / 3);
    let cavity = move |k: usize| k > lo + 1 && k < hi - 1;
    prob.set_conductor(
        move |i| {
            let inside = |k: usize| k >= lo && k <= hi;
            inside(i[0]) && inside(i[1]) && !(cavity(i[0]) && cavity(i[1]))
        },
        potential,
    );
    prob.tol = relax;
    let sol = laplace_solve(&prob)?;
    let interior = sol.max_gradient_in(|i| i.iter().all(|&k| cavity(k)));
    let outside = sol.max_gradient_in(|i| i.iter().any(|&k| k < lo || k > hi));
    // the conductor corners are singular; the O(h^2) mean-value bound is checked away from them
    let away = |i: &[usize]| {
        let dist = |k: usize| if k < lo { lo - k } else if k > hi { k - hi } else { 0 };
        i.iter().any(|&k| k < lo || k > hi) && dist(i[0]).max(dist(i[1])) > 4
    };
    let checks = vec![
        Check::below("cavity field / outside field", interior / outside, shield),
        Check::below("max-principle violation", sol.max_principle_violation(), 0.0),
        Check::below("mean-value defect outside the conductor", sol.mean_value_defect_in(away), h * h),
        Check::below("mean-value defect in the cavity", sol.mean_value_defect_in(|i| i.iter().all(|&k| cavity(k))), 1e-10),
    ];
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            rows.push(vec![i as f64 * h, j as f64 * h, sol.at(&[i, j])]);
        }
    }
    Ok(Outcome {
        checks,
        series: vec![Series::new("potential.csv", &["x", "y", "phi"], rows)],
    })
}

fn relativity_group(p: &mut Params, ctx: &Context) -> anyhow::Result<Outcome> {
    let c = p.positive("c", 1.0)?;
    let triples = p.usize("triples", 10_000)?;
    let boosts = p.usize("boosts", 1000)?;
    let fixed_tol = p.positive("fixed-tol", 1e-15)?;
    let assoc_tol = p.positive("assoc-tol", 1e-13)?;
    let interval_tol = p.positive("interval-tol", 1e-12)?;
    p.finish()?;
    let mut r = ChaCha8Rng::seed_from_u64(ctx.seed);
    let law = CompositionLaw::from_c(c)?;
    let mut fixed: f64 = 0.0;
    for _ in 0..1000 {
        let v = r.gen_range(-0.999..0.999) * c;
        fixed = fixed.max((compose(c, v, &law)? - c).abs() / c);
    }
    let mut assoc: f64 = 0.0;
    for _ in 0..triples {
        let [u, v, w]: [f64; 3] = std::array::from_fn(|_| r.gen_range(-0.99..0.99) * c);
        let a = compose(compose(u, v, &law)?, w, &law)?;
        let b = compose(u, compose(v, w, &law)?, &law)?;
        assoc = assoc.max((a - b).abs() / c);
    }
    let mut inv: f64 = 0.0;
    for _ in 0..boosts {
        let b = Boost::new(r.gen_range(-0.9..0.9) * c, c)?;
        let e1 = FourVector(std::array::from_fn(|_| r.gen_range(-5.0..5.0)));
        let e2 = FourVector(std::array::from_fn(|_| r.gen_range(-5.0..5.0)));
        let size: f64 = (0..4).map(|i| (e2.0[i] - e1.0[i]).powi(2)).sum();
        inv = inv.max((interval2(&e1, &e2) - interval2(&b.apply(&e1), &b.apply(&e2))).abs() / size);
    }
    let checks = vec![
        Check::below("|compose(c, v) - c| / c", fixed, fixed_tol),
        Check::below("associativity defect / c", assoc, assoc_tol),
        Check::below("interval change / size", inv, interval_tol),
    ];
    let galilean = CompositionLaw::galilean();
    let rows = (0..=198)
        .map(|i| {
            let u = (-0.99 + 0.01 * i as f64) * c;
            let w = compose(u, 0.5 * c, &law).unwrap_or(f64::NAN);
            vec![u, w, compose(u, 0.5 * c, &galilean).unwrap_or(f64::NAN)]
        })
        .collect();
    Ok(Outcome {
        checks,
        series: vec![Series::new("composition.csv", &["u", "u_plus_half_c", "galilean"], rows)],
    })
}

fn noether_orbit(p: &mut Params, _: &Context) -> anyhow::Result<Outcome> {
    let r0 = p.positive("r0", 1.0)?;
    let vt = p.positive("vt", 1.2)?;
    let periods = p.positive("periods", 10.0)?;
    let step = p.positive("step", 0.02)?;
    let energy_tol = p.positive("energy-tol", 1e-8)?;
    let drift_tol = p.positive("drift-tol", 1e-6)?;
    p.finish()?;
    let binding = 2.0 / r0 - vt * vt;
    if binding <= 0.0 {
        return Err(config_err("orbit is unbound: need vt^2 < 2 / r0"));
    }
    let l = LagrangianSpec::new(2, |q, v, _| {
        let r = q[0];
        (v[0] * v[0] + r * r * v[1] * v[1]) * 0.5 + r.recip()
    })?;
    let period = 2.0 * PI * binding.recip().powf(1.5);
    let run = integrate_with_energy_guard(&l, &[r0, 0.0], &[0.0, vt / r0], 0.0, periods * period, step, energy_tol, 12)?;
    let path = &run.trajectory;
    let sym = Symmetry::translation(1);
    let l0 = noether_charge(&l, &sym, path, 0)?;
    let mut rows = Vec::with_capacity(path.len());
    let mut drift: f64 = 0.0;
    for i in 0..path.len() {
        let li = noether_charge(&l, &sym, path, i)?;
        drift = drift.max((li - l0).abs() / l0);
        rows.push(vec![path.times[i], path.q[i][0], path.q[i][1], path.qdot[i][0], path.qdot[i][1], li]);
    }
    let turns = path.q.last().map_or(0.0, |q| q[1] / (2.0 * PI));
    let checks = vec![
        Check::below("angular momentum relative drift", drift, drift_tol),
        Check::below("energy relative drift", run.energy_drift, energy_tol),
        Check::abs("revolutions", turns, periods, 1e-3 * periods),
    ];
    Ok(Outcome {
        checks,
        series: vec![Series::new("orbit.csv", &["t", "r", "theta", "rdot", "thetadot", "p_theta"], rows)],
    })
}

fn square_loop(eps: f64) -> anyhow::Result<Vec<Curve>> {
    // geodesic square of side eps around (1, 0, 0), through the exponential map
    let h = 0.5 * eps;
    let verts: Vec<[f64; 3]> = [(-h, -h), (h, -h), (h, h), (-h, h)]
        .iter()
        .map(|&(u, v): &(f64, f64)| {
            let r = (u * u + v * v).sqrt();
            [r.cos(), r.sin() / r * v, -r.sin() / r * u]
        })
        .collect();
    Ok(geodesic_polygon(&SphereFrame::standard(), &verts)?)
}

fn transport_rows(g: &MetricField, lp: &[Curve], ctl: StepControl) -> anyhow::Result<Vec<Vec<f64>>> {
    let (_, mut x) = lp[0].point_and_velocity(0.0);
    let mut rows = Vec::new();
    for (k, c) in lp.iter().enumerate() {
        let hist = parallel_transport(g, &x, c, (0.0, 1.0), ctl)?;
        for i in 0..hist.len() {
            let mut row = vec![k as f64, hist.s[i]];
            row.extend(&hist.position[i]);
            row.extend(&hist.vector[i]);
            rows.push(row);
        }
        x = hist.last_vector().to_vec();
    }
    Ok(rows)
}

fn sphere_holonomy(p: &mut Params, _: &Context) -> anyhow::Result<Outcome> {
    let shape = p.choice("loop", "octant", &["octant", "plane", "square"])?;
    let step = p.positive("step", 1e-3)?;
    let eps = p.positive("eps", 0.1)?;
    let default_tol = match shape.as_str() {
        "octant" => 1e-6,
        "plane" => 1e-10,
        _ => 1e-3,
    };
    let tol = p.positive("tol", default_tol)?;
    p.finish()?;
    let ctl = StepControl::new(step);
    let sphere = MetricField::sphere(1.0)?;
    let (checks, metric, lp) = match shape.as_str() {
        "octant" => {
            let frame = SphereFrame::new([1.0, 1.0, -1.0], [1.0, 1.0, 1.0])?;
            let lp = geodesic_polygon(&frame, &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])?;
            let angle = holonomy_angle(&sphere, &lp, ctl)?;
            (vec![Check::abs("octant holonomy angle", angle, FRAC_PI_2, tol)], sphere, lp)
        }
        "plane" => {
            let circle = Curve::new(2, |t| {
                let a = t * (2.0 * PI);
                let x = a.cos() + 2.0;
                let y = a.sin();
                vec![(x * x + y * y).sqrt(), y.atan2(&x)]
            });
            let polar = MetricField::polar()?;
            let angle = holonomy_angle(&polar, std::slice::from_ref(&circle), ctl)?;
            (vec![Check::abs("plane loop holonomy angle", angle, 0.0, tol)], polar, vec![circle])
        }
        _ => {
            let ratio = |e: f64| -> anyhow::Result<f64> { Ok(holonomy_angle(&sphere, &square_loop(e)?, ctl)? / (e * e)) };
            let (coarse, fine) = (ratio(eps)?, ratio(0.5 * eps)?);
            let k = (4.0 * fine - coarse) / 3.0;
            let lp = square_loop(eps)?;
            (vec![Check::abs("extrapolated angle / area", k, 1.0, tol)], sphere, lp)
        }
    };
    let rows = transport_rows(&metric, &lp, ctl)?;
    Ok(Outcome {
        checks,
        series: vec![Series::new("transport.csv", &["edge", "s", "x0", "x1", "v0", "v1"], rows)],
    })
}

fn jacobi_sphere(p: &mut Params, _: &Context) -> anyhow::Result<Outcome> {
    let theta = p.positive("theta", 0.2)?;
    let length = p.positive("length", PI - 0.1)?;
    let step = p.positive("step", 1e-3)?;
    let tol = p.positive("tol", 1e-6)?;
    let k_tol = p.positive("k-tol", 1e-5)?;
    p.finish()?;
    if length >= PI || length < 20.0 * step {
        return Err(config_err("--length must be below pi and span at least 20 steps"));
    }
    let sphere = MetricField::sphere(1.0)?;
    let ics = GeodesicState::new(&[FRAC_PI_2, 0.0], &[0.0, 1.0]);
    let j = jacobi_deviation(&sphere, &ics, 0.0, theta, length, step)?;
    let sup = j.s.iter().zip(&j.y).map(|(s, y)| (y - theta * s.sin()).abs()).fold(0.0, f64::max);
    let h = j.s[1] - j.s[0];
    let mut k_err: f64 = 0.0;
    for i in 2..j.s.len() - 2 {
        if let (true, Some(ypp)) = (j.y[i].abs() > 0.05 * theta, d2_five_point(&j.y, i, h)) {
            k_err = k_err.max((-ypp / j.y[i] - 1.0).abs());
        }
    }
    let rows = j.s.iter().zip(&j.y).map(|(&s, &y)| vec![s, y, theta * s.sin()]).collect();
    Ok(Outcome {
        checks: vec![
            Check::below("sup |y - theta sin s|", sup, tol),
            Check::below("|K from -y''/y - 1|", k_err, k_tol),
        ],
        series: vec![Series::new("jacobi.csv", &["s", "y", "theta_sin_s"], rows)],
    })
}

fn weak_field(p: &mut Params, _: &Context) -> anyhow::Result<Outcome> {
    let phi_a = p.positive("phi-a", 1e-2)?;
    let phi_b = p.positive("phi-b", 1e-3)?;
    let coef_tol = p.positive("coef-tol", 0.02)?;
    let g0 = p.positive("g0", 1e-3)?;
    let curv = p.f64("k", 0.5)?;
    let v = p.positive("v", 1e-3)?;
    let order_factor = p.positive("order-factor", 4.0)?;
    p.finish()?;
    if phi_a >= 0.5 || phi_b >= 0.5 {
        return Err(config_err("potentials must stay below 1/2"));
    }
    let speed = |phi: f64| -> anyhow::Result<f64> {
        let g = weak_field_metric(&ScalarField::constant(4, phi))?;
        Ok(effective_light_speed(&g, &[0.0; 4])?)
    };
    let mut checks = Vec::new();
    for (label, phi) in [("a", phi_a), ("b", phi_b)] {
        let coef = (speed(phi)? - (1.0 - phi)) / (phi * phi);
        checks.push(Check::abs(&format!("phi^2 coefficient of c(phi) - (1 - phi), phi_{label}"), coef, -0.5, coef_tol));
    }
    let phi = ScalarField::new(4, move |x| (x[1] + x[1] * x[1] * curv) * g0);
    let g = weak_field_metric(&phi)?;
    let mut worst: f64 = 0.0;
    for x in [0.0, 0.4, -0.7] {
        let here: f64 = g0 * (x + curv * x * x);
        let u0 = 1.0 / (1.0 - 2.0 * here - v * v).sqrt();
        let acc = coordinate_acceleration(&g, &[0.0, x, 0.0, 0.0], &[u0, u0 * v, 0.0, 0.0])?;
        let grad = g0 * (1.0 + 2.0 * curv * x);
        worst = worst.max((acc[0] - grad).abs() / (grad.abs() * (here.abs() + v * v)));
    }
    checks.push(Check::below("slow geodesic remainder / |grad phi| (phi + v^2)", worst, order_factor));
    let rows = (0..=30)
        .map(|i| {
            let phi = 10f64.powf(-4.0 + 0.1 * i as f64);
            vec![phi, speed(phi).unwrap_or(f64::NAN), 1.0 - phi]
        })
        .collect();
    Ok(Outcome {
        checks,
        series: vec![Series::new("light_speed.csv", &["phi", "c_eff", "one_minus_phi"], rows)],
    })
}

fn quantum_gauge(p: &mut Params, _: &Context) -> anyhow::Result<Outcome> {
    let n = p.usize("n", 256)?;
    let half = p.positive("half-width", 8.0)?;
    let t = p.positive("t", 1.0)?;
    let steps = p.usize("steps", 1000)?;
    let route = p.choice("route", "cn", &["cn", "exact"])?;
    let e = p.positive("e", 0.7)?;
    let tol = p.positive("tol", 1e-8)?;
    p.finish()?;
    if n < 8 || steps == 0 {
        return Err(config_err("--n must be at least 8 and --steps positive"));
    }
    let grid = Grid1D::walled(-half, half, n)?;
    let spec = HamiltonianSpec::free(1.0, UnitSystem::natural(e)?)?
        .with_potential(ScalarField::new(1, |x| x[0] * x[0] * 0.05))
        .with_vector_potential(ScalarField::new(1, |x| x[0].sin() * 0.3 + 0.1));
    let lambda = ScalarField::new(1, |x| x[0] * x[0] * 0.5 + (x[0] * 2.0).sin());
    let psi = WaveFunction::gaussian(grid, -0.5, 0.9, 1.5)?;
    let how = if route == "cn" { Propagation::CrankNicolson { steps } } else { Propagation::Exact };
    let rep = gauge_equivalence_check(&spec, &lambda, &psi, t, how)?;
    let evolve = |s: &HamiltonianSpec, w: &WaveFunction| -> anyhow::Result<WaveFunction> {
        let h = hamiltonian(s, grid)?;
        Ok(match how {
            Propagation::Exact => evolve_exact(&h, w, t, 1.0)?,
            Propagation::CrankNicolson { steps } => evolve_cn(&h, w, t, steps, 1.0)?,
        })
    };
    let plain = evolve(&spec, &psi)?;
    let route1 = gauge_transform(&spec, &lambda, &plain)?;
    let route2 = evolve(&spec.gauge_shifted(&lambda), &gauge_transform(&spec, &lambda, &psi)?)?;
    let checks = vec![
        Check::below("max density gap between routes", rep.density_gap, tol),
        Check::below("L2 gap between routes", rep.l2_gap, tol),
        Check::below("norm drift", (plain.norm() - 1.0).abs(), 1e-10),
    ];
    let (d1, d2) = (route1.density(), route2.density());
    let rows = (0..n).map(|j| vec![grid.x(j), d1[j], d2[j]]).collect();
    Ok(Outcome {
        checks,
        series: vec![Series::new("density.csv", &["x", "transform_after", "transform_before"], rows)],
    })
}

fn ab_scan(p: &mut Params, _: &Context) -> anyhow::Result<Outcome> {
    let system = p.choice("units", "natural", &["natural", "cgs"])?;
    let e = p.positive("e", 1.0)?;
    let units = if system == "natural" { UnitSystem::natural(e)? } else { UnitSystem::gaussian_cgs() };
    // oracle: 2 pi hbar c / e straight from the unit constants
    let period = 2.0 * PI * units.hbar * units.c / units.e;
    let a = p.positive("a", 0.6)?;
    let b = p.positive("b", 0.4)?;
    let lo = p.scaled("flux-min", 0.0, period)?;
    let hi = p.scaled("flux-max", 7.5, period)?;
    let samples = p.usize("samples", 1000)?;
    let tol = p.positive("tol", 1e-9)?;
    p.finish()?;
    if hi <= lo || samples < 4 {
        return Err(config_err("need --flux-max > --flux-min and at least 4 samples"));
    }
    let measured = measure_ab_period_on(a, b, &units, (lo, hi), samples)?;
    let mut checks = vec![
        Check::rel("flux period from crossings", measured, period, tol),
        Check::rel("closed-form period", ab_period(&units), period, 1e-15),
    ];
    if system == "cgs" {
        checks.push(Check::rel("period in gauss cm^2", period, 4.135e-7, 1e-3));
    }
    let rows = (0..=samples)
        .map(|i| {
            let flux = lo + (hi - lo) * i as f64 / samples as f64;
            vec![flux, ab_probability(a, b, flux, &units).unwrap_or(f64::NAN)]
        })
        .collect();
    Ok(Outcome {
        checks,
        series: vec![Series::new("scan.csv", &["flux", "probability"], rows)],
    })
}

fn random_poly(r: &mut impl Rng, degree: u32, nterms: usize) -> ScalarField {
    let terms: Vec<(f64, [u32; 4])> = (0..nterms)
        .map(|_| {
            let mut left = degree;
            let mut pows = [0u32; 4];
            for p in pows.iter_mut() {
                *p = r.gen_range(0..=left);
                left -= *p;
            }
            pows.rotate_left(r.gen_range(0..4));
            (r.gen_range(-1.0..1.0), pows)
        })
        .collect();
    ScalarField::new(4, move |x| {
        let mut s = Jet::constant(0.0);
        for (c, pows) in &terms {
            let mut t = Jet::constant(*c);
            for (k, &e) in pows.iter().enumerate() {
                if e > 0 {
                    t = t * x[k].powi(e as i32);
                }
            }
            s += t;
        }
        s
    })
}

fn bundle_commutator(p: &mut Params, ctx: &Context) -> anyhow::Result<Outcome> {
    let points = p.usize("points", 100)?;
    let degree = p.usize("degree", 3)?;
    let e = p.f64("e", 1.0)?;
    let tol = p.positive("tol", 1e-10)?;
    let h_tol = p.positive("horizontal-tol", 1e-12)?;
    p.finish()?;
    if points == 0 || degree > 6 {
        return Err(config_err("need at least one point and --degree at most 6"));
    }
    let mut r = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (mut comm, mut horiz, mut split): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut rows = Vec::with_capacity(points);
    for _ in 0..points {
        let pot = FourPotential::from_components(std::array::from_fn(|_| random_poly(&mut r, degree as u32, 5)))?;
        let re = random_poly(&mut r, degree as u32, 5).complexify();
        let im = random_poly(&mut r, degree as u32, 5).complexify();
        let psi = &re + &im.scale(Complex64::i());
        let w = ConnectionForm::new(pot, e);
        let x: [f64; 4] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let size = 1.0 + psi.value(&x)?.norm();
        let mut here: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                here = here.max(curvature_commutator(&w, &psi, mu, nu, &x)?.norm() / size);
            }
        }
        comm = comm.max(here);
        let at = BundlePoint::new(x, r.gen_range(0.0..2.0 * PI));
        for mu in 0..4 {
            horiz = horiz.max(connection_apply(&w, &horizontal_basis(&w, &at, mu)?, &at)?.norm());
        }
        split = split.max((split_determinant(&w, &at)? - 1.0).abs());
        rows.push(vec![x[0], x[1], x[2], x[3], here]);
    }
    let checks = vec![
        Check::below("[D_mu, D_nu] psi + i e F_mu_nu psi, relative", comm, tol),
        Check::below("connection on horizontal basis", horiz, h_tol),
        Check::below("|split determinant - 1|", split, 1e-12),
    ];
    Ok(Outcome {
        checks,
        series: vec![Series::new("residuals.csv", &["t", "x", "y", "z", "residual"], rows)],
    })
}
