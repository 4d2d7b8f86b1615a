//! The trivial U(1) bundle R^4 x U(1) with connection
//! omega = -i e A_mu dx^mu + d theta. Units with hbar = 1.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::chartcalc::{Chart, Jet, ScalarField};
use crate::error::{Error, Result};
use crate::exterior::{d, KForm};
use crate::maxwell::{field_tensor, FourPotential, SampleLattice};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BundlePoint {
    pub base: [f64; 4],
    theta: f64,
}

impl BundlePoint {
    pub fn new(base: [f64; 4], theta: f64) -> Self {
        BundlePoint {
            base,
            theta: theta.rem_euclid(TAU),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// x^mu d/dx^mu + i K d/dtheta; only the real K is stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BundleTangent {
    pub base: [f64; 4],
    k: f64,
}

impl BundleTangent {
    pub fn new(base: [f64; 4], k: f64) -> Self {
        BundleTangent { base, k }
    }

    pub fn vertical(k: f64) -> Self {
        BundleTangent { base: [0.0; 4], k }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// The fibre coefficient i K.
    pub fn fiber(&self) -> Complex64 {
        I * self.k
    }

    pub fn add(&self, other: &BundleTangent) -> BundleTangent {
        let mut base = self.base;
        for (a, b) in base.iter_mut().zip(other.base) {
            *a += b;
        }
        BundleTangent { base, k: self.k + other.k }
    }
}

#[derive(Clone, Debug)]
pub struct ConnectionForm {
    pub a: FourPotential,
    pub e: f64,
}

impl ConnectionForm {
    pub fn new(a: FourPotential, e: f64) -> Self {
        ConnectionForm { a, e }
    }

    fn potential_at(&self, p: &[f64; 4]) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (mu, slot) in out.iter_mut().enumerate() {
            *slot = self.a.component(mu).value(p)?;
        }
        Ok(out)
    }

    /// omega as a complex 1-form on the (t, x, y, z, theta) chart.
    pub fn as_form(&self) -> Result<KForm<Complex64>> {
        let chart = bundle_chart();
        let mut comps: Vec<ScalarField<Complex64>> = (0..4)
            .map(|mu| lift(&self.a.component(mu).complexify()).scale(-I * self.e))
            .collect();
        comps.push(ScalarField::constant(5, Complex64::new(1.0, 0.0)));
        KForm::one_form(&chart, comps)
    }
}

/// Chart (t, x, y, z, theta) of the total space.
pub fn bundle_chart() -> Chart {
    Chart::new(&["t", "x", "y", "z", "theta"], &[-1, 1, 1, 1, 1]).expect("valid chart")
}

fn lift(f: &ScalarField<Complex64>) -> ScalarField<Complex64> {
    let f = f.clone();
    ScalarField::from_eval(5, move |p: &[f64], order| {
        if p.len() != 5 {
            return Err(Error::DimensionMismatch { expected: 5, got: p.len() });
        }
        Ok(f.jet(&p[..4], order)?.widen(5))
    })
}

/// omega(X) = i(-e A_mu x^mu + K).
pub fn connection_apply(w: &ConnectionForm, x: &BundleTangent, at: &BundlePoint) -> Result<Complex64> {
    let a = w.potential_at(&at.base)?;
    let s: f64 = a.iter().zip(&x.base).map(|(a, v)| a * v).sum();
    Ok(I * (x.k - w.e * s))
}

/// d/dx^mu + i e A_mu d/dtheta.
pub fn horizontal_basis(w: &ConnectionForm, at: &BundlePoint, mu: usize) -> Result<BundleTangent> {
    if mu >= 4 {
        return Err(Error::InvalidIndex(vec![mu]));
    }
    let a = w.potential_at(&at.base)?;
    let mut base = [0.0; 4];
    base[mu] = 1.0;
    Ok(BundleTangent::new(base, w.e * a[mu]))
}

/// (vertical, horizontal) parts of X.
pub fn horizontal_decompose(w: &ConnectionForm, x: &BundleTangent, at: &BundlePoint) -> Result<(BundleTangent, BundleTangent)> {
    let a = w.potential_at(&at.base)?;
    let lifted: f64 = a.iter().zip(&x.base).map(|(a, v)| a * v).sum::<f64>() * w.e;
    Ok((BundleTangent::vertical(x.k - lifted), BundleTangent::new(x.base, lifted)))
}

/// Determinant of the 5 x 5 matrix of the horizontal basis plus d/dtheta.
pub fn split_determinant(w: &ConnectionForm, at: &BundlePoint) -> Result<f64> {
    let mut m = DMatrix::<f64>::zeros(5, 5);
    for mu in 0..4 {
        let h = horizontal_basis(w, at, mu)?;
        for i in 0..4 {
            m[(i, mu)] = h.base[i];
        }
        m[(4, mu)] = h.k;
    }
    m[(4, 4)] = 1.0;
    Ok(m.determinant())
}

fn potential_jets(w: &ConnectionForm, pj: &[Jet]) -> Result<Vec<Jet<Complex64>>> {
    (0..4).map(|mu| Ok(w.a.component(mu).eval_jets(pj)?.to_complex())).collect()
}

fn d_mu(psi: &Jet<Complex64>, a: &[Jet<Complex64>], e: f64, mu: usize) -> Jet<Complex64> {
    psi.partial(mu) + a[mu] * *psi * (I * e)
}

fn check_psi(psi: &ScalarField<Complex64>, axes: &[usize]) -> Result<()> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: psi.dim() });
    }
    if let Some(&bad) = axes.iter().find(|&&m| m >= 4) {
        return Err(Error::InvalidIndex(vec![bad]));
    }
    Ok(())
}

/// (d_mu + i e A_mu) psi at p.
pub fn covariant_derivative(w: &ConnectionForm, psi: &ScalarField<Complex64>, mu: usize, p: &[f64]) -> Result<Complex64> {
    check_psi(psi, &[mu])?;
    let pj = Jet::variables(p, 1);
    let a = potential_jets(w, &pj)?;
    let pc: Vec<Complex64> = p.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let s = psi.eval_jets(&Jet::variables(&pc, 1))?;
    Ok(d_mu(&s, &a, w.e, mu).value())
}

/// D_mu D_nu psi - D_nu D_mu psi + i e F_{mu nu} psi with
/// F_{mu nu} = d_nu A_mu - d_mu A_nu, i.e. the field tensor read as F(d_nu, d_mu).
pub fn curvature_commutator(w: &ConnectionForm, psi: &ScalarField<Complex64>, mu: usize, nu: usize, p: &[f64]) -> Result<Complex64> {
    check_psi(psi, &[mu, nu])?;
    let pj = Jet::variables(p, 2);
    let a = potential_jets(w, &pj)?;
    let pc: Vec<Complex64> = p.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let s = psi.eval_jets(&Jet::variables(&pc, 2))?;
    let dn = d_mu(&s, &a, w.e, nu);
    let dm = d_mu(&s, &a, w.e, mu);
    let comm = d_mu(&dn, &a, w.e, mu).value() - d_mu(&dm, &a, w.e, nu).value();
    let f = field_tensor(&w.a)?;
    let f_mu_nu = if mu == nu { 0.0 } else { -f.component_at(&[mu, nu], p)? };
    Ok(comm + I * w.e * f_mu_nu * s.value())
}

/// d omega on the total space; equals -i e F with F = dA.
pub fn curvature_form(w: &ConnectionForm) -> Result<KForm<Complex64>> {
    d(&w.as_form()?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransitionReport {
    /// sup |A - A' - d phi| over the lattice
    pub potential_residual: f64,
    /// sup |dA - dA'| over the lattice
    pub curvature_residual: f64,
    pub compatible: bool,
}

/// Checks A = A' + d phi on a sampling lattice.
pub fn transition_check(a: &FourPotential, a2: &FourPotential, phi: &ScalarField, lattice: &SampleLattice) -> Result<TransitionReport> {
    let dphi = d(&KForm::scalar(&crate::chartcalc::Chart::minkowski(), phi.clone())?)?;
    let gap = a.form().sub(a2.form())?.sub(&dphi)?;
    let curv = d(a.form())?.sub(&d(a2.form())?)?;
    let (mut r1, mut r2, mut scale) = (0.0f64, 0.0f64, 0.0f64);
    for p in lattice.iter() {
        r1 = r1.max(gap.max_abs_at(&p)?);
        r2 = r2.max(curv.max_abs_at(&p)?);
        scale = scale.max(a.form().max_abs_at(&p)?);
    }
    Ok(TransitionReport {
        potential_residual: r1,
        curvature_residual: r2,
        compatible: r1 <= 1e-10 * scale.max(1.0),
    })
}
