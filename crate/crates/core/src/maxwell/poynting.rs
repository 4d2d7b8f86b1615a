use serde::Serialize;

use super::{EMField, SourceDensity};
use crate::error::{Error, Result};
use crate::numerics::gauss5_nodes;

/// Axis-aligned box in space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoxRegion {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

/// Medium constants, region and quadrature resolution for the energy budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoyntingSpec {
    pub mu: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub region: BoxRegion,
    /// Gauss-Legendre cells per axis.
    pub cells: usize,
}

impl PoyntingSpec {
    pub fn vacuum(region: BoxRegion) -> Self {
        PoyntingSpec {
            mu: 1.0,
            epsilon: 1.0,
            sigma: 0.0,
            kappa: 1.0,
            region,
            cells: 6,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("epsilon", self.epsilon), ("kappa", self.kappa)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidParameter("sigma must be non-negative".into()));
        }
        let r = &self.region;
        if (0..3).any(|i| !(r.upper[i] > r.lower[i])) {
            return Err(Error::InvalidParameter("degenerate region".into()));
        }
        Ok(())
    }
}

/// The four Poynting terms with their signed meaning:
/// active = -kappa int E.J_a, dissipation = -int sigma |E|^2,
/// field_energy_rate = d/dt int (mu |B|^2 + eps |E|^2)/2, surface_flux = oint E x B . n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoyntingBudget {
    pub time: f64,
    pub active_power: f64,
    pub dissipation: f64,
    pub field_energy_rate: f64,
    pub surface_flux: f64,
    pub residual: f64,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Evaluates the energy balance over the box at time `t`. `src` is the actively
/// maintained current; the passive part is sigma E.
pub fn poynting_budget(em: &EMField, src: &SourceDensity, spec: &PoyntingSpec, t: f64) -> Result<PoyntingBudget> {
    spec.validate()?;
    let r = spec.region;
    let axes: Vec<Vec<(f64, f64)>> = (0..3)
        .map(|i| gauss5_nodes(r.lower[i], r.upper[i], spec.cells))
        .collect();

    let mut active = 0.0;
    let mut dissipation = 0.0;
    let mut rate = 0.0;
    for &(x, wx) in &axes[0] {
        for &(y, wy) in &axes[1] {
            for &(z, wz) in &axes[2] {
                let w = wx * wy * wz;
                let p = [t, x, y, z];
                let mut e = [0.0; 3];
                let mut b = [0.0; 3];
                let mut de = [0.0; 3];
                let mut db = [0.0; 3];
                let mut ja = [0.0; 3];
                for i in 0..3 {
                    let ej = em.e[i].jet(&p, 1)?;
                    let bj = em.b[i].jet(&p, 1)?;
                    e[i] = ej.value();
                    de[i] = ej.d(0);
                    b[i] = bj.value();
                    db[i] = bj.d(0);
                    ja[i] = src.j[i].value(&p)?;
                }
                active -= w * spec.kappa * dot(e, ja);
                dissipation -= w * spec.sigma * dot(e, e);
                rate += w * (spec.mu * dot(b, db) + spec.epsilon * dot(e, de));
            }
        }
    }

    let mut flux = 0.0;
    for axis in 0..3 {
        let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
        for (side, sign) in [(r.lower[axis], -1.0), (r.upper[axis], 1.0)] {
            for &(u, wu) in &axes[a1] {
                for &(v, wv) in &axes[a2] {
                    let mut x = [0.0; 3];
                    x[axis] = side;
                    x[a1] = u;
                    x[a2] = v;
                    let p = [t, x[0], x[1], x[2]];
                    let s = cross(em.e_at(&p)?, em.b_at(&p)?);
                    flux += sign * wu * wv * s[axis];
                }
            }
        }
    }

    Ok(PoyntingBudget {
        time: t,
        active_power: active,
        dissipation,
        field_energy_rate: rate,
        surface_flux: flux,
        residual: active + dissipation - rate - flux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartcalc::ScalarField;
    use crate::maxwell::plane_wave;

    fn unit_box() -> BoxRegion {
        BoxRegion {
            lower: [-0.5, -0.3, -0.5],
            upper: [0.5, 0.9, 0.5],
        }
    }

    #[test]
    fn static_fields_have_zero_budget() {
        let em = EMField::uniform([0.3, 0.0, 0.1], [0.0, 0.2, 0.0]);
        let b = poynting_budget(&em, &SourceDensity::vacuum(), &PoyntingSpec::vacuum(unit_box()), 0.0).unwrap();
        assert!(b.active_power.abs() < 1e-15);
        assert!(b.field_energy_rate.abs() < 1e-15);
        assert!(b.surface_flux.abs() < 1e-14);
        assert!(b.dissipation.abs() < 1e-15);
    }

    #[test]
    fn plane_wave_budget_closes() {
        let em = plane_wave(1.0, 1.0, 1.0).unwrap();
        for t in [0.0, 0.37, 1.1] {
            let b = poynting_budget(&em, &SourceDensity::vacuum(), &PoyntingSpec::vacuum(unit_box()), t).unwrap();
            assert!(b.residual.abs() < 1e-8, "{b:?}");
            assert!(b.surface_flux.abs() > 1e-3);
        }
    }

    #[test]
    fn dissipation_in_conductor() {
        let em = EMField::uniform([2.0, 0.0, 0.0], [0.0; 3]);
        let mut spec = PoyntingSpec::vacuum(unit_box());
        spec.sigma = 0.7;
        let b = poynting_budget(&em, &SourceDensity::vacuum(), &spec, 0.0).unwrap();
        let volume = 1.0 * 1.2 * 1.0;
        assert!((b.dissipation + 0.7 * 4.0 * volume).abs() < 1e-10);
    }

    #[test]
    fn active_source_term() {
        let em = EMField::uniform([1.0, 0.0, 0.0], [0.0; 3]);
        let mut src = SourceDensity::vacuum();
        src.j[0] = ScalarField::constant(4, 0.5);
        let b = poynting_budget(&em, &src, &PoyntingSpec::vacuum(unit_box()), 0.0).unwrap();
        assert!((b.active_power + 0.5 * 1.2).abs() < 1e-12);
    }

    #[test]
    fn degenerate_region() {
        let mut r = unit_box();
        r.upper[1] = r.lower[1];
        let err = poynting_budget(&EMField::zero(), &SourceDensity::vacuum(), &PoyntingSpec::vacuum(r), 0.0);
        assert!(err.is_err());
    }
}
