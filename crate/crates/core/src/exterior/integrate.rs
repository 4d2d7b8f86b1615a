use super::KForm;
use crate::chartcalc::{Curve, Patch};
use crate::error::{Error, Result};
use crate::numerics::{simpson, simpson_2d};

/// Default refinement level: 2^10 Simpson panels.
pub const DEFAULT_LEVEL: u32 = 10;

pub fn integrate_line(w: &KForm<f64>, curve: &Curve, t0: f64, t1: f64) -> Result<f64> {
    integrate_line_with(w, curve, t0, t1, DEFAULT_LEVEL)
}

/// Pulls `w` back along the curve and integrates with 2^level Simpson panels.
pub fn integrate_line_with(w: &KForm<f64>, curve: &Curve, t0: f64, t1: f64, level: u32) -> Result<f64> {
    if w.grade() != 1 {
        return Err(Error::GradeMismatch("line integrals need a 1-form".into()));
    }
    if curve.dim() != w.chart().dim() {
        return Err(Error::DimensionMismatch {
            expected: w.chart().dim(),
            got: curve.dim(),
        });
    }
    simpson(t0, t1, 1usize << level, |t| {
        let (x, v) = curve.point_and_velocity(t);
        let mut s = 0.0;
        for (key, f) in w.terms() {
            s += f.value(&x)? * v[key.indices()[0]];
        }
        Ok(s)
    })
}

pub fn integrate_surface(w: &KForm<f64>, patch: &Patch) -> Result<f64> {
    integrate_surface_with(w, patch, 8)
}

/// Pulls a 2-form back to the parameter rectangle; 2^level panels per side.
pub fn integrate_surface_with(w: &KForm<f64>, patch: &Patch, level: u32) -> Result<f64> {
    if w.grade() != 2 {
        return Err(Error::GradeMismatch("surface integrals need a 2-form".into()));
    }
    if patch.dim() != w.chart().dim() {
        return Err(Error::DimensionMismatch {
            expected: w.chart().dim(),
            got: patch.dim(),
        });
    }
    simpson_2d(patch.u_range, patch.v_range, 1usize << level, |u, v| {
        let (x, xu, xv) = patch.frame(u, v);
        let mut s = 0.0;
        for (key, f) in w.terms() {
            let (i, j) = (key.indices()[0], key.indices()[1]);
            s += f.value(&x)? * (xu[i] * xv[j] - xu[j] * xv[i]);
        }
        Ok(s)
    })
}
