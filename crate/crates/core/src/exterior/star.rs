use super::KForm;
use crate::chartcalc::Scalar;
use crate::error::{Error, Result};

type Table = &'static [(&'static [usize], &'static [usize], f64)];

// (source index, target index, sign)
const STAR3_1: Table = &[(&[0], &[1, 2], 1.0), (&[1], &[0, 2], -1.0), (&[2], &[0, 1], 1.0)];
const STAR3_2: Table = &[(&[1, 2], &[0], 1.0), (&[0, 2], &[1], -1.0), (&[0, 1], &[2], 1.0)];

// F = -E_i dt^dx^i + B_x dy^dz - B_y dx^dz + B_z dx^dy  maps to
// *F = E_x dy^dz + E_y dz^dx + E_z dx^dy + B_x dt^dx + B_y dt^dy + B_z dt^dz.
const STAR4_2: Table = &[
    (&[0, 1], &[2, 3], -1.0),
    (&[0, 2], &[1, 3], 1.0),
    (&[0, 3], &[1, 2], -1.0),
    (&[2, 3], &[0, 1], 1.0),
    (&[1, 3], &[0, 2], -1.0),
    (&[1, 2], &[0, 3], 1.0),
];

const STAR4_1: Table = &[
    (&[0], &[1, 2, 3], 1.0),
    (&[1], &[0, 2, 3], -1.0),
    (&[2], &[0, 1, 3], 1.0),
    (&[3], &[0, 1, 2], -1.0),
];

const STAR4_3: Table = &[
    (&[1, 2, 3], &[0], 1.0),
    (&[0, 2, 3], &[1], -1.0),
    (&[0, 1, 3], &[2], 1.0),
    (&[0, 1, 2], &[3], -1.0),
];

fn shuffle<T: Scalar>(w: &KForm<T>, table: Table, grade: usize) -> Result<KForm<T>> {
    let mut terms = Vec::new();
    for (key, f) in w.terms() {
        let (_, to, s) = table
            .iter()
            .find(|(from, _, _)| *from == key.indices())
            .ok_or_else(|| Error::InvalidIndex(key.indices().to_vec()))?;
        let g = if *s < 0.0 { -f } else { f.clone() };
        terms.push((to.to_vec(), g));
    }
    KForm::from_terms(w.chart(), grade, terms)
}

/// Star on a three-dimensional Euclidean chart, grades 1 and 2 only.
pub fn star3<T: Scalar>(w: &KForm<T>) -> Result<KForm<T>> {
    let c = w.chart();
    if c.dim() != 3 || !c.is_euclidean() {
        return Err(Error::InvalidChart("star3 needs a 3D Euclidean chart".into()));
    }
    match w.grade() {
        1 => shuffle(w, STAR3_1, 2),
        2 => shuffle(w, STAR3_2, 1),
        g => Err(Error::GradeMismatch(format!("star3 is not defined on grade {g}"))),
    }
}

/// Star on the (t, x, y, z) chart: field-strength 2-forms and the 1 <-> 3 current pairing.
pub fn star4<T: Scalar>(w: &KForm<T>) -> Result<KForm<T>> {
    if !w.chart().is_minkowski() {
        return Err(Error::InvalidChart("star4 needs the (t, x, y, z) chart".into()));
    }
    match w.grade() {
        1 => shuffle(w, STAR4_1, 3),
        2 => shuffle(w, STAR4_2, 2),
        3 => shuffle(w, STAR4_3, 1),
        g => Err(Error::GradeMismatch(format!("star4 is not defined on grade {g}"))),
    }
}
