//! Sparse k-forms on a chart: wedge, exterior derivative, interior product,
//! the tabulated star duals, and line/surface integration.

mod integrate;
mod star;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::chartcalc::{Chart, ScalarField, Scalar};
use crate::error::{Error, Result};

pub use integrate::{integrate_line, integrate_line_with, integrate_surface, integrate_surface_with, DEFAULT_LEVEL};
pub use star::{star3, star4};

/// Strictly increasing axis list labelling a basis form dx^{i1} ^ ... ^ dx^{ik}.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: &[usize], dim: usize) -> Result<Self> {
        let ok = indices.windows(2).all(|w| w[0] < w[1]) && indices.iter().all(|&i| i < dim);
        if !ok {
            return Err(Error::InvalidIndex(indices.to_vec()));
        }
        Ok(MultiIndex(indices.to_vec()))
    }

    /// Sorts an arbitrary index list, returning the permutation sign, or None on repeats.
    pub fn sorted(indices: &[usize]) -> Option<(f64, MultiIndex)> {
        let mut v = indices.to_vec();
        let mut swaps = 0usize;
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                swaps += 1;
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        let sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
        Some((sign, MultiIndex(v)))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// A differential form of fixed grade. Absent keys are zero coefficients.
#[derive(Clone, Debug)]
pub struct KForm<T: Scalar = f64> {
    chart: Chart,
    grade: usize,
    terms: BTreeMap<MultiIndex, ScalarField<T>>,
}

fn check_chart(a: &Chart, b: &Chart) -> Result<()> {
    if a != b {
        return Err(Error::InvalidChart(format!(
            "chart mismatch: {:?} vs {:?}",
            a.names(),
            b.names()
        )));
    }
    Ok(())
}

impl<T: Scalar> KForm<T> {
    pub fn zero(chart: &Chart, grade: usize) -> Self {
        KForm {
            chart: chart.clone(),
            grade,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a form from (index list, coefficient) pairs. Unsorted lists are
    /// reordered with their permutation sign; lists with repeats vanish.
    pub fn from_terms<I>(chart: &Chart, grade: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, ScalarField<T>)>,
    {
        if grade > chart.dim() {
            return Err(Error::GradeMismatch(format!(
                "grade {grade} exceeds dimension {}",
                chart.dim()
            )));
        }
        let mut out = KForm::zero(chart, grade);
        for (idx, f) in terms {
            if idx.len() != grade || idx.iter().any(|&i| i >= chart.dim()) {
                return Err(Error::InvalidIndex(idx));
            }
            if f.dim() != chart.dim() {
                return Err(Error::DimensionMismatch {
                    expected: chart.dim(),
                    got: f.dim(),
                });
            }
            if let Some((sign, key)) = MultiIndex::sorted(&idx) {
                let f = if sign < 0.0 { -f } else { f };
                out.add_term(key, f);
            }
        }
        Ok(out)
    }

    pub fn scalar(chart: &Chart, f: ScalarField<T>) -> Result<Self> {
        KForm::from_terms(chart, 0, [(vec![], f)])
    }

    /// Sum_i comps[i] dx^i.
    pub fn one_form(chart: &Chart, comps: Vec<ScalarField<T>>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                got: comps.len(),
            });
        }
        KForm::from_terms(chart, 1, comps.into_iter().enumerate().map(|(i, f)| (vec![i], f)))
    }

    /// The basis form dx^{i1} ^ ... ^ dx^{ik} with unit coefficient.
    pub fn basis(chart: &Chart, idx: &[usize]) -> Result<Self> {
        let one = ScalarField::constant(chart.dim(), T::one());
        KForm::from_terms(chart, idx.len(), [(idx.to_vec(), one)])
    }

    fn add_term(&mut self, key: MultiIndex, f: ScalarField<T>) {
        let merged = match self.terms.remove(&key) {
            Some(g) => &g + &f,
            None => f,
        };
        self.terms.insert(key, merged);
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, ScalarField<T>> {
        &self.terms
    }

    pub fn coefficient(&self, idx: &[usize]) -> Option<&ScalarField<T>> {
        self.terms.get(&MultiIndex(idx.to_vec()))
    }

    /// Coefficient values at `p`, keyed by multi-index.
    pub fn evaluate(&self, p: &[f64]) -> Result<BTreeMap<MultiIndex, T>> {
        self.chart.check_point(p)?;
        self.terms
            .iter()
            .map(|(k, f)| Ok((k.clone(), f.value(p)?)))
            .collect()
    }

    /// Coefficient at `p` for any index order (sign-adjusted), zero when absent.
    pub fn component_at(&self, idx: &[usize], p: &[f64]) -> Result<T> {
        match MultiIndex::sorted(idx) {
            None => Ok(T::zero()),
            Some((sign, key)) => match self.terms.get(&key) {
                Some(f) => Ok(f.value(p)? * T::from_real(sign)),
                None => Ok(T::zero()),
            },
        }
    }

    /// Largest coefficient modulus at `p`.
    pub fn max_abs_at(&self, p: &[f64]) -> Result<f64> {
        Ok(self
            .evaluate(p)?
            .values()
            .fold(0.0f64, |m, v| m.max(v.modulus())))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_chart(&self.chart, &other.chart)?;
        if self.grade != other.grade {
            return Err(Error::GradeMismatch(format!(
                "cannot add grades {} and {}",
                self.grade, other.grade
            )));
        }
        let mut out = self.clone();
        for (k, f) in &other.terms {
            out.add_term(k.clone(), f.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coefficients(|f| -f)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map_coefficients(|f| f.scale(c))
    }

    pub fn scale_field(&self, g: &ScalarField<T>) -> Self {
        self.map_coefficients(|f| f * g)
    }

    pub fn map_coefficients<F: Fn(&ScalarField<T>) -> ScalarField<T>>(&self, f: F) -> Self {
        KForm {
            chart: self.chart.clone(),
            grade: self.grade,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
        }
    }
}

/// Parallelepiped spanned by `edges` at `base`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plp {
    pub base: Vec<f64>,
    pub edges: Vec<Vec<f64>>,
}

impl Plp {
    pub fn new(base: &[f64], edges: &[&[f64]]) -> Self {
        Plp {
            base: base.to_vec(),
            edges: edges.iter().map(|e| e.to_vec()).collect(),
        }
    }
}

fn sum_canonical(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v.into_iter().sum()
}

fn permutations(k: usize) -> Vec<(Vec<usize>, bool)> {
    // Heap's algorithm; each swap flips parity.
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    let mut even = true;
    out.push((a.clone(), even));
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            even = !even;
            out.push((a.clone(), even));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Determinant as (sum of even products) - (sum of odd products), each summed in
/// sorted order, so exchanging two columns negates the result bit-for-bit.
pub(crate) fn alternating_det(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    if k == 0 {
        return 1.0;
    }
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for (perm, is_even) in permutations(k) {
        let mut p = 1.0;
        for (row, &col) in perm.iter().enumerate() {
            p *= m[row][col];
        }
        if is_even {
            even.push(p);
        } else {
            odd.push(p);
        }
    }
    sum_canonical(even) - sum_canonical(odd)
}

/// Evaluates a k-form on a k-parallelepiped.
pub fn apply<T: Scalar>(w: &KForm<T>, plp: &Plp) -> Result<T> {
    if plp.edges.len() != w.grade {
        return Err(Error::GradeMismatch(format!(
            "{} edges for a {}-form",
            plp.edges.len(),
            w.grade
        )));
    }
    let n = w.chart.dim();
    w.chart.check_point(&plp.base)?;
    if let Some(e) = plp.edges.iter().find(|e| e.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: e.len(),
        });
    }
    let mut total = T::zero();
    for (key, f) in &w.terms {
        let m: Vec<Vec<f64>> = key
            .indices()
            .iter()
            .map(|&i| plp.edges.iter().map(|e| e[i]).collect())
            .collect();
        total += f.value(&plp.base)? * T::from_real(alternating_det(&m));
    }
    Ok(total)
}

pub fn wedge<T: Scalar>(a: &KForm<T>, b: &KForm<T>) -> Result<KForm<T>> {
    check_chart(&a.chart, &b.chart)?;
    let grade = a.grade + b.grade;
    let mut out = KForm::zero(&a.chart, grade);
    if grade > a.chart.dim() {
        return Ok(out);
    }
    for (i, f) in &a.terms {
        for (j, g) in &b.terms {
            let mut idx = i.indices().to_vec();
            idx.extend_from_slice(j.indices());
            if let Some((sign, key)) = MultiIndex::sorted(&idx) {
                let prod = f * g;
                out.add_term(key, if sign < 0.0 { -prod } else { prod });
            }
        }
    }
    Ok(out)
}

/// Exterior derivative restricted to the listed axes.
pub fn d_along<T: Scalar>(w: &KForm<T>, axes: &[usize]) -> Result<KForm<T>> {
    let n = w.chart.dim();
    let mut out = KForm::zero(&w.chart, w.grade + 1);
    if w.grade >= n {
        return Ok(out);
    }
    for (key, f) in &w.terms {
        for &k in axes {
            if k >= n {
                return Err(Error::InvalidIndex(vec![k]));
            }
            if key.indices().contains(&k) {
                continue;
            }
            let mut idx = vec![k];
            idx.extend_from_slice(key.indices());
            let (sign, sorted) = MultiIndex::sorted(&idx).expect("distinct indices");
            let df = f.partial(k);
            out.add_term(sorted, if sign < 0.0 { -df } else { df });
        }
    }
    Ok(out)
}

pub fn d<T: Scalar>(w: &KForm<T>) -> Result<KForm<T>> {
    let axes: Vec<usize> = (0..w.chart.dim()).collect();
    d_along(w, &axes)
}

/// Spatial derivative on a spacetime chart (axis 0 is time).
pub fn d_spatial<T: Scalar>(w: &KForm<T>) -> Result<KForm<T>> {
    let axes: Vec<usize> = (1..w.chart.dim()).collect();
    d_along(w, &axes)
}

/// The form whose coefficients are the time partials of those of `w`.
pub fn time_partial<T: Scalar>(w: &KForm<T>) -> KForm<T> {
    w.map_coefficients(|f| f.partial(0))
}

/// Interior product with a vector field given by its coordinate components.
pub fn interior<T: Scalar>(v: &[ScalarField<T>], w: &KForm<T>) -> Result<KForm<T>> {
    let n = w.chart.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    if w.grade == 0 {
        return Ok(KForm::zero(&w.chart, 0));
    }
    let mut out = KForm::zero(&w.chart, w.grade - 1);
    for (key, f) in &w.terms {
        for (a, &i) in key.indices().iter().enumerate() {
            let mut rest = key.indices().to_vec();
            rest.remove(a);
            let term = &v[i] * f;
            let term = if a % 2 == 1 { -term } else { term };
            out.add_term(MultiIndex(rest), term);
        }
    }
    Ok(out)
}

/// Interior product with a constant vector.
pub fn interior_const<T: Scalar>(v: &[T], w: &KForm<T>) -> Result<KForm<T>> {
    let n = w.chart.dim();
    let comps: Vec<ScalarField<T>> = v.iter().map(|&c| ScalarField::constant(n, c)).collect();
    interior(&comps, w)
}
