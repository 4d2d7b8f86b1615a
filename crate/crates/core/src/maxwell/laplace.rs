use serde::Serialize;

use crate::error::{Error, Result};

/// Dirichlet problem for Laplace's equation on a uniform 2D or 3D node grid.
/// Every outer-boundary node must be fixed; interior nodes may also be fixed
/// (conductors held at a potential).
#[derive(Clone, Debug)]
pub struct LaplaceProblem {
    shape: Vec<usize>,
    pub spacing: f64,
    fixed: Vec<Option<f64>>,
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl LaplaceProblem {
    pub fn new(shape: &[usize], spacing: f64) -> Result<Self> {
        if shape.len() != 2 && shape.len() != 3 {
            return Err(Error::InvalidParameter("grid must be 2D or 3D".into()));
        }
        if shape.iter().any(|&n| n < 3) || !(spacing > 0.0) {
            return Err(Error::InvalidParameter("need >= 3 nodes per axis and positive spacing".into()));
        }
        let total = shape.iter().product();
        Ok(LaplaceProblem {
            shape: shape.to_vec(),
            spacing,
            fixed: vec![None; total],
            omega: 1.8,
            tol: 1e-10,
            max_iter: 200_000,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn index_of(&self, idx: &[usize]) -> usize {
        let mut k = 0;
        for (a, &i) in idx.iter().enumerate() {
            k = k * self.shape[a] + i;
        }
        k
    }

    fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            out[a] = k % self.shape[a];
            k /= self.shape[a];
        }
        out
    }

    fn on_outer_boundary(&self, idx: &[usize]) -> bool {
        idx.iter().zip(&self.shape).any(|(&i, &n)| i == 0 || i == n - 1)
    }

    /// Fixes every outer-boundary node to `f(index)`.
    pub fn set_boundary<F: Fn(&[usize]) -> f64>(&mut self, f: F) {
        for k in 0..self.fixed.len() {
            let idx = self.multi_index(k);
            if self.on_outer_boundary(&idx) {
                self.fixed[k] = Some(f(&idx));
            }
        }
    }

    /// Holds every node selected by `mask` at `potential`.
    pub fn set_conductor<F: Fn(&[usize]) -> bool>(&mut self, mask: F, potential: f64) {
        for k in 0..self.fixed.len() {
            if mask(&self.multi_index(k)) {
                self.fixed[k] = Some(potential);
            }
        }
    }

    pub fn fix(&mut self, idx: &[usize], value: f64) {
        let k = self.index_of(idx);
        self.fixed[k] = Some(value);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LaplaceSolution {
    pub shape: Vec<usize>,
    pub spacing: f64,
    pub phi: Vec<f64>,
    #[serde(skip)]
    fixed: Vec<bool>,
    pub iterations: usize,
    pub residual: f64,
}

fn neighbours(shape: &[usize], k: usize) -> impl Iterator<Item = usize> + '_ {
    let mut strides = vec![1usize; shape.len()];
    for a in (0..shape.len() - 1).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    (0..shape.len()).flat_map(move |a| [k - strides[a], k + strides[a]])
}

/// SOR relaxation until the largest nodal residual falls below `tol`.
pub fn laplace_solve(problem: &LaplaceProblem) -> Result<LaplaceSolution> {
    for k in 0..problem.fixed.len() {
        let idx = problem.multi_index(k);
        if problem.on_outer_boundary(&idx) && problem.fixed[k].is_none() {
            return Err(Error::UnspecifiedBoundary(format!("node {idx:?} has no value")));
        }
    }
    if !(problem.omega > 0.0 && problem.omega < 2.0) {
        return Err(Error::InvalidParameter("SOR factor must lie in (0, 2)".into()));
    }
    let shape = &problem.shape;
    let ndim = shape.len() as f64;
    let fixed: Vec<bool> = problem.fixed.iter().map(|f| f.is_some()).collect();
    let mut phi: Vec<f64> = problem.fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    let free: Vec<usize> = (0..phi.len()).filter(|&k| !fixed[k]).collect();
    // start the free nodes at the boundary mean
    let mean = {
        let vals: Vec<f64> = problem.fixed.iter().flatten().copied().collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    for &k in &free {
        phi[k] = mean;
    }
    let nbrs: Vec<Vec<usize>> = free.iter().map(|&k| neighbours(shape, k).collect()).collect();

    let mut residual = f64::INFINITY;
    for iter in 1..=problem.max_iter {
        for (slot, &k) in free.iter().enumerate() {
            let avg = nbrs[slot].iter().map(|&j| phi[j]).sum::<f64>() / (2.0 * ndim);
            phi[k] += problem.omega * (avg - phi[k]);
        }
        if iter % 10 == 0 || iter == problem.max_iter {
            residual = free
                .iter()
                .zip(&nbrs)
                .map(|(&k, nb)| (nb.iter().map(|&j| phi[j]).sum::<f64>() / (2.0 * ndim) - phi[k]).abs())
                .fold(0.0, f64::max);
            if residual < problem.tol {
                return Ok(LaplaceSolution {
                    shape: shape.clone(),
                    spacing: problem.spacing,
                    phi,
                    fixed,
                    iterations: iter,
                    residual,
                });
            }
        }
    }
    Err(Error::NotConverged {
        iterations: problem.max_iter,
        residual,
    })
}

impl LaplaceSolution {
    fn problem_shape(&self) -> LaplaceProblem {
        LaplaceProblem {
            shape: self.shape.clone(),
            spacing: self.spacing,
            fixed: vec![None; self.phi.len()],
            omega: 1.0,
            tol: 0.0,
            max_iter: 0,
        }
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.phi[self.problem_shape().index_of(idx)]
    }

    /// Positive part of the amount by which any free node leaves [min, max] of the fixed nodes.
    pub fn max_principle_violation(&self) -> f64 {
        let fixed_vals = self.phi.iter().zip(&self.fixed).filter(|(_, &f)| f).map(|(v, _)| *v);
        let (lo, hi) = fixed_vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        self.phi
            .iter()
            .zip(&self.fixed)
            .filter(|(_, &f)| !f)
            .map(|(&v, _)| (v - hi).max(lo - v).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Largest gap between a free node and the mean of its full neighbourhood box
    /// (8 nodes in 2D, 26 in 3D), over free nodes away from the edges.
    pub fn mean_value_defect(&self) -> f64 {
        self.mean_value_defect_in(|_| true)
    }

    /// As `mean_value_defect`, restricted to free nodes selected by `region`.
    pub fn mean_value_defect_in<F: Fn(&[usize]) -> bool>(&self, region: F) -> f64 {
        let shape = self.problem_shape();
        let n = self.shape.len();
        let mut worst: f64 = 0.0;
        for k in 0..self.phi.len() {
            if self.fixed[k] {
                continue;
            }
            let idx = shape.multi_index(k);
            if !region(&idx) || idx.iter().zip(&self.shape).any(|(&i, &m)| i == 0 || i + 1 >= m) {
                continue;
            }
            let mut sum = 0.0;
            let mut count = 0;
            for code in 0..3usize.pow(n as u32) {
                let mut c = code;
                let mut nb = idx.clone();
                let mut centre = true;
                for slot in nb.iter_mut() {
                    let off = c % 3;
                    c /= 3;
                    if off != 1 {
                        centre = false;
                    }
                    *slot = *slot + off - 1;
                }
                if centre {
                    continue;
                }
                sum += self.phi[shape.index_of(&nb)];
                count += 1;
            }
            worst = worst.max((sum / count as f64 - self.phi[k]).abs());
        }
        worst
    }

    /// Largest central-difference gradient magnitude over free nodes selected by `region`.
    pub fn max_gradient_in<F: Fn(&[usize]) -> bool>(&self, region: F) -> f64 {
        let shape = self.problem_shape();
        let mut worst: f64 = 0.0;
        for k in 0..self.phi.len() {
            let idx = shape.multi_index(k);
            if !region(&idx) || idx.iter().zip(&self.shape).any(|(&i, &m)| i == 0 || i + 1 >= m) {
                continue;
            }
            let mut g2 = 0.0;
            for a in 0..idx.len() {
                let mut lo = idx.clone();
                let mut hi = idx.clone();
                lo[a] -= 1;
                hi[a] += 1;
                let g = (self.phi[shape.index_of(&hi)] - self.phi[shape.index_of(&lo)]) / (2.0 * self.spacing);
                g2 += g * g;
            }
            worst = worst.max(g2.sqrt());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_boundary_gives_constant_interior() {
        let mut p = LaplaceProblem::new(&[24, 24], 0.1).unwrap();
        p.set_boundary(|_| 3.5);
        let s = laplace_solve(&p).unwrap();
        assert!(s.max_gradient_in(|_| true) < 1e-10);
        assert!(s.phi.iter().all(|v| (v - 3.5).abs() < 1e-10));
    }

    #[test]
    fn linear_boundary_reproduced_in_3d() {
        let mut p = LaplaceProblem::new(&[12, 12, 12], 0.1).unwrap();
        p.set_boundary(|i| i[0] as f64 - 2.0 * i[2] as f64);
        let s = laplace_solve(&p).unwrap();
        assert!((s.at(&[5, 6, 7]) - (5.0 - 14.0)).abs() < 1e-8);
        assert_eq!(s.max_principle_violation(), 0.0);
    }

    #[test]
    fn unspecified_boundary() {
        let mut p = LaplaceProblem::new(&[8, 8], 0.1).unwrap();
        p.fix(&[0, 0], 1.0);
        assert!(matches!(laplace_solve(&p), Err(Error::UnspecifiedBoundary(_))));
    }

    #[test]
    fn iteration_budget() {
        let mut p = LaplaceProblem::new(&[40, 40], 0.1).unwrap();
        p.set_boundary(|i| if i[0] == 0 { 1.0 } else { 0.0 });
        p.max_iter = 20;
        assert!(matches!(laplace_solve(&p), Err(Error::NotConverged { .. })));
    }
}
