use serde::Serialize;

use crate::error::{Error, Result};

/// Coordinate chart: ordered coordinate names plus a diagonal signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Chart {
    names: Vec<String>,
    signature: Vec<i8>,
}

impl Chart {
    pub fn new(names: &[&str], signature: &[i8]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidChart("a chart needs at least one coordinate".into()));
        }
        if names.len() != signature.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                got: signature.len(),
            });
        }
        if signature.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidChart("signature entries must be +1 or -1".into()));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::InvalidChart(format!("duplicate coordinate name {a}")));
            }
        }
        Ok(Chart {
            names: names.iter().map(|s| s.to_string()).collect(),
            signature: signature.to_vec(),
        })
    }

    /// Euclidean chart; names x, y, z for n <= 3, else x0, x1, ...
    pub fn euclidean(n: usize) -> Self {
        let names: Vec<String> = if n <= 3 {
            ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
        } else {
            (0..n).map(|i| format!("x{i}")).collect()
        };
        Chart {
            names,
            signature: vec![1; n],
        }
    }

    /// Spacetime chart (t, x, y, z) with signature (-, +, +, +).
    pub fn minkowski() -> Self {
        Chart {
            names: ["t", "x", "y", "z"].iter().map(|s| s.to_string()).collect(),
            signature: vec![-1, 1, 1, 1],
        }
    }

    /// Angular chart (phi, theta) on a sphere; phi is the polar angle.
    pub fn sphere() -> Self {
        Chart {
            names: vec!["phi".into(), "theta".into()],
            signature: vec![1, 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn is_minkowski(&self) -> bool {
        self.dim() == 4 && self.signature == [-1, 1, 1, 1]
    }

    pub fn is_euclidean(&self) -> bool {
        self.signature.iter().all(|&s| s == 1)
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitMode {
    Natural,
    GaussianCgs,
}

/// Physical constants used by field and quantum computations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnitSystem {
    pub mode: UnitMode,
    pub hbar: f64,
    pub c: f64,
    pub e: f64,
}

impl UnitSystem {
    /// hbar = c = 1 with the given elementary charge.
    pub fn natural(e: f64) -> Result<Self> {
        Self::new(UnitMode::Natural, 1.0, 1.0, e)
    }

    pub fn gaussian_cgs() -> Self {
        UnitSystem {
            mode: UnitMode::GaussianCgs,
            hbar: 1.054_571_817e-27,
            c: 2.997_924_58e10,
            e: 4.803_204_712_570_263e-10,
        }
    }

    pub fn new(mode: UnitMode, hbar: f64, c: f64, e: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("c", c), ("e", e)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if mode == UnitMode::Natural && (hbar != 1.0 || c != 1.0) {
            return Err(Error::InvalidParameter(
                "natural units require hbar = c = 1".into(),
            ));
        }
        Ok(UnitSystem { mode, hbar, c, e })
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem {
            mode: UnitMode::Natural,
            hbar: 1.0,
            c: 1.0,
            e: 1.0,
        }
    }
}
