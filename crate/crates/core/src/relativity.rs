//! Velocity composition, boosts along x, and the interval.

use serde::Serialize;

use crate::error::{Error, Result};

/// w = (u + v) / (1 + K u v); K = 1/c^2, K = 0 is Galilean addition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompositionLaw {
    k: f64,
    c: f64,
}

impl CompositionLaw {
    pub fn new(k: f64) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("K must be >= 0, got {k}")));
        }
        let c = if k == 0.0 { f64::INFINITY } else { 1.0 / k.sqrt() };
        Ok(CompositionLaw { k, c })
    }

    pub fn from_c(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter("c must be positive".into()));
        }
        Ok(CompositionLaw { k: 1.0 / (c * c), c })
    }

    pub fn galilean() -> Self {
        CompositionLaw { k: 0.0, c: f64::INFINITY }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// The invariant speed K^{-1/2} (infinite for Galilean addition).
    pub fn invariant_speed(&self) -> f64 {
        self.c
    }
}

pub fn compose(u: f64, v: f64, law: &CompositionLaw) -> Result<f64> {
    let den = 1.0 + law.k * u * v;
    if den == 0.0 {
        return Err(Error::CompositionPole);
    }
    Ok((u + v) / den)
}

/// Event (x0 = ct, x1, x2, x3).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub fn new(ct: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector([ct, x, y, z])
    }
}

/// Boost along x with relative speed v.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Boost {
    pub v: f64,
    pub c: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Boost {
    pub fn new(v: f64, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter("c must be positive".into()));
        }
        if !(v.abs() < c) {
            return Err(Error::Superluminal { speed: v.abs(), c });
        }
        let beta = v / c;
        Ok(Boost {
            v,
            c,
            beta,
            gamma: 1.0 / (1.0 - beta * beta).sqrt(),
        })
    }

    /// Primed coordinates to unprimed: x = gamma (x' + beta ct'), ct = gamma (ct' + beta x').
    pub fn apply(&self, e: &FourVector) -> FourVector {
        let [ct, x, y, z] = e.0;
        FourVector([
            self.gamma * (ct + self.beta * x),
            self.gamma * (x + self.beta * ct),
            y,
            z,
        ])
    }

    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let (g, b) = (self.gamma, self.beta);
        [
            [g, g * b, 0.0, 0.0],
            [g * b, g, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    pub fn inverse(&self) -> Boost {
        Boost::new(-self.v, self.c).expect("inverse of a valid boost")
    }
}

/// Squared interval with the (+, -, -, -) reading.
pub fn interval2(e1: &FourVector, e2: &FourVector) -> f64 {
    let d: Vec<f64> = (0..4).map(|i| e2.0[i] - e1.0[i]).collect();
    d[0] * d[0] - d[1] * d[1] - d[2] * d[2] - d[3] * d[3]
}

/// Converts a (+, -, -, -) squared interval to the (-, +, +, +) convention.
pub fn to_mostly_plus(s2: f64) -> f64 {
    -s2
}

/// Proper time between two timelike-separated events.
pub fn proper_time(e1: &FourVector, e2: &FourVector, c: f64) -> Result<f64> {
    let s2 = interval2(e1, e2);
    if s2 < 0.0 {
        return Err(Error::InvalidParameter("events are spacelike separated".into()));
    }
    Ok(s2.sqrt() / c)
}

/// Charge density and x-current seen from a frame moving with speed v along x.
pub fn transform_current(rho: f64, jx: f64, v: f64, c: f64) -> Result<(f64, f64)> {
    let b = Boost::new(v, c)?;
    let root = (1.0 - b.beta * b.beta).sqrt();
    Ok(((rho - v * jx / (c * c)) / root, (jx - v * rho) / root))
}
