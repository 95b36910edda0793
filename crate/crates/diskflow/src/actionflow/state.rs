//! The finite-dimensional state space `E_b` of broken geodesics: periodic
//! sequences of planar points with the natural scalar product.

use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// A point of `E_b`: an `mb`-periodic sequence of planar points, stored
/// over one period and indexed periodically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    entries: Vec<Vec2>,
}

impl StateVector {
    pub fn new(entries: Vec<Vec2>) -> Self {
        StateVector { entries }
    }

    pub fn zeros(len: usize) -> Self {
        StateVector {
            entries: vec![Vec2::ZERO; len],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry with periodic index.
    pub fn entry(&self, i: i64) -> Vec2 {
        let n = self.entries.len() as i64;
        self.entries[i.rem_euclid(n) as usize]
    }

    pub fn set_entry(&mut self, i: i64, v: Vec2) {
        let n = self.entries.len() as i64;
        self.entries[i.rem_euclid(n) as usize] = v;
    }

    pub fn entries(&self) -> &[Vec2] {
        &self.entries
    }

    /// Scalar product `Σ x_i x'_i + y_i y'_i`.
    pub fn dot(&self, other: &StateVector) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.dot(*b))
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// The shift `φ: (z_i) -> (z_{i+m})`, a period-`b` symmetry.
    pub fn shifted(&self, m: usize) -> StateVector {
        let n = self.entries.len();
        StateVector {
            entries: (0..n).map(|j| self.entries[(j + m) % n]).collect(),
        }
    }

    /// In-place `self += rhs * scale`.
    pub fn axpy(&mut self, scale: f64, rhs: &StateVector) {
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a = *a + *b * scale;
        }
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for a in &mut self.entries {
            *a = *a * s;
        }
    }

    /// Flat coordinate view `(x_1, y_1, x_2, y_2, …)`.
    pub fn flat(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|z| [z.x, z.y]).collect()
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        StateVector {
            entries: flat.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect(),
        }
    }
}

impl Add<&StateVector> for &StateVector {
    type Output = StateVector;
    fn add(self, o: &StateVector) -> StateVector {
        StateVector {
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

impl Sub<&StateVector> for &StateVector {
    type Output = StateVector;
    fn sub(self, o: &StateVector) -> StateVector {
        StateVector {
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

impl Mul<f64> for &StateVector {
    type Output = StateVector;
    fn mul(self, s: f64) -> StateVector {
        StateVector {
            entries: self.entries.iter().map(|a| *a * s).collect(),
        }
    }
}
