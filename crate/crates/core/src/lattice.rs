//! Lattice indices, rectangular windows, and realized field values.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An index `t ∈ ℤᵈ`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct GroupElement(Vec<i64>);

impl GroupElement {
    pub fn new(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "lattice index needs at least one coordinate");
        GroupElement(coords)
    }

    /// The identity `(0, …, 0)` in dimension `d`.
    pub fn identity(d: usize) -> Self {
        GroupElement(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.dim(), other.dim());
        GroupElement(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> GroupElement {
        GroupElement(self.0.iter().map(|c| -c).collect())
    }

    pub fn norm_inf(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl From<Vec<i64>> for GroupElement {
    fn from(coords: Vec<i64>) -> Self {
        GroupElement::new(coords)
    }
}

/// An axis-aligned hyperrectangle `∏ [lo_k, hi_k] ⊂ ℤᵈ`, bounds inclusive.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Window {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Window {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::DimensionMismatch(format!(
                "window bounds have lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidParameter("window has empty extent".into()));
        }
        Ok(Window { lo, hi })
    }

    /// The centered cube `[-n, n]^d`.
    pub fn cube(d: usize, n: i64) -> Self {
        assert!(d >= 1 && n >= 0);
        Window { lo: vec![-n; d], hi: vec![n; d] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn len(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l + 1) as usize)
            .product()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty extents
    }

    pub fn contains(&self, t: &GroupElement) -> bool {
        t.dim() == self.dim()
            && t.coords()
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(c, (l, h))| l <= c && c <= h)
    }

    /// Row-major position of `t`, if inside.
    pub fn index_of(&self, t: &GroupElement) -> Option<usize> {
        if !self.contains(t) {
            return None;
        }
        let mut idx = 0usize;
        for k in 0..self.dim() {
            let extent = (self.hi[k] - self.lo[k] + 1) as usize;
            idx = idx * extent + (t.coords()[k] - self.lo[k]) as usize;
        }
        Some(idx)
    }

    /// All points in row-major order.
    pub fn points(&self) -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(self.len());
        let d = self.dim();
        let mut cur = self.lo.clone();
        loop {
            out.push(GroupElement::new(cur.clone()));
            let mut k = d;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if cur[k] < self.hi[k] {
                    cur[k] += 1;
                    for (j, c) in cur.iter_mut().enumerate().skip(k + 1) {
                        *c = self.lo[j];
                    }
                    break;
                }
            }
        }
    }

    /// This window dilated by `r` in every direction.
    pub fn dilate(&self, r: i64) -> Window {
        Window {
            lo: self.lo.iter().map(|l| l - r).collect(),
            hi: self.hi.iter().map(|h| h + r).collect(),
        }
    }
}

/// Provenance of a simulated realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationMeta {
    /// Stream seed that reproduces the values bit-identically.
    pub seed: u64,
    /// Simulation method tag (`"discrete"`, `"lepage"`, `"frechet"`, `"subgaussian-mixture"`).
    pub method: String,
    /// Series truncation level, when a truncated series was used.
    pub truncation: Option<u64>,
    /// Component mass retained after state-space truncation.
    pub truncated_mass: Option<f64>,
    /// Magnitude proxy for the discarded series tail.
    pub tail_magnitude: Option<f64>,
}

/// One simulated window of a field: a real value per lattice point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRealization {
    window: Window,
    values: Vec<f64>,
    pub meta: RealizationMeta,
}

impl FieldRealization {
    pub fn new(window: Window, values: Vec<f64>, meta: RealizationMeta) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a window of {} points",
                values.len(),
                window.len()
            )));
        }
        Ok(FieldRealization { window, values, meta })
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, t: &GroupElement) -> Option<f64> {
        self.window.index_of(t).map(|i| self.values[i])
    }
}
