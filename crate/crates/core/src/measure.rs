//! Atomic intensity/fugacity measures over a finite metric space.

use std::collections::HashMap;

use crate::error::Error;
use crate::space::{FiniteMetricSpace, RegionSet};
use crate::Result;

/// A non-negative mass per point of one [`FiniteMetricSpace`], aligned by
/// point index. Plays the role of the intensity measure of a point process
/// or the fugacity of the hard-sphere model.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    masses: Vec<f64>,
}

impl AtomicMeasure {
    pub fn new(space: &FiniteMetricSpace, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != space.len() {
            return Err(Error::MeasureSpaceMismatch {
                expected: space.len(),
                found: masses.len(),
            });
        }
        for (i, &m) in masses.iter().enumerate() {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::BadMass {
                    id: space.id(i).to_string(),
                    mass: m,
                });
            }
        }
        Ok(Self { masses })
    }

    /// Builds from an id → mass map; ids absent from the map get mass 0.
    pub fn from_map(space: &FiniteMetricSpace, map: &HashMap<String, f64>) -> Result<Self> {
        let mut masses = vec![0.0; space.len()];
        for (id, &m) in map {
            masses[space.index_of(id)?] = m;
        }
        Self::new(space, masses)
    }

    pub fn uniform(space: &FiniteMetricSpace, mass: f64) -> Result<Self> {
        Self::new(space, vec![mass; space.len()])
    }

    pub fn zero(space: &FiniteMetricSpace) -> Result<Self> {
        Self::uniform(space, 0.0)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Total mass carried by a region.
    pub fn of(&self, region: RegionSet) -> f64 {
        region.indices().map(|i| self.masses[i]).sum()
    }

    pub fn max_mass(&self) -> f64 {
        self.masses.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_mass_in(&self, region: RegionSet) -> f64 {
        region.indices().map(|i| self.masses[i]).fold(0.0, f64::max)
    }

    /// First point (by index) whose mass strictly exceeds one, if any.
    pub fn index_above_one(&self) -> Option<usize> {
        self.masses.iter().position(|&m| m > 1.0)
    }

    /// Scales every mass by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "scale factor {factor} must be finite and >= 0"
            )));
        }
        Ok(Self {
            masses: self.masses.iter().map(|m| m * factor).collect(),
        })
    }

    /// Zeroes every mass outside the region.
    pub fn restricted(&self, region: RegionSet) -> Self {
        let masses = self
            .masses
            .iter()
            .enumerate()
            .map(|(i, &m)| if region.contains_index(i) { m } else { 0.0 })
            .collect();
        Self { masses }
    }

    /// Pointwise comparison `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.masses.len() == other.masses.len()
            && self.masses.iter().zip(&other.masses).all(|(a, b)| a <= b)
    }

    pub(crate) fn check_space(&self, space: &FiniteMetricSpace) -> Result<()> {
        if self.masses.len() != space.len() {
            return Err(Error::MeasureSpaceMismatch {
                expected: space.len(),
                found: self.masses.len(),
            });
        }
        Ok(())
    }
}
