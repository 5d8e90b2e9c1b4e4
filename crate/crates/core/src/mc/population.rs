use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::spaces::Space;

/// Where a population came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub master_seed: u64,
    /// Chain steps used to produce this population (0 for initial draws).
    pub chain_steps: usize,
    pub warnings: Vec<String>,
}

/// A multiset of points standing in for an empirical law on a space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticlePopulation {
    space: Arc<Space>,
    coords: Vec<f64>,
    pub generation: usize,
    pub lineage: Lineage,
}

impl ParticlePopulation {
    /// Flat coordinates, `space.dim()` per particle.
    pub fn new(space: Space, coords: Vec<f64>, generation: usize, master_seed: u64) -> Self {
        Self::with_shared(Arc::new(space), coords, generation, master_seed)
    }

    pub(crate) fn with_shared(
        space: Arc<Space>,
        coords: Vec<f64>,
        generation: usize,
        master_seed: u64,
    ) -> Self {
        assert!(
            !coords.is_empty() && coords.len().is_multiple_of(space.dim()),
            "population must hold a positive whole number of points"
        );
        Self {
            space,
            coords,
            generation,
            lineage: Lineage {
                master_seed,
                ..Lineage::default()
            },
        }
    }

    /// Builds a population from individual points, validating each.
    pub fn from_points(space: Space, points: &[Vec<f64>]) -> crate::Result<Self> {
        for p in points {
            space.validate_point(p)?;
        }
        if points.is_empty() {
            return Err(crate::Error::InvalidArgument("empty population".into()));
        }
        let coords = points.concat();
        Ok(Self::new(space, coords, 0, 0))
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub(crate) fn shared_space(&self) -> Arc<Space> {
        Arc::clone(&self.space)
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim())
    }

    /// Canonical 1-D projection of every particle.
    pub fn projections(&self) -> Vec<f64> {
        self.iter().map(|p| self.space.project(p)).collect()
    }

    /// Fraction of particles at each index of a finite space.
    pub fn finite_weights(&self) -> Option<Vec<f64>> {
        let n = self.space.finite_size()?;
        let mut w = vec![0.0; n];
        for p in self.iter() {
            w[p[0] as usize] += 1.0;
        }
        let total = self.len() as f64;
        w.iter_mut().for_each(|x| *x /= total);
        Some(w)
    }

    pub(crate) fn with_generation(mut self, generation: usize) -> Self {
        self.generation = generation;
        self
    }
}
