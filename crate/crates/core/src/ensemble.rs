//! Weighted particle ensembles and spherical phase-space coordinates.

use crate::geometry::{self, Vec3};

/// A weighted particle ensemble at a common time.
///
/// Weights never change after construction (mass conservation is exact by
/// construction); positions and velocities evolve.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub time: f64,
    /// Seed the ensemble was sampled with, kept for provenance.
    pub seed: u64,
}

impl ParticleEnsemble {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Spherical phase-space variables of a single particle:
/// radius, radial velocity, and squared angular momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCoords {
    pub r: f64,
    pub w: f64,
    pub l_sq: f64,
}

impl SphericalCoords {
    /// `r = |x|`, `w = (x.v)/r`, `l_sq = |x cross v|^2`; at the origin the
    /// radial decomposition degenerates and both `w` and `l_sq` are zero.
    pub fn from_phase(x: &Vec3, v: &Vec3) -> Self {
        let r = geometry::norm(x);
        if r == 0.0 {
            return SphericalCoords {
                r: 0.0,
                w: 0.0,
                l_sq: 0.0,
            };
        }
        SphericalCoords {
            r,
            w: geometry::dot(x, v) / r,
            l_sq: geometry::norm_sq(&geometry::cross(x, v)),
        }
    }
}
