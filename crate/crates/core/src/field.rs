//! Radial prefix-sum gravity: exact enclosed-mass field for spherically
//! symmetric particle ensembles.
//!
//! Particle radii are sorted (ties broken by particle index, so runs are
//! deterministic) and weights accumulated into a right-continuous,
//! piecewise-constant enclosed-mass function `m(r)`. The acceleration on a
//! point is `-m(|x|) x / |x|^3`; when pushing particle `i` its own weight is
//! excluded from `m`, which removes the O(1/N) self-force bias at its own
//! radius.

use rayon::prelude::*;

use crate::ensemble::ParticleEnsemble;
use crate::error::{Error, Result};
use crate::geometry::{self, Vec3};

/// Sorted radii with cumulative mass; the discrete spherical field.
#[derive(Debug, Clone)]
pub struct RadialField {
    radii: Vec<f64>,
    cum_mass: Vec<f64>,
    /// Optional Plummer softening length for stress tests; zero by default
    /// (the homogeneous core needs none: `m ~ r^3` gives a linear force).
    softening: f64,
}

impl RadialField {
    /// Builds the field from an ensemble. Fails with a numeric error if any
    /// particle coordinate is non-finite.
    pub fn from_ensemble(ensemble: &ParticleEnsemble) -> Result<Self> {
        Ok(Self::build(ensemble)?.0)
    }

    /// Builds the field together with, for each particle (by original
    /// index), the enclosed mass at its own radius excluding its own
    /// weight.
    pub fn from_ensemble_with_self(ensemble: &ParticleEnsemble) -> Result<(Self, Vec<f64>)> {
        Self::build(ensemble)
    }

    fn build(ensemble: &ParticleEnsemble) -> Result<(Self, Vec<f64>)> {
        let n = ensemble.len();
        let mut order: Vec<(f64, u32)> = Vec::with_capacity(n);
        for (i, x) in ensemble.positions.iter().enumerate() {
            let r = geometry::norm(x);
            if !r.is_finite() {
                return Err(Error::numeric(format!(
                    "non-finite particle radius at index {i}"
                )));
            }
            order.push((r, i as u32));
        }
        // Deterministic total order: radius, then original index.
        order.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut radii = Vec::with_capacity(n);
        let mut cum_mass = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &(r, i) in &order {
            acc += ensemble.weights[i as usize];
            radii.push(r);
            cum_mass.push(acc);
        }

        // Self-excluded enclosed mass per particle: the full mass of the
        // tie group at the particle's radius, minus its own weight.
        let mut self_mass = vec![0.0; n];
        let mut k = 0;
        while k < n {
            let mut end = k;
            while end + 1 < n && radii[end + 1] == radii[k] {
                end += 1;
            }
            let group_mass = cum_mass[end];
            for &(_, i) in &order[k..=end] {
                self_mass[i as usize] = group_mass - ensemble.weights[i as usize];
            }
            k = end + 1;
        }

        Ok((
            RadialField {
                radii,
                cum_mass,
                softening: 0.0,
            },
            self_mass,
        ))
    }

    /// Builds a field directly from sorted radii and cumulative masses
    /// (synthetic fields for tests and analytic comparisons).
    pub fn from_parts(radii: Vec<f64>, cum_mass: Vec<f64>) -> Result<Self> {
        if radii.len() != cum_mass.len() {
            return Err(Error::domain("radii and cum_mass lengths differ"));
        }
        if radii.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("radii must be sorted"));
        }
        if cum_mass.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("cumulative mass must be nondecreasing"));
        }
        Ok(RadialField {
            radii,
            cum_mass,
            softening: 0.0,
        })
    }

    pub fn with_softening(mut self, softening: f64) -> Self {
        self.softening = softening;
        self
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn cum_mass(&self) -> &[f64] {
        &self.cum_mass
    }

    pub fn total_mass(&self) -> f64 {
        self.cum_mass.last().copied().unwrap_or(0.0)
    }

    /// Right-continuous enclosed mass `m(r)`: total weight of particles
    /// with radius `<= r`. Binary search on the sorted radii.
    pub fn enclosed_mass(&self, r: f64) -> f64 {
        let idx = self.radii.partition_point(|&rr| rr <= r);
        if idx == 0 {
            0.0
        } else {
            self.cum_mass[idx - 1]
        }
    }

    /// Acceleration `-m(|x|) x / |x|^3` (Plummer-softened if configured),
    /// zero at the origin by symmetry.
    pub fn acceleration(&self, x: &Vec3) -> Vec3 {
        let r2 = geometry::norm_sq(x);
        if r2 == 0.0 {
            return geometry::ZERO;
        }
        let r = r2.sqrt();
        let m = self.enclosed_mass(r);
        self.central_acceleration(x, r, m)
    }

    /// Acceleration from a caller-supplied enclosed mass (used by the
    /// integrator with self-excluded masses).
    pub fn central_acceleration(&self, x: &Vec3, r: f64, m: f64) -> Vec3 {
        let denom = (r * r + self.softening * self.softening).powf(1.5);
        if denom == 0.0 {
            return geometry::ZERO;
        }
        geometry::scale(x, -m / denom)
    }
}
