//! Cut-off initial data and its Monte-Carlo discretization.
//!
//! The initial datum multiplies the homogeneous solution at `t = 0` by a
//! smooth radial cut-off that is 1 on the unit ball and 0 beyond radius
//! `1 + eps`. Its total mass plus `eps` gives the strict mass bound used to
//! define the core boundary.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dust::CoreBoundary;
use crate::ensemble::ParticleEnsemble;
use crate::error::{Error, Result};
use crate::geometry::{self, Vec3};
use crate::homogeneous::HomogeneousSolution;
use crate::quad::adaptive_simpson;

/// Attempts per particle before rejection sampling is declared too
/// inefficient (acceptance far below 1e-4 makes this fire with high
/// probability).
const MAX_REJECTION_TRIES: usize = 200_000;

/// Smooth partition step `psi(s) = q(s) / (q(s) + q(1-s))` with
/// `q(s) = exp(-1/s)` for `s > 0`; `psi` rises from 0 at `s <= 0` to 1 at
/// `s >= 1` and is infinitely differentiable.
fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let q = (-1.0 / s).exp();
    let q1 = (-1.0 / (1.0 - s)).exp();
    q / (q + q1)
}

/// Radial cut-off: 1 on `[0, 1]`, 0 on `[1 + eps, inf)`, smooth monotone
/// descent in between, with value 1/2 at the midpoint.
#[derive(Debug, Clone, Copy)]
pub struct CutoffFn {
    epsilon: f64,
}

impl CutoffFn {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0 < epsilon && epsilon <= 1.0) {
            return Err(Error::domain(format!(
                "cut-off epsilon must lie in (0, 1] (got {epsilon})"
            )));
        }
        Ok(CutoffFn { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else if r >= 1.0 + self.epsilon {
            0.0
        } else {
            smooth_step((1.0 + self.epsilon - r) / self.epsilon)
        }
    }
}

/// Compactly supported initial datum `f0(x, v) = h(0, x, v) phi(|x|)`
/// together with its mass bookkeeping.
#[derive(Debug, Clone)]
pub struct InitialData {
    homog: HomogeneousSolution,
    cutoff: CutoffFn,
    total_mass: f64,
    mass_bound: f64,
}

impl InitialData {
    /// Builds the datum for the given homogeneous solution, computing the
    /// total mass by adaptive quadrature:
    /// `total = (3/a0^3) int_0^{1+eps} r^2 phi(r) dr` (the inner unit ball
    /// contributes exactly `1/3`), and `mass_bound = total + eps`.
    pub fn new(homog: HomogeneousSolution) -> Result<Self> {
        let epsilon = homog.epsilon();
        let cutoff = CutoffFn::new(epsilon)?;
        let tail = adaptive_simpson(
            &|r: f64| r * r * cutoff.eval(r),
            1.0,
            1.0 + epsilon,
            1e-13,
        )?;
        let a0 = homog.dust().initial_radius();
        let total_mass = 3.0 / a0.powi(3) * (1.0 / 3.0 + tail);
        let mass_bound = total_mass + epsilon;
        Ok(InitialData {
            homog,
            cutoff,
            total_mass,
            mass_bound,
        })
    }

    pub fn homogeneous(&self) -> &HomogeneousSolution {
        &self.homog
    }

    pub fn cutoff(&self) -> &CutoffFn {
        &self.cutoff
    }

    pub fn epsilon(&self) -> f64 {
        self.cutoff.epsilon
    }

    /// Total mass of the datum.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Strict upper bound `total_mass + eps` for the total mass.
    pub fn mass_bound(&self) -> f64 {
        self.mass_bound
    }

    /// `f0(x, v)`; coincides with the homogeneous solution on the unit
    /// ball.
    pub fn eval(&self, x: &Vec3, v: &Vec3) -> f64 {
        let phi = self.cutoff.eval(geometry::norm(x));
        if phi == 0.0 {
            return 0.0;
        }
        // t = 0 is always inside the time domain.
        self.homog
            .eval(0.0, x, v)
            .expect("t = 0 is a valid evaluation time")
            * phi
    }

    /// The core boundary defined by this datum's mass bound. The ordering
    /// against the dust ball requires the bound to exceed the ball's
    /// effective mass `a0^-3`, which holds by construction.
    pub fn core_boundary(&self) -> Result<CoreBoundary> {
        let a0 = self.homog.dust().initial_radius();
        CoreBoundary::with_mass_floor(self.epsilon(), self.mass_bound, a0.powi(-3))
    }

    /// Draws `n` equal-weight particles from `f0 / total_mass` by rejection
    /// sampling over the product of the position ball `|x| <= 1 + eps` and
    /// the velocity ball `|v| <= eps/a0`.
    ///
    /// Each particle derives its own RNG stream from `(seed, index)`, so
    /// the result is bit-identical for any worker count.
    pub fn sample(&self, n: usize, seed: u64) -> Result<ParticleEnsemble> {
        if n == 0 {
            return Err(Error::config("n_particles must be at least 1 (got 0)"));
        }
        let a0 = self.homog.dust().initial_radius();
        let x_radius = 1.0 + self.epsilon();
        let v_radius = self.epsilon() / a0;
        let sup = self.homog.profile().sup();
        let weight = self.total_mass / n as f64;

        let draws: Vec<Result<(Vec3, Vec3)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                for _ in 0..MAX_REJECTION_TRIES {
                    let x = scaled_ball_point(&mut rng, x_radius);
                    let v = scaled_ball_point(&mut rng, v_radius);
                    let threshold: f64 = rng.gen::<f64>() * sup;
                    if self.eval(&x, &v) > threshold {
                        return Ok((x, v));
                    }
                }
                Err(Error::config(format!(
                    "rejection sampling efficiency below threshold (particle {i} \
                     found no acceptance in {MAX_REJECTION_TRIES} tries)"
                )))
            })
            .collect();

        let mut positions = Vec::with_capacity(n);
        let mut velocities = Vec::with_capacity(n);
        for d in draws {
            let (x, v) = d?;
            positions.push(x);
            velocities.push(v);
        }
        Ok(ParticleEnsemble {
            positions,
            velocities,
            weights: vec![weight; n],
            time: 0.0,
            seed,
        })
    }
}

/// Uniform point in the ball of the given radius (cube rejection).
fn scaled_ball_point<R: Rng>(rng: &mut R, radius: f64) -> Vec3 {
    loop {
        let p = [
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        ];
        if geometry::norm_sq(&p) <= 1.0 {
            return geometry::scale(&p, radius);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dust::DustSolution;
    use crate::homogeneous::IsotropicProfile;
    use approx::assert_abs_diff_eq;

    fn data(eps: f64, a0: f64) -> InitialData {
        let hs = HomogeneousSolution::new(
            IsotropicProfile::polynomial_bump(),
            eps,
            DustSolution::new(a0).unwrap(),
        )
        .unwrap();
        InitialData::new(hs).unwrap()
    }

    #[test]
    fn cutoff_plateau_edge_midpoint() {
        let c = CutoffFn::new(0.2).unwrap();
        assert_eq!(c.eval(0.5), 1.0);
        assert_eq!(c.eval(1.0), 1.0);
        assert_eq!(c.eval(1.2), 0.0);
        assert_eq!(c.eval(5.0), 0.0);
        // psi(1/2) = 1/2 by the q/(q+q) symmetry
        assert!((c.eval(1.1) - 0.5).abs() < 1e-14);
        // dyadic epsilon makes the midpoint argument exact
        let d = CutoffFn::new(0.5).unwrap();
        assert_eq!(d.eval(1.25), 0.5);
        assert!(CutoffFn::new(0.0).is_err());
    }

    #[test]
    fn cutoff_monotone() {
        let c = CutoffFn::new(0.3).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=300 {
            let v = c.eval(1.5 * k as f64 / 300.0);
            assert!(v <= prev + 1e-15);
            assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn f0_matches_homogeneous_inside_unit_ball() {
        let d = data(0.2, 1.0);
        let x = [0.3, -0.2, 0.5];
        let v = [0.05, 0.02, -0.1];
        assert_eq!(d.eval(&x, &v), d.homogeneous().eval(0.0, &x, &v).unwrap());
    }

    #[test]
    fn f0_supports() {
        let d = data(0.2, 1.0);
        assert_eq!(d.eval(&[1.21, 0.0, 0.0], &[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(d.eval(&[0.5, 0.0, 0.0], &[0.2, 0.0, 0.0]), 0.0);
        assert!(d.eval(&[0.5, 0.0, 0.0], &[0.1, 0.0, 0.0]) > 0.0);
        // bounded by sup H_eps
        let sup = d.homogeneous().profile().sup();
        assert!(d.eval(&[0.5, 0.0, 0.0], &[0.1, 0.0, 0.0]) <= sup);
    }

    #[test]
    fn masses_within_paper_bounds() {
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let d = data(eps, 1.0);
            assert!(d.total_mass() > 1.0, "total {} at eps {eps}", d.total_mass());
            assert!(
                d.total_mass() < (1.0 + eps).powi(3),
                "total {} at eps {eps}",
                d.total_mass()
            );
            assert!(d.mass_bound() > d.total_mass());
            assert!(d.mass_bound() < (1.0 + eps).powi(3) + eps);
        }
        let d = data(0.1, 1.0);
        assert!(d.total_mass() > 1.0 && d.total_mass() < 1.331);
    }

    #[test]
    fn core_boundary_from_masses() {
        let d = data(0.2, 1.0);
        let cb = d.core_boundary().unwrap();
        assert_abs_diff_eq!(cb.mass_bound(), d.mass_bound(), epsilon = 1e-15);
        // general initial radius keeps the construction valid
        let d4 = data(0.1, 4.0);
        let cb4 = d4.core_boundary().unwrap();
        assert!(cb4.mass_bound() > 4.0f64.powi(-3));
        assert!(cb4.collapse_time() < crate::dust::collapse_time(4.0).unwrap());
    }

    #[test]
    fn sampling_is_reproducible_and_supported() {
        let d = data(0.3, 1.0);
        let a = d.sample(400, 7).unwrap();
        let b = d.sample(400, 7).unwrap();
        assert_eq!(a.positions, b.positions);
        assert_eq!(a.velocities, b.velocities);
        for i in 0..a.len() {
            assert!(geometry::norm(&a.positions[i]) <= 1.3 + 1e-12);
            assert!(geometry::norm(&a.velocities[i]) <= 0.3 + 1e-12);
            assert!(d.eval(&a.positions[i], &a.velocities[i]) > 0.0);
        }
        let c = d.sample(400, 8).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn sample_weights_sum_to_total_mass() {
        let d = data(0.2, 1.0);
        let e = d.sample(1000, 3).unwrap();
        assert!((e.total_weight() - d.total_mass()).abs() <= 1e-12 * d.total_mass());
    }

    #[test]
    fn hopeless_profile_hits_rejection_cap() {
        // profile concentrated at the very edge of velocity space:
        // acceptance probability ~1e-7 must surface as a configuration error
        let profile = IsotropicProfile::new(|u: f64| u.powf(1e7)).unwrap();
        let hs = HomogeneousSolution::new(profile, 0.2, DustSolution::new(1.0).unwrap()).unwrap();
        let d = InitialData::new(hs).unwrap();
        match d.sample(4, 1) {
            Err(Error::Config(_)) => {}
            other => panic!("expected configuration error, got {other:?}"),
        }
    }
}
