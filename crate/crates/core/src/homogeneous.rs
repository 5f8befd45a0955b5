//! The isotropic ansatz profile and the exact spatially homogeneous solution.
//!
//! A profile `H` is a nonnegative, continuously differentiable function with
//! support in `[0, 1]`, normalized so that `int H(|v|^2) dv = 3/(4 pi)`.
//! Its velocity scaling `H_eps = eps^-3 H(. / eps^2)` keeps the
//! normalization while shrinking the velocity support to `[0, eps^2]`.
//!
//! The homogeneous solution evaluates to `H_eps(|a(t) v - a'(t) x|^2)`; its
//! macroscopic fields are independent of the profile and of `eps`:
//! density `3/(4 pi a^3)`, enclosed mass `r^3/a^3`, potential gradient
//! `x/a^3`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::dust::DustSolution;
use crate::error::{Error, Result};
use crate::geometry::{self, Vec3};
use crate::quad::adaptive_simpson;

const NORMALIZATION_TOL: f64 = 1e-13;

/// Target of the velocity-space normalization, `3/(4 pi)`.
pub const VELOCITY_NORM: f64 = 3.0 / (4.0 * PI);

type ShapeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An isotropic phase-space profile `u -> H(u)` with support in `[0, 1]`.
///
/// Construction rescales an arbitrary nonnegative shape so the velocity
/// integral `4 pi int_0^1 s^2 H(s^2) ds` equals `3/(4 pi)` exactly (to
/// quadrature tolerance), so tests can swap shapes without re-deriving
/// constants.
#[derive(Clone)]
pub struct IsotropicProfile {
    shape: ShapeFn,
    norm_constant: f64,
    sup: f64,
}

impl std::fmt::Debug for IsotropicProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IsotropicProfile")
            .field("norm_constant", &self.norm_constant)
            .field("sup", &self.sup)
            .finish()
    }
}

impl IsotropicProfile {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(shape: F) -> Result<Self> {
        let shape: ShapeFn = Arc::new(shape);
        let s = shape.clone();
        let raw = adaptive_simpson(&|t: f64| t * t * s(t * t), 0.0, 1.0, NORMALIZATION_TOL)?;
        if !(raw > 0.0) {
            return Err(Error::domain(
                "profile shape must have positive velocity integral",
            ));
        }
        let norm_constant = VELOCITY_NORM / (4.0 * PI * raw);
        let sup = norm_constant * sup_on_unit_interval(shape.as_ref());
        Ok(IsotropicProfile {
            shape,
            norm_constant,
            sup,
        })
    }

    /// The default polynomial bump `c u^2 (1-u)^2`: continuously
    /// differentiable on the whole line including the support endpoints.
    pub fn polynomial_bump() -> Self {
        IsotropicProfile::new(|u| u * u * (1.0 - u) * (1.0 - u))
            .expect("polynomial bump normalizes")
    }

    /// `H(u)`: zero outside `[0, 1]`.
    pub fn eval(&self, u: f64) -> f64 {
        if (0.0..=1.0).contains(&u) {
            self.norm_constant * (self.shape)(u)
        } else {
            0.0
        }
    }

    /// The normalization constant multiplying the raw shape.
    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    /// `sup H` over the support.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    /// Velocity-space integral `int H(|v|^2) dv = 4 pi int_0^1 s^2 H(s^2) ds`,
    /// recomputed by quadrature (diagnostic; equals `3/(4 pi)` by
    /// construction).
    pub fn normalization(&self) -> Result<f64> {
        let a = adaptive_simpson(&|t| t * t * self.eval(t * t), 0.0, 1.0, NORMALIZATION_TOL)?;
        Ok(4.0 * PI * a)
    }

    /// The velocity scaling `H_eps = eps^-3 H(. / eps^2)`.
    pub fn scaled(&self, epsilon: f64) -> Result<ScaledProfile> {
        ScaledProfile::new(self.clone(), epsilon)
    }
}

fn sup_on_unit_interval(shape: &(dyn Fn(f64) -> f64 + Send + Sync)) -> f64 {
    // Grid scan plus golden-section refinement of the best cell.
    let n = 4096;
    let mut best = 0.0f64;
    let mut best_i = 0usize;
    for i in 0..=n {
        let u = i as f64 / n as f64;
        let v = shape(u);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = (best_i.saturating_sub(1)) as f64 / n as f64;
    let mut hi = ((best_i + 1).min(n)) as f64 / n as f64;
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if shape(m1) < shape(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best.max(shape(0.5 * (lo + hi)))
}

/// `H_eps(u) = eps^-3 H(u / eps^2)`, support in `[0, eps^2]`.
#[derive(Debug, Clone)]
pub struct ScaledProfile {
    base: IsotropicProfile,
    epsilon: f64,
}

impl ScaledProfile {
    pub fn new(base: IsotropicProfile, epsilon: f64) -> Result<Self> {
        if !(0.0 < epsilon && epsilon <= 1.0) {
            return Err(Error::domain(format!(
                "epsilon must lie in (0, 1] (got {epsilon})"
            )));
        }
        Ok(ScaledProfile { base, epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn base(&self) -> &IsotropicProfile {
        &self.base
    }

    pub fn eval(&self, u: f64) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        self.base.eval(u / e2) / (e2 * self.epsilon)
    }

    /// `sup H_eps = eps^-3 sup H`.
    pub fn sup(&self) -> f64 {
        self.base.sup() / self.epsilon.powi(3)
    }

    /// Upper edge of the support of `H_eps`, i.e. `eps^2`.
    pub fn support_bound(&self) -> f64 {
        self.epsilon * self.epsilon
    }
}

/// The exact homogeneous solution `h(t, x, v) = H_eps(|a v - a' x|^2)`.
#[derive(Debug, Clone)]
pub struct HomogeneousSolution {
    profile: ScaledProfile,
    dust: DustSolution,
}

impl HomogeneousSolution {
    pub fn new(profile: IsotropicProfile, epsilon: f64, dust: DustSolution) -> Result<Self> {
        Ok(HomogeneousSolution {
            profile: profile.scaled(epsilon)?,
            dust,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.profile.epsilon()
    }

    pub fn dust(&self) -> &DustSolution {
        &self.dust
    }

    pub fn profile(&self) -> &ScaledProfile {
        &self.profile
    }

    /// Phase-space density `H_eps(|a(t) v - a'(t) x|^2)`.
    pub fn eval(&self, t: f64, x: &Vec3, v: &Vec3) -> Result<f64> {
        let a = self.dust.scale_factor(t)?;
        let adot = self.dust.scale_factor_rate(t)?;
        let w = geometry::sub(&geometry::scale(v, a), &geometry::scale(x, adot));
        Ok(self.profile.eval(geometry::norm_sq(&w)))
    }

    /// Spatial density `3/(4 pi a^3)`; independent of position and of eps.
    pub fn density(&self, t: f64) -> Result<f64> {
        let a = self.dust.scale_factor(t)?;
        Ok(3.0 / (4.0 * PI * a.powi(3)))
    }

    /// Enclosed mass `r^3 / a^3`.
    pub fn enclosed_mass(&self, t: f64, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::domain(format!("radius must be nonnegative: {r}")));
        }
        let a = self.dust.scale_factor(t)?;
        Ok(r.powi(3) / a.powi(3))
    }

    /// Potential gradient `x / a^3` (the acceleration is its negative).
    pub fn field_gradient(&self, t: f64, x: &Vec3) -> Result<Vec3> {
        let a = self.dust.scale_factor(t)?;
        Ok(geometry::scale(x, 1.0 / a.powi(3)))
    }

    /// Attractive acceleration `-x / a^3` entering the characteristic
    /// system.
    pub fn acceleration(&self, t: f64, x: &Vec3) -> Result<Vec3> {
        let a = self.dust.scale_factor(t)?;
        Ok(geometry::scale(x, -1.0 / a.powi(3)))
    }

    /// Largest speed at which the phase-space density can be nonzero at
    /// radius `r`: `(eps + |a'| r) / a`. Used as a sampling bounding box.
    pub fn velocity_support_radius(&self, t: f64, r: f64) -> Result<f64> {
        let a = self.dust.scale_factor(t)?;
        let adot = self.dust.scale_factor_rate(t)?;
        Ok((self.epsilon() + adot.abs() * r) / a)
    }
}
