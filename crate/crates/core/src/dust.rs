//! Closed-form dynamics of the collapsing scale factor and the core boundary.
//!
//! The scale factor `a(t)` solves the free-fall equation `a'' = -1/a^2` from
//! rest at `a0` and reaches zero at the collapse time
//! `T = pi/(2 sqrt 2) a0^(3/2)`. Integrating the energy relation
//! `a'^2/2 = 1/a - 1/a0` leads to the monotone phase function
//!
//! ```text
//! F(r) = r sqrt(1/r - 1) + arctan sqrt(1/r - 1),   F: [0,1] -> [0, pi/2],
//! ```
//!
//! through which `a(t)/a0 = F^{-1}(sqrt 2 a0^{-3/2} t)`. The core boundary
//! `r_eps(t)` is the trajectory of a test particle falling in the field of a
//! point mass `M > 1` from radius 1 with inward speed `eps`; the same phase
//! function gives its closed form
//!
//! ```text
//! F(C r_eps(t)) - F(C) = sqrt(2 M C^3) t,   C = 1 - eps^2 / (2 M).
//! ```
//!
//! `F'` blows up at `r = 1`, so the inverse is computed by bracketed root
//! finding only (a coarse precomputed bracket table plus Illinois false
//! position), never by derivative-based iteration.

use std::f64::consts::{FRAC_PI_2, PI};

use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::geometry::{scale, Vec3};

/// Default fraction of the collapse time up to which evaluations are
/// accepted; beyond it the closed forms sit on top of the singularity and
/// results would silently lose accuracy.
pub const DEFAULT_TIME_GUARD: f64 = 0.999;

const PHASE_RESIDUAL_TOL: f64 = 1e-13;
const BRACKET_TABLE_SIZE: usize = 4096;

/// Collapse time of the scale-factor equation started from rest at `a0`.
pub fn collapse_time(a0: f64) -> Result<f64> {
    if !(a0 > 0.0) {
        return Err(Error::domain(format!(
            "initial scale factor must be positive (got {a0})"
        )));
    }
    Ok(PI / (2.0 * 2.0f64.sqrt()) * a0.powf(1.5))
}

/// The phase function `F(r) = r sqrt(1/r - 1) + arctan sqrt(1/r - 1)`.
///
/// Continuous and strictly decreasing on `[0, 1]` with `F(0) = pi/2` and
/// `F(1) = 0`. The first term is evaluated as `sqrt(r (1 - r))`, which is
/// stable at both endpoints.
pub fn phase_of_radius(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!(
            "phase function argument must lie in [0, 1] (got {r})"
        )));
    }
    if r == 0.0 {
        return Ok(FRAC_PI_2);
    }
    if r == 1.0 {
        return Ok(0.0);
    }
    let s = ((1.0 - r) / r).sqrt();
    Ok((r * (1.0 - r)).sqrt() + s.atan())
}

/// Bracket table: radii `r_i` with `F(r_i) ~ i * (pi/2) / N`, so any phase
/// value can be bracketed in O(1) before refinement.
static PHASE_BRACKETS: Lazy<Vec<f64>> = Lazy::new(|| {
    let n = BRACKET_TABLE_SIZE;
    let mut table = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let y = FRAC_PI_2 * i as f64 / n as f64;
        table.push(bisect_phase(y, 0.0, 1.0));
    }
    table
});

fn phase_unchecked(r: f64) -> f64 {
    if r <= 0.0 {
        FRAC_PI_2
    } else if r >= 1.0 {
        0.0
    } else {
        let s = ((1.0 - r) / r).sqrt();
        (r * (1.0 - r)).sqrt() + s.atan()
    }
}

/// Plain bisection of `F(r) = y` on `[lo, hi]`, used to build the bracket
/// table. Runs to floating-point exhaustion of the bracket.
fn bisect_phase(y: f64, mut lo: f64, mut hi: f64) -> f64 {
    // F is decreasing: F(lo) >= y >= F(hi).
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phase_unchecked(mid) >= y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (phase_unchecked(lo), phase_unchecked(hi));
    if (flo - y).abs() <= (fhi - y).abs() {
        lo
    } else {
        hi
    }
}

/// Inverse of the phase function on `[0, pi/2]`.
///
/// Bracketed Illinois false position, started from the precomputed table;
/// converges unconditionally and returns the bracket endpoint with the
/// smaller residual once the bracket is exhausted or the residual drops
/// below `1e-13`.
pub fn radius_of_phase(y: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&y) {
        return Err(Error::domain(format!(
            "phase must lie in [0, pi/2] (got {y})"
        )));
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    if y == FRAC_PI_2 {
        return Ok(0.0);
    }
    let table = &*PHASE_BRACKETS;
    let n = BRACKET_TABLE_SIZE as f64;
    let idx = ((y / FRAC_PI_2 * n) as usize).min(BRACKET_TABLE_SIZE - 1);
    // Radii decrease as the phase increases.
    let mut lo = table[idx + 1];
    let mut hi = table[idx];
    let mut glo = phase_unchecked(lo) - y;
    let mut ghi = phase_unchecked(hi) - y;
    if glo < 0.0 {
        // Table rounding put the root below the cell; widen by one cell.
        lo = table[(idx + 2).min(BRACKET_TABLE_SIZE)];
        glo = phase_unchecked(lo) - y;
    }
    if ghi > 0.0 {
        hi = table[idx.saturating_sub(1)];
        ghi = phase_unchecked(hi) - y;
    }
    // g(lo) >= 0 >= g(hi): F decreasing in r means g decreasing.
    let mut side = 0i8;
    for _ in 0..200 {
        if glo.abs() <= PHASE_RESIDUAL_TOL {
            return Ok(lo);
        }
        if ghi.abs() <= PHASE_RESIDUAL_TOL {
            return Ok(hi);
        }
        let denom = glo - ghi;
        let mut mid = if denom != 0.0 {
            lo + glo * (hi - lo) / denom
        } else {
            0.5 * (lo + hi)
        };
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        if mid <= lo || mid >= hi {
            break; // bracket exhausted at f64 resolution
        }
        let gm = phase_unchecked(mid) - y;
        if gm >= 0.0 {
            lo = mid;
            glo = gm;
            if side == 1 {
                ghi *= 0.5; // Illinois weighting keeps both ends moving
            }
            side = 1;
        } else {
            hi = mid;
            ghi = gm;
            if side == -1 {
                glo *= 0.5;
            }
            side = -1;
        }
    }
    Ok(if glo.abs() <= ghi.abs() { lo } else { hi })
}

/// The homogeneous free-fall solution: scale factor `a(t)` with `a(0) = a0`
/// and `a'(0) = 0`, collapsing at `T = pi/(2 sqrt 2) a0^(3/2)`.
#[derive(Debug, Clone, Copy)]
pub struct DustSolution {
    a0: f64,
    collapse_time: f64,
    time_guard: f64,
}

impl DustSolution {
    pub fn new(a0: f64) -> Result<Self> {
        Self::with_time_guard(a0, DEFAULT_TIME_GUARD)
    }

    /// `time_guard` is the fraction of the collapse time up to which times
    /// are accepted (default 0.999).
    pub fn with_time_guard(a0: f64, time_guard: f64) -> Result<Self> {
        let collapse_time = collapse_time(a0)?;
        if !(0.0 < time_guard && time_guard < 1.0) {
            return Err(Error::domain(format!(
                "time guard must lie in (0, 1) (got {time_guard})"
            )));
        }
        Ok(DustSolution {
            a0,
            collapse_time,
            time_guard,
        })
    }

    pub fn initial_radius(&self) -> f64 {
        self.a0
    }

    pub fn collapse_time(&self) -> f64 {
        self.collapse_time
    }

    /// Largest accepted evaluation time.
    pub fn max_time(&self) -> f64 {
        self.time_guard * self.collapse_time
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.max_time()) {
            return Err(Error::domain(format!(
                "time {t} outside [0, {}] (= {} of the collapse time {})",
                self.max_time(),
                self.time_guard,
                self.collapse_time
            )));
        }
        Ok(())
    }

    /// Scale factor `a(t)`, via the phase relation
    /// `F(a/a0) = sqrt 2 a0^(-3/2) t`.
    pub fn scale_factor(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let y = 2.0f64.sqrt() * self.a0.powf(-1.5) * t;
        Ok(self.a0 * radius_of_phase(y)?)
    }

    /// `a'(t) = -sqrt 2 sqrt(1/a - 1/a0)`, nonpositive, zero at `t = 0`.
    pub fn scale_factor_rate(&self, t: f64) -> Result<f64> {
        let a = self.scale_factor(t)?;
        Ok(-(2.0 * (1.0 / a - 1.0 / self.a0).max(0.0)).sqrt())
    }

    /// Density and velocity field of the associated pressureless ball of
    /// radius `a(t)/a0`: uniform density `3/(4 pi a^3)` inside, zero
    /// outside, with velocity `(a'/a) x` everywhere.
    pub fn state(&self, t: f64, x: &Vec3) -> Result<(f64, Vec3)> {
        let a = self.scale_factor(t)?;
        let adot = -(2.0 * (1.0 / a - 1.0 / self.a0).max(0.0)).sqrt();
        let ball_radius = a / self.a0;
        let r = crate::geometry::norm(x);
        let density = if r <= ball_radius {
            3.0 / (4.0 * PI * a.powi(3))
        } else {
            0.0
        };
        Ok((density, scale(x, adot / a)))
    }
}

/// The separating curve `r_eps(t)`: a radially infalling test particle in
/// the field of a point mass `mass_bound`, started at radius 1 with speed
/// `eps` inward. Collapses at `t_collapse < T`.
#[derive(Debug, Clone, Copy)]
pub struct CoreBoundary {
    epsilon: f64,
    mass_bound: f64,
    energy_param: f64,
    collapse_time: f64,
    time_guard: f64,
}

impl CoreBoundary {
    /// Canonical constructor for the unit-initial-radius configuration:
    /// requires `mass_bound > 1`, which is what the comparison with the
    /// unit dust ball needs.
    pub fn new(epsilon: f64, mass_bound: f64) -> Result<Self> {
        Self::with_mass_floor(epsilon, mass_bound, 1.0)
    }

    /// General constructor: `mass_floor` is the effective mass of the dust
    /// ball the boundary is compared against (`a0^-3` for initial radius
    /// `a0`); the ordering `r_eps <= a/a0` requires `mass_bound` to exceed
    /// it.
    pub fn with_mass_floor(epsilon: f64, mass_bound: f64, mass_floor: f64) -> Result<Self> {
        if !(0.0 < epsilon && epsilon <= 1.0) {
            return Err(Error::domain(format!(
                "epsilon must lie in (0, 1] (got {epsilon})"
            )));
        }
        if !(mass_floor > 0.0) {
            return Err(Error::domain(format!(
                "mass floor must be positive (got {mass_floor})"
            )));
        }
        if !(mass_bound > mass_floor) {
            return Err(Error::domain(format!(
                "mass bound must exceed {mass_floor} (got {mass_bound})"
            )));
        }
        let energy_param = 1.0 - epsilon * epsilon / (2.0 * mass_bound);
        if !(0.0 < energy_param && energy_param < 1.0) {
            return Err(Error::domain(format!(
                "energy parameter 1 - eps^2/(2M) = {energy_param} outside (0, 1)"
            )));
        }
        let c = energy_param;
        let collapse_time =
            (FRAC_PI_2 - phase_of_radius(c)?) / (2.0 * mass_bound * c.powi(3)).sqrt();
        Ok(CoreBoundary {
            epsilon,
            mass_bound,
            energy_param,
            collapse_time,
            time_guard: DEFAULT_TIME_GUARD,
        })
    }

    pub fn with_time_guard(mut self, time_guard: f64) -> Result<Self> {
        if !(0.0 < time_guard && time_guard < 1.0) {
            return Err(Error::domain(format!(
                "time guard must lie in (0, 1) (got {time_guard})"
            )));
        }
        self.time_guard = time_guard;
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mass_bound(&self) -> f64 {
        self.mass_bound
    }

    /// `1 - eps^2 / (2 mass_bound)`, in (0, 1).
    pub fn energy_param(&self) -> f64 {
        self.energy_param
    }

    pub fn collapse_time(&self) -> f64 {
        self.collapse_time
    }

    pub fn max_time(&self) -> f64 {
        self.time_guard * self.collapse_time
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.max_time()) {
            return Err(Error::domain(format!(
                "time {t} outside [0, {}] (= {} of the boundary collapse time {})",
                self.max_time(),
                self.time_guard,
                self.collapse_time
            )));
        }
        Ok(())
    }

    /// `r_eps(t) = F^{-1}(F(C) + sqrt(2 M C^3) t) / C`, strictly
    /// decreasing from `r_eps(0) = 1`.
    pub fn radius(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let c = self.energy_param;
        let y = phase_of_radius(c)? + (2.0 * self.mass_bound * c.powi(3)).sqrt() * t;
        Ok(radius_of_phase(y.min(FRAC_PI_2))? / c)
    }

    /// `r_eps'(t) = -sqrt(2M) sqrt(1/r_eps - C)`; equals `-eps` at `t = 0`
    /// and drops below `-eps` afterwards.
    pub fn radius_rate(&self, t: f64) -> Result<f64> {
        let r = self.radius(t)?;
        Ok(-(2.0 * self.mass_bound * (1.0 / r - self.energy_param).max(0.0)).sqrt())
    }
}
