//! Tracer-based trajectory property suites.
//!
//! Each suite integrates test particles and checks an ordering or
//! conservation property against the closed-form core boundary:
//!
//! * tracers starting at or outside the cut radius with speeds below the
//!   cut velocity stay outside the core boundary;
//! * tracers that leave the core boundary region never re-enter it;
//! * mass-carrying tracers of the homogeneous solution that sit inside the
//!   boundary at some time were inside it at all earlier times (checked by
//!   backward integration in the exact field);
//! * the co-moving radial velocity of mass-carrying tracers stays above
//!   `-eps`, while along the boundary curve it stays below `-eps`;
//! * the transported quantity `|a v - a' x|^2` is conserved along exact
//!   characteristics.
//!
//! Field-based suites run in whatever `GravityField` is supplied
//! (typically a recorded history, whose total mass is below the boundary
//! mass bound by construction); the homogeneous-solution suites always use
//! the exact field. Violations are counted against a caller-supplied
//! margin that absorbs integrator and field-sampling tolerances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::characteristics::GravityField;
use crate::diagnostics::{ball_point, unit_vector};
use crate::dust::{CoreBoundary, DustSolution};
use crate::ensemble::SphericalCoords;
use crate::error::Result;
use crate::geometry::{self, Vec3};
use crate::initial::InitialData;

#[derive(Debug, Clone, Copy)]
pub struct TrajectorySuiteParams {
    /// Tracers per suite.
    pub tracers: usize,
    pub seed: u64,
    /// RK4 step for the field-based suites.
    pub dt_field: f64,
    /// RK4 step for the exact-field suites.
    pub dt_exact: f64,
    /// Allowed violation depth for the field-based ordering checks.
    pub margin_field: f64,
    /// Allowed violation depth for the exact-field checks.
    pub margin_exact: f64,
    /// Reference time for the backward-confinement suite, as a fraction of
    /// the boundary collapse time.
    pub t_star_fraction: f64,
    /// How far toward the boundary collapse time tracers run.
    pub t_end_fraction: f64,
    /// Relative drift budget for the transport invariant.
    pub drift_tol: f64,
}

impl Default for TrajectorySuiteParams {
    fn default() -> Self {
        TrajectorySuiteParams {
            tracers: 100,
            seed: 1,
            dt_field: 1e-3,
            dt_exact: 1e-4,
            margin_field: 1e-4,
            margin_exact: 1e-7,
            t_star_fraction: 0.7,
            t_end_fraction: 0.95,
            drift_tol: 1e-6,
        }
    }
}

/// Outcome of one suite: violation count and the worst clearance seen
/// (negative values mean the margin was undercut).
#[derive(Debug, Clone)]
pub struct LemmaOutcome {
    pub name: &'static str,
    pub tracers: usize,
    pub violations: usize,
    pub worst_clearance: f64,
}

impl LemmaOutcome {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryReport {
    pub outcomes: Vec<LemmaOutcome>,
}

impl TrajectoryReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass())
    }
}

/// Exact homogeneous acceleration `-x/a^3` with the scale factor
/// pretabulated on the half-step grid of a fixed-step RK4 integration.
struct CachedDustField {
    t0: f64,
    half_dt: f64,
    inv_a3: Vec<f64>,
}

impl CachedDustField {
    fn new(dust: &DustSolution, t0: f64, t1: f64, n_steps: usize) -> Result<Self> {
        let dt = (t1 - t0) / n_steps as f64;
        let half_dt = 0.5 * dt;
        let mut inv_a3 = Vec::with_capacity(2 * n_steps + 1);
        for k in 0..=2 * n_steps {
            let t = t0 + half_dt * k as f64;
            let a = dust.scale_factor(t)?;
            inv_a3.push(a.powi(-3));
        }
        Ok(CachedDustField {
            t0,
            half_dt,
            inv_a3,
        })
    }
}

impl GravityField for CachedDustField {
    fn acceleration(&self, t: f64, x: &Vec3) -> Vec3 {
        let k = ((t - self.t0) / self.half_dt).round() as usize;
        let k = k.min(self.inv_a3.len() - 1);
        geometry::scale(x, -self.inv_a3[k])
    }
}

/// One RK4 step of the characteristic system.
fn rk4<F: GravityField + ?Sized>(field: &F, t: f64, x: &Vec3, v: &Vec3, h: f64) -> (Vec3, Vec3) {
    let k1x = *v;
    let k1v = field.acceleration(t, x);
    let k2x = geometry::axpy(v, 0.5 * h, &k1v);
    let k2v = field.acceleration(t + 0.5 * h, &geometry::axpy(x, 0.5 * h, &k1x));
    let k3x = geometry::axpy(v, 0.5 * h, &k2v);
    let k3v = field.acceleration(t + 0.5 * h, &geometry::axpy(x, 0.5 * h, &k2x));
    let k4x = geometry::axpy(v, h, &k3v);
    let k4v = field.acceleration(t + h, &geometry::axpy(x, h, &k3x));
    (
        [
            x[0] + h / 6.0 * (k1x[0] + 2.0 * k2x[0] + 2.0 * k3x[0] + k4x[0]),
            x[1] + h / 6.0 * (k1x[1] + 2.0 * k2x[1] + 2.0 * k3x[1] + k4x[1]),
            x[2] + h / 6.0 * (k1x[2] + 2.0 * k2x[2] + 2.0 * k3x[2] + k4x[2]),
        ],
        [
            v[0] + h / 6.0 * (k1v[0] + 2.0 * k2v[0] + 2.0 * k3v[0] + k4v[0]),
            v[1] + h / 6.0 * (k1v[1] + 2.0 * k2v[1] + 2.0 * k3v[1] + k4v[1]),
            v[2] + h / 6.0 * (k1v[2] + 2.0 * k2v[2] + 2.0 * k3v[2] + k4v[2]),
        ],
    )
}

/// Uniform grid covering `[t0, t1]` with a whole number of steps.
fn step_grid(t0: f64, t1: f64, dt: f64) -> (usize, f64) {
    let span = (t1 - t0).abs();
    let n = (span / dt).ceil().max(1.0) as usize;
    (n, (t1 - t0) / n as f64)
}

/// Lemma suite: tracers with `r(0) >= 1` and `|v(0)| < eps` stay strictly
/// outside the core boundary.
pub fn outside_tracers_stay_outside<F: GravityField>(
    field: &F,
    core: &CoreBoundary,
    params: &TrajectorySuiteParams,
) -> Result<LemmaOutcome> {
    let t_end = suite_end_time(field, core, params);
    let (n_steps, h) = step_grid(0.0, t_end, params.dt_field);
    let r_eps = boundary_grid(core, 0.0, h, n_steps)?;
    let eps = core.epsilon();

    let clearances: Vec<f64> = (0..params.tracers)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(0x31a0_0000 + i as u64);
            let dir = unit_vector(&mut rng);
            let radius = rng.gen_range(1.0..1.5);
            let x0 = geometry::scale(&dir, radius);
            let v0 = geometry::scale(&unit_vector(&mut rng), 0.99 * eps);
            let mut x = x0;
            let mut v = v0;
            let mut worst = f64::INFINITY;
            for k in 0..n_steps {
                let t = h * k as f64;
                let (nx, nv) = rk4(field, t, &x, &v, h);
                x = nx;
                v = nv;
                worst = worst.min(geometry::norm(&x) - r_eps[k + 1]);
            }
            worst
        })
        .collect();
    Ok(outcome(
        "outside-tracers-stay-outside",
        &clearances,
        params.margin_field,
    ))
}

/// Lemma suite: tracers with `r(0) <= 1` that reach `r >= r_eps` never
/// re-enter the boundary region afterwards.
pub fn exited_tracers_never_reenter<F: GravityField>(
    field: &F,
    core: &CoreBoundary,
    params: &TrajectorySuiteParams,
) -> Result<LemmaOutcome> {
    let t_end = suite_end_time(field, core, params);
    let (n_steps, h) = step_grid(0.0, t_end, params.dt_field);
    let r_eps = boundary_grid(core, 0.0, h, n_steps)?;
    let eps = core.epsilon();

    let clearances: Vec<f64> = (0..params.tracers)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(0x31b0_0000 + i as u64);
            let x0 = ball_point(&mut rng, 1.0);
            let v0 = ball_point(&mut rng, 2.0 * eps);
            let mut x = x0;
            let mut v = v0;
            let mut crossed = false;
            let mut worst = f64::INFINITY;
            for k in 0..n_steps {
                let t = h * k as f64;
                let (nx, nv) = rk4(field, t, &x, &v, h);
                x = nx;
                v = nv;
                let gap = geometry::norm(&x) - r_eps[k + 1];
                if crossed {
                    worst = worst.min(gap);
                } else if gap >= 0.0 {
                    crossed = true;
                }
            }
            worst // tracers that never crossed report +inf and pass
        })
        .collect();
    Ok(outcome(
        "exited-tracers-never-reenter",
        &clearances,
        params.margin_field,
    ))
}

/// Lemma suite: mass-carrying homogeneous tracers inside the boundary at
/// `t* = t_star_fraction * T_eps` were strictly inside at all earlier
/// times. Backward integration in the exact field.
pub fn core_tracers_confined_backward(
    initial: &InitialData,
    core: &CoreBoundary,
    params: &TrajectorySuiteParams,
) -> Result<LemmaOutcome> {
    let hs = initial.homogeneous();
    let dust = hs.dust();
    let t_star = params.t_star_fraction * core.collapse_time();
    let (n_steps, h) = step_grid(t_star, 0.0, params.dt_exact); // h < 0
    let field = CachedDustField::new(dust, t_star, 0.0, n_steps)?;
    let r_eps = boundary_grid(core, t_star, h, n_steps)?;
    let eps = core.epsilon();
    let a_star = dust.scale_factor(t_star)?;
    let adot_star = dust.scale_factor_rate(t_star)?;
    let r_eps_star = core.radius(t_star)?;

    let clearances: Vec<f64> = (0..params.tracers)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(0x3200_0000 + i as u64);
            let x0 = ball_point(&mut rng, r_eps_star);
            // v = (a' x + e)/a with 0 < |e| < eps keeps h > 0
            let e = loop {
                let cand = ball_point(&mut rng, 0.95 * eps);
                if geometry::norm(&cand) > 0.05 * eps {
                    break cand;
                }
            };
            let v0 = geometry::scale(
                &geometry::axpy(&e, adot_star, &x0),
                1.0 / a_star,
            );
            let mut x = x0;
            let mut v = v0;
            let mut worst = f64::INFINITY;
            for k in 0..n_steps {
                let t = t_star + h * k as f64;
                let (nx, nv) = rk4(&field, t, &x, &v, h);
                x = nx;
                v = nv;
                // confinement: r < r_eps at earlier times
                worst = worst.min(r_eps[k + 1] - geometry::norm(&x));
            }
            worst
        })
        .collect();
    Ok(outcome(
        "core-tracers-confined-backward",
        &clearances,
        params.margin_exact,
    ))
}

/// Co-moving velocity bound along mass-carrying tracers:
/// `w~ = a w - a' r > -eps` throughout `[0, t_end]` in the exact field.
pub fn comoving_velocity_lower_bound(
    initial: &InitialData,
    core: &CoreBoundary,
    params: &TrajectorySuiteParams,
) -> Result<LemmaOutcome> {
    let hs = initial.homogeneous();
    let dust = hs.dust();
    let a0 = dust.initial_radius();
    let t_end = (params.t_end_fraction * core.collapse_time()).min(dust.max_time());
    let (n_steps, h) = step_grid(0.0, t_end, params.dt_exact);
    let field = CachedDustField::new(dust, 0.0, t_end, n_steps)?;
    let eps = core.epsilon();
    let scale: Vec<(f64, f64)> = (0..=n_steps)
        .map(|k| {
            let t = h * k as f64;
            Ok((dust.scale_factor(t)?, dust.scale_factor_rate(t)?))
        })
        .collect::<Result<_>>()?;

    let clearances: Vec<f64> = (0..params.tracers)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(0x3300_0000 + i as u64);
            let x0 = ball_point(&mut rng, 1.0);
            // t = 0 mass carriers: |a0 v| inside the support
            let e = loop {
                let cand = ball_point(&mut rng, 0.95 * eps);
                if geometry::norm(&cand) > 0.05 * eps {
                    break cand;
                }
            };
            let v0 = geometry::scale(&e, 1.0 / a0);
            let mut x = x0;
            let mut v = v0;
            let mut worst = f64::INFINITY;
            for k in 0..n_steps {
                let t = h * k as f64;
                let (nx, nv) = rk4(&field, t, &x, &v, h);
                x = nx;
                v = nv;
                let (a, adot) = scale[k + 1];
                let sc = SphericalCoords::from_phase(&x, &v);
                let w_tilde = a * sc.w - adot * sc.r;
                worst = worst.min(w_tilde + eps);
            }
            worst
        })
        .collect();
    Ok(outcome(
        "comoving-velocity-lower-bound",
        &clearances,
        params.margin_exact,
    ))
}

/// Closed-form check that the boundary curve's co-moving velocity
/// `w~_eps = a r_eps' - a' r_eps` stays strictly below `-eps` for `t > 0`.
pub fn boundary_comoving_upper_bound(
    dust: &DustSolution,
    core: &CoreBoundary,
    params: &TrajectorySuiteParams,
) -> Result<LemmaOutcome> {
    let t_end = (params.t_end_fraction * core.collapse_time()).min(dust.max_time());
    let n = 2_000;
    let eps = core.epsilon();
    let mut clearances = Vec::with_capacity(n);
    for k in 1..=n {
        let t = t_end * k as f64 / n as f64;
        let a = dust.scale_factor(t)?;
        let adot = dust.scale_factor_rate(t)?;
        let w_tilde = a * core.radius_rate(t)? - adot * core.radius(t)?;
        clearances.push(-eps - w_tilde);
    }
    Ok(outcome(
        "boundary-comoving-upper-bound",
        &clearances,
        params.margin_exact,
    ))
}

/// Conservation of the transported quantity `|a v - a' x|^2` along exact
/// characteristics; the clearance is `drift_tol - relative drift`.
pub fn transport_invariant_drift(
    dust: &DustSolution,
    params: &TrajectorySuiteParams,
) -> Result<LemmaOutcome> {
    let t_end = 0.9 * dust.collapse_time();
    let (n_steps, h) = step_grid(0.0, t_end, params.dt_exact);
    let field = CachedDustField::new(dust, 0.0, t_end, n_steps)?;
    let scale: Vec<(f64, f64)> = (0..=n_steps)
        .map(|k| {
            let t = h * k as f64;
            Ok((dust.scale_factor(t)?, dust.scale_factor_rate(t)?))
        })
        .collect::<Result<_>>()?;

    let drifts: Vec<f64> = (0..params.tracers)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(0x3400_0000 + i as u64);
            let x0 = ball_point(&mut rng, 1.0);
            let v0 = loop {
                let cand = ball_point(&mut rng, 1.0);
                if geometry::norm(&cand) > 0.05 {
                    break cand;
                }
            };
            let q0 = invariant(&scale[0], &x0, &v0);
            let mut x = x0;
            let mut v = v0;
            let mut max_drift = 0.0f64;
            for k in 0..n_steps {
                let t = h * k as f64;
                let (nx, nv) = rk4(&field, t, &x, &v, h);
                x = nx;
                v = nv;
                let q = invariant(&scale[k + 1], &x, &v);
                max_drift = max_drift.max((q - q0).abs() / q0);
            }
            max_drift
        })
        .collect();
    let clearances: Vec<f64> = drifts.iter().map(|d| params.drift_tol - d).collect();
    Ok(outcome("transport-invariant-drift", &clearances, 0.0))
}

fn invariant(scale: &(f64, f64), x: &Vec3, v: &Vec3) -> f64 {
    let (a, adot) = *scale;
    geometry::norm_sq(&geometry::sub(
        &geometry::scale(v, a),
        &geometry::scale(x, adot),
    ))
}

/// Runs every suite; field-based lemmas in the supplied field, exact-field
/// lemmas in the homogeneous field of the initial datum.
pub fn trajectory_suites<F: GravityField>(
    field: &F,
    initial: &InitialData,
    core: &CoreBoundary,
    params: &TrajectorySuiteParams,
) -> Result<TrajectoryReport> {
    let dust = initial.homogeneous().dust();
    let outcomes = vec![
        outside_tracers_stay_outside(field, core, params)?,
        exited_tracers_never_reenter(field, core, params)?,
        core_tracers_confined_backward(initial, core, params)?,
        comoving_velocity_lower_bound(initial, core, params)?,
        boundary_comoving_upper_bound(dust, core, params)?,
        transport_invariant_drift(dust, params)?,
    ];
    Ok(TrajectoryReport { outcomes })
}

fn suite_end_time<F: GravityField>(
    field: &F,
    core: &CoreBoundary,
    params: &TrajectorySuiteParams,
) -> f64 {
    let mut t_end = params.t_end_fraction * core.collapse_time();
    t_end = t_end.min(core.max_time());
    if let Some(h) = field.horizon() {
        t_end = t_end.min(h);
    }
    t_end
}

fn boundary_grid(core: &CoreBoundary, t0: f64, h: f64, n_steps: usize) -> Result<Vec<f64>> {
    (0..=n_steps)
        .map(|k| core.radius(t0 + h * k as f64))
        .collect()
}

fn outcome(name: &'static str, clearances: &[f64], margin: f64) -> LemmaOutcome {
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for &c in clearances {
        if c < -margin {
            violations += 1;
        }
        worst = worst.min(c);
    }
    LemmaOutcome {
        name,
        tracers: clearances.len(),
        violations,
        worst_clearance: worst,
    }
}
