//! Field histories and characteristic tracing.
//!
//! A `FieldHistory` records the radial field on a uniform snapshot grid;
//! between snapshots the enclosed mass is interpolated linearly in time
//! (and is a step function in radius). Backward RK4 integration of
//! `x' = v`, `v' = -m(s, |x|) x/|x|^3` from `(t, x, v)` to `t = 0` recovers
//! the initial phase-space point of a characteristic, and with it the value
//! of `f` at `(t, x, v)`: `f` is constant along characteristics, so
//! `f(t, x, v) = f0(X(0), V(0))`.

use crate::dust::DustSolution;
use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::geometry::{self, Vec3};
use crate::initial::InitialData;

/// A time-dependent gravitational acceleration field.
pub trait GravityField: Sync {
    fn acceleration(&self, t: f64, x: &Vec3) -> Vec3;

    /// Latest time the field is defined up to, if bounded.
    fn horizon(&self) -> Option<f64> {
        None
    }
}

/// Radial field snapshots on the uniform grid `t_k = k * dt`.
#[derive(Debug, Clone)]
pub struct FieldHistory {
    dt: f64,
    snapshots: Vec<RadialField>,
}

impl FieldHistory {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config(format!(
                "dt_hist must be positive and finite (got {dt})"
            )));
        }
        Ok(FieldHistory {
            dt,
            snapshots: Vec::new(),
        })
    }

    pub fn push(&mut self, field: RadialField) {
        self.snapshots.push(field);
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshot(&self, k: usize) -> &RadialField {
        &self.snapshots[k]
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.snapshots.len()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn end_time(&self) -> f64 {
        match self.snapshots.len() {
            0 => 0.0,
            n => (n - 1) as f64 * self.dt,
        }
    }

    /// Enclosed mass at `(t, r)`, linear in time between snapshots and
    /// clamped to the recorded range.
    pub fn enclosed_mass_at(&self, t: f64, r: f64) -> f64 {
        if self.snapshots.is_empty() {
            return 0.0;
        }
        let n = self.snapshots.len();
        let s = (t / self.dt).clamp(0.0, (n - 1) as f64);
        let k = (s.floor() as usize).min(n - 1);
        if k + 1 >= n {
            return self.snapshots[k].enclosed_mass(r);
        }
        let theta = s - k as f64;
        let m0 = self.snapshots[k].enclosed_mass(r);
        let m1 = self.snapshots[k + 1].enclosed_mass(r);
        (1.0 - theta) * m0 + theta * m1
    }
}

impl GravityField for FieldHistory {
    fn acceleration(&self, t: f64, x: &Vec3) -> Vec3 {
        let r2 = geometry::norm_sq(x);
        if r2 == 0.0 {
            return geometry::ZERO;
        }
        let r = r2.sqrt();
        let m = self.enclosed_mass_at(t, r);
        geometry::scale(x, -m / (r2 * r))
    }

    fn horizon(&self) -> Option<f64> {
        Some(self.end_time())
    }
}

/// The exact homogeneous field `-x / a(t)^3`.
#[derive(Debug, Clone, Copy)]
pub struct ExactHomogeneousField<'a> {
    dust: &'a DustSolution,
}

impl<'a> ExactHomogeneousField<'a> {
    pub fn new(dust: &'a DustSolution) -> Self {
        ExactHomogeneousField { dust }
    }
}

impl GravityField for ExactHomogeneousField<'_> {
    fn acceleration(&self, t: f64, x: &Vec3) -> Vec3 {
        // Valid strictly before the collapse time; the guard is enforced by
        // the scale-factor evaluation.
        let a = self
            .dust
            .scale_factor(t)
            .expect("tracer time must stay inside the dust domain");
        geometry::scale(x, -1.0 / a.powi(3))
    }

    fn horizon(&self) -> Option<f64> {
        Some(self.dust.max_time())
    }
}

/// Classical RK4 for the characteristic system, fixed step `dt_step` with a
/// shorter final step to land exactly on `t_to`. Integrates in either time
/// direction.
pub fn flow<F: GravityField + ?Sized>(
    field: &F,
    t_from: f64,
    x: &Vec3,
    v: &Vec3,
    t_to: f64,
    dt_step: f64,
) -> (Vec3, Vec3) {
    debug_assert!(dt_step > 0.0);
    let mut x = *x;
    let mut v = *v;
    let span = t_to - t_from;
    if span == 0.0 {
        return (x, v);
    }
    let n_full = (span.abs() / dt_step).floor() as usize;
    let h_full = dt_step * span.signum();
    let mut t = t_from;
    for step in 0..=n_full {
        let h = if step < n_full { h_full } else { t_to - t };
        if h == 0.0 {
            break;
        }
        let (nx, nv) = rk4_step(field, t, &x, &v, h);
        x = nx;
        v = nv;
        t += h;
    }
    (x, v)
}

fn rk4_step<F: GravityField + ?Sized>(
    field: &F,
    t: f64,
    x: &Vec3,
    v: &Vec3,
    h: f64,
) -> (Vec3, Vec3) {
    let k1x = *v;
    let k1v = field.acceleration(t, x);
    let k2x = geometry::axpy(v, 0.5 * h, &k1v);
    let k2v = field.acceleration(t + 0.5 * h, &geometry::axpy(x, 0.5 * h, &k1x));
    let k3x = geometry::axpy(v, 0.5 * h, &k2v);
    let k3v = field.acceleration(t + 0.5 * h, &geometry::axpy(x, 0.5 * h, &k2x));
    let k4x = geometry::axpy(v, h, &k3v);
    let k4v = field.acceleration(t + h, &geometry::axpy(x, h, &k3x));
    let nx = [
        x[0] + h / 6.0 * (k1x[0] + 2.0 * k2x[0] + 2.0 * k3x[0] + k4x[0]),
        x[1] + h / 6.0 * (k1x[1] + 2.0 * k2x[1] + 2.0 * k3x[1] + k4x[1]),
        x[2] + h / 6.0 * (k1x[2] + 2.0 * k2x[2] + 2.0 * k3x[2] + k4x[2]),
    ];
    let nv = [
        v[0] + h / 6.0 * (k1v[0] + 2.0 * k2v[0] + 2.0 * k3v[0] + k4v[0]),
        v[1] + h / 6.0 * (k1v[1] + 2.0 * k2v[1] + 2.0 * k3v[1] + k4v[1]),
        v[2] + h / 6.0 * (k1v[2] + 2.0 * k2v[2] + 2.0 * k3v[2] + k4v[2]),
    ];
    (nx, nv)
}

/// Traces `(x, v)` at time `t` back to `t = 0` through the recorded
/// history. `t` must not exceed the last snapshot time.
pub fn backward_characteristic(
    history: &FieldHistory,
    t: f64,
    x: &Vec3,
    v: &Vec3,
    dt_step: f64,
) -> Result<(Vec3, Vec3)> {
    if !(t >= 0.0 && t <= history.end_time() + 1e-12) {
        return Err(Error::domain(format!(
            "time {t} outside recorded history [0, {}]",
            history.end_time()
        )));
    }
    Ok(flow(history, t, x, v, 0.0, dt_step))
}

/// Pointwise evaluation of the transported solution:
/// `f(t, x, v) = f0(X(0, t, x, v), V(0, t, x, v))`.
pub fn f_eval_pointwise(
    history: &FieldHistory,
    initial: &InitialData,
    t: f64,
    x: &Vec3,
    v: &Vec3,
    dt_step: f64,
) -> Result<f64> {
    let (x0, v0) = backward_characteristic(history, t, x, v, dt_step)?;
    Ok(initial.eval(&x0, &v0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::ParticleEnsemble;

    fn point_mass_history(mass: f64, n_snaps: usize, dt: f64) -> FieldHistory {
        let e = ParticleEnsemble {
            positions: vec![[0.0, 0.0, 0.0]],
            velocities: vec![[0.0, 0.0, 0.0]],
            weights: vec![mass],
            time: 0.0,
            seed: 0,
        };
        let mut h = FieldHistory::new(dt).unwrap();
        for _ in 0..n_snaps {
            h.push(RadialField::from_ensemble(&e).unwrap());
        }
        h
    }

    #[test]
    fn backtrace_at_t0_is_identity() {
        let h = point_mass_history(1.0, 3, 0.1);
        let x = [0.7, -0.1, 0.2];
        let v = [0.3, 0.4, -0.5];
        let (x0, v0) = backward_characteristic(&h, 0.0, &x, &v, 1e-3).unwrap();
        assert_eq!(x0, x);
        assert_eq!(v0, v);
    }

    #[test]
    fn backtrace_beyond_history_is_domain_error() {
        let h = point_mass_history(1.0, 3, 0.1);
        assert!(backward_characteristic(&h, 0.3, &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], 1e-3).is_err());
    }

    #[test]
    fn circular_kepler_orbit_backtrace() {
        // frozen central mass: backtrace of a circular orbit point matches
        // the closed-form rotation
        let m = 1.3f64;
        let radius = 0.9f64;
        let omega = (m / radius.powi(3)).sqrt();
        let t = 0.37;
        let h = point_mass_history(m, 40, 0.01);
        let angle = omega * t;
        let x_t = [radius * angle.cos(), radius * angle.sin(), 0.0];
        let v_t = [
            -radius * omega * angle.sin(),
            radius * omega * angle.cos(),
            0.0,
        ];
        let (x0, v0) = backward_characteristic(&h, t, &x_t, &v_t, 1e-4).unwrap();
        let expect_x = [radius, 0.0, 0.0];
        let expect_v = [0.0, radius * omega, 0.0];
        for k in 0..3 {
            assert!((x0[k] - expect_x[k]).abs() < 1e-5, "x0 = {x0:?}");
            assert!((v0[k] - expect_v[k]).abs() < 1e-5, "v0 = {v0:?}");
        }
    }

    #[test]
    fn forward_backward_round_trip() {
        let h = point_mass_history(2.0, 30, 0.02);
        let x = [0.6, 0.1, -0.3];
        let v = [-0.2, 0.5, 0.4];
        let t = 0.5;
        let (xt, vt) = flow(&h, 0.0, &x, &v, t, 1e-4);
        let (x0, v0) = backward_characteristic(&h, t, &xt, &vt, 1e-4).unwrap();
        for k in 0..3 {
            assert!((x0[k] - x[k]).abs() < 1e-5);
            assert!((v0[k] - v[k]).abs() < 1e-5);
        }
    }

    #[test]
    fn time_interpolation_is_linear() {
        let mut h = FieldHistory::new(1.0).unwrap();
        let e0 = ParticleEnsemble {
            positions: vec![[0.5, 0.0, 0.0]],
            velocities: vec![[0.0, 0.0, 0.0]],
            weights: vec![1.0],
            time: 0.0,
            seed: 0,
        };
        let mut e1 = e0.clone();
        e1.weights[0] = 3.0;
        h.push(RadialField::from_ensemble(&e0).unwrap());
        h.push(RadialField::from_ensemble(&e1).unwrap());
        assert_eq!(h.enclosed_mass_at(0.0, 1.0), 1.0);
        assert_eq!(h.enclosed_mass_at(1.0, 1.0), 3.0);
        assert!((h.enclosed_mass_at(0.25, 1.0) - 1.5).abs() < 1e-15);
    }
}
