//! Shared independent oracles for the integration tests.
//!
//! Everything here deliberately avoids the library's closed-form paths:
//! fixed-step RK4 on the second-order infall equation, composite Simpson
//! quadrature, and a brute-force pairwise shell potential.

#![allow(dead_code)]

use collapse_core::geometry::{self, Vec3};

/// Fixed-step classical RK4 for `r'' = -mass / r^2` from `(r0, v0)`.
/// Returns the sampled trajectory `(t, r, rdot)` at every step and the
/// time at which the radius dropped below `r_stop` (a stage evaluation
/// that leaves the positive domain also stops the run; the radius is then
/// far below any comparison point).
pub struct InfallOracle {
    pub samples: Vec<(f64, f64, f64)>,
    pub t_stop: f64,
}

pub fn rk4_infall(mass: f64, r0: f64, v0: f64, dt: f64, r_stop: f64) -> InfallOracle {
    let accel = |r: f64| -mass / (r * r);
    let mut t = 0.0;
    let mut r = r0;
    let mut v = v0;
    let mut samples = vec![(t, r, v)];
    loop {
        let k1r = v;
        let k1v = accel(r);
        let r2 = r + 0.5 * dt * k1r;
        if r2 <= 0.0 {
            break;
        }
        let k2r = v + 0.5 * dt * k1v;
        let k2v = accel(r2);
        let r3 = r + 0.5 * dt * k2r;
        if r3 <= 0.0 {
            break;
        }
        let k3r = v + 0.5 * dt * k2v;
        let k3v = accel(r3);
        let r4 = r + dt * k3r;
        if r4 <= 0.0 {
            break;
        }
        let k4r = v + dt * k3v;
        let k4v = accel(r4);
        r += dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        t += dt;
        if !(r > r_stop) {
            break;
        }
        samples.push((t, r, v));
    }
    InfallOracle { samples, t_stop: t }
}

/// Composite Simpson on a uniform grid (independent of the library's
/// adaptive panels). `n` must be even.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * k as f64);
    }
    acc * h / 3.0
}

/// O(N^2) pairwise spherical-shell potential (self-pairs excluded):
/// `-sum_{i<j} w_i w_j / max(r_i, r_j)`.
pub fn pairwise_shell_potential(radii: &[f64], weights: &[f64]) -> f64 {
    let n = radii.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += weights[i] * weights[j] / radii[i].max(radii[j]);
        }
    }
    -acc
}

/// Mean and standard error of a sample.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// RK4 tracer in a fixed central point-mass field (Kepler oracle support).
pub fn rk4_kepler_step(mass: f64, x: &Vec3, v: &Vec3, h: f64) -> (Vec3, Vec3) {
    let acc = |p: &Vec3| {
        let r2 = geometry::norm_sq(p);
        geometry::scale(p, -mass / (r2 * r2.sqrt()))
    };
    let k1x = *v;
    let k1v = acc(x);
    let k2x = geometry::axpy(v, 0.5 * h, &k1v);
    let k2v = acc(&geometry::axpy(x, 0.5 * h, &k1x));
    let k3x = geometry::axpy(v, 0.5 * h, &k2v);
    let k3v = acc(&geometry::axpy(x, 0.5 * h, &k2x));
    let k4x = geometry::axpy(v, h, &k3v);
    let k4v = acc(&geometry::axpy(x, h, &k3x));
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

/// Builds the default initial datum at the given cut parameter and initial
/// scale factor.
pub fn default_initial(eps: f64, a0: f64) -> collapse_core::initial::InitialData {
    let hs = collapse_core::homogeneous::HomogeneousSolution::new(
        collapse_core::homogeneous::IsotropicProfile::polynomial_bump(),
        eps,
        collapse_core::dust::DustSolution::new(a0).unwrap(),
    )
    .unwrap();
    collapse_core::initial::InitialData::new(hs).unwrap()
}
