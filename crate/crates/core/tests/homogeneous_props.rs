//! Homogeneous-solution properties: transport along characteristics,
//! support bounds, and the spherical invariant identity.

mod common;

use collapse_core::dust::DustSolution;
use collapse_core::geometry;
use collapse_core::homogeneous::{HomogeneousSolution, IsotropicProfile};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn solution(eps: f64) -> HomogeneousSolution {
    HomogeneousSolution::new(
        IsotropicProfile::polynomial_bump(),
        eps,
        DustSolution::new(1.0).unwrap(),
    )
    .unwrap()
}

#[test]
fn value_constant_along_exact_characteristic() {
    // RK4 trajectory in the field -x/a^3; the evaluated density along it
    // must stay put.
    let hs = solution(0.3);
    let dust = hs.dust();
    let mut x = [0.4, -0.1, 0.2];
    let mut v = [0.05, 0.12, -0.03];
    let start = hs.eval(0.0, &x, &v).unwrap();
    assert!(start > 0.0);
    let dt = 1e-4;
    let n = ((0.9 * dust.collapse_time()) / dt) as usize;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let t = dt * k as f64;
        let acc = |tt: f64, p: &[f64; 3]| {
            let a = dust.scale_factor(tt).unwrap();
            geometry::scale(p, -1.0 / (a * a * a))
        };
        let k1x = v;
        let k1v = acc(t, &x);
        let k2x = geometry::axpy(&v, 0.5 * dt, &k1v);
        let k2v = acc(t + 0.5 * dt, &geometry::axpy(&x, 0.5 * dt, &k1x));
        let k3x = geometry::axpy(&v, 0.5 * dt, &k2v);
        let k3v = acc(t + 0.5 * dt, &geometry::axpy(&x, 0.5 * dt, &k2x));
        let k4x = geometry::axpy(&v, dt, &k3v);
        let k4v = acc(t + dt, &geometry::axpy(&x, dt, &k3x));
        for i in 0..3 {
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        if k % 100 == 0 {
            let val = hs.eval(t + dt, &x, &v).unwrap();
            worst = worst.max((val - start).abs() / start);
        }
    }
    assert!(worst < 1e-6, "relative value drift {worst}");
}

#[test]
fn spherical_invariant_identity() {
    // |a v - a' x|^2 = L / (r/a)^2 + (a w - a' r)^2 for random phase points
    let hs = solution(0.4);
    let dust = hs.dust();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let t = rng.gen_range(0.0..0.9 * dust.collapse_time());
        let x = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let v = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let a = dust.scale_factor(t).unwrap();
        let adot = dust.scale_factor_rate(t).unwrap();
        let lhs = geometry::norm_sq(&geometry::sub(
            &geometry::scale(&v, a),
            &geometry::scale(&x, adot),
        ));
        let sc = collapse_core::ensemble::SphericalCoords::from_phase(&x, &v);
        let r_tilde = sc.r / a;
        let w_tilde = a * sc.w - adot * sc.r;
        let rhs = sc.l_sq / (r_tilde * r_tilde) + w_tilde * w_tilde;
        assert!(
            (lhs - rhs).abs() <= 1e-12 * lhs.max(1.0),
            "identity off: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn support_probe_never_exceeds_velocity_bound() {
    let hs = solution(0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut positives = 0usize;
    for _ in 0..1_000_000 {
        let t = rng.gen_range(0.0..0.9 * hs.dust().collapse_time());
        let r = rng.gen_range(0.0..2.0);
        let bound = hs.velocity_support_radius(t, r).unwrap();
        // probe just beyond the bound in a random direction
        let speed = bound * rng.gen_range(1.0..3.0);
        let dir_x = {
            let mut d;
            loop {
                d = [
                    rng.gen_range(-1.0f64..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ];
                if geometry::norm_sq(&d) > 1e-6 {
                    break;
                }
            }
            geometry::scale(&d, 1.0 / geometry::norm(&d))
        };
        let x = geometry::scale(&dir_x, r);
        let dir_v = {
            let mut d;
            loop {
                d = [
                    rng.gen_range(-1.0f64..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ];
                if geometry::norm_sq(&d) > 1e-6 {
                    break;
                }
            }
            geometry::scale(&d, 1.0 / geometry::norm(&d))
        };
        let v = geometry::scale(&dir_v, speed);
        let val = hs.eval(t, &x, &v).unwrap();
        assert_eq!(val, 0.0, "nonzero value beyond the support bound");
        // sanity: probes inside the bound do produce mass sometimes
        if hs
            .eval(t, &x, &geometry::scale(&dir_v, bound * 0.1))
            .unwrap()
            > 0.0
        {
            positives += 1;
        }
    }
    assert!(positives > 0);
}
