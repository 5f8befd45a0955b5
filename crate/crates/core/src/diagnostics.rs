//! Scalar diagnostics: energies, density and `m/r` suprema, core agreement,
//! and the inflow-boundary check.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::characteristics::GravityField;
use crate::dust::CoreBoundary;
use crate::ensemble::{ParticleEnsemble, SphericalCoords};
use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::geometry::{self, Vec3};
use crate::initial::InitialData;

/// One row of the diagnostics time series.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub e_kin: f64,
    pub e_pot: f64,
    pub e_tot: f64,
    pub rho_inf: f64,
    pub sup_m_over_r: f64,
    pub r_eps: f64,
    pub a: f64,
    pub d_core: f64,
}

/// Kinetic energy `1/2 sum w_i |v_i|^2`, accumulated in index order.
pub fn kinetic_energy(ensemble: &ParticleEnsemble) -> f64 {
    let mut acc = 0.0;
    for (v, w) in ensemble.velocities.iter().zip(&ensemble.weights) {
        acc += 0.5 * w * geometry::norm_sq(v);
    }
    acc
}

/// Potential energy of the shell configuration,
/// `-(1/2) int_0^inf m^2(r)/r^2 dr` for the step function `m`, excluding
/// shell self-energies. Equivalent to the pairwise sum
/// `-sum_{i<j} w_i w_j / max(r_i, r_j)` and evaluated in O(N) as
/// `-sum_k W_{k-1} w_k / r_k` over the radius-sorted particles.
pub fn potential_energy(field: &RadialField) -> f64 {
    let radii = field.radii();
    let cum = field.cum_mass();
    let mut acc = 0.0;
    let mut below = 0.0;
    for k in 0..radii.len() {
        let w = cum[k] - below;
        if below > 0.0 {
            acc += below * w / radii[k];
        }
        below = cum[k];
    }
    -acc
}

/// `sup_{r>0} m(r)/r`; the suprema of the step function occur at particle
/// radii. Mass sitting exactly at the origin makes the supremum infinite.
pub fn sup_m_over_r(field: &RadialField) -> f64 {
    let radii = field.radii();
    let cum = field.cum_mass();
    let n = radii.len();
    let mut best = 0.0f64;
    let mut k = 0;
    while k < n {
        // jump to the end of a tie group so m carries the full group mass
        let mut end = k;
        while end + 1 < n && radii[end + 1] == radii[k] {
            end += 1;
        }
        if radii[k] == 0.0 {
            if cum[end] > 0.0 {
                return f64::INFINITY;
            }
        } else {
            best = best.max(cum[end] / radii[k]);
        }
        k = end + 1;
    }
    best
}

/// Sup-norm estimate of the spatial density from fixed-width radial shells:
/// max over shells of shell mass / shell volume.
pub fn rho_inf_estimate(ensemble: &ParticleEnsemble, bin_width: f64) -> f64 {
    assert!(bin_width > 0.0, "bin width must be positive");
    if ensemble.is_empty() {
        return 0.0;
    }
    let mut bins: Vec<f64> = Vec::new();
    for (x, w) in ensemble.positions.iter().zip(&ensemble.weights) {
        let k = (geometry::norm(x) / bin_width) as usize;
        if k >= bins.len() {
            bins.resize(k + 1, 0.0);
        }
        bins[k] += w;
    }
    let mut best = 0.0f64;
    for (k, mass) in bins.iter().enumerate() {
        if *mass == 0.0 {
            continue;
        }
        let r0 = k as f64 * bin_width;
        let r1 = r0 + bin_width;
        let volume = 4.0 / 3.0 * std::f64::consts::PI * (r1.powi(3) - r0.powi(3));
        best = best.max(mass / volume);
    }
    best
}

/// Per-shell density estimate with its shell population, for error-bar
/// aware checks: returns `(density, count)` of the densest shell.
pub fn rho_inf_with_count(ensemble: &ParticleEnsemble, bin_width: f64) -> (f64, usize) {
    assert!(bin_width > 0.0);
    if ensemble.is_empty() {
        return (0.0, 0);
    }
    let mut mass_bins: Vec<f64> = Vec::new();
    let mut count_bins: Vec<usize> = Vec::new();
    for (x, w) in ensemble.positions.iter().zip(&ensemble.weights) {
        let k = (geometry::norm(x) / bin_width) as usize;
        if k >= mass_bins.len() {
            mass_bins.resize(k + 1, 0.0);
            count_bins.resize(k + 1, 0);
        }
        mass_bins[k] += w;
        count_bins[k] += 1;
    }
    let mut best = (0.0f64, 0usize);
    for k in 0..mass_bins.len() {
        if mass_bins[k] == 0.0 {
            continue;
        }
        let r0 = k as f64 * bin_width;
        let r1 = r0 + bin_width;
        let volume = 4.0 / 3.0 * std::f64::consts::PI * (r1.powi(3) - r0.powi(3));
        let rho = mass_bins[k] / volume;
        if rho > best.0 {
            best = (rho, count_bins[k]);
        }
    }
    best
}

/// Core-agreement diagnostic `D(t)`: the sup over probe points with
/// `|x| <= r_eps(t)` and `|v|` inside the velocity support bound of
/// `|f - h|`, normalized by `sup H_eps`. Probes are drawn deterministically
/// from `(seed, probe index)` and evaluated independently (parallel, fixed
/// reduction order).
pub fn core_agreement_d<F: GravityField>(
    field: &F,
    initial: &InitialData,
    core: &CoreBoundary,
    t: f64,
    n_samples: usize,
    seed: u64,
    dt_step: f64,
) -> Result<f64> {
    if let Some(h) = field.horizon() {
        if t > h + 1e-12 {
            return Err(Error::domain(format!(
                "time {t} beyond the recorded field horizon {h}"
            )));
        }
    }
    let r_eps = core.radius(t)?;
    let hs = initial.homogeneous();
    let sup = hs.profile().sup();
    let values: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(0x4443_0000 + i as u64);
            let x = ball_point(&mut rng, r_eps);
            let vmax = hs.velocity_support_radius(t, geometry::norm(&x))?;
            let v = ball_point(&mut rng, vmax);
            let (x0, v0) = crate::characteristics::flow(field, t, &x, &v, 0.0, dt_step);
            let f_val = initial.eval(&x0, &v0);
            let h_val = hs.eval(t, &x, &v)?;
            Ok((f_val - h_val).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0.0f64;
    for v in values {
        best = best.max(v);
    }
    Ok(best / sup)
}

/// Maximum of `f` and `h` over probe points on the inflow side of the core
/// boundary: `|x| = r_eps(t)` with radial velocity `w <= r_eps'(t)`.
/// Returns the raw (unnormalized) maximum.
pub fn boundary_vanishing_check<F: GravityField>(
    field: &F,
    initial: &InitialData,
    core: &CoreBoundary,
    t: f64,
    n_samples: usize,
    seed: u64,
    dt_step: f64,
) -> Result<f64> {
    if let Some(h) = field.horizon() {
        if t > h + 1e-12 {
            return Err(Error::domain(format!(
                "time {t} beyond the recorded field horizon {h}"
            )));
        }
    }
    let r_eps = core.radius(t)?;
    let rdot_eps = core.radius_rate(t)?;
    let hs = initial.homogeneous();
    let vmax = hs.velocity_support_radius(t, r_eps)?;
    // probe speeds up to the boundary infall speed plus the support bound,
    // so the inflow condition w <= rdot_eps keeps a nonempty cap
    let v_probe = rdot_eps.abs() + vmax;
    let values: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(0x4246_0000 + i as u64);
            let dir = unit_vector(&mut rng);
            let x = geometry::scale(&dir, r_eps);
            let mut v = geometry::ZERO;
            let mut found = false;
            for _ in 0..100_000 {
                let cand = ball_point(&mut rng, v_probe);
                if geometry::dot(&x, &cand) / r_eps <= rdot_eps {
                    v = cand;
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::numeric(
                    "could not sample an inflow boundary velocity",
                ));
            }
            let (x0, v0) = crate::characteristics::flow(field, t, &x, &v, 0.0, dt_step);
            let f_val = initial.eval(&x0, &v0);
            let h_val = hs.eval(t, &x, &v)?;
            Ok(f_val.max(h_val))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0.0f64;
    for v in values {
        best = best.max(v);
    }
    Ok(best)
}

/// Radial-velocity decomposition of an ensemble particle (diagnostic
/// convenience).
pub fn spherical(ensemble: &ParticleEnsemble, i: usize) -> SphericalCoords {
    SphericalCoords::from_phase(&ensemble.positions[i], &ensemble.velocities[i])
}

pub(crate) fn ball_point<R: Rng>(rng: &mut R, radius: f64) -> Vec3 {
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

pub(crate) fn unit_vector<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let p = ball_point(rng, 1.0);
        let n = geometry::norm(&p);
        if n > 1e-3 {
            return geometry::scale(&p, 1.0 / n);
        }
    }
}
