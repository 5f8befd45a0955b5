//! Self-consistent time evolution: kick-drift-kick particle pushing with
//! snapshot recording and per-snapshot diagnostics.
//!
//! The step contract has two phases. The push phase reads a frozen field
//! and writes only per-particle slots, so it parallelizes without ordering
//! constraints; the field phase re-sorts radii and rebuilds prefix sums
//! with a deterministic tie order. Runs are bit-identical for any worker
//! count at fixed seed.

use rayon::prelude::*;

use crate::characteristics::FieldHistory;
use crate::diagnostics::{
    self, core_agreement_d, kinetic_energy, potential_energy, DiagnosticsRow,
};
use crate::dust::CoreBoundary;
use crate::ensemble::ParticleEnsemble;
use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::geometry;
use crate::initial::InitialData;

/// Simulation parameters. `t_end_fraction` is measured against the core
/// boundary collapse time of the initial datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub n_particles: usize,
    pub dt: f64,
    pub dt_hist: f64,
    pub t_end_fraction: f64,
    pub seed: u64,
    pub threads: usize,
    /// Probes per snapshot for the core-agreement diagnostic; 0 disables it
    /// (the column then reports 0 beyond t = 0, where it is exactly 0).
    pub d_core_probes: usize,
    /// RK4 step for backward characteristic tracing.
    pub backtrace_dt: f64,
    /// Radial bin width for the density sup estimate.
    pub rho_bin_width: f64,
    /// Plummer softening for stress tests; 0 disables it.
    pub softening: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            n_particles: 100_000,
            dt: 1e-3,
            dt_hist: 1e-2,
            t_end_fraction: 0.9,
            seed: 42,
            threads: 1,
            d_core_probes: 200,
            backtrace_dt: 1e-3,
            rho_bin_width: 0.02,
            softening: 0.0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 1_000 {
            return Err(Error::config(format!(
                "n_particles must be at least 1000 (got {})",
                self.n_particles
            )));
        }
        if !(self.dt > 0.0 && self.dt <= 1e-2) {
            return Err(Error::config(format!(
                "dt must lie in (0, 1e-2] (got {})",
                self.dt
            )));
        }
        let ratio = self.dt_hist / self.dt;
        if !(ratio >= 1.0 && (ratio - ratio.round()).abs() <= 1e-9 * ratio) {
            return Err(Error::config(format!(
                "dt_hist must be a positive integer multiple of dt (got dt_hist = {}, dt = {})",
                self.dt_hist, self.dt
            )));
        }
        if !(self.t_end_fraction >= 0.0 && self.t_end_fraction < 1.0) {
            return Err(Error::config(format!(
                "t_end_fraction must lie in [0, 1) (got {})",
                self.t_end_fraction
            )));
        }
        if self.threads == 0 {
            return Err(Error::config("threads must be at least 1 (got 0)"));
        }
        if !(self.backtrace_dt > 0.0) {
            return Err(Error::config(format!(
                "backtrace_dt must be positive (got {})",
                self.backtrace_dt
            )));
        }
        if !(self.rho_bin_width > 0.0) {
            return Err(Error::config(format!(
                "rho_bin_width must be positive (got {})",
                self.rho_bin_width
            )));
        }
        Ok(())
    }
}

/// A live simulation: ensemble plus its current field and self-excluded
/// per-particle masses.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub ensemble: ParticleEnsemble,
    field: RadialField,
    self_mass: Vec<f64>,
    softening: f64,
    steps_taken: usize,
}

impl Simulation {
    pub fn new(ensemble: ParticleEnsemble) -> Result<Self> {
        Self::with_softening(ensemble, 0.0)
    }

    pub fn with_softening(ensemble: ParticleEnsemble, softening: f64) -> Result<Self> {
        let (field, self_mass) = RadialField::from_ensemble_with_self(&ensemble)?;
        Ok(Simulation {
            ensemble,
            field: field.with_softening(softening),
            self_mass,
            softening,
            steps_taken: 0,
        })
    }

    pub fn field(&self) -> &RadialField {
        &self.field
    }

    pub fn time(&self) -> f64 {
        self.ensemble.time
    }

    /// One kick-drift-kick step: half kick with the field at `t`, full
    /// drift, field rebuild, half kick with the field at `t + dt`. Mass
    /// and particle count are unchanged.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::config(format!("dt must be positive (got {dt})")));
        }
        self.half_kick(dt);
        let dtv = dt;
        self.ensemble
            .positions
            .par_iter_mut()
            .zip(self.ensemble.velocities.par_iter())
            .for_each(|(x, v)| {
                *x = geometry::axpy(x, dtv, v);
            });
        let (field, self_mass) =
            RadialField::from_ensemble_with_self(&self.ensemble).map_err(|e| {
                Error::numeric(format!("{e} (after step {})", self.steps_taken + 1))
            })?;
        self.field = field.with_softening(self.softening);
        self.self_mass = self_mass;
        self.half_kick(dt);
        self.ensemble.time += dt;
        self.steps_taken += 1;
        Ok(())
    }

    fn half_kick(&mut self, dt: f64) {
        let field = &self.field;
        let self_mass = &self.self_mass;
        self.ensemble
            .velocities
            .par_iter_mut()
            .zip(self.ensemble.positions.par_iter())
            .zip(self_mass.par_iter())
            .for_each(|((v, x), &m)| {
                let r = geometry::norm(x);
                if r > 0.0 {
                    let acc = field.central_acceleration(x, r, m);
                    *v = geometry::axpy(v, 0.5 * dt, &acc);
                }
            });
    }
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub history: FieldHistory,
    pub rows: Vec<DiagnosticsRow>,
    pub ensemble: ParticleEnsemble,
    pub core: CoreBoundary,
    pub t_end: f64,
}

/// Samples the initial datum and advances it to `t_end_fraction` of the
/// core-boundary collapse time, recording field snapshots every `dt_hist`
/// and emitting one diagnostics row per snapshot.
pub fn run(initial: &InitialData, params: &SimParams) -> Result<RunOutput> {
    params.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.threads)
        .build()
        .map_err(|e| Error::config(format!("could not build thread pool: {e}")))?;
    pool.install(|| run_inner(initial, params))
}

fn run_inner(initial: &InitialData, params: &SimParams) -> Result<RunOutput> {
    let core = initial.core_boundary()?;
    let t_end = params.t_end_fraction * core.collapse_time();
    let steps_per_snap = (params.dt_hist / params.dt).round() as usize;
    let n_intervals = (t_end / params.dt_hist).floor() as usize;

    let ensemble = initial.sample(params.n_particles, params.seed)?;
    let mut sim = Simulation::with_softening(ensemble, params.softening)?;
    let mut history = FieldHistory::new(params.dt_hist)?;
    let mut rows = Vec::with_capacity(n_intervals + 1);

    history.push(sim.field().clone());
    rows.push(diagnostics_row(&sim, initial, &core, &history, params)?);

    for _ in 0..n_intervals {
        for _ in 0..steps_per_snap {
            sim.step(params.dt)?;
        }
        history.push(sim.field().clone());
        rows.push(diagnostics_row(&sim, initial, &core, &history, params)?);
    }

    Ok(RunOutput {
        history,
        rows,
        ensemble: sim.ensemble,
        core,
        t_end: n_intervals as f64 * params.dt_hist,
    })
}

fn diagnostics_row(
    sim: &Simulation,
    initial: &InitialData,
    core: &CoreBoundary,
    history: &FieldHistory,
    params: &SimParams,
) -> Result<DiagnosticsRow> {
    let t = sim.time();
    let e_kin = kinetic_energy(&sim.ensemble);
    let e_pot = potential_energy(sim.field());
    let rho_inf = diagnostics::rho_inf_estimate(
        &sim.ensemble,
        params.rho_bin_width * initial.homogeneous().dust().initial_radius(),
    );
    let sup_mr = diagnostics::sup_m_over_r(sim.field());
    let r_eps = core.radius(t)?;
    let a = initial.homogeneous().dust().scale_factor(t)?;
    let d_core = if params.d_core_probes > 0 {
        core_agreement_d(
            history,
            initial,
            core,
            t,
            params.d_core_probes,
            params.seed ^ 0x5eed_d0c5,
            params.backtrace_dt,
        )?
    } else {
        0.0
    };
    Ok(DiagnosticsRow {
        t,
        e_kin,
        e_pot,
        e_tot: e_kin + e_pot,
        rho_inf,
        sup_m_over_r: sup_mr,
        r_eps,
        a,
        d_core,
    })
}
