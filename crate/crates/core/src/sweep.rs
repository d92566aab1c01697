//! Batch runs over independent configurations.
//!
//! With the `parallel` feature (on by default) the batch helpers fan out over
//! the rayon thread pool; without it they run in order on the calling thread.
//! Results always come back in input order, so output is identical either way.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{Oscillator, PhaseState};
use crate::geometry::CKParams;
use crate::integrator::{orbital_period_measured, simulate, IntegratorConfig, IntegratorError, Trajectory};
use crate::orbits::{
    circular_momentum, classify, orbit_from_ej, period, state_on_orbit, OrbitClass, OrbitError,
};

/// Apply `f` to every item, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_sequential(items, f)
}

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationJob {
    pub params: CKParams,
    pub oscillator: Oscillator,
    pub init: PhaseState,
    pub t_end: f64,
}

pub fn simulate_batch(
    jobs: &[SimulationJob],
    cfg: &IntegratorConfig,
) -> Vec<Result<Trajectory, IntegratorError>> {
    map(jobs, |j| simulate(j.params, j.oscillator, j.init, j.t_end, cfg))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub class: Option<OrbitClass>,
    pub error: Option<String>,
}

/// Classification of every `(E, 𝒥)` pair, row-major in `energies`.
pub fn classify_grid(p: CKParams, osc: Oscillator, energies: &[f64], momenta: &[f64]) -> Vec<GridCell> {
    let pairs: Vec<(f64, f64)> = energies
        .iter()
        .flat_map(|&e| momenta.iter().map(move |&j| (e, j)))
        .collect();
    map(&pairs, |&(e, j)| match classify(p, osc, e, j) {
        Ok(c) => GridCell { e, j, class: Some(c), error: None },
        Err(err) => GridCell { e, j, class: None, error: Some(err.to_string()) },
    })
}

#[derive(Debug, Error)]
pub enum PeriodError {
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodCheck {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub formula: f64,
    pub measured: f64,
    pub rel_error: f64,
}

/// Closed-form period against the period measured on a simulated orbit of
/// energy `e` and momentum `j_fraction` times that of the circular orbit.
pub fn period_check(
    p: CKParams,
    osc: Oscillator,
    e: f64,
    j_fraction: f64,
    cfg: &IntegratorConfig,
) -> Result<PeriodCheck, PeriodError> {
    let formula = period(p, osc, e)?;
    let j = j_fraction * circular_momentum(p, osc, e);
    let sol = orbit_from_ej(p, osc, e, j, 0.0)?;
    let init = state_on_orbit(p, &sol, 0.0)?;
    let traj = simulate(p, osc, init, 3.2 * formula, cfg)?;
    let measured = orbital_period_measured(&traj)?;
    Ok(PeriodCheck {
        e,
        j,
        formula,
        measured,
        rel_error: (measured - formula).abs() / formula,
    })
}

pub fn period_batch(
    p: CKParams,
    osc: Oscillator,
    energies: &[f64],
    j_fraction: f64,
    cfg: &IntegratorConfig,
) -> Vec<Result<PeriodCheck, PeriodError>> {
    map(energies, |&e| period_check(p, osc, e, j_fraction, cfg))
}
