//! Adaptive Dormand-Prince 5(4) propagation of phase states.
//!
//! Every accepted step is recorded together with the conserved quantities,
//! so drift can be read off the trajectory. Sign changes of the radial rate
//! and of the Beltrami `Y` coordinate are located on the dense output by
//! bisection and reported as events.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    accelerations, energy, fradkin, noether_momenta, radial_rate, DynamicsError, FradkinTensor,
    NoetherMomenta, Oscillator, PhaseState,
};
use crate::geometry::{CKParams, Chart, GeometryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("dynamics with kappa2 = 0 are degenerate and not integrated")]
    DegenerateSpace,
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid initial state: {0}")]
    InitialState(String),
    #[error("step size underflow at t = {t} (stiff or singular problem)")]
    StepUnderflow { t: f64 },
    #[error("maximum number of steps ({max_steps}) reached at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },
    #[error("trajectory is not periodic: found {found} radial minima, need at least 3")]
    NotPeriodic { found: usize },
}

impl From<DynamicsError> for IntegratorError {
    fn from(e: DynamicsError) -> Self {
        IntegratorError::InitialState(e.to_string())
    }
}

impl From<GeometryError> for IntegratorError {
    fn from(e: GeometryError) -> Self {
        IntegratorError::InitialState(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Choose the chart with [`default_chart`]. When false the chart of the
    /// initial state is kept.
    pub auto_chart: bool,
    /// Stop when the polar chart gets this close to a singularity.
    pub chart_margin: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.25,
            max_steps: 1_000_000,
            auto_chart: true,
            chart_margin: 1e-3,
        }
    }
}

impl IntegratorConfig {
    fn validate(&self) -> Result<(), IntegratorError> {
        let bad = |m: &str| Err(IntegratorError::InvalidConfig(m.to_string()));
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad("rel_tol must be positive");
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad("abs_tol must be positive");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: PhaseState,
    pub momenta: NoetherMomenta,
    pub energy: f64,
    pub fradkin: FradkinTensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    RadialMin,
    RadialMax,
    AxisCrossing,
    ChartBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub state: PhaseState,
}

/// Maximum relative drift `|Q(t) - Q(0)| / max(1, |Q(0)|)` of each conserved quantity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriftReport {
    pub energy: f64,
    pub j: f64,
    pub f11: f64,
    pub f12: f64,
    pub f22: f64,
}

impl DriftReport {
    pub fn max(&self) -> f64 {
        [self.energy, self.j, self.f11, self.f12, self.f22]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: CKParams,
    pub oscillator: Oscillator,
    pub samples: Vec<TrajectorySample>,
    pub events: Vec<Event>,
    /// Set when the run stopped at a chart singularity before `t_end`.
    pub boundary: Option<String>,
}

impl Trajectory {
    pub fn final_sample(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn drift(&self) -> DriftReport {
        let first = self.samples[0];
        let rel = |q: f64, q0: f64| (q - q0).abs() / q0.abs().max(1.0);
        let mut d = DriftReport::default();
        for s in &self.samples {
            d.energy = d.energy.max(rel(s.energy, first.energy));
            d.j = d.j.max(rel(s.momenta.j, first.momenta.j));
            d.f11 = d.f11.max(rel(s.fradkin.f11, first.fradkin.f11));
            d.f12 = d.f12.max(rel(s.fradkin.f12, first.fradkin.f12));
            d.f22 = d.f22.max(rel(s.fradkin.f22, first.fradkin.f22));
        }
        d
    }

    /// Largest `|det F - ω₀² 𝒥²|` over the samples, scaled by `max(1, |f11 f22|)`.
    pub fn max_det_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                s.fradkin.det_residual(self.oscillator).abs()
                    / (s.fradkin.f11 * s.fradkin.f22).abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// `T₁(r)` of every sample, from the Beltrami coordinates (κ₂ > 0).
    pub fn radius_tangents(&self) -> impl Iterator<Item = f64> + '_ {
        let p = self.params;
        self.samples.iter().map(move |s| radius_tangent(p, &s.state))
    }
}

/// `T₁(r) = √(X² + κ₂Y²)` for a state (κ₂ > 0).
pub fn radius_tangent(p: CKParams, s: &PhaseState) -> f64 {
    let (x, y) = s.beltrami(p);
    (x * x + p.kappa2 * y * y).max(0.0).sqrt()
}

/// Distance to the centre, from the Beltrami coordinates (κ₂ > 0).
pub fn radius(p: CKParams, s: &PhaseState) -> f64 {
    match s.chart {
        Chart::Polar => s.q1.abs(),
        Chart::ParallelUY => p.l1().atan(radius_tangent(p, s)),
    }
}

/// Chart used when `auto_chart` is set: polar for `𝒥 ≠ 0` in the Riemannian
/// spaces, `(u, y)` otherwise. In the spacetimes the polar chart only covers
/// the inside of the light cone.
pub fn default_chart(p: CKParams, s: &PhaseState) -> Chart {
    if p.kappa2 < 0.0 || noether_momenta(p, s).j == 0.0 {
        Chart::ParallelUY
    } else {
        Chart::Polar
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Polar runs with κ₂ < 0 stop once `C₂(φ)` exceeds this (close to an isotrope).
const ISOTROPE_COSH: f64 = 10.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;

type Vec4 = [f64; 4];

fn axpy(y: &Vec4, h: f64, terms: &[(f64, &Vec4)]) -> Vec4 {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

/// Right-hand side in the chart of the run. In the polar chart the last
/// component is `𝒥 = S₁(r)²φ̇` rather than `φ̇`, which keeps it well scaled
/// far from the centre.
struct System {
    p: CKParams,
    osc: Oscillator,
    chart: Chart,
}

impl System {
    fn encode(&self, s: &PhaseState) -> Vec4 {
        match self.chart {
            Chart::Polar => [s.q1, s.q2, s.v1, self.p.l1().sin(s.q1).powi(2) * s.v2],
            Chart::ParallelUY => s.as_array(),
        }
    }

    fn state(&self, y: &Vec4) -> PhaseState {
        let v2 = match self.chart {
            Chart::Polar if y[3] != 0.0 => y[3] / self.p.l1().sin(y[0]).powi(2),
            _ => y[3],
        };
        PhaseState {
            chart: self.chart,
            q1: y[0],
            q2: y[1],
            v1: y[2],
            v2,
        }
    }

    fn rhs(&self, y: &Vec4) -> Result<Vec4, DynamicsError> {
        let s = self.state(y);
        let (a1, a2) = accelerations(self.p, self.osc, &s)?;
        let out = match self.chart {
            Chart::Polar => [s.v1, s.v2, a1, 0.0],
            Chart::ParallelUY => [s.v1, s.v2, a1, a2],
        };
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(DynamicsError::SingularChart { r: y[0] })
        }
    }

    fn sample(&self, t: f64, y: &Vec4) -> Result<TrajectorySample, DynamicsError> {
        let state = self.state(y);
        Ok(TrajectorySample {
            t,
            state,
            momenta: noether_momenta(self.p, &state),
            energy: energy(self.p, self.osc, &state)?,
            fradkin: fradkin(self.p, self.osc, &state)?,
        })
    }

    /// Radial rate and axis coordinate, the two event functions.
    fn event_fns(&self, y: &Vec4) -> (f64, f64) {
        let s = self.state(y);
        (radial_rate(self.p, &s), s.beltrami(self.p).1)
    }

    /// Reason to stop, if the state is too close to a chart singularity.
    fn boundary(&self, y: &Vec4, margin: f64) -> Option<String> {
        let p = self.p;
        let (l1, l2, l12) = (p.l1(), p.l2(), p.l12());
        let c1 = match self.chart {
            Chart::Polar => l1.cos(y[0]),
            Chart::ParallelUY => l1.cos(y[0]) * l12.cos(y[1]),
        };
        if p.kappa1 > 0.0 && c1 < margin {
            return Some(format!("approached the potential wall (C1(r) = {c1:.3e})"));
        }
        match self.chart {
            Chart::Polar => {
                let s = l1.sin(y[0]).abs();
                if y[3] != 0.0 && s < margin {
                    return Some(format!("reached the polar origin (r = {:.3e})", y[0]));
                }
                if p.kappa2 < 0.0 && l2.cos(y[1]) > ISOTROPE_COSH {
                    return Some(format!("approached an isotrope (phi = {:.6})", y[1]));
                }
            }
            Chart::ParallelUY => {
                if l12.cos(y[1]).abs() < margin {
                    return Some(format!("reached the edge of the parallel chart (y = {:.6})", y[1]));
                }
            }
        }
        None
    }
}

struct Step {
    y1: Vec4,
    k7: Vec4,
    err: f64,
    dense: [Vec4; 5],
}

fn try_step(
    sys: &System,
    y: &Vec4,
    k1: &Vec4,
    h: f64,
    cfg: &IntegratorConfig,
) -> Result<Step, DynamicsError> {
    let k2 = sys.rhs(&axpy(y, h, &[(A21, k1)]))?;
    let k3 = sys.rhs(&axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = sys.rhs(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = sys.rhs(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = sys.rhs(&axpy(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ))?;
    let y1 = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = sys.rhs(&y1)?;
    let mut sum = 0.0;
    for i in 0..4 {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sk = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y1[i].abs());
        sum += (e / sk).powi(2);
    }
    let err = (sum / 4.0).sqrt();
    let ydiff: Vec4 = std::array::from_fn(|i| y1[i] - y[i]);
    let bspl: Vec4 = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
    let dense = [
        *y,
        ydiff,
        bspl,
        std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
        std::array::from_fn(|i| {
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
        }),
    ];
    Ok(Step {
        y1,
        k7,
        err,
        dense,
    })
}

fn interpolate(dense: &[Vec4; 5], theta: f64) -> Vec4 {
    let t1 = 1.0 - theta;
    std::array::from_fn(|i| {
        dense[0][i]
            + theta * (dense[1][i] + t1 * (dense[2][i] + theta * (dense[3][i] + t1 * dense[4][i])))
    })
}

/// Root of `f` on `[0, 1]` given opposite signs at the ends, by bisection.
fn bisect(f: impl Fn(f64) -> f64, f0: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    let neg_at_lo = f0 < 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == neg_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn initial_step(sys: &System, y: &Vec4, f0: &Vec4, cfg: &IntegratorConfig) -> f64 {
    let sk: Vec4 = std::array::from_fn(|i| cfg.abs_tol + cfg.rel_tol * y[i].abs());
    let norm = |v: &Vec4| (v.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / 4.0).sqrt();
    let (d0, d1) = (norm(y), norm(f0));
    let mut h = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(cfg.max_step);
    let y1 = axpy(y, h, &[(1.0, f0)]);
    let d2 = match sys.rhs(&y1) {
        Ok(f1) => {
            let diff: Vec4 = std::array::from_fn(|i| f1[i] - f0[i]);
            norm(&diff) / h
        }
        Err(_) => return h * 1e-3,
    };
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / m).powf(0.2)
    };
    (100.0 * h).min(h1).min(cfg.max_step)
}

/// Integrate from `init` up to `t_end`.
///
/// Stops early, without error, at a chart singularity (recorded as a
/// `ChartBoundary` event and in `Trajectory::boundary`).
pub fn simulate(
    p: CKParams,
    osc: Oscillator,
    init: PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegratorError> {
    cfg.validate()?;
    if p.kappa2 == 0.0 {
        return Err(IntegratorError::DegenerateSpace);
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(IntegratorError::InvalidConfig("t_end must be finite and nonnegative".into()));
    }
    if !init.as_array().iter().all(|v| v.is_finite()) {
        return Err(IntegratorError::InitialState("non-finite component".into()));
    }
    let chart = if cfg.auto_chart {
        default_chart(p, &init)
    } else {
        init.chart
    };
    let init = init.to_chart(p, chart)?;
    if chart == Chart::Polar && init.v2 != 0.0 && p.l1().sin(init.q1).abs() < cfg.chart_margin {
        return Err(IntegratorError::InitialState(format!(
            "polar start at r = {} with nonzero angular velocity",
            init.q1
        )));
    }

    let sys = System { p, osc, chart };
    let mut y = sys.encode(&init);
    let mut t = 0.0;
    let mut k1 = sys.rhs(&y)?;
    let first = sys.sample(t, &y)?;
    let mut traj = Trajectory {
        params: p,
        oscillator: osc,
        samples: vec![first],
        events: Vec::new(),
        boundary: None,
    };
    if let Some(reason) = sys.boundary(&y, cfg.chart_margin) {
        traj.events.push(Event {
            t,
            kind: EventKind::ChartBoundary,
            state: init,
        });
        traj.boundary = Some(reason);
        return Ok(traj);
    }

    let scale = 1e-9 * init.as_array().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let (mut g_rad, mut g_axis) = sys.event_fns(&y);
    let mut h = initial_step(&sys, &y, &k1, cfg);
    let mut facold: f64 = 1e-4;
    let mut steps = 0usize;
    let mut last_reject = false;

    while t < t_end {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(IntegratorError::MaxSteps {
                max_steps: cfg.max_steps,
                t,
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            if let Some(reason) = sys.boundary(&y, cfg.chart_margin.sqrt()) {
                traj.events.push(Event {
                    t,
                    kind: EventKind::ChartBoundary,
                    state: sys.state(&y),
                });
                traj.boundary = Some(reason);
                return Ok(traj);
            }
            return Err(IntegratorError::StepUnderflow { t });
        }
        let step = match try_step(&sys, &y, &k1, h, cfg) {
            Ok(s) if s.err.is_finite() => s,
            _ => {
                h *= 0.25;
                last_reject = true;
                continue;
            }
        };
        let fac11 = step.err.powf(EXPO1);
        if step.err > 1.0 {
            h /= (1.0 / FAC_MIN).min(fac11 / SAFETY);
            last_reject = true;
            continue;
        }

        let t1 = if last { t_end } else { t + h };
        let (r1, a1) = sys.event_fns(&step.y1);
        let mut step_events = Vec::new();
        if g_rad.abs().max(r1.abs()) > scale && ((g_rad < 0.0) != (r1 < 0.0)) {
            let theta = bisect(|th| sys.event_fns(&interpolate(&step.dense, th)).0, g_rad);
            let kind = if g_rad < 0.0 {
                EventKind::RadialMin
            } else {
                EventKind::RadialMax
            };
            step_events.push((theta, kind));
        }
        if g_axis.abs().max(a1.abs()) > scale && ((g_axis < 0.0) != (a1 < 0.0)) {
            let theta = bisect(|th| sys.event_fns(&interpolate(&step.dense, th)).1, g_axis);
            step_events.push((theta, EventKind::AxisCrossing));
        }
        step_events.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (theta, kind) in step_events {
            traj.events.push(Event {
                t: t + theta * (t1 - t),
                kind,
                state: sys.state(&interpolate(&step.dense, theta)),
            });
        }

        y = step.y1;
        k1 = step.k7;
        t = t1;
        g_rad = r1;
        g_axis = a1;
        match sys.sample(t, &y) {
            Ok(s) => traj.samples.push(s),
            Err(_) => {
                traj.boundary = Some("potential evaluation failed".into());
                break;
            }
        }
        if let Some(reason) = sys.boundary(&y, cfg.chart_margin) {
            traj.events.push(Event {
                t,
                kind: EventKind::ChartBoundary,
                state: sys.state(&y),
            });
            traj.boundary = Some(reason);
            break;
        }

        let mut fac = fac11 / facold.powf(BETA);
        fac = (1.0 / FAC_MAX).max((1.0 / FAC_MIN).min(fac / SAFETY));
        let mut hnew = h / fac;
        if last_reject {
            hnew = hnew.min(h);
        }
        facold = step.err.max(1e-4);
        last_reject = false;
        h = hnew.min(cfg.max_step);
    }
    Ok(traj)
}

/// Mean time between successive `RadialMin` events (half the orbital period).
pub fn radial_period_measured(traj: &Trajectory) -> Result<f64, IntegratorError> {
    let times: Vec<f64> = traj.events_of(EventKind::RadialMin).map(|e| e.t).collect();
    if times.len() < 3 {
        return Err(IntegratorError::NotPeriodic { found: times.len() });
    }
    Ok((times[times.len() - 1] - times[0]) / (times.len() - 1) as f64)
}

/// Orbital period: twice the radial period, since `r` repeats after half a turn.
pub fn orbital_period_measured(traj: &Trajectory) -> Result<f64, IntegratorError> {
    Ok(2.0 * radial_period_measured(traj)?)
}
