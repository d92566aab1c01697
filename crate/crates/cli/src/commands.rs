use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use ckosc::conics::{conic_from_ab, ConicGeometry, MajorAxis};
use ckosc::dynamics::{Oscillator, PhaseState};
use ckosc::geometry::{
    beltrami_polar, classify_space, parallel_uy_to_polar, parallel_xv_to_polar, polar_to_parallel_uy,
    polar_to_parallel_xv, CKParams, ParallelPointUY, ParallelPointXV, PolarPoint,
};
use ckosc::integrator::{simulate, EventKind, Trajectory};
use ckosc::orbits::{
    classify, e_inf, j_inf, orbit_from_ej, orbit_radius, state_on_orbit, OrbitClass, OrbitSolution, Radius,
};
use ckosc::render::{
    emit_figure, figure_disk_family, figure_effective_hyperbolic, figure_effective_sphere, figure_potentials,
    orbit_curve, trajectory_curve, uniform_angles, Curve, Projection, ProjectionKind, Style,
};
use ckosc::sweep::{map, map_sequential, period_check};

use crate::config::{Resolved, StateArgs};
use crate::CliError;

fn require(v: Option<f64>, flag: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::new("usage", format!("missing {flag}")))
}

fn header(p: CKParams, osc: Oscillator) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("kappa1".into(), json!(p.kappa1));
    m.insert("kappa2".into(), json!(p.kappa2));
    m.insert("omega0_sq".into(), json!(osc.omega0_sq));
    m
}

fn to_json(m: serde_json::Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("serializable");
    s.push('\n');
    s
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::new("io", format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

// ---------------------------------------------------------------- info

fn cos_expr(k: f64, v: &str) -> String {
    match k {
        0.0 => "1".into(),
        1.0 => format!("cos({v})"),
        -1.0 => format!("cosh({v})"),
        k if k > 0.0 => format!("cos({} {v})", k.sqrt()),
        k => format!("cosh({} {v})", (-k).sqrt()),
    }
}

fn sin_expr(k: f64, v: &str) -> String {
    match k {
        0.0 => v.into(),
        1.0 => format!("sin({v})"),
        -1.0 => format!("sinh({v})"),
        k if k > 0.0 => format!("sin({} {v})/{}", k.sqrt(), k.sqrt()),
        k => format!("sinh({} {v})/{}", (-k).sqrt(), (-k).sqrt()),
    }
}

fn tan_expr(k: f64, v: &str) -> String {
    match k {
        0.0 => v.into(),
        1.0 => format!("tan({v})"),
        -1.0 => format!("tanh({v})"),
        k if k > 0.0 => format!("tan({} {v})/{}", k.sqrt(), k.sqrt()),
        k => format!("tanh({} {v})/{}", (-k).sqrt(), (-k).sqrt()),
    }
}

fn squared(expr: &str) -> String {
    if expr == "1" {
        String::new()
    } else if expr.contains('/') {
        format!("({expr})^2 ")
    } else {
        format!("{expr}^2 ")
    }
}

fn scaled_term(k2: f64, body: &str) -> String {
    if k2 == 0.0 {
        String::new()
    } else if k2 == 1.0 {
        format!(" + {body}")
    } else if k2 == -1.0 {
        format!(" - {body}")
    } else if k2 > 0.0 {
        format!(" + {k2} {body}")
    } else {
        format!(" - {} {body}", -k2)
    }
}

pub fn info(r: &Resolved) -> Result<String, CliError> {
    let p = r.params()?;
    let osc = r.oscillator()?;
    let kind = classify_space(p);
    let (k1, k2) = (p.kappa1, p.kappa2);
    let mut out = String::new();
    let _ = writeln!(out, "{} ({}), kappa1 = {k1}, kappa2 = {k2}", kind.name(), kind.symbol());
    let _ = writeln!(
        out,
        "geometry: {}",
        if k2 > 0.0 {
            "Riemannian plane"
        } else if k2 == 0.0 {
            "degenerate metric (Newtonian spacetime)"
        } else {
            "Lorentzian spacetime"
        }
    );
    let s1 = sin_expr(k1, "r");
    let _ = writeln!(
        out,
        "metric, polar (r, phi):      ds^2 = dr^2{}",
        scaled_term(k2, &format!("{}dphi^2", squared(&s1)))
    );
    let c12 = cos_expr(k1 * k2, "y");
    let _ = writeln!(
        out,
        "metric, parallel (u, y):     ds^2 = {}du^2{}",
        squared(&c12),
        scaled_term(k2, "dy^2")
    );
    let _ = writeln!(out, "omega0^2 = {}", osc.omega0_sq);
    let _ = writeln!(out, "potential: V(r) = (omega0^2/2) {}", squared(&tan_expr(k1, "r")).trim_end());
    match e_inf(p, osc) {
        Some(e) => {
            let _ = writeln!(out, "E_inf = {e} (omega0^2/(2|kappa1|))");
        }
        None => {
            let _ = writeln!(out, "E_inf: not defined (kappa1 >= 0)");
        }
    }
    match j_inf(p, osc) {
        Some(j) => {
            let _ = writeln!(out, "J_inf = {j} (omega0/(sqrt(kappa2)|kappa1|))");
        }
        None => {
            let _ = writeln!(out, "J_inf: not defined");
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Start on the closed-form orbit with this energy (with --j).
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub j: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Stem of the output files.
    #[arg(long, default_value = "trajectory")]
    pub name: String,
}

/// Point of a closed-form orbit at its minor vertex, a quarter turn from `φ₀`.
fn start_on_orbit(p: CKParams, osc: Oscillator, e: f64, j: f64) -> Result<PhaseState, CliError> {
    let sol = orbit_from_ej(p, osc, e, j, 0.0)?;
    let quarter = p.l2().quarter_period().unwrap_or(0.0);
    Ok(state_on_orbit(p, &sol, quarter)?)
}

fn initial(r: &Resolved, p: CKParams, osc: Oscillator, a: &SimulateArgs) -> Result<PhaseState, CliError> {
    if let Some(s) = r.initial_state(&a.state)? {
        return Ok(s);
    }
    match (r.energy(a.energy), r.momentum(a.j)) {
        (Some(e), Some(j)) => start_on_orbit(p, osc, e, j),
        _ => Err(CliError::new(
            "usage",
            "no initial state: give --r --phi --vr --vphi, --u --y --vu --vy, or --energy with --j",
        )),
    }
}

fn chart_name(s: &PhaseState) -> &'static str {
    match s.chart {
        ckosc::geometry::Chart::Polar => "polar",
        ckosc::geometry::Chart::ParallelUY => "parallel",
    }
}

fn event_name(k: EventKind) -> &'static str {
    match k {
        EventKind::RadialMin => "radial_min",
        EventKind::RadialMax => "radial_max",
        EventKind::AxisCrossing => "axis_crossing",
        EventKind::ChartBoundary => "chart_boundary",
    }
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let p = traj.params;
    let mut out = String::from("t,chart,q1,q2,v1,v2,X,Y,E,J,f11,f12,f22\n");
    for s in &traj.samples {
        let st = &s.state;
        let (x, y) = st.beltrami(p);
        let _ = writeln!(
            out,
            "{:?},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            s.t,
            chart_name(st),
            st.q1,
            st.q2,
            st.v1,
            st.v2,
            x,
            y,
            s.energy,
            s.momenta.j,
            s.fradkin.f11,
            s.fradkin.f12,
            s.fradkin.f22
        );
    }
    out
}

fn events_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,kind,chart,q1,q2,v1,v2\n");
    for e in &traj.events {
        let st = &e.state;
        let _ = writeln!(
            out,
            "{:?},{},{},{:?},{:?},{:?},{:?}",
            e.t,
            event_name(e.kind),
            chart_name(st),
            st.q1,
            st.q2,
            st.v1,
            st.v2
        );
    }
    out
}

pub fn simulate_cmd(r: &Resolved, a: &SimulateArgs) -> Result<String, CliError> {
    let p = r.params()?;
    let osc = r.oscillator()?;
    let init = initial(r, p, osc, a)?;
    let t_end = r.t_end(a.t_end, 10.0);
    let traj = simulate(p, osc, init, t_end, &r.integrator())?;
    let dir = r.output_dir();
    let traj_path = write_file(&dir, &format!("{}.csv", a.name), &trajectory_csv(&traj))?;
    let ev_path = write_file(&dir, &format!("{}_events.csv", a.name), &events_csv(&traj))?;

    let first = &traj.samples[0];
    let last = traj.final_sample();
    let d = traj.drift();
    let count = |k| traj.events_of(k).count();
    let mut m = header(p, osc);
    m.insert("chart".into(), json!(chart_name(&first.state)));
    m.insert("E".into(), json!(first.energy));
    m.insert("J".into(), json!(first.momenta.j));
    m.insert("t_end".into(), json!(t_end));
    m.insert("t_final".into(), json!(last.t));
    m.insert("samples".into(), json!(traj.samples.len()));
    m.insert(
        "events".into(),
        json!({
            "radial_min": count(EventKind::RadialMin),
            "radial_max": count(EventKind::RadialMax),
            "axis_crossing": count(EventKind::AxisCrossing),
            "chart_boundary": count(EventKind::ChartBoundary),
        }),
    );
    m.insert("boundary".into(), json!(traj.boundary));
    m.insert(
        "drift".into(),
        json!({"E": d.energy, "J": d.j, "f11": d.f11, "f12": d.f12, "f22": d.f22, "max": d.max()}),
    );
    m.insert("max_det_residual".into(), json!(traj.max_det_residual()));
    m.insert(
        "files".into(),
        json!({"trajectory": path_str(&traj_path), "events": path_str(&ev_path)}),
    );
    Ok(to_json(m))
}

// ---------------------------------------------------------------- orbit

#[derive(Debug, Clone, Args)]
pub struct OrbitArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub j: Option<f64>,
    /// Major semiaxis (instead of --energy/--j, with --b).
    #[arg(long, conflicts_with_all = ["energy", "j"])]
    pub a: Option<f64>,
    /// Minor semiaxis.
    #[arg(long)]
    pub b: Option<f64>,
    /// Ultraellipse parameter ã, in place of --a.
    #[arg(long = "a-tilde", conflicts_with = "a")]
    pub a_tilde: Option<f64>,
    /// Equidistant with minor semiaxis --b.
    #[arg(long, conflicts_with_all = ["a", "a_tilde"])]
    pub equidistant: bool,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    #[arg(long, default_value_t = 360)]
    pub samples: usize,
    #[arg(long, default_value = "orbit")]
    pub name: String,
}

fn solution(r: &Resolved, p: CKParams, osc: Oscillator, a: &OrbitArgs) -> Result<OrbitSolution, CliError> {
    if let Some(b) = a.b {
        let major = match (a.a, a.a_tilde, a.equidistant) {
            (Some(x), _, _) => MajorAxis::Semiaxis(x),
            (None, Some(t), _) => MajorAxis::UltraSemiaxis(t),
            (None, None, true) => MajorAxis::Infinite,
            _ => return Err(CliError::new("usage", "--b needs --a, --a-tilde or --equidistant")),
        };
        let g = ConicGeometry {
            kind: ckosc::ConicKind::Ellipse,
            major,
            b,
        };
        let (a_sq, b_sq) = g.ab_sq(p);
        let (dm, dp) = (1.0 / a_sq, 1.0 / (p.kappa2 * b_sq));
        return Ok(OrbitSolution::from_dg(p, osc, 0.5 * (dm + dp), 0.5 * (dp - dm), a.phi0));
    }
    let e = require(r.energy(a.energy), "--energy")?;
    let j = require(r.momentum(a.j), "--j")?;
    Ok(orbit_from_ej(p, osc, e, j, a.phi0)?)
}

fn conic_json(p: CKParams, sol: &OrbitSolution) -> Value {
    match conic_from_ab(p, sol.a_sq, sol.b_sq) {
        Ok(c) => {
            let (a, a_tilde) = match c.major {
                MajorAxis::Semiaxis(x) => (Some(x), None),
                MajorAxis::UltraSemiaxis(t) => (None, Some(t)),
                MajorAxis::Infinite => (None, None),
            };
            json!({"kind": format!("{:?}", c.kind), "a": a, "b": c.b, "a_tilde": a_tilde})
        }
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn solution_json(p: CKParams, osc: Oscillator, sol: &OrbitSolution) -> serde_json::Map<String, Value> {
    let mut m = header(p, osc);
    m.insert("E".into(), json!(sol.energy));
    m.insert("J".into(), json!(sol.j));
    m.insert("D".into(), json!(sol.d));
    m.insert("G".into(), json!(sol.g));
    m.insert("A_sq".into(), json!(sol.a_sq));
    m.insert("B_sq".into(), json!(sol.b_sq));
    m.insert("E1".into(), json!(sol.e1));
    m.insert("E2".into(), json!(sol.e2));
    m.insert("phi0".into(), json!(sol.phi0));
    if p.kappa2 > 0.0 {
        m.insert("conic".into(), conic_json(p, sol));
    }
    m
}

/// Angles covering the orbit: one turn for κ₂ > 0. Otherwise the interval
/// `D > G C₂(2ψ)` when `G > 0`, else `|C₂(ψ)| ≤ 10`.
fn orbit_angles(p: CKParams, sol: &OrbitSolution, n: usize) -> Vec<f64> {
    if p.kappa2 > 0.0 {
        return uniform_angles(p, sol.phi0, n);
    }
    let q = (-p.kappa2).sqrt();
    let half = if sol.g > 0.0 {
        0.5 * (sol.d / sol.g).max(1.0).acosh() / q
    } else {
        10f64.acosh() / q
    };
    (0..=n)
        .map(|k| sol.phi0 - half + 2.0 * half * (k as f64 + 0.5) / (n as f64 + 1.0))
        .collect()
}

pub fn orbit_cmd(r: &Resolved, a: &OrbitArgs) -> Result<String, CliError> {
    let p = r.params()?;
    let osc = r.oscillator()?;
    let sol = solution(r, p, osc, a)?;
    let mut table = String::from("phi,r,X,Y\n");
    for phi in orbit_angles(p, &sol, a.samples.max(1)) {
        match orbit_radius(p, &sol, phi) {
            Ok(Radius::Finite(rad)) => {
                let (x, y) = beltrami_polar(p, PolarPoint::new(rad, phi));
                let _ = writeln!(table, "{phi:?},{rad:?},{x:?},{y:?}");
            }
            _ => {
                let _ = writeln!(table, "{phi:?},,,");
            }
        }
    }
    let path = write_file(&r.output_dir(), &format!("{}.csv", a.name), &table)?;
    let mut m = solution_json(p, osc, &sol);
    m.insert("table".into(), json!(path_str(&path)));
    Ok(to_json(m))
}

// ---------------------------------------------------------------- classify

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub j: Option<f64>,
}

fn class_json(p: CKParams, osc: Oscillator, e: f64, j: f64, c: &OrbitClass) -> serde_json::Map<String, Value> {
    let mut m = header(p, osc);
    m.insert("E".into(), json!(e));
    m.insert("J".into(), json!(j));
    m.insert("tag".into(), json!(c.tag));
    m.insert("bounded".into(), json!(c.is_bounded()));
    m.insert("E_min".into(), json!(if c.e_min.is_finite() { Some(c.e_min) } else { None }));
    m.insert("E_inf".into(), json!(c.e_inf));
    m.insert("J_inf".into(), json!(c.j_inf));
    m.insert("r_m".into(), json!(c.r_m));
    let turning = c
        .turning
        .map(|(lo, hi)| json!({"r_min": lo, "r_max": if hi.is_finite() { Some(hi) } else { None }}));
    m.insert("turning".into(), json!(turning));
    m.insert("momentum_regime".into(), json!(c.momentum_regime));
    if j != 0.0 && p.kappa2 > 0.0 {
        if let Ok(sol) = orbit_from_ej(p, osc, e, j, 0.0) {
            m.insert("conic".into(), conic_json(p, &sol));
        }
    }
    m
}

pub fn classify_cmd(r: &Resolved, a: &ClassifyArgs) -> Result<String, CliError> {
    let p = r.params()?;
    let osc = r.oscillator()?;
    let e = require(r.energy(a.energy), "--energy")?;
    let j = require(r.momentum(a.j), "--j")?;
    let c = classify(p, osc, e, j)?;
    Ok(to_json(class_json(p, osc, e, j, &c)))
}

// ---------------------------------------------------------------- period

#[derive(Debug, Clone, Args)]
pub struct PeriodArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    /// Angular momentum of the measured orbit, as a fraction of the circular one.
    #[arg(long = "j-fraction", default_value_t = 0.5)]
    pub j_fraction: f64,
}

pub fn period_cmd(r: &Resolved, a: &PeriodArgs) -> Result<String, CliError> {
    let p = r.params()?;
    let osc = r.oscillator()?;
    let e = require(r.energy(a.energy), "--energy")?;
    let c = period_check(p, osc, e, a.j_fraction, &r.integrator())?;
    let mut m = header(p, osc);
    m.insert("E".into(), json!(c.e));
    m.insert("J".into(), json!(c.j));
    m.insert("formula".into(), json!(c.formula));
    m.insert("measured".into(), json!(c.measured));
    m.insert("rel_error".into(), json!(c.rel_error));
    Ok(to_json(m))
}

// ---------------------------------------------------------------- convert

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["r", "phi"])]
    pub u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y: Option<f64>,
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["r", "phi", "u", "y"])]
    pub x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v: Option<f64>,
}

pub fn convert_cmd(r: &Resolved, a: &ConvertArgs) -> Result<String, CliError> {
    let p = r.params()?;
    let osc = r.oscillator()?;
    let polar = match (a.r, a.phi, a.u, a.y, a.x, a.v) {
        (Some(rr), Some(phi), None, None, None, None) => PolarPoint::new(rr, phi),
        (None, None, Some(u), Some(y), None, None) => parallel_uy_to_polar(p, ParallelPointUY::new(u, y))?,
        (None, None, None, None, Some(x), Some(v)) => parallel_xv_to_polar(p, ParallelPointXV::new(x, v))?,
        _ => {
            return Err(CliError::new(
                "usage",
                "give one coordinate pair: --r --phi, --u --y or --x --v",
            ))
        }
    };
    let uy = polar_to_parallel_uy(p, polar)?;
    let xv = polar_to_parallel_xv(p, polar)?;
    let (bx, by) = beltrami_polar(p, polar);
    let mut m = header(p, osc);
    m.insert("polar".into(), json!({"r": polar.r, "phi": polar.phi}));
    m.insert("parallel_uy".into(), json!({"u": uy.u, "y": uy.y}));
    m.insert("parallel_xv".into(), json!({"x": xv.x, "v": xv.v}));
    m.insert("beltrami".into(), json!({"X": bx, "Y": by}));
    Ok(to_json(m))
}

// ---------------------------------------------------------------- plot

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureKind {
    /// Potential for several curvatures.
    #[value(alias = "1")]
    Potentials,
    /// Effective potential on the unit sphere.
    #[value(alias = "2")]
    Sphere,
    /// Effective potential on the hyperbolic plane.
    #[value(alias = "3")]
    Hyperbolic,
    /// Orbit family with fixed minor semiaxis in the Poincaré disk.
    #[value(alias = "4")]
    Disk,
    /// Closed-form orbit for --energy/--j.
    Orbit,
    /// Simulated trajectory.
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProjectionName {
    Beltrami,
    Poincare,
    Orthographic,
    Planar,
}

impl ProjectionName {
    fn kind(self) -> ProjectionKind {
        match self {
            ProjectionName::Beltrami => ProjectionKind::Beltrami,
            ProjectionName::Poincare => ProjectionKind::PoincareDisk,
            ProjectionName::Orthographic => ProjectionKind::Orthographic,
            ProjectionName::Planar => ProjectionKind::Planar,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub figure: FigureKind,
    /// tanh of the minor semiaxis for the disk figure.
    #[arg(long = "tan-b", default_value_t = 0.3)]
    pub tan_b: f64,
    /// Angular momenta of the effective potential figures.
    #[arg(long = "js", value_delimiter = ',')]
    pub js: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub projection: Option<ProjectionName>,
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub j: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Stem of the output files; defaults to the figure name.
    #[arg(long)]
    pub name: Option<String>,
}

fn projection(p: CKParams, a: &PlotArgs) -> Projection {
    a.projection
        .map(|n| Projection::new(n.kind()))
        .unwrap_or_else(|| Projection::default_for(p))
}

fn space_style(p: CKParams, proj: Projection, title: String) -> Style {
    Style {
        title: Some(title),
        disk_boundary: matches!(proj.kind, ProjectionKind::PoincareDisk | ProjectionKind::Orthographic),
        isotrope_slope: (p.kappa2 < 0.0).then(|| 1.0 / (-p.kappa2).sqrt()),
        ..Style::default()
    }
}

pub fn plot_cmd(r: &Resolved, a: &PlotArgs) -> Result<String, CliError> {
    let (curves, style, stem): (Vec<Curve>, Style, &str) = match a.figure {
        FigureKind::Potentials => {
            let (c, s) = figure_potentials(r.oscillator()?);
            (c, s, "potentials")
        }
        FigureKind::Sphere => {
            let js = a.js.clone().unwrap_or_else(|| vec![0.25, 0.5, 1.0, 1.5]);
            let (c, s) = figure_effective_sphere(r.oscillator()?, &js);
            (c, s, "effective_sphere")
        }
        FigureKind::Hyperbolic => {
            let js = a.js.clone().unwrap_or_else(|| vec![0.5, 1.0, 1.5]);
            let (c, s) = figure_effective_hyperbolic(r.oscillator()?, &js);
            (c, s, "effective_hyperbolic")
        }
        FigureKind::Disk => {
            if !(a.tan_b > 0.0 && a.tan_b < 1.0) {
                return Err(CliError::new("usage", "--tan-b must lie in (0, 1)"));
            }
            let (c, s) = figure_disk_family(a.tan_b, 720);
            (c, s, "disk_family")
        }
        FigureKind::Orbit => {
            let p = r.params()?;
            let osc = r.oscillator()?;
            let e = require(r.energy(a.energy), "--energy")?;
            let j = require(r.momentum(a.j), "--j")?;
            let sol = orbit_from_ej(p, osc, e, j, 0.0)?;
            let proj = projection(p, a);
            let curve = orbit_curve(p, proj, &sol, &orbit_angles(p, &sol, 720), format!("E = {e}, J = {j}"))?;
            let style = space_style(p, proj, format!("Orbit in {}", classify_space(p).name()));
            (vec![curve], style, "orbit_figure")
        }
        FigureKind::Trajectory => {
            let p = r.params()?;
            let osc = r.oscillator()?;
            let sim = SimulateArgs {
                state: a.state.clone(),
                energy: a.energy,
                j: a.j,
                t_end: a.t_end,
                name: String::new(),
            };
            let init = initial(r, p, osc, &sim)?;
            let traj = simulate(p, osc, init, r.t_end(a.t_end, 10.0), &r.integrator())?;
            let proj = projection(p, a);
            let curve = trajectory_curve(proj, &traj, "trajectory")?;
            let style = space_style(p, proj, format!("Trajectory in {}", classify_space(p).name()));
            (vec![curve], style, "trajectory_figure")
        }
    };
    let fig = emit_figure(&curves, &style)?;
    let stem = a.name.as_deref().unwrap_or(stem);
    let dir = r.output_dir();
    let svg = write_file(&dir, &format!("{stem}.svg"), &fig.svg)?;
    let csv = write_file(&dir, &format!("{stem}.csv"), &fig.csv)?;
    let m = json!({"svg": path_str(&svg), "csv": path_str(&csv), "curves": curves.len()});
    let mut s = serde_json::to_string_pretty(&m).expect("serializable");
    s.push('\n');
    Ok(s)
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    /// Orbit classification on the (E, J) grid.
    Classify,
    /// Closed-form against measured period for each energy.
    Period,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "classify")]
    pub what: SweepKind,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub energies: Vec<f64>,
    #[arg(long = "js", value_delimiter = ',', allow_negative_numbers = true)]
    pub js: Vec<f64>,
    #[arg(long = "j-fraction", default_value_t = 0.5)]
    pub j_fraction: f64,
    /// Run on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
}

fn run_batch<T: Sync, R: Send>(items: &[T], sequential: bool, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    if sequential {
        map_sequential(items, f)
    } else {
        map(items, f)
    }
}

fn opt(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map(|v| format!("{v:?}")).unwrap_or_default()
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn sweep_cmd(r: &Resolved, a: &SweepArgs) -> Result<String, CliError> {
    let p = r.params()?;
    let osc = r.oscillator()?;
    let mut out = String::new();
    match a.what {
        SweepKind::Classify => {
            if a.js.is_empty() {
                return Err(CliError::new("usage", "classify sweep needs --js"));
            }
            let grid: Vec<(f64, f64)> = a
                .energies
                .iter()
                .flat_map(|&e| a.js.iter().map(move |&j| (e, j)))
                .collect();
            let rows = run_batch(&grid, a.sequential, |&(e, j)| classify(p, osc, e, j));
            out.push_str("E,J,tag,bounded,r_min,r_max,error\n");
            for ((e, j), row) in grid.iter().zip(rows) {
                match row {
                    Ok(c) => {
                        let (lo, hi) = c.turning.map_or((None, None), |(lo, hi)| (Some(lo), Some(hi)));
                        let _ = writeln!(out, "{e:?},{j:?},{:?},{},{},{},", c.tag, c.is_bounded(), opt(lo), opt(hi));
                    }
                    Err(err) => {
                        let _ = writeln!(out, "{e:?},{j:?},,,,,{}", csv_text(&err.to_string()));
                    }
                }
            }
        }
        SweepKind::Period => {
            let cfg = r.integrator();
            let rows = run_batch(&a.energies, a.sequential, |&e| period_check(p, osc, e, a.j_fraction, &cfg));
            out.push_str("E,J,formula,measured,rel_error,error\n");
            for (e, row) in a.energies.iter().zip(rows) {
                match row {
                    Ok(c) => {
                        let _ = writeln!(out, "{e:?},{:?},{:?},{:?},{:?},", c.j, c.formula, c.measured, c.rel_error);
                    }
                    Err(err) => {
                        let _ = writeln!(out, "{e:?},,,,,{}", csv_text(&err.to_string()));
                    }
                }
            }
        }
    }
    Ok(out)
}
