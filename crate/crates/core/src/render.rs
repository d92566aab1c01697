//! Projections of the curved plane to drawing coordinates, and SVG/CSV
//! output of labelled curves.
//!
//! The figure builders at the bottom produce the potential curves, the
//! effective potentials on the sphere and the hyperbolic plane, and the
//! family of orbits in the Poincaré disk for a fixed minor semiaxis.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::Oscillator;
use crate::geometry::{CKParams, PolarPoint};
use crate::integrator::Trajectory;
use crate::orbits::{effective_potential, orbit_radius, OrbitSolution, Radius};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("{kind:?} projection is not available for kappa1 = {kappa1}, kappa2 = {kappa2}")]
    Mismatch {
        kind: ProjectionKind,
        kappa1: f64,
        kappa2: f64,
    },
    #[error("a figure needs at least one curve")]
    EmptyFigure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionKind {
    Beltrami,
    PoincareDisk,
    Orthographic,
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub kind: ProjectionKind,
    pub scale: f64,
}

impl Projection {
    pub fn new(kind: ProjectionKind) -> Self {
        Projection { kind, scale: 1.0 }
    }

    /// Planar for κ₁ = 0, orthographic for κ₁ > 0, Poincaré disk for κ₁ < 0,
    /// and Beltrami for the spacetimes (κ₂ ≤ 0).
    pub fn default_for(p: CKParams) -> Self {
        let kind = if p.kappa2 <= 0.0 {
            ProjectionKind::Beltrami
        } else if p.kappa1 == 0.0 {
            ProjectionKind::Planar
        } else if p.kappa1 > 0.0 {
            ProjectionKind::Orthographic
        } else {
            ProjectionKind::PoincareDisk
        };
        Projection::new(kind)
    }
}

/// A projected point, or a marker for points outside the projection domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Projected {
    Point(f64, f64),
    Clipped,
}

impl Projected {
    pub fn point(self) -> Option<(f64, f64)> {
        match self {
            Projected::Point(x, y) => Some((x, y)),
            Projected::Clipped => None,
        }
    }
}

fn check_projection(p: CKParams, proj: Projection) -> Result<(), RenderError> {
    let ok = match proj.kind {
        ProjectionKind::Beltrami => true,
        ProjectionKind::Planar => p.kappa1 == 0.0,
        ProjectionKind::Orthographic => p.kappa1 > 0.0 && p.kappa2 > 0.0,
        ProjectionKind::PoincareDisk => p.kappa1 < 0.0 && p.kappa2 > 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(RenderError::Mismatch {
            kind: proj.kind,
            kappa1: p.kappa1,
            kappa2: p.kappa2,
        })
    }
}

pub fn project(p: CKParams, proj: Projection, pt: PolarPoint) -> Result<Projected, RenderError> {
    check_projection(p, proj)?;
    let (l1, l2) = (p.l1(), p.l2());
    let k1 = p.kappa1;
    let (rho, c, s) = match proj.kind {
        ProjectionKind::Planar => (pt.r, l2.cos(pt.phi), l2.sin(pt.phi)),
        ProjectionKind::Beltrami => {
            if l1.cos(pt.r) <= 0.0 {
                return Ok(Projected::Clipped);
            }
            (l1.tan(pt.r), l2.cos(pt.phi), l2.sin(pt.phi))
        }
        ProjectionKind::PoincareDisk => {
            let q = (-k1).sqrt();
            let a = p.kappa2.sqrt() * pt.phi;
            ((0.5 * q * pt.r).tanh(), a.cos(), a.sin())
        }
        ProjectionKind::Orthographic => {
            if l1.cos(pt.r) < 0.0 {
                return Ok(Projected::Clipped);
            }
            let a = p.kappa2.sqrt() * pt.phi;
            (k1.sqrt() * l1.sin(pt.r), a.cos(), a.sin())
        }
    };
    let (x, y) = (proj.scale * rho * c, proj.scale * rho * s);
    if x.is_finite() && y.is_finite() {
        Ok(Projected::Point(x, y))
    } else {
        Ok(Projected::Clipped)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Time, angle or abscissa the sample was taken at.
    pub param: f64,
    pub at: Projected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub points: Vec<CurvePoint>,
    /// SVG colour; a palette colour is used when absent.
    pub stroke: Option<String>,
    pub width: f64,
}

impl Curve {
    pub fn new(label: impl Into<String>, points: Vec<CurvePoint>) -> Self {
        Curve {
            label: label.into(),
            points,
            stroke: None,
            width: 1.5,
        }
    }

    pub fn with_stroke(mut self, stroke: &str) -> Self {
        self.stroke = Some(stroke.to_string());
        self
    }

    pub fn with_width(mut self, width: f64) -> Self {
        self.width = width;
        self
    }

    /// Continuous pieces between clipped samples.
    pub fn segments(&self) -> Vec<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        for pt in &self.points {
            match pt.at {
                Projected::Point(x, y) => cur.push((x, y)),
                Projected::Clipped => {
                    if !cur.is_empty() {
                        out.push(std::mem::take(&mut cur));
                    }
                }
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Style {
    pub width: u32,
    pub height: u32,
    /// Data window; fitted to the curves when absent.
    pub view: Option<ViewBox>,
    pub title: Option<String>,
    /// Draw the unit circle (boundary of the Poincaré disk).
    pub disk_boundary: bool,
    /// Draw isotropes `Y = ±X·slope` through the origin.
    pub isotrope_slope: Option<f64>,
    pub axes: bool,
    pub legend: bool,
    /// Decimal places of SVG coordinates.
    pub precision: usize,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            width: 600,
            height: 600,
            view: None,
            title: None,
            disk_boundary: false,
            isotrope_slope: None,
            axes: true,
            legend: true,
            precision: 2,
        }
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// An SVG document and the CSV of its samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub svg: String,
    pub csv: String,
}

fn fit_view(curves: &[Curve]) -> ViewBox {
    let mut v = ViewBox {
        x_min: f64::INFINITY,
        x_max: f64::NEG_INFINITY,
        y_min: f64::INFINITY,
        y_max: f64::NEG_INFINITY,
    };
    for (x, y) in curves.iter().flat_map(|c| c.points.iter().filter_map(|p| p.at.point())) {
        v.x_min = v.x_min.min(x);
        v.x_max = v.x_max.max(x);
        v.y_min = v.y_min.min(y);
        v.y_max = v.y_max.max(y);
    }
    if !v.x_min.is_finite() {
        return ViewBox {
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
        };
    }
    let pad_x = 0.05 * (v.x_max - v.x_min).max(1e-9);
    let pad_y = 0.05 * (v.y_max - v.y_min).max(1e-9);
    ViewBox {
        x_min: v.x_min - pad_x,
        x_max: v.x_max + pad_x,
        y_min: v.y_min - pad_y,
        y_max: v.y_max + pad_y,
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render curves to a standalone SVG 1.1 document plus a CSV of the samples.
pub fn emit_figure(curves: &[Curve], style: &Style) -> Result<Figure, RenderError> {
    if curves.is_empty() {
        return Err(RenderError::EmptyFigure);
    }
    let view = style.view.unwrap_or_else(|| fit_view(curves));
    let (w, h) = (style.width as f64, style.height as f64);
    let sx = w / (view.x_max - view.x_min);
    let sy = h / (view.y_max - view.y_min);
    let prec = style.precision;
    let px = |x: f64| (x - view.x_min) * sx;
    let py = |y: f64| (view.y_max - y) * sy;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width, style.height, style.width, style.height
    );
    if let Some(t) = &style.title {
        let _ = writeln!(svg, "<title>{}</title>", xml_escape(t));
    }
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, style.width, style.height);

    let inside_x = view.x_min <= 0.0 && 0.0 <= view.x_max;
    let inside_y = view.y_min <= 0.0 && 0.0 <= view.y_max;
    if style.axes {
        if inside_y {
            let _ = writeln!(
                svg,
                r##"<line x1="0" y1="{y:.p$}" x2="{w}" y2="{y:.p$}" stroke="#bbbbbb" stroke-width="0.5"/>"##,
                y = py(0.0),
                w = style.width,
                p = prec
            );
        }
        if inside_x {
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.p$}" y1="0" x2="{x:.p$}" y2="{h}" stroke="#bbbbbb" stroke-width="0.5"/>"##,
                x = px(0.0),
                h = style.height,
                p = prec
            );
        }
    }
    if let Some(m) = style.isotrope_slope {
        for sgn in [1.0, -1.0] {
            let (x0, x1) = (view.x_min, view.x_max);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.p$}" y1="{:.p$}" x2="{:.p$}" y2="{:.p$}" stroke="#999999" stroke-width="0.75" stroke-dasharray="4 3"/>"##,
                px(x0),
                py(sgn * m * x0),
                px(x1),
                py(sgn * m * x1),
                p = prec
            );
        }
    }
    if style.disk_boundary {
        let _ = writeln!(
            svg,
            r##"<ellipse cx="{:.p$}" cy="{:.p$}" rx="{:.p$}" ry="{:.p$}" fill="none" stroke="black" stroke-width="1"/>"##,
            px(0.0),
            py(0.0),
            sx,
            sy,
            p = prec
        );
    }

    for (i, c) in curves.iter().enumerate() {
        let stroke = c.stroke.clone().unwrap_or_else(|| PALETTE[i % PALETTE.len()].to_string());
        let _ = writeln!(
            svg,
            r#"<g id="curve-{i}" fill="none" stroke="{}" stroke-width="{}">"#,
            xml_escape(&stroke),
            c.width
        );
        let _ = writeln!(svg, "<desc>{}</desc>", xml_escape(&c.label));
        for seg in c.segments() {
            let pts: Vec<String> = seg
                .iter()
                .map(|&(x, y)| format!("{:.p$},{:.p$}", px(x), py(y), p = prec))
                .collect();
            let _ = writeln!(svg, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(svg, "</g>");
    }
    if style.legend {
        let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="11">"#);
        for (i, c) in curves.iter().enumerate() {
            let stroke = c.stroke.clone().unwrap_or_else(|| PALETTE[i % PALETTE.len()].to_string());
            let _ = writeln!(
                svg,
                r#"<text x="8" y="{}" fill="{}">{}</text>"#,
                16 + 14 * i,
                xml_escape(&stroke),
                xml_escape(&c.label)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");

    let mut csv = String::from("curve_label,t_or_phi,X,Y\n");
    for c in curves {
        let label = csv_field(&c.label);
        for pt in &c.points {
            match pt.at {
                Projected::Point(x, y) => {
                    let _ = writeln!(csv, "{label},{:?},{x:?},{y:?}", pt.param);
                }
                Projected::Clipped => {
                    let _ = writeln!(csv, "{label},{:?},,", pt.param);
                }
            }
        }
    }
    Ok(Figure { svg, csv })
}

/// `n` angles covering one turn, `2π/√κ₂`, starting at `start` (κ₂ > 0).
pub fn uniform_angles(p: CKParams, start: f64, n: usize) -> Vec<f64> {
    let turn = 2.0 * std::f64::consts::PI / p.kappa2.sqrt();
    (0..=n).map(|k| start + turn * k as f64 / n as f64).collect()
}

/// Closed-form orbit sampled at the given angles.
pub fn orbit_curve(
    p: CKParams,
    proj: Projection,
    sol: &OrbitSolution,
    phis: &[f64],
    label: impl Into<String>,
) -> Result<Curve, RenderError> {
    check_projection(p, proj)?;
    let mut points = Vec::with_capacity(phis.len());
    for &phi in phis {
        let at = match orbit_radius(p, sol, phi) {
            Ok(Radius::Finite(r)) => project(p, proj, PolarPoint::new(r, phi))?,
            _ => Projected::Clipped,
        };
        points.push(CurvePoint { param: phi, at });
    }
    Ok(Curve::new(label, points))
}

/// Simulated trajectory, one point per sample.
pub fn trajectory_curve(
    proj: Projection,
    traj: &Trajectory,
    label: impl Into<String>,
) -> Result<Curve, RenderError> {
    let p = traj.params;
    check_projection(p, proj)?;
    let mut points = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let (x, y) = s.state.beltrami(p);
        let at = if proj.kind == ProjectionKind::Beltrami {
            Projected::Point(proj.scale * x, proj.scale * y)
        } else if x == 0.0 && y == 0.0 {
            Projected::Point(0.0, 0.0)
        } else {
            match s.state.polar_point(p) {
                Ok(pt) => project(p, proj, pt)?,
                Err(_) => Projected::Clipped,
            }
        };
        points.push(CurvePoint { param: s.t, at });
    }
    Ok(Curve::new(label, points))
}

fn graph(label: String, xs: impl Iterator<Item = f64>, f: impl Fn(f64) -> Option<f64>, cap: f64) -> Curve {
    let points = xs
        .map(|x| {
            let at = match f(x) {
                Some(y) if y.is_finite() && y <= cap => Projected::Point(x, y),
                _ => Projected::Clipped,
            };
            CurvePoint { param: x, at }
        })
        .collect();
    Curve::new(label, points)
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |k| a + (b - a) * k as f64 / n as f64)
}

/// Potential `½ω₀²T_κ(r)²` for κ ∈ {2, 1, 0.5, 0, -0.5, -1, -2}.
pub fn figure_potentials(osc: Oscillator) -> (Vec<Curve>, Style) {
    let cap = 3.0;
    let curves = [2.0, 1.0, 0.5, 0.0, -0.5, -1.0, -2.0]
        .into_iter()
        .map(|k: f64| {
            let l = crate::cktrig::Label::new(k).expect("finite");
            let f = |r: f64| {
                let c = l.cos(r);
                (c > 1e-9).then(|| 0.5 * osc.omega0_sq * (l.sin(r) / c).powi(2))
            };
            // positive curvature: only r ≥ 0 up to the wall
            let start = if k > 0.0 { 0.0 } else { -3.0 };
            let c = graph(format!("kappa = {k}"), linspace(start, 3.0, 600), f, cap);
            if k == 0.0 {
                c.with_width(2.5)
            } else {
                c
            }
        })
        .collect();
    let style = Style {
        view: Some(ViewBox {
            x_min: -3.0,
            x_max: 3.0,
            y_min: -0.1,
            y_max: cap,
        }),
        title: Some("Oscillator potential for several curvatures".into()),
        ..Style::default()
    };
    (curves, style)
}

fn effective_family(p: CKParams, osc: Oscillator, js: &[f64], thick: Option<f64>, r_max: f64, cap: f64) -> Vec<Curve> {
    js.iter()
        .map(|&j| {
            let f = |r: f64| effective_potential(p, osc, j, r).ok();
            let c = graph(format!("J = {j}"), linspace(0.0, r_max, 600), f, cap);
            if Some(j) == thick {
                c.with_width(2.5)
            } else {
                c
            }
        })
        .collect()
}

/// Effective potentials on the unit sphere.
pub fn figure_effective_sphere(osc: Oscillator, js: &[f64]) -> (Vec<Curve>, Style) {
    let p = CKParams::standard(crate::geometry::SpaceKind::Sphere);
    let cap = 6.0;
    let r_max = std::f64::consts::FRAC_PI_2;
    let curves = effective_family(p, osc, js, None, r_max, cap);
    let style = Style {
        view: Some(ViewBox {
            x_min: 0.0,
            x_max: r_max,
            y_min: 0.0,
            y_max: cap,
        }),
        title: Some("Effective potential, kappa1 = 1".into()),
        ..Style::default()
    };
    (curves, style)
}

/// Effective potentials on the hyperbolic plane; the `𝒥∞` curve is drawn thicker.
pub fn figure_effective_hyperbolic(osc: Oscillator, js: &[f64]) -> (Vec<Curve>, Style) {
    let p = CKParams::standard(crate::geometry::SpaceKind::Hyperbolic);
    let j_inf = crate::orbits::j_inf(p, osc);
    let cap = 3.0;
    let curves = effective_family(p, osc, js, j_inf, 4.0, cap);
    let style = Style {
        view: Some(ViewBox {
            x_min: 0.0,
            x_max: 4.0,
            y_min: 0.0,
            y_max: cap,
        }),
        title: Some("Effective potential, kappa1 = -1".into()),
        ..Style::default()
    };
    (curves, style)
}

/// Orbits with fixed minor semiaxis `b` (`tanh b = tan_b`) in the Poincaré disk
/// of the unit hyperbolic plane: circle, seven ellipses, the equidistant,
/// seven ultraellipses and the straight line `ã = 0`.
pub fn figure_disk_family(tan_b: f64, samples: usize) -> (Vec<Curve>, Style) {
    let p = CKParams::standard(crate::geometry::SpaceKind::Hyperbolic);
    let proj = Projection::new(ProjectionKind::PoincareDisk);
    let phis = uniform_angles(p, 0.0, samples);
    let big_b = tan_b;
    let from_a = |big_a: f64| {
        let d = 0.5 * (1.0 / (big_a * big_a) + 1.0 / (big_b * big_b));
        let g = 0.5 * (1.0 / (big_b * big_b) - 1.0 / (big_a * big_a));
        OrbitSolution::from_dg(p, Oscillator::new(1.0), d, g, 0.0)
    };
    let mut curves = Vec::new();
    let circle = orbit_curve(p, proj, &from_a(big_b), &phis, "circle").expect("disk projection");
    curves.push(circle.with_stroke("green").with_width(2.0));
    for k in 1..=7 {
        let big_a = big_b + (1.0 - big_b) * k as f64 / 8.0;
        let c = orbit_curve(p, proj, &from_a(big_a), &phis, format!("ellipse {k}")).expect("disk projection");
        curves.push(c.with_stroke("blue"));
    }
    let eq = orbit_curve(p, proj, &from_a(1.0), &phis, "equidistant").expect("disk projection");
    curves.push(eq.with_stroke("red").with_width(2.0));
    for k in 1..=7 {
        // tanh ã decreasing from 7/8 to 1/8; A = 1/tanh ã
        let t_at = (8 - k) as f64 / 8.0;
        let c = orbit_curve(p, proj, &from_a(1.0 / t_at), &phis, format!("ultraellipse {k}"))
            .expect("disk projection");
        curves.push(c.with_stroke("blue"));
    }
    // ã = 0: T(r) |sin φ| = B, the geodesic at distance b from the centre
    let line_points = phis
        .iter()
        .map(|&phi| {
            let s = phi.sin().abs();
            let t = if s > 0.0 { big_b / s } else { f64::INFINITY };
            let at = if t < 1.0 {
                project(p, proj, PolarPoint::new(t.atanh(), phi)).expect("disk projection")
            } else {
                Projected::Clipped
            };
            CurvePoint { param: phi, at }
        })
        .collect();
    curves.push(Curve::new("straight line", line_points).with_stroke("magenta").with_width(2.0));
    let style = Style {
        view: Some(ViewBox {
            x_min: -1.05,
            x_max: 1.05,
            y_min: -1.05,
            y_max: 1.05,
        }),
        title: Some(format!("Orbits with tanh b = {tan_b} in the Poincare disk")),
        disk_boundary: true,
        legend: false,
        ..Style::default()
    };
    (curves, style)
}
