//! The nine Cayley-Klein planes, their metrics in three charts, chart
//! conversions and Killing vector fields.
//!
//! Conversions go through the ambient model: the point with polar
//! coordinates `(r, φ)` is
//!
//! ```text
//! (x₀, x₁, x₂) = (C₁(r), S₁(r) C₂(φ), S₁(r) S₂(φ))
//! ```
//!
//! in the quadric `x₀² + κ₁ x₁² + κ₁κ₂ x₂² = 1`, where subscripts `1`, `2`
//! and `12` denote the labels κ₁, κ₂ and κ₁κ₂. The parallel charts are
//!
//! ```text
//! (u, y): (C₁(u) C₁₂(y), S₁(u) C₁₂(y), S₁₂(y))
//! (x, v): (C₁(x) C₁₂(v), S₁(x),        C₁(x) S₁₂(v))
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cktrig::{Label, TrigError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Trig(#[from] TrigError),
    #[error("point outside the {chart} chart domain: {reason}")]
    OutOfChart { chart: &'static str, reason: String },
    #[error("polar angle undefined at the origin")]
    UndefinedAngle,
    #[error("polar chart is singular at r = {r}")]
    SingularChart { r: f64 },
    #[error("pole of the parallel chart at y = {y}")]
    Pole { y: f64 },
    #[error("unknown space name '{0}'; expected one of S2, E2, H2, ANH, G, NH, AdS, M, dS")]
    UnknownSpace(String),
}

/// The pair `(κ₁, κ₂)` selecting a Cayley-Klein plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CKParams {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl CKParams {
    pub fn new(kappa1: f64, kappa2: f64) -> Result<Self, GeometryError> {
        Label::new(kappa1)?;
        Label::new(kappa2)?;
        Ok(CKParams { kappa1, kappa2 })
    }

    /// The standard representative `(κ₁, κ₂) ∈ {1, 0, -1}²` of a space kind.
    pub fn standard(kind: SpaceKind) -> Self {
        let (k1, k2) = kind.signs();
        CKParams {
            kappa1: k1 as f64,
            kappa2: k2 as f64,
        }
    }

    /// Label κ₁ of `r`, `u` and `x`.
    #[inline]
    pub fn l1(&self) -> Label {
        Label::new(self.kappa1).expect("finite kappa1")
    }

    /// Label κ₂ of `φ`.
    #[inline]
    pub fn l2(&self) -> Label {
        Label::new(self.kappa2).expect("finite kappa2")
    }

    /// Label κ₁κ₂ of `y` and `v`.
    #[inline]
    pub fn l12(&self) -> Label {
        self.l1().times(self.l2())
    }

    pub fn kind(&self) -> SpaceKind {
        classify_space(*self)
    }

    pub fn is_riemannian(&self) -> bool {
        self.kappa2 > 0.0
    }
}

/// The nine spaces of the 3×3 sign table of `(κ₁, κ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    Sphere,
    Euclidean,
    Hyperbolic,
    /// Co-Euclidean, oscillating Newton-Hooke spacetime.
    OscillatingNH,
    Galilean,
    /// Co-Minkowskian, expanding Newton-Hooke spacetime.
    ExpandingNH,
    AntiDeSitter,
    Minkowskian,
    DeSitter,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 9] = [
        SpaceKind::Sphere,
        SpaceKind::Euclidean,
        SpaceKind::Hyperbolic,
        SpaceKind::OscillatingNH,
        SpaceKind::Galilean,
        SpaceKind::ExpandingNH,
        SpaceKind::AntiDeSitter,
        SpaceKind::Minkowskian,
        SpaceKind::DeSitter,
    ];

    /// Signs of `(κ₁, κ₂)`.
    pub fn signs(self) -> (i8, i8) {
        use SpaceKind::*;
        match self {
            Sphere => (1, 1),
            Euclidean => (0, 1),
            Hyperbolic => (-1, 1),
            OscillatingNH => (1, 0),
            Galilean => (0, 0),
            ExpandingNH => (-1, 0),
            AntiDeSitter => (1, -1),
            Minkowskian => (0, -1),
            DeSitter => (-1, -1),
        }
    }

    /// Short symbol, e.g. `H2` or `AdS`.
    pub fn symbol(self) -> &'static str {
        use SpaceKind::*;
        match self {
            Sphere => "S2",
            Euclidean => "E2",
            Hyperbolic => "H2",
            OscillatingNH => "ANH",
            Galilean => "G",
            ExpandingNH => "NH",
            AntiDeSitter => "AdS",
            Minkowskian => "M",
            DeSitter => "dS",
        }
    }

    pub fn name(self) -> &'static str {
        use SpaceKind::*;
        match self {
            Sphere => "Sphere",
            Euclidean => "Euclidean",
            Hyperbolic => "Hyperbolic",
            OscillatingNH => "Oscillating Newton-Hooke",
            Galilean => "Galilean",
            ExpandingNH => "Expanding Newton-Hooke",
            AntiDeSitter => "Anti-de Sitter",
            Minkowskian => "Minkowskian",
            DeSitter => "De Sitter",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpaceKind {
    type Err = GeometryError;

    /// Accepts the symbols (`S2`, `ANH`, `AdS1+1`, ...) case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t.strip_suffix("1+1").unwrap_or(t).to_ascii_lowercase();
        SpaceKind::ALL
            .into_iter()
            .find(|k| k.symbol().to_ascii_lowercase() == t)
            .ok_or_else(|| GeometryError::UnknownSpace(s.to_string()))
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Space kind from the signs of `(κ₁, κ₂)`.
pub fn classify_space(p: CKParams) -> SpaceKind {
    let key = (sign(p.kappa1), sign(p.kappa2));
    SpaceKind::ALL
        .into_iter()
        .find(|k| k.signs() == key)
        .expect("every sign pair is covered")
}

/// Coordinate chart used for phase states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Polar,
    ParallelUY,
}

/// Geodesic polar coordinates. `phi` is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
}

impl PolarPoint {
    pub fn new(r: f64, phi: f64) -> Self {
        PolarPoint { r, phi }
    }

    /// Equality up to `tol`, identifying angles modulo `2π/√κ₂` when κ₂ > 0.
    pub fn approx_eq(&self, other: &PolarPoint, p: CKParams, tol: f64) -> bool {
        if (self.r - other.r).abs() > tol {
            return false;
        }
        if self.r.abs() <= tol {
            return true;
        }
        let mut d = self.phi - other.phi;
        if p.kappa2 > 0.0 {
            let period = 2.0 * std::f64::consts::PI / p.kappa2.sqrt();
            d -= (d / period).round() * period;
        }
        d.abs() <= tol
    }
}

/// Geodesic parallel coordinates of the first kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelPointUY {
    pub u: f64,
    pub y: f64,
}

impl ParallelPointUY {
    pub fn new(u: f64, y: f64) -> Self {
        ParallelPointUY { u, y }
    }
}

/// Geodesic parallel coordinates of the second kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelPointXV {
    pub x: f64,
    pub v: f64,
}

impl ParallelPointXV {
    pub fn new(x: f64, v: f64) -> Self {
        ParallelPointXV { x, v }
    }
}

/// Diagonal metric components `(g₁₁, g₂₂)`.
pub type DiagMetric = (f64, f64);

pub fn metric_polar(p: CKParams, at: PolarPoint) -> DiagMetric {
    let s = p.l1().sin(at.r);
    (1.0, p.kappa2 * s * s)
}

pub fn metric_parallel_uy(p: CKParams, at: ParallelPointUY) -> DiagMetric {
    let c = p.l12().cos(at.y);
    (c * c, p.kappa2)
}

pub fn metric_parallel_xv(p: CKParams, at: ParallelPointXV) -> DiagMetric {
    let c = p.l1().cos(at.x);
    (1.0, p.kappa2 * c * c)
}

/// A point of the ambient quadric.
#[derive(Debug, Clone, Copy)]
struct Ambient {
    x0: f64,
    x1: f64,
    x2: f64,
}

impl Ambient {
    fn from_polar(p: CKParams, pt: PolarPoint) -> Self {
        let (l1, l2) = (p.l1(), p.l2());
        let s = l1.sin(pt.r);
        Ambient {
            x0: l1.cos(pt.r),
            x1: s * l2.cos(pt.phi),
            x2: s * l2.sin(pt.phi),
        }
    }

    fn from_uy(p: CKParams, pt: ParallelPointUY) -> Self {
        let (l1, l12) = (p.l1(), p.l12());
        let c = l12.cos(pt.y);
        Ambient {
            x0: l1.cos(pt.u) * c,
            x1: l1.sin(pt.u) * c,
            x2: l12.sin(pt.y),
        }
    }

    fn from_xv(p: CKParams, pt: ParallelPointXV) -> Self {
        let (l1, l12) = (p.l1(), p.l12());
        let c = l1.cos(pt.x);
        Ambient {
            x0: c * l12.cos(pt.v),
            x1: l1.sin(pt.x),
            x2: c * l12.sin(pt.v),
        }
    }

    fn check_hemisphere(&self, p: CKParams, chart: &'static str) -> Result<(), GeometryError> {
        if p.kappa1 > 0.0 && self.x0 <= 0.0 {
            return Err(GeometryError::OutOfChart {
                chart,
                reason: format!(
                    "distance to the origin must be below π/(2√κ₁) = {}",
                    p.l1().quarter_period().unwrap_or(f64::INFINITY)
                ),
            });
        }
        Ok(())
    }

    fn to_polar(self, p: CKParams) -> Result<PolarPoint, GeometryError> {
        let (l1, l2) = (p.l1(), p.l2());
        if self.x1 == 0.0 && self.x2 == 0.0 {
            return Err(GeometryError::UndefinedAngle);
        }
        if p.kappa2 > 0.0 {
            let rho = (self.x1 * self.x1 + p.kappa2 * self.x2 * self.x2).sqrt();
            let r = l1.atan2(rho, self.x0);
            let phi = l2.atan2(self.x2, self.x1);
            Ok(PolarPoint { r, phi })
        } else {
            // Only the region x₁² + κ₂ x₂² > 0 is covered; r takes the sign of x₁
            // so that C₂(φ) > 0.
            let q = self.x1 * self.x1 + p.kappa2 * self.x2 * self.x2;
            if self.x1 == 0.0 || q <= 0.0 {
                return Err(GeometryError::OutOfChart {
                    chart: "polar",
                    reason: "point is not in the time-like region of the origin".into(),
                });
            }
            let rho = q.sqrt().copysign(self.x1);
            let r = l1.atan2(rho, self.x0);
            let phi = l2.atan(self.x2 / self.x1);
            if !r.is_finite() || !phi.is_finite() {
                return Err(GeometryError::OutOfChart {
                    chart: "polar",
                    reason: "no real polar coordinates".into(),
                });
            }
            Ok(PolarPoint { r, phi })
        }
    }

    fn to_uy(self, p: CKParams) -> Result<ParallelPointUY, GeometryError> {
        let y = p.l12().asin(self.x2);
        let u = p.l1().atan2(self.x1, self.x0);
        if !u.is_finite() || !y.is_finite() || p.l12().cos(y) <= 0.0 {
            return Err(GeometryError::OutOfChart {
                chart: "parallel (u, y)",
                reason: "no real parallel coordinates".into(),
            });
        }
        Ok(ParallelPointUY { u, y })
    }

    fn to_xv(self, p: CKParams) -> Result<ParallelPointXV, GeometryError> {
        let x = p.l1().asin(self.x1);
        let v = p.l12().atan2(self.x2, self.x0);
        if !x.is_finite() || !v.is_finite() || p.l1().cos(x) <= 0.0 {
            return Err(GeometryError::OutOfChart {
                chart: "parallel (x, v)",
                reason: "no real parallel coordinates".into(),
            });
        }
        Ok(ParallelPointXV { x, v })
    }
}

fn check_finite2(a: f64, b: f64) -> Result<(), GeometryError> {
    Label::new(a)?;
    Label::new(b)?;
    Ok(())
}

pub fn polar_to_parallel_uy(p: CKParams, pt: PolarPoint) -> Result<ParallelPointUY, GeometryError> {
    check_finite2(pt.r, pt.phi)?;
    let a = Ambient::from_polar(p, pt);
    a.check_hemisphere(p, "parallel (u, y)")?;
    a.to_uy(p)
}

pub fn parallel_uy_to_polar(p: CKParams, pt: ParallelPointUY) -> Result<PolarPoint, GeometryError> {
    check_finite2(pt.u, pt.y)?;
    let a = Ambient::from_uy(p, pt);
    a.check_hemisphere(p, "polar")?;
    a.to_polar(p)
}

pub fn polar_to_parallel_xv(p: CKParams, pt: PolarPoint) -> Result<ParallelPointXV, GeometryError> {
    check_finite2(pt.r, pt.phi)?;
    let a = Ambient::from_polar(p, pt);
    a.check_hemisphere(p, "parallel (x, v)")?;
    a.to_xv(p)
}

pub fn parallel_xv_to_polar(p: CKParams, pt: ParallelPointXV) -> Result<PolarPoint, GeometryError> {
    check_finite2(pt.x, pt.v)?;
    let a = Ambient::from_xv(p, pt);
    a.check_hemisphere(p, "polar")?;
    a.to_polar(p)
}

pub fn parallel_uy_to_xv(p: CKParams, pt: ParallelPointUY) -> Result<ParallelPointXV, GeometryError> {
    check_finite2(pt.u, pt.y)?;
    let a = Ambient::from_uy(p, pt);
    a.check_hemisphere(p, "parallel (x, v)")?;
    a.to_xv(p)
}

pub fn parallel_xv_to_uy(p: CKParams, pt: ParallelPointXV) -> Result<ParallelPointUY, GeometryError> {
    check_finite2(pt.x, pt.v)?;
    let a = Ambient::from_xv(p, pt);
    a.check_hemisphere(p, "parallel (u, y)")?;
    a.to_uy(p)
}

/// Beltrami (gnomonic) coordinates `(T₁(r) C₂(φ), T₁(r) S₂(φ))`.
///
/// Geodesics through any point map to straight lines. Infinite on the
/// equator of the sphere.
pub fn beltrami_polar(p: CKParams, pt: PolarPoint) -> (f64, f64) {
    let a = Ambient::from_polar(p, pt);
    (a.x1 / a.x0, a.x2 / a.x0)
}

/// Beltrami coordinates from `(u, y)`: `(T₁(u), T₁₂(y)/C₁(u))`.
pub fn beltrami_uy(p: CKParams, pt: ParallelPointUY) -> (f64, f64) {
    let a = Ambient::from_uy(p, pt);
    (a.x1 / a.x0, a.x2 / a.x0)
}

/// A tangent vector in chart components.
pub type Vector2 = [f64; 2];

/// Killing vector fields generating the two translations and the rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillingFields {
    pub p1: Vector2,
    pub p2: Vector2,
    pub j: Vector2,
}

/// Killing fields in `(∂r, ∂φ)` components.
pub fn killing_fields_polar(p: CKParams, at: PolarPoint) -> Result<KillingFields, GeometryError> {
    let (l1, l2) = (p.l1(), p.l2());
    let s = l1.sin(at.r);
    if s.abs() < 1e-300 || !s.is_finite() {
        return Err(GeometryError::SingularChart { r: at.r });
    }
    let cot = l1.cos(at.r) / s;
    let (c2, s2) = (l2.cos(at.phi), l2.sin(at.phi));
    Ok(KillingFields {
        p1: [c2, -s2 * cot],
        p2: [p.kappa2 * s2, c2 * cot],
        j: [0.0, 1.0],
    })
}

/// Killing fields in `(∂u, ∂y)` components.
pub fn killing_fields_parallel(
    p: CKParams,
    at: ParallelPointUY,
) -> Result<KillingFields, GeometryError> {
    let (l1, l12) = (p.l1(), p.l12());
    let c12 = l12.cos(at.y);
    if c12.abs() < 1e-15 {
        return Err(GeometryError::Pole { y: at.y });
    }
    let t12 = l12.sin(at.y) / c12;
    let (c1, s1) = (l1.cos(at.u), l1.sin(at.u));
    Ok(KillingFields {
        p1: [1.0, 0.0],
        p2: [p.kappa1 * p.kappa2 * s1 * t12, c1],
        j: [-p.kappa2 * c1 * t12, s1],
    })
}
