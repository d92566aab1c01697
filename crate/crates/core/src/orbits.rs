//! Closed-form orbits, the effective potential, regime classification,
//! Binet residuals and the period law.
//!
//! With `E_P = E - ½κ₁κ₂𝒥²` the orbit is
//!
//! ```text
//! 1/T₁(r)² = D - G C₂(2(φ - φ₀)) = C₂(φ-φ₀)²/A² + S₂(φ-φ₀)²/B²
//! D = E_P/(κ₂𝒥²)    G = √(E_P² - κ₂ω₀²𝒥²)/(κ₂𝒥²)
//! 1/A² = D - G      1/B² = κ₂(D + G)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{energy, noether_momenta, DynamicsError, Oscillator, PhaseState};
use crate::geometry::{CKParams, Chart, GeometryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("orbit solution is degenerate for J = 0 or kappa2 = 0")]
    Degenerate,
    #[error("no real orbit: energy {e} is below the minimum {e_min} for this angular momentum")]
    NoRealOrbit { e: f64, e_min: f64 },
    #[error("angle {phi} lies outside the branch of the orbit (1/T^2 = {rhs})")]
    OutsideBranch { phi: f64, rhs: f64 },
    #[error("effective potential has a pole at r = {r}")]
    Pole { r: f64 },
    #[error("classification requires kappa2 != 0")]
    UnsupportedSpace,
    #[error("classification requires omega0^2 > 0 (got {0})")]
    UnsupportedOscillator(f64),
    #[error("open orbit: 1 + 2 kappa1 E / omega0^2 = {radicand} is not positive")]
    OpenOrbit { radicand: f64 },
    #[error("period law needs omega0^2 > 0 and kappa2 > 0")]
    PeriodUnsupported,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Closed-form orbit constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSolution {
    pub d: f64,
    pub g: f64,
    pub phi0: f64,
    pub a_sq: f64,
    pub b_sq: f64,
    pub e_p: f64,
    pub e1: f64,
    pub e2: f64,
    pub energy: f64,
    pub j: f64,
}

impl OrbitSolution {
    /// Solution from `D`, `G` directly (energy and momentum follow from them).
    pub fn from_dg(p: CKParams, osc: Oscillator, d: f64, g: f64, phi0: f64) -> Self {
        let k2 = p.kappa2;
        let a_sq = 1.0 / (d - g);
        let b_sq = 1.0 / (k2 * (d + g));
        // D² - G² = ω₀²/(κ₂𝒥²)
        let j_sq = osc.omega0_sq / (k2 * (d * d - g * g));
        let j = j_sq.sqrt();
        let e_p = d * k2 * j_sq;
        OrbitSolution {
            d,
            g,
            phi0,
            a_sq,
            b_sq,
            e_p,
            e1: 0.5 * osc.omega0_sq * a_sq,
            e2: 0.5 * osc.omega0_sq * b_sq,
            energy: e_p + 0.5 * p.kappa1 * k2 * j_sq,
            j,
        }
    }

    /// `E₁ + κ₂E₂ + ½κ₁κ₂𝒥²`, which reproduces the energy.
    pub fn energy_from_partials(&self, p: CKParams) -> f64 {
        self.e1 + p.kappa2 * self.e2 + 0.5 * p.kappa1 * p.kappa2 * self.j * self.j
    }

    /// `1/T₁(r)²` at angle `phi`.
    pub fn inverse_tan_sq(&self, p: CKParams, phi: f64) -> f64 {
        self.d - self.g * p.l2().cos(2.0 * (phi - self.phi0))
    }
}

/// Distance along an orbit at a given angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Radius {
    Finite(f64),
    /// The hyperbolic ultraellipse leaves the space at this angle.
    AtInfinity,
}

impl Radius {
    pub fn finite(self) -> Option<f64> {
        match self {
            Radius::Finite(r) => Some(r),
            Radius::AtInfinity => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitTag {
    Circle,
    Ellipse,
    Equidistant,
    Ultraellipse,
    StraightLine,
    /// Radial escape with `𝒥 = 0` on the hyperbolic plane (`E ≥ E∞`).
    UnboundedLowJ,
    UnboundedHighJ,
    Forbidden,
    LorentzianUnclassified,
}

/// Position of `𝒥` relative to `𝒥∞` on the hyperbolic plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentumRegime {
    BelowJInf,
    AtJInf,
    AboveJInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitClass {
    pub tag: OrbitTag,
    /// Minimum energy `E(𝒥)` for the given angular momentum.
    pub e_min: f64,
    pub e_inf: Option<f64>,
    pub j_inf: Option<f64>,
    pub r_m: Option<f64>,
    /// `(r_min, r_max)`; `r_max` is infinite for unbounded orbits.
    pub turning: Option<(f64, f64)>,
    pub momentum_regime: Option<MomentumRegime>,
}

impl OrbitClass {
    pub fn is_bounded(&self) -> bool {
        matches!(
            self.tag,
            OrbitTag::Circle | OrbitTag::Ellipse | OrbitTag::StraightLine
        )
    }
}

const THRESHOLD_RTOL: f64 = 1e-12;

/// `½ω₀²T₁(r)² + κ₂𝒥²/(2S₁(r)²)`.
pub fn effective_potential(
    p: CKParams,
    osc: Oscillator,
    j: f64,
    r: f64,
) -> Result<f64, OrbitError> {
    let (c, s) = (p.l1().cos(r), p.l1().sin(r));
    if c.abs() < 1e-15 || s == 0.0 {
        return Err(OrbitError::Pole { r });
    }
    let t = s / c;
    Ok(0.5 * osc.omega0_sq * t * t + p.kappa2 * j * j / (2.0 * s * s))
}

/// The same potential as `½ω₀²T² + κ₂𝒥²/(2T²) + ½κ₁κ₂𝒥²`.
pub fn effective_potential_tan_form(
    p: CKParams,
    osc: Oscillator,
    j: f64,
    r: f64,
) -> Result<f64, OrbitError> {
    let (c, s) = (p.l1().cos(r), p.l1().sin(r));
    if c.abs() < 1e-15 || s == 0.0 {
        return Err(OrbitError::Pole { r });
    }
    let t = s / c;
    let k12 = p.kappa1 * p.kappa2;
    Ok(0.5 * osc.omega0_sq * t * t + p.kappa2 * j * j / (2.0 * t * t) + 0.5 * k12 * j * j)
}

/// `E(𝒥) = √κ₂ ω₀ |𝒥| + ½κ₁κ₂𝒥²` (κ₂ > 0, ω₀² > 0).
pub fn min_energy(p: CKParams, osc: Oscillator, j: f64) -> f64 {
    p.kappa2.sqrt() * osc.omega0() * j.abs() + 0.5 * p.kappa1 * p.kappa2 * j * j
}

/// `E∞ = ω₀²/(-2κ₁)` for κ₁ < 0.
pub fn e_inf(p: CKParams, osc: Oscillator) -> Option<f64> {
    (p.kappa1 < 0.0).then(|| osc.omega0_sq / (-2.0 * p.kappa1))
}

/// `𝒥∞ = ω₀/(√κ₂(-κ₁))` for κ₁ < 0, κ₂ > 0.
pub fn j_inf(p: CKParams, osc: Oscillator) -> Option<f64> {
    (p.kappa1 < 0.0 && p.kappa2 > 0.0).then(|| osc.omega0() / (p.kappa2.sqrt() * -p.kappa1))
}

/// Radius of the circular orbit, `T₁(r_m)² = √κ₂|𝒥|/ω₀`, if the minimum exists.
pub fn circular_radius(p: CKParams, osc: Oscillator, j: f64) -> Option<f64> {
    let t_sq = p.kappa2.sqrt() * j.abs() / osc.omega0();
    let t = t_sq.sqrt();
    if !(t < p.l1().tan_bound()) {
        return None;
    }
    Some(p.l1().atan(t))
}

/// Angular momentum of the circular orbit with energy `e`.
pub fn circular_momentum(p: CKParams, osc: Oscillator, e: f64) -> f64 {
    let s = p.kappa2.sqrt() * osc.omega0();
    let disc = p.kappa2 * osc.omega0_sq + 2.0 * p.kappa1 * p.kappa2 * e;
    2.0 * e / (s + disc.max(0.0).sqrt())
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= THRESHOLD_RTOL * a.abs().max(b.abs()).max(1.0)
}

pub fn classify(p: CKParams, osc: Oscillator, e: f64, j: f64) -> Result<OrbitClass, OrbitError> {
    if p.kappa2 == 0.0 {
        return Err(OrbitError::UnsupportedSpace);
    }
    if p.kappa2 < 0.0 {
        return Ok(OrbitClass {
            tag: OrbitTag::LorentzianUnclassified,
            e_min: f64::NAN,
            e_inf: None,
            j_inf: None,
            r_m: None,
            turning: None,
            momentum_regime: None,
        });
    }
    if !(osc.omega0_sq > 0.0) {
        return Err(OrbitError::UnsupportedOscillator(osc.omega0_sq));
    }
    let e_min = min_energy(p, osc, j);
    let (e_inf, j_inf) = (e_inf(p, osc), j_inf(p, osc));
    let regime = j_inf.map(|ji| {
        if near(j.abs(), ji) {
            MomentumRegime::AtJInf
        } else if j.abs() < ji {
            MomentumRegime::BelowJInf
        } else {
            MomentumRegime::AboveJInf
        }
    });
    let mut class = OrbitClass {
        tag: OrbitTag::Forbidden,
        e_min,
        e_inf,
        j_inf,
        r_m: circular_radius(p, osc, j),
        turning: None,
        momentum_regime: regime,
    };
    let l1 = p.l1();
    let below_inf = |x: f64| e_inf.is_none_or(|ei| x < ei && !near(x, ei));

    if j == 0.0 {
        if near(e, 0.0) {
            class.tag = OrbitTag::Circle;
            class.r_m = Some(0.0);
            class.turning = Some((0.0, 0.0));
        } else if e < 0.0 {
            class.tag = OrbitTag::Forbidden;
        } else if below_inf(e) {
            class.tag = OrbitTag::StraightLine;
            let t = (2.0 * e / osc.omega0_sq).sqrt();
            class.turning = Some((0.0, l1.atan(t)));
        } else {
            class.tag = OrbitTag::UnboundedLowJ;
            class.turning = Some((0.0, f64::INFINITY));
        }
        return Ok(class);
    }

    let above_j_inf = matches!(
        regime,
        Some(MomentumRegime::AtJInf | MomentumRegime::AboveJInf)
    );
    if above_j_inf {
        let ei = e_inf.expect("regime implies kappa1 < 0");
        class.tag = if e > ei && !near(e, ei) {
            OrbitTag::Ultraellipse
        } else {
            OrbitTag::Forbidden
        };
    } else if near(e, e_min) {
        class.tag = OrbitTag::Circle;
    } else if e < e_min {
        class.tag = OrbitTag::Forbidden;
    } else if below_inf(e) {
        class.tag = OrbitTag::Ellipse;
    } else if e_inf.is_some_and(|ei| near(e, ei)) {
        class.tag = OrbitTag::Equidistant;
    } else {
        class.tag = OrbitTag::Ultraellipse;
    }

    match class.tag {
        OrbitTag::Circle => {
            let r = class.r_m.unwrap_or(f64::NAN);
            class.turning = Some((r, r));
        }
        OrbitTag::Ellipse | OrbitTag::Equidistant | OrbitTag::Ultraellipse => {
            let sol = orbit_from_ej(p, osc, e, j, 0.0)?;
            let r_min = l1.atan((p.kappa2 * sol.b_sq).sqrt());
            let r_max = if class.tag == OrbitTag::Ellipse {
                l1.atan(sol.a_sq.sqrt())
            } else {
                f64::INFINITY
            };
            class.turning = Some((r_min, r_max));
        }
        _ => {}
    }
    Ok(class)
}

pub fn orbit_from_ej(
    p: CKParams,
    osc: Oscillator,
    e: f64,
    j: f64,
    phi0: f64,
) -> Result<OrbitSolution, OrbitError> {
    let k2 = p.kappa2;
    if j == 0.0 || k2 == 0.0 {
        return Err(OrbitError::Degenerate);
    }
    let w2 = osc.omega0_sq;
    let j_sq = j * j;
    let e_p = e - 0.5 * p.kappa1 * k2 * j_sq;
    let mut disc = e_p * e_p - k2 * w2 * j_sq;
    if disc < 0.0 {
        if disc > -1e-12 * (e_p * e_p).max(k2.abs() * w2.abs() * j_sq) {
            disc = 0.0;
        } else {
            let e_min = if k2 > 0.0 && w2 > 0.0 {
                min_energy(p, osc, j)
            } else {
                f64::NAN
            };
            return Err(OrbitError::NoRealOrbit { e, e_min });
        }
    }
    let d = e_p / (k2 * j_sq);
    let g = disc.sqrt() / (k2 * j_sq);
    // D² - G² = ω₀²/(κ₂𝒥²); use whichever of D ± G does not cancel
    let (a_sq, b_sq) = if w2 == 0.0 {
        (1.0 / (d - g), 1.0 / (k2 * (d + g)))
    } else if (d + g).abs() >= (d - g).abs() {
        ((d + g) * k2 * j_sq / w2, 1.0 / (k2 * (d + g)))
    } else {
        (1.0 / (d - g), (d - g) * j_sq / w2)
    };
    Ok(OrbitSolution {
        d,
        g,
        phi0,
        a_sq,
        b_sq,
        e_p,
        e1: 0.5 * w2 * a_sq,
        e2: 0.5 * w2 * b_sq,
        energy: e,
        j,
    })
}

/// Orbit through a given phase state, with `φ₀` at the point where `T₁(r) = A`.
pub fn orbit_from_state(
    p: CKParams,
    osc: Oscillator,
    s: &PhaseState,
) -> Result<OrbitSolution, OrbitError> {
    let e = energy(p, osc, s)?;
    let j = noether_momenta(p, s).j;
    let mut sol = orbit_from_ej(p, osc, e, j, 0.0)?;
    if sol.g == 0.0 {
        return Ok(sol);
    }
    let s = s.to_chart(p, Chart::Polar)?;
    let (r, phi, vr, vphi) = (s.q1, s.q2, s.v1, s.v2);
    let (c, sn) = (p.l1().cos(r), p.l1().sin(r));
    let t = sn / c;
    let w = 1.0 / (t * t);
    let dw_dphi = -2.0 * vr / (c * c * t * t * t * vphi);
    let cos2 = (sol.d - w) / sol.g;
    let sin2 = dw_dphi / (2.0 * sol.g * p.kappa2);
    let two_psi = p.l2().atan2(sin2, cos2);
    sol.phi0 = phi - 0.5 * two_psi;
    Ok(sol)
}

/// Distance `r(φ)` on a closed-form orbit.
pub fn orbit_radius(p: CKParams, sol: &OrbitSolution, phi: f64) -> Result<Radius, OrbitError> {
    let rhs = sol.inverse_tan_sq(p, phi);
    if !(rhs > 0.0) {
        return Err(OrbitError::OutsideBranch { phi, rhs });
    }
    let t = 1.0 / rhs.sqrt();
    let l1 = p.l1();
    if t >= l1.tan_bound() {
        return Ok(Radius::AtInfinity);
    }
    Ok(Radius::Finite(l1.atan(t)))
}

/// Phase state in polar coordinates at angle `phi` of a closed-form orbit.
pub fn state_on_orbit(
    p: CKParams,
    sol: &OrbitSolution,
    phi: f64,
) -> Result<PhaseState, OrbitError> {
    let r = orbit_radius(p, sol, phi)?
        .finite()
        .ok_or(OrbitError::OutsideBranch { phi, rhs: 0.0 })?;
    let (c, s) = (p.l1().cos(r), p.l1().sin(r));
    let t = s / c;
    let vphi = sol.j / (s * s);
    let psi2 = 2.0 * (phi - sol.phi0);
    let dw_dphi = 2.0 * sol.g * p.kappa2 * p.l2().sin(psi2);
    let dt_dphi = -0.5 * t * t * t * dw_dphi;
    let vr = c * c * dt_dphi * vphi;
    Ok(PhaseState::polar(r, phi, vr, vphi))
}

/// `|υ'' + κ₂υ - ω₀²/(𝒥²υ³)|` with `υ = 1/T₁(r(φ))`, by central differences.
pub fn binet_residual<F>(
    p: CKParams,
    osc: Oscillator,
    j: f64,
    radius_fn: F,
    phi: f64,
) -> Result<f64, OrbitError>
where
    F: Fn(f64) -> Result<f64, OrbitError>,
{
    let h = 1e-4;
    let l1 = p.l1();
    let ups = |x: f64| -> Result<f64, OrbitError> { Ok(1.0 / l1.tan(radius_fn(x)?)) };
    let (um, u0, up) = (ups(phi - h)?, ups(phi)?, ups(phi + h)?);
    let second = (up - 2.0 * u0 + um) / (h * h);
    Ok((second + p.kappa2 * u0 - osc.omega0_sq / (j * j * u0.powi(3))).abs())
}

/// `F₂₂X² - 2F₁₂XY + F₁₁Y² - 𝒥²` at Beltrami coordinates `(X, Y)`.
pub fn fradkin_orbit_residual(f: &crate::dynamics::FradkinTensor, x: f64, y: f64) -> f64 {
    f.f22 * x * x - 2.0 * f.f12 * x * y + f.f11 * y * y - f.j_sq
}

/// `T = (2π/ω₀)/√(1 + 2κ₁E/ω₀²)`.
pub fn period(p: CKParams, osc: Oscillator, e: f64) -> Result<f64, OrbitError> {
    if !(osc.omega0_sq > 0.0) || !(p.kappa2 > 0.0) {
        return Err(OrbitError::PeriodUnsupported);
    }
    let radicand = 1.0 + 2.0 * p.kappa1 * e / osc.omega0_sq;
    if !(radicand > 0.0) {
        return Err(OrbitError::OpenOrbit { radicand });
    }
    Ok(2.0 * std::f64::consts::PI / osc.omega0() / radicand.sqrt())
}
