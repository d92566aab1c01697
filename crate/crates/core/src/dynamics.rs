//! The curved harmonic oscillator `V = ½ ω₀² T₁(r)²`.
//!
//! Equations of motion in the polar and `(u, y)` charts, the Noether momenta
//! of the three Killing fields, the energy and the Fradkin tensor of
//! quadratic constants of motion.
//!
//! Momenta are the κ₂-rescaled ones (`𝒫₁, 𝒫₂, 𝒥`), which stay finite in
//! the degenerate κ₂ = 0 spaces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    beltrami_polar, beltrami_uy, parallel_uy_to_polar, polar_to_parallel_uy, CKParams, Chart,
    GeometryError, ParallelPointUY, PolarPoint,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("potential wall at distance {wall} from the centre")]
    InfiniteWall { wall: f64 },
    #[error("polar chart is singular at r = {r} with nonzero angular velocity")]
    SingularChart { r: f64 },
    #[error("pole of the parallel chart at y = {y}")]
    Pole { y: f64 },
}

/// Oscillator strength. `omega0_sq` may be negative (inverted oscillator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    pub omega0_sq: f64,
}

impl Oscillator {
    pub fn new(omega0_sq: f64) -> Self {
        Oscillator { omega0_sq }
    }

    pub fn from_omega0(omega0: f64) -> Self {
        Oscillator {
            omega0_sq: omega0 * omega0,
        }
    }

    /// `ω₀ = √(ω₀²)`, NaN for an inverted oscillator.
    pub fn omega0(&self) -> f64 {
        self.omega0_sq.sqrt()
    }
}

/// Position and velocity in a chart: `(r, φ, ṙ, φ̇)` or `(u, y, u̇, ẏ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub chart: Chart,
    pub q1: f64,
    pub q2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl PhaseState {
    pub fn polar(r: f64, phi: f64, v_r: f64, v_phi: f64) -> Self {
        PhaseState {
            chart: Chart::Polar,
            q1: r,
            q2: phi,
            v1: v_r,
            v2: v_phi,
        }
    }

    pub fn parallel(u: f64, y: f64, v_u: f64, v_y: f64) -> Self {
        PhaseState {
            chart: Chart::ParallelUY,
            q1: u,
            q2: y,
            v1: v_u,
            v2: v_y,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.q1, self.q2, self.v1, self.v2]
    }

    pub fn with_array(&self, a: [f64; 4]) -> Self {
        PhaseState {
            chart: self.chart,
            q1: a[0],
            q2: a[1],
            v1: a[2],
            v2: a[3],
        }
    }

    /// Position as a polar point (converting from `(u, y)` if needed).
    pub fn polar_point(&self, p: CKParams) -> Result<PolarPoint, GeometryError> {
        match self.chart {
            Chart::Polar => Ok(PolarPoint::new(self.q1, self.q2)),
            Chart::ParallelUY => parallel_uy_to_polar(p, ParallelPointUY::new(self.q1, self.q2)),
        }
    }

    /// Beltrami coordinates `(X, Y)` of the position.
    pub fn beltrami(&self, p: CKParams) -> (f64, f64) {
        match self.chart {
            Chart::Polar => beltrami_polar(p, PolarPoint::new(self.q1, self.q2)),
            Chart::ParallelUY => beltrami_uy(p, ParallelPointUY::new(self.q1, self.q2)),
        }
    }

    /// The same state expressed in another chart.
    pub fn to_chart(&self, p: CKParams, chart: Chart) -> Result<PhaseState, GeometryError> {
        if chart == self.chart {
            return Ok(*self);
        }
        let (l1, l2, l12) = (p.l1(), p.l2(), p.l12());
        let (k1, k2) = (p.kappa1, p.kappa2);
        match chart {
            Chart::ParallelUY => {
                let (r, phi, vr, vphi) = (self.q1, self.q2, self.v1, self.v2);
                let q = polar_to_parallel_uy(p, PolarPoint::new(r, phi))?;
                let (c, s) = (l1.cos(r), l1.sin(r));
                let (c2, s2) = (l2.cos(phi), l2.sin(phi));
                let dx0 = -k1 * s * vr;
                let dx1 = c * c2 * vr - k2 * s * s2 * vphi;
                let dx2 = c * s2 * vr + s * c2 * vphi;
                let c12 = l12.cos(q.y);
                let vu = (l1.cos(q.u) * dx1 - l1.sin(q.u) * dx0) / c12;
                let vy = dx2 / c12;
                Ok(PhaseState::parallel(q.u, q.y, vu, vy))
            }
            Chart::Polar => {
                let (u, y, vu, vy) = (self.q1, self.q2, self.v1, self.v2);
                let q = parallel_uy_to_polar(p, ParallelPointUY::new(u, y))?;
                let (c1, s1) = (l1.cos(u), l1.sin(u));
                let (c12, s12) = (l12.cos(y), l12.sin(y));
                let dx0 = -k1 * s1 * c12 * vu - k1 * k2 * c1 * s12 * vy;
                let dx1 = c1 * c12 * vu - k1 * k2 * s1 * s12 * vy;
                let dx2 = c12 * vy;
                let (c, s) = (l1.cos(q.r), l1.sin(q.r));
                let (c2, s2) = (l2.cos(q.phi), l2.sin(q.phi));
                let vr = c * (c2 * dx1 + k2 * s2 * dx2) - s * dx0;
                let vphi = (c2 * dx2 - s2 * dx1) / s;
                Ok(PhaseState::polar(q.r, q.phi, vr, vphi))
            }
        }
    }
}

/// CK Noether momenta `𝒫₁`, `𝒫₂`, `𝒥`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoetherMomenta {
    pub p1: f64,
    pub p2: f64,
    pub j: f64,
}

impl NoetherMomenta {
    /// Unscaled `P₂ = κ₂ 𝒫₂`, zero in the degenerate spaces.
    pub fn p2_unscaled(&self, p: CKParams) -> f64 {
        p.kappa2 * self.p2
    }

    /// Unscaled `J = κ₂ 𝒥`.
    pub fn j_unscaled(&self, p: CKParams) -> f64 {
        p.kappa2 * self.j
    }
}

/// Fradkin tensor components and `𝒥²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FradkinTensor {
    pub f11: f64,
    pub f12: f64,
    pub f22: f64,
    pub j_sq: f64,
}

impl FradkinTensor {
    pub fn det(&self) -> f64 {
        self.f11 * self.f22 - self.f12 * self.f12
    }

    /// `det F - ω₀² 𝒥²`, zero on every state.
    pub fn det_residual(&self, osc: Oscillator) -> f64 {
        self.det() - osc.omega0_sq * self.j_sq
    }
}

fn tan_checked(l: crate::cktrig::Label, x: f64) -> Result<f64, DynamicsError> {
    let c = l.cos(x);
    if c.abs() < 1e-15 {
        let wall = l.quarter_period().unwrap_or(f64::INFINITY);
        return Err(DynamicsError::InfiniteWall { wall });
    }
    Ok(l.sin(x) / c)
}

/// `½ ω₀² T₁(r)²`.
pub fn ho_potential(p: CKParams, osc: Oscillator, at: PolarPoint) -> Result<f64, DynamicsError> {
    let t = tan_checked(p.l1(), at.r)?;
    Ok(0.5 * osc.omega0_sq * t * t)
}

/// `½ ω₀² (T₁(u)²/C₁₂(y)² + κ₂ T₁₂(y)²)`.
pub fn ho_potential_parallel(
    p: CKParams,
    osc: Oscillator,
    at: ParallelPointUY,
) -> Result<f64, DynamicsError> {
    let tu = tan_checked(p.l1(), at.u)?;
    let c12 = p.l12().cos(at.y);
    if c12.abs() < 1e-15 {
        return Err(DynamicsError::Pole { y: at.y });
    }
    let ty = p.l12().sin(at.y) / c12;
    Ok(0.5 * osc.omega0_sq * (tu * tu / (c12 * c12) + p.kappa2 * ty * ty))
}

/// Potential at the position of a state, in its own chart.
pub fn potential(p: CKParams, osc: Oscillator, s: &PhaseState) -> Result<f64, DynamicsError> {
    match s.chart {
        Chart::Polar => ho_potential(p, osc, PolarPoint::new(s.q1, s.q2)),
        Chart::ParallelUY => ho_potential_parallel(p, osc, ParallelPointUY::new(s.q1, s.q2)),
    }
}

/// Second time derivatives of the chart coordinates.
pub fn accelerations(
    p: CKParams,
    osc: Oscillator,
    s: &PhaseState,
) -> Result<(f64, f64), DynamicsError> {
    let w2 = osc.omega0_sq;
    let (k1, k2) = (p.kappa1, p.kappa2);
    match s.chart {
        Chart::Polar => {
            let (r, vr, vphi) = (s.q1, s.v1, s.v2);
            let l1 = p.l1();
            let (c, sn) = (l1.cos(r), l1.sin(r));
            if c.abs() < 1e-15 {
                return Err(DynamicsError::InfiniteWall {
                    wall: l1.quarter_period().unwrap_or(f64::INFINITY),
                });
            }
            let dv = w2 * sn / (c * c * c);
            let ar = k2 * sn * c * vphi * vphi - dv;
            let aphi = if vphi == 0.0 {
                0.0
            } else {
                if sn.abs() < 1e-300 {
                    return Err(DynamicsError::SingularChart { r });
                }
                -2.0 * (c / sn) * vr * vphi
            };
            Ok((ar, aphi))
        }
        Chart::ParallelUY => {
            let (u, y, vu, vy) = (s.q1, s.q2, s.v1, s.v2);
            let (l1, l12) = (p.l1(), p.l12());
            let (c1, s1) = (l1.cos(u), l1.sin(u));
            if c1.abs() < 1e-15 {
                return Err(DynamicsError::InfiniteWall {
                    wall: l1.quarter_period().unwrap_or(f64::INFINITY),
                });
            }
            let (c12, s12) = (l12.cos(y), l12.sin(y));
            if c12.abs() < 1e-15 {
                return Err(DynamicsError::Pole { y });
            }
            let t1 = s1 / c1;
            let t12 = s12 / c12;
            let c12_sq = c12 * c12;
            let v_u = w2 * t1 / (c1 * c1 * c12_sq);
            let au = (2.0 * k1 * k2 * s12 * c12 * vu * vy - v_u) / c12_sq;
            // ∂V/∂y divided by κ₂, finite also when κ₂ = 0
            let v_y_over_k2 = w2 * (k1 * t1 * t1 * s12 / (c12_sq * c12) + t12 / c12_sq);
            let ay = -k1 * s12 * c12 * vu * vu - v_y_over_k2;
            Ok((au, ay))
        }
    }
}

pub fn noether_momenta(p: CKParams, s: &PhaseState) -> NoetherMomenta {
    let (k1, k2) = (p.kappa1, p.kappa2);
    match s.chart {
        Chart::Polar => {
            let (r, phi, vr, vphi) = (s.q1, s.q2, s.v1, s.v2);
            let (c, sn) = (p.l1().cos(r), p.l1().sin(r));
            let (c2, s2) = (p.l2().cos(phi), p.l2().sin(phi));
            NoetherMomenta {
                p1: c2 * vr - k2 * c * sn * s2 * vphi,
                p2: s2 * vr + c * sn * c2 * vphi,
                j: sn * sn * vphi,
            }
        }
        Chart::ParallelUY => {
            let (u, y, vu, vy) = (s.q1, s.q2, s.v1, s.v2);
            let (c1, s1) = (p.l1().cos(u), p.l1().sin(u));
            let (c12, s12) = (p.l12().cos(y), p.l12().sin(y));
            NoetherMomenta {
                p1: c12 * c12 * vu,
                p2: k1 * s1 * s12 * c12 * vu + c1 * vy,
                j: -c1 * s12 * c12 * vu + s1 * vy,
            }
        }
    }
}

/// `½(𝒫₁² + κ₂𝒫₂² + κ₁κ₂𝒥²)`.
pub fn kinetic_energy(p: CKParams, s: &PhaseState) -> f64 {
    let m = noether_momenta(p, s);
    0.5 * (m.p1 * m.p1 + p.kappa2 * m.p2 * m.p2 + p.kappa1 * p.kappa2 * m.j * m.j)
}

pub fn energy(p: CKParams, osc: Oscillator, s: &PhaseState) -> Result<f64, DynamicsError> {
    Ok(kinetic_energy(p, s) + potential(p, osc, s)?)
}

/// Fradkin tensor `ℱᵢⱼ = 𝒫ᵢ𝒫ⱼ + ω₀² ξᵢξⱼ` with `ξ` the Beltrami coordinates.
pub fn fradkin(p: CKParams, osc: Oscillator, s: &PhaseState) -> Result<FradkinTensor, DynamicsError> {
    // Same pole checks as the potential.
    potential(p, osc, s)?;
    let m = noether_momenta(p, s);
    let (x, y) = s.beltrami(p);
    let w2 = osc.omega0_sq;
    Ok(FradkinTensor {
        f11: m.p1 * m.p1 + w2 * x * x,
        f12: m.p1 * m.p2 + w2 * x * y,
        f22: m.p2 * m.p2 + w2 * y * y,
        j_sq: m.j * m.j,
    })
}

/// A quantity whose sign equals that of `ṙ` (for `r > 0`).
///
/// In polar coordinates it is `ṙ` itself; in `(u, y)` it is
/// `½ d/dt T₁(r)² = X Ẋ + κ₂ Y Ẏ` in Beltrami coordinates.
pub fn radial_rate(p: CKParams, s: &PhaseState) -> f64 {
    match s.chart {
        Chart::Polar => s.v1,
        Chart::ParallelUY => {
            let (u, y, vu, vy) = (s.q1, s.q2, s.v1, s.v2);
            let (c1, s1) = (p.l1().cos(u), p.l1().sin(u));
            let (c12, s12) = (p.l12().cos(y), p.l12().sin(y));
            let x = s1 / c1;
            let t12 = s12 / c12;
            let yy = t12 / c1;
            let xd = vu / (c1 * c1);
            let yd = vy / (c12 * c12 * c1) + t12 * p.kappa1 * s1 * vu / (c1 * c1);
            x * xd + p.kappa2 * yy * yd
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    type Quantity<'a> = Box<dyn Fn(&PhaseState) -> f64 + 'a>;

    fn ck(k1: f64, k2: f64) -> CKParams {
        CKParams::new(k1, k2).unwrap()
    }

    fn unit() -> Oscillator {
        Oscillator::new(1.0)
    }

    #[test]
    fn potential_examples() {
        let v = ho_potential(ck(0.0, 1.0), unit(), PolarPoint::new(2.0, 0.0)).unwrap();
        assert_eq!(v, 2.0);
        let v = ho_potential(ck(-1.0, 1.0), unit(), PolarPoint::new(5.0, 0.0)).unwrap();
        assert!((v - 0.5 * 5f64.tanh().powi(2)).abs() < 1e-15);
        assert!((v - 0.499909).abs() < 1e-6);
        let v = ho_potential(ck(1.0, 1.0), unit(), PolarPoint::new(0.0, 0.0)).unwrap();
        assert_eq!(v, 0.0);
        let err = ho_potential(ck(1.0, 1.0), unit(), PolarPoint::new(std::f64::consts::FRAC_PI_2, 0.0));
        assert!(matches!(err, Err(DynamicsError::InfiniteWall { .. })));
    }

    #[test]
    fn parallel_potential_examples() {
        let v = ho_potential_parallel(ck(0.0, 1.0), unit(), ParallelPointUY::new(1.0, 1.0)).unwrap();
        assert_eq!(v, 1.0);
        let v = ho_potential_parallel(ck(1.0, 1.0), unit(), ParallelPointUY::new(0.0, 0.0)).unwrap();
        assert_eq!(v, 0.0);
        let p = ck(1.0, 1.0);
        let q = ParallelPointUY::new(FRAC_PI_6, FRAC_PI_6);
        let v = ho_potential_parallel(p, unit(), q).unwrap();
        let polar = parallel_uy_to_polar(p, q).unwrap();
        let w = ho_potential(p, unit(), polar).unwrap();
        assert!((v - w).abs() < 1e-12);
    }

    #[test]
    fn acceleration_examples() {
        let (ar, ap) =
            accelerations(ck(0.0, 1.0), unit(), &PhaseState::polar(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!((ar, ap), (-1.0, 0.0));
        let (ar, _) =
            accelerations(ck(1.0, 1.0), unit(), &PhaseState::polar(FRAC_PI_4, 0.0, 0.0, 1.0)).unwrap();
        assert!((ar + 1.5).abs() < 1e-14);
        let (ar, ap) =
            accelerations(ck(1.0, 1.0), unit(), &PhaseState::polar(FRAC_PI_4, 0.0, 0.0, 2.0)).unwrap();
        assert!(ar.abs() < 1e-14 && ap == 0.0);
        let err = accelerations(ck(1.0, 1.0), unit(), &PhaseState::polar(0.0, 0.0, 1.0, 1.0));
        assert!(matches!(err, Err(DynamicsError::SingularChart { .. })));
        // radial motion through the polar origin is accepted when φ̇ = 0
        assert!(accelerations(ck(1.0, 1.0), unit(), &PhaseState::polar(0.0, 0.0, 1.0, 0.0)).is_ok());
    }

    #[test]
    fn momenta_examples() {
        let m = noether_momenta(ck(0.0, 1.0), &PhaseState::parallel(2.0, 3.0, 1.0, 0.0));
        assert_eq!((m.p1, m.p2, m.j), (1.0, 0.0, -3.0));
        let m = noether_momenta(ck(-1.0, 1.0), &PhaseState::polar(0.7, 0.2, 0.0, 0.0));
        assert_eq!((m.p1, m.p2, m.j), (0.0, 0.0, 0.0));
        let m = noether_momenta(ck(1.0, 1.0), &PhaseState::polar(FRAC_PI_4, 0.0, 0.0, 2.0));
        assert!(m.p1.abs() < 1e-15 && (m.p2 - 1.0).abs() < 1e-15 && (m.j - 1.0).abs() < 1e-15);
        assert_eq!(m.j_unscaled(ck(1.0, 0.0)), 0.0);
    }

    #[test]
    fn energy_examples() {
        let e = energy(ck(1.0, 1.0), unit(), &PhaseState::polar(FRAC_PI_4, 0.0, 0.0, 2.0)).unwrap();
        assert!((e - 1.5).abs() < 1e-14);
        // E(𝒥) = ω₀𝒥 + ½κ₁𝒥² at 𝒥 = 1
        assert!((e - (1.0 + 0.5)).abs() < 1e-14);
        let e = energy(ck(-1.0, 1.0), unit(), &PhaseState::parallel(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(e, 0.0);
        let e = energy(ck(0.0, 1.0), unit(), &PhaseState::polar(1.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!(e, 1.0);
    }

    #[test]
    fn fradkin_examples() {
        let f = fradkin(ck(0.0, 1.0), unit(), &PhaseState::parallel(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!((f.f11, f.f12, f.f22, f.j_sq), (1.0, 0.0, 1.0, 1.0));
        assert_eq!(f.det(), 1.0);
        let f = fradkin(ck(1.0, 1.0), unit(), &PhaseState::polar(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!((f.f11, f.f12, f.f22, f.j_sq), (0.0, 0.0, 0.0, 0.0));
        let f = fradkin(ck(1.0, 1.0), unit(), &PhaseState::polar(FRAC_PI_4, 0.0, 0.0, 2.0)).unwrap();
        assert!((f.det() - 1.0).abs() < 1e-12);
    }

    const SPACES: [(f64, f64); 9] = [
        (1.0, 1.0),
        (0.0, 1.0),
        (-1.0, 1.0),
        (1.0, 0.0),
        (0.0, 0.0),
        (-1.0, 0.0),
        (1.0, -1.0),
        (0.0, -1.0),
        (-1.0, -1.0),
    ];

    /// Directional derivative of `q` along the flow, by central differences.
    fn flow_derivative(
        p: CKParams,
        osc: Oscillator,
        s: &PhaseState,
        q: impl Fn(&PhaseState) -> f64,
    ) -> f64 {
        let (a1, a2) = accelerations(p, osc, s).unwrap();
        let d = [s.v1, s.v2, a1, a2];
        let h = 1e-6;
        let x = s.as_array();
        let plus = s.with_array(std::array::from_fn(|i| x[i] + h * d[i]));
        let minus = s.with_array(std::array::from_fn(|i| x[i] - h * d[i]));
        (q(&plus) - q(&minus)) / (2.0 * h)
    }

    fn in_domain(p: CKParams, s: &PhaseState) -> bool {
        s.to_chart(p, Chart::ParallelUY)
            .and_then(|t| t.to_chart(p, Chart::Polar))
            .is_ok()
    }

    proptest! {
        #[test]
        fn chart_agreement(
            idx in 0usize..9, r in 0.1f64..1.2, phi in -0.8f64..0.8,
            vr in -1.0f64..1.0, vphi in -1.0f64..1.0, w2 in -2.0f64..2.0,
        ) {
            let (k1, k2) = SPACES[idx];
            prop_assume!(k2 != 0.0);
            let p = ck(k1, k2);
            let osc = Oscillator::new(w2);
            let s = PhaseState::polar(r, phi, vr, vphi);
            prop_assume!(in_domain(p, &s));
            let t = s.to_chart(p, Chart::ParallelUY).unwrap();
            let back = t.to_chart(p, Chart::Polar).unwrap();
            for (a, b) in s.as_array().iter().zip(back.as_array()) {
                prop_assert!((a - b).abs() < 1e-11);
            }
            let (m1, m2) = (noether_momenta(p, &s), noether_momenta(p, &t));
            prop_assert!((m1.p1 - m2.p1).abs() < 1e-11);
            prop_assert!((m1.p2 - m2.p2).abs() < 1e-11);
            prop_assert!((m1.j - m2.j).abs() < 1e-11);
            let (e1, e2) = (energy(p, osc, &s).unwrap(), energy(p, osc, &t).unwrap());
            prop_assert!((e1 - e2).abs() < 1e-11 * e1.abs().max(1.0));
            let (f1, f2) = (fradkin(p, osc, &s).unwrap(), fradkin(p, osc, &t).unwrap());
            prop_assert!((f1.f11 - f2.f11).abs() < 1e-11 * f1.f11.abs().max(1.0));
            prop_assert!((f1.f12 - f2.f12).abs() < 1e-11 * f1.f12.abs().max(1.0));
            prop_assert!((f1.f22 - f2.f22).abs() < 1e-11 * f1.f22.abs().max(1.0));
            // radial rate has the sign of ṙ
            if r > 0.0 && vr.abs() > 1e-6 {
                prop_assert_eq!(radial_rate(p, &t).signum(), vr.signum());
            }
        }

        #[test]
        fn det_identity_all_spaces(
            idx in 0usize..9, a in -1.2f64..1.2, b in -0.8f64..0.8,
            v1 in -2.0f64..2.0, v2 in -2.0f64..2.0, w2 in -2.0f64..2.0, polar in any::<bool>(),
        ) {
            let (k1, k2) = SPACES[idx];
            let p = ck(k1, k2);
            let osc = Oscillator::new(w2);
            let s = if polar { PhaseState::polar(a, b, v1, v2) } else { PhaseState::parallel(a, b, v1, v2) };
            let f = fradkin(p, osc, &s).unwrap();
            prop_assert!(f.det_residual(osc).abs() < 1e-11 * (f.f11 * f.f22).abs().max(1.0));
        }

        #[test]
        fn kinetic_energy_matches_metric(
            idx in 0usize..9, a in -1.2f64..1.2, b in -0.8f64..0.8,
            v1 in -2.0f64..2.0, v2 in -2.0f64..2.0, polar in any::<bool>(),
        ) {
            let (k1, k2) = SPACES[idx];
            let p = ck(k1, k2);
            let s = if polar { PhaseState::polar(a, b, v1, v2) } else { PhaseState::parallel(a, b, v1, v2) };
            let (g1, g2) = match s.chart {
                Chart::Polar => crate::geometry::metric_polar(p, PolarPoint::new(a, b)),
                Chart::ParallelUY => crate::geometry::metric_parallel_uy(p, ParallelPointUY::new(a, b)),
            };
            let t = kinetic_energy(p, &s);
            let want = 0.5 * (g1 * v1 * v1 + g2 * v2 * v2);
            prop_assert!((t - want).abs() < 1e-11 * want.abs().max(1.0));
        }

        #[test]
        fn conserved_along_flow(
            idx in 0usize..9, a in 0.1f64..1.1, b in -0.7f64..0.7,
            v1 in -1.5f64..1.5, v2 in -1.5f64..1.5, w2 in -2.0f64..2.0, polar in any::<bool>(),
        ) {
            let (k1, k2) = SPACES[idx];
            let p = ck(k1, k2);
            let osc = Oscillator::new(w2);
            let s = if polar { PhaseState::polar(a, b, v1, v2) } else { PhaseState::parallel(a, b, v1, v2) };
            let quantities: [(&str, Quantity<'_>); 5] = [
                ("J", Box::new(|s| noether_momenta(p, s).j)),
                ("E", Box::new(|s| energy(p, osc, s).unwrap())),
                ("f11", Box::new(|s| fradkin(p, osc, s).unwrap().f11)),
                ("f12", Box::new(|s| fradkin(p, osc, s).unwrap().f12)),
                ("f22", Box::new(|s| fradkin(p, osc, s).unwrap().f22)),
            ];
            for (name, q) in quantities.iter() {
                let d = flow_derivative(p, osc, &s, q);
                prop_assert!(d.abs() < 1e-8 * q(&s).abs().max(1.0), "{} rate {}", name, d);
            }
        }
    }
}
