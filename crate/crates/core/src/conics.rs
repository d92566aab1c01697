//! Oscillator orbits as conics: ellipses, equidistants and ultraellipses.
//!
//! On a Riemannian space the orbit constants `A`, `B` are tangents of the
//! semiaxes, `T₁(a) = A` and `T₁₂(b) = B`. On the hyperbolic plane `T₁` is
//! bounded by `1/√-κ₁`. Once `A` reaches that bound, the curve becomes an
//! equidistant and then an ultraellipse with `1/(-κ₁ T₁(ã)) = A`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::Oscillator;
use crate::geometry::CKParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConicError {
    #[error("conics are only identified for kappa2 > 0")]
    Unsupported,
    #[error("invalid semiaxis constants: {0}")]
    Domain(String),
    #[error("the curve is empty: B = {b} is not below 1/sqrt(-kappa1 kappa2) = {bound}")]
    EmptyCurve { b: f64, bound: f64 },
    #[error("focal elements are only computed for Riemannian ellipses with kappa2 = 1")]
    FocalUnsupported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConicKind {
    Circle,
    Ellipse,
    Ultraellipse,
    Equidistant,
    /// Radial segment through the centre (zero angular momentum).
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MajorAxis {
    Semiaxis(f64),
    UltraSemiaxis(f64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicGeometry {
    pub kind: ConicKind,
    pub major: MajorAxis,
    /// Minor semiaxis, κ₁κ₂-labelled.
    pub b: f64,
}

/// Energies and angular momentum of the orbit tracing a conic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub e1: f64,
    pub e2: f64,
    pub j: f64,
    pub energy: f64,
}

const THRESHOLD_RTOL: f64 = 1e-12;

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= THRESHOLD_RTOL * a.abs().max(b.abs()).max(1.0)
}

impl ConicGeometry {
    /// Equidistant at distance `b` from its base line (κ₁ < 0).
    pub fn equidistant_at(b: f64) -> Self {
        ConicGeometry {
            kind: ConicKind::Equidistant,
            major: MajorAxis::Infinite,
            b,
        }
    }

    /// Circle of radius `r_m` for κ₂ = 1, where both labels coincide.
    pub fn circle_at(r_m: f64) -> Self {
        ConicGeometry {
            kind: ConicKind::Circle,
            major: MajorAxis::Semiaxis(r_m),
            b: r_m,
        }
    }

    /// Radial segment of half length `a` through the centre.
    pub fn radial_line(a: f64) -> Self {
        ConicGeometry {
            kind: ConicKind::Line,
            major: MajorAxis::Semiaxis(a),
            b: 0.0,
        }
    }

    /// Orbit constants `(A², B²)`.
    pub fn ab_sq(&self, p: CKParams) -> (f64, f64) {
        let l1 = p.l1();
        let big_a = match self.major {
            MajorAxis::Semiaxis(a) => l1.tan(a),
            MajorAxis::UltraSemiaxis(at) => 1.0 / (-p.kappa1 * l1.tan(at)),
            MajorAxis::Infinite => l1.tan_bound(),
        };
        let big_b = p.l12().tan(self.b);
        (big_a * big_a, big_b * big_b)
    }
}

/// Conic traced by the orbit with constants `A²`, `B²`.
pub fn conic_from_ab(p: CKParams, a_sq: f64, b_sq: f64) -> Result<ConicGeometry, ConicError> {
    if !(p.kappa2 > 0.0) {
        return Err(ConicError::Unsupported);
    }
    if !(b_sq > 0.0 && b_sq.is_finite()) {
        return Err(ConicError::Domain(format!("B^2 = {b_sq} must be positive")));
    }
    if !(a_sq > 0.0 && a_sq.is_finite()) {
        return Err(ConicError::Domain(format!("A^2 = {a_sq} must be positive")));
    }
    let (l1, l12) = (p.l1(), p.l12());
    let (big_a, big_b) = (a_sq.sqrt(), b_sq.sqrt());
    let bound_b = l12.tan_bound();
    if big_b >= bound_b {
        return Err(ConicError::EmptyCurve {
            b: big_b,
            bound: bound_b,
        });
    }
    let b = l12.atan(big_b);
    let circle = near(a_sq, p.kappa2 * b_sq);
    if p.kappa1 >= 0.0 {
        return Ok(ConicGeometry {
            kind: if circle {
                ConicKind::Circle
            } else {
                ConicKind::Ellipse
            },
            major: MajorAxis::Semiaxis(l1.atan(big_a)),
            b,
        });
    }
    let bound_a = l1.tan_bound();
    if near(big_a, bound_a) {
        Ok(ConicGeometry::equidistant_at(b))
    } else if big_a < bound_a {
        Ok(ConicGeometry {
            kind: if circle {
                ConicKind::Circle
            } else {
                ConicKind::Ellipse
            },
            major: MajorAxis::Semiaxis(l1.atan(big_a)),
            b,
        })
    } else {
        let a_tilde = l1.atan(1.0 / (-p.kappa1 * big_a));
        Ok(ConicGeometry {
            kind: ConicKind::Ultraellipse,
            major: MajorAxis::UltraSemiaxis(a_tilde),
            b,
        })
    }
}

/// Partial energies, angular momentum and total energy of the orbit on a conic.
pub fn physical_from_conic(
    p: CKParams,
    osc: Oscillator,
    c: &ConicGeometry,
) -> Result<PhysicalConstants, ConicError> {
    if !(p.kappa2 > 0.0) {
        return Err(ConicError::Unsupported);
    }
    let w2 = osc.omega0_sq;
    let (a_sq, b_sq) = c.ab_sq(p);
    let (e1, e2, j) = match c.kind {
        ConicKind::Line => (0.5 * w2 * a_sq, 0.0, 0.0),
        _ => (
            0.5 * w2 * a_sq,
            0.5 * w2 * b_sq,
            osc.omega0() * (a_sq * b_sq).sqrt(),
        ),
    };
    let energy = e1 + p.kappa2 * e2 + 0.5 * p.kappa1 * p.kappa2 * j * j;
    Ok(PhysicalConstants { e1, e2, j, energy })
}

/// Half the focal separation `f` of an ellipse, from `C₁(a) = C₁(f) C₁(b)`.
pub fn focal_half_separation(p: CKParams, c: &ConicGeometry) -> Result<f64, ConicError> {
    if p.kappa2 != 1.0 {
        return Err(ConicError::FocalUnsupported);
    }
    let a = match (c.kind, c.major) {
        (ConicKind::Ellipse | ConicKind::Circle, MajorAxis::Semiaxis(a)) => a,
        _ => return Err(ConicError::FocalUnsupported),
    };
    let k = p.kappa1;
    if k == 0.0 {
        return Ok((a * a - c.b * c.b).max(0.0).sqrt());
    }
    let l1 = p.l1();
    let cf = l1.cos(a) / l1.cos(c.b);
    let f = if k > 0.0 {
        cf.clamp(-1.0, 1.0).acos() / k.sqrt()
    } else {
        cf.max(1.0).acosh() / (-k).sqrt()
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::{classify, e_inf, j_inf, min_energy, orbit_from_ej, orbit_radius, OrbitTag};
    use std::f64::consts::FRAC_PI_4;

    fn ck(k1: f64, k2: f64) -> CKParams {
        CKParams::new(k1, k2).unwrap()
    }

    fn unit() -> Oscillator {
        Oscillator::new(1.0)
    }

    fn semiaxis(c: &ConicGeometry) -> f64 {
        match c.major {
            MajorAxis::Semiaxis(a) | MajorAxis::UltraSemiaxis(a) => a,
            MajorAxis::Infinite => f64::INFINITY,
        }
    }

    #[test]
    fn from_ab_examples() {
        let c = conic_from_ab(ck(0.0, 1.0), 4.0, 1.0).unwrap();
        assert_eq!(c.kind, ConicKind::Ellipse);
        assert_eq!((c.major, c.b), (MajorAxis::Semiaxis(2.0), 1.0));

        let c = conic_from_ab(ck(-1.0, 1.0), 0.25, 0.0625).unwrap();
        assert_eq!(c.kind, ConicKind::Ellipse);
        assert!((semiaxis(&c) - 0.5f64.atanh()).abs() < 1e-15);
        assert!((semiaxis(&c) - 0.549306).abs() < 1e-6);
        assert!((c.b - 0.255413).abs() < 1e-6);

        let c = conic_from_ab(ck(-1.0, 1.0), 4.0, 0.25).unwrap();
        assert_eq!(c.kind, ConicKind::Ultraellipse);
        assert!(matches!(c.major, MajorAxis::UltraSemiaxis(at) if (at - 0.5f64.atanh()).abs() < 1e-15));
        assert!((c.b - 0.5f64.atanh()).abs() < 1e-15);

        let c = conic_from_ab(ck(-1.0, 1.0), 1.0, 0.25).unwrap();
        assert_eq!(c.kind, ConicKind::Equidistant);
        assert_eq!(c.major, MajorAxis::Infinite);

        assert!(matches!(
            conic_from_ab(ck(-1.0, 1.0), 4.0, 1.5),
            Err(ConicError::EmptyCurve { .. })
        ));
        assert!(matches!(conic_from_ab(ck(1.0, 1.0), 1.0, 0.0), Err(ConicError::Domain(_))));
        assert_eq!(conic_from_ab(ck(1.0, -1.0), 1.0, 1.0), Err(ConicError::Unsupported));
        let c = conic_from_ab(ck(1.0, 1.0), 1.0, 1.0).unwrap();
        assert_eq!(c.kind, ConicKind::Circle);
    }

    #[test]
    fn physical_examples() {
        let c = ConicGeometry {
            kind: ConicKind::Ellipse,
            major: MajorAxis::Semiaxis(2.0),
            b: 1.0,
        };
        let ph = physical_from_conic(ck(0.0, 1.0), unit(), &c).unwrap();
        assert_eq!((ph.e1, ph.e2, ph.j, ph.energy), (2.0, 0.5, 2.0, 2.5));

        let b = 0.5f64.atanh();
        let ph = physical_from_conic(ck(-1.0, 1.0), unit(), &ConicGeometry::equidistant_at(b)).unwrap();
        assert!((ph.energy - 0.5).abs() < 1e-15);

        let ph = physical_from_conic(ck(1.0, 1.0), unit(), &ConicGeometry::circle_at(FRAC_PI_4)).unwrap();
        assert!((ph.j - 1.0).abs() < 1e-15 && (ph.energy - 1.5).abs() < 1e-14);

        // ½ω₀²(T(a)²/C(b)² + T(b)²) on the sphere
        let c = ConicGeometry {
            kind: ConicKind::Ellipse,
            major: MajorAxis::Semiaxis(0.9),
            b: 0.4,
        };
        let ph = physical_from_conic(ck(1.0, 1.0), unit(), &c).unwrap();
        let want = 0.5 * (0.9f64.tan().powi(2) / 0.4f64.cos().powi(2) + 0.4f64.tan().powi(2));
        assert!((ph.energy - want).abs() < 1e-14);

        let ph = physical_from_conic(ck(1.0, 1.0), unit(), &ConicGeometry::radial_line(0.5)).unwrap();
        assert_eq!(ph.j, 0.0);
        assert!((ph.energy - 0.5 * 0.5f64.tan().powi(2)).abs() < 1e-15);
    }

    fn grid(p: CKParams) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for i in 1..=8 {
            let j = 0.15 * i as f64;
            for k in 0..8 {
                let e = min_energy(p, unit(), j) + 0.01 + 0.2 * k as f64;
                out.push((e, j));
            }
        }
        if let (Some(ei), Some(ji)) = (e_inf(p, unit()), j_inf(p, unit())) {
            for j in [0.1, 0.4, 0.7, 0.95 * ji] {
                out.push((ei, j));
            }
        }
        out
    }

    #[test]
    fn round_trip_and_tag_agreement() {
        for k1 in [1.0, 0.0, -1.0] {
            let p = ck(k1, 1.0);
            for (e, j) in grid(p) {
                let class = classify(p, unit(), e, j).unwrap();
                if class.tag == OrbitTag::Forbidden {
                    continue;
                }
                let sol = orbit_from_ej(p, unit(), e, j, 0.0).unwrap();
                let c = conic_from_ab(p, sol.a_sq, sol.b_sq).unwrap();
                let want = match class.tag {
                    OrbitTag::Ellipse => ConicKind::Ellipse,
                    OrbitTag::Circle => ConicKind::Circle,
                    OrbitTag::Equidistant => ConicKind::Equidistant,
                    OrbitTag::Ultraellipse => ConicKind::Ultraellipse,
                    other => panic!("unexpected tag {other:?}"),
                };
                assert_eq!(c.kind, want, "{p:?} E={e} J={j}");

                let ph = physical_from_conic(p, unit(), &c).unwrap();
                assert!((ph.energy - e).abs() < 1e-10 * e.max(1.0), "{p:?} {e} {}", ph.energy);
                assert!((ph.j - j).abs() < 1e-10);
                let sol2 = orbit_from_ej(p, unit(), ph.energy, ph.j, 0.0).unwrap();
                let c2 = conic_from_ab(p, sol2.a_sq, sol2.b_sq).unwrap();
                assert_eq!(c2.kind, c.kind);
                if c.kind != ConicKind::Equidistant {
                    assert!((semiaxis(&c2) - semiaxis(&c)).abs() < 1e-10);
                }
                assert!((c2.b - c.b).abs() < 1e-10);

                // bullet checks on the hyperbolic plane
                if k1 < 0.0 {
                    let (ei, ji) = (e_inf(p, unit()).unwrap(), j_inf(p, unit()).unwrap());
                    match c.kind {
                        ConicKind::Ellipse => assert!(e < ei && j < ji),
                        ConicKind::Ultraellipse => {
                            assert!(e > ei);
                            let MajorAxis::UltraSemiaxis(at) = c.major else { unreachable!() };
                            if c.b.tanh() < at.tanh() {
                                assert!(j < ji);
                            } else {
                                assert!(j > ji);
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    #[test]
    fn equilateral_ultraellipse_has_j_inf() {
        let p = ck(-1.0, 1.0);
        for b in [0.2, 0.5, 1.0] {
            let c = ConicGeometry {
                kind: ConicKind::Ultraellipse,
                major: MajorAxis::UltraSemiaxis(b),
                b,
            };
            let ph = physical_from_conic(p, unit(), &c).unwrap();
            assert!((ph.j - j_inf(p, unit()).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn foci_sum_of_distances() {
        for k1 in [1.0, 0.0, -1.0] {
            let p = ck(k1, 1.0);
            let sol = orbit_from_ej(p, unit(), min_energy(p, unit(), 0.3) + 0.1, 0.3, 0.0).unwrap();
            let c = conic_from_ab(p, sol.a_sq, sol.b_sq).unwrap();
            let a = semiaxis(&c);
            let f = focal_half_separation(p, &c).unwrap();
            let l1 = p.l1();
            for k in 0..20 {
                let phi = 0.31 * k as f64;
                let r = orbit_radius(p, &sol, phi).unwrap().finite().unwrap();
                let dist = |phi_f: f64| {
                    let dphi = phi - phi_f;
                    if k1 == 0.0 {
                        (r * r + f * f - 2.0 * r * f * dphi.cos()).sqrt()
                    } else {
                        let cd = l1.cos(r) * l1.cos(f) + k1 * l1.sin(r) * l1.sin(f) * dphi.cos();
                        if k1 > 0.0 {
                            cd.clamp(-1.0, 1.0).acos()
                        } else {
                            cd.max(1.0).acosh()
                        }
                    }
                };
                let sum = dist(0.0) + dist(std::f64::consts::PI);
                assert!((sum - 2.0 * a).abs() < 1e-9, "{p:?} phi={phi} sum={sum} 2a={}", 2.0 * a);
            }
        }
    }
}
