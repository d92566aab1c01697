//! Labelled trigonometric functions `C_κ`, `S_κ`, `T_κ`.
//!
//! One family covers the circular (κ > 0), parabolic (κ = 0) and hyperbolic
//! (κ < 0) cases:
//!
//! ```text
//! C_κ(x) = cos(√κ x)            S_κ(x) = sin(√κ x)/√κ          κ > 0
//! C_κ(x) = 1                    S_κ(x) = x                     κ = 0
//! C_κ(x) = cosh(√-κ x)          S_κ(x) = sinh(√-κ x)/√-κ       κ < 0
//! ```
//!
//! When `|κ| x²` is tiny the closed forms lose digits to the `√κ` scaling, so
//! the functions switch to truncated series in `κ x²`. This removes the
//! floating point seam between κ = 0⁺ and κ = 0⁻.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this value of `|κ| x²` the series branch is used.
const SERIES_THRESHOLD: f64 = 1e-8;

/// `|C_κ(x)|` at or below this is treated as a pole of `T_κ`.
const POLE_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum TrigError {
    #[error("non-finite argument {0}")]
    NonFinite(f64),
    #[error("tangent pole at x = {pole}")]
    Pole { pole: f64 },
    #[error("argument {value} outside the range of the inverse (|t| < {bound})")]
    OutOfRange { value: f64, bound: f64 },
}

/// The label κ of a trigonometric family.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Label(f64);

impl TryFrom<f64> for Label {
    type Error = TrigError;

    fn try_from(kappa: f64) -> Result<Self, Self::Error> {
        Label::new(kappa)
    }
}

impl From<Label> for f64 {
    fn from(l: Label) -> f64 {
        l.0
    }
}

impl Label {
    pub fn new(kappa: f64) -> Result<Self, TrigError> {
        if kappa.is_finite() {
            Ok(Label(kappa))
        } else {
            Err(TrigError::NonFinite(kappa))
        }
    }

    /// Product label, e.g. κ₁κ₂ for the `y` and `v` coordinates.
    pub fn times(self, other: Label) -> Label {
        Label(self.0 * other.0)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    fn use_series(self, x: f64) -> bool {
        self.0.abs() * x * x < SERIES_THRESHOLD
    }

    /// `C_κ(x)`. Unchecked: non-finite input propagates.
    #[inline]
    pub fn cos(self, x: f64) -> f64 {
        let k = self.0;
        if self.use_series(x) {
            let z = k * x * x;
            1.0 - z / 2.0 + z * z / 24.0 - z * z * z / 720.0
        } else if k > 0.0 {
            (k.sqrt() * x).cos()
        } else {
            ((-k).sqrt() * x).cosh()
        }
    }

    /// `S_κ(x)`. Unchecked.
    #[inline]
    pub fn sin(self, x: f64) -> f64 {
        let k = self.0;
        if self.use_series(x) {
            let z = k * x * x;
            x * (1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0)
        } else if k > 0.0 {
            let s = k.sqrt();
            (s * x).sin() / s
        } else {
            let s = (-k).sqrt();
            (s * x).sinh() / s
        }
    }

    /// `T_κ(x) = S_κ(x) / C_κ(x)`. Unchecked: returns ±∞ or a huge value at a pole.
    #[inline]
    pub fn tan(self, x: f64) -> f64 {
        self.sin(x) / self.cos(x)
    }

    /// Supremum of `|T_κ|` over the real line: `1/√-κ` for κ < 0, infinite otherwise.
    pub fn tan_bound(self) -> f64 {
        if self.0 < 0.0 {
            1.0 / (-self.0).sqrt()
        } else {
            f64::INFINITY
        }
    }

    /// First positive zero of `C_κ` (`π/(2√κ)`), if any.
    pub fn quarter_period(self) -> Option<f64> {
        (self.0 > 0.0).then(|| std::f64::consts::FRAC_PI_2 / self.0.sqrt())
    }

    /// Principal inverse of `T_κ`. Unchecked: returns NaN when `t` is out of range.
    pub fn atan(self, t: f64) -> f64 {
        let k = self.0;
        if self.use_series(t) {
            let z = k * t * t;
            t * (1.0 - z / 3.0 + z * z / 5.0 - z * z * z / 7.0)
        } else if k > 0.0 {
            let s = k.sqrt();
            (s * t).atan() / s
        } else {
            let s = (-k).sqrt();
            (s * t).atanh() / s
        }
    }

    /// Principal inverse of `S_κ`. Unchecked: NaN when `|√κ s| > 1` for κ > 0.
    pub fn asin(self, s: f64) -> f64 {
        let k = self.0;
        if self.use_series(s) {
            let z = k * s * s;
            s * (1.0 + z / 6.0 + 3.0 * z * z / 40.0 + 5.0 * z * z * z / 112.0)
        } else if k > 0.0 {
            let q = k.sqrt();
            (q * s).asin() / q
        } else {
            let q = (-k).sqrt();
            (q * s).asinh() / q
        }
    }

    /// Angle `x` with `(C_κ(x), S_κ(x))` proportional to `(c, s)` with a positive factor.
    ///
    /// For κ > 0 this is the usual two-argument arctangent scaled by `1/√κ`. For
    /// κ ≤ 0 it requires `c > 0` and `|s/c| < 1/√-κ`; otherwise NaN is returned.
    pub fn atan2(self, s: f64, c: f64) -> f64 {
        let k = self.0;
        if k > 0.0 {
            let q = k.sqrt();
            (q * s).atan2(c) / q
        } else if c > 0.0 {
            self.atan(s / c)
        } else {
            f64::NAN
        }
    }
}

fn check(x: f64) -> Result<f64, TrigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(TrigError::NonFinite(x))
    }
}

/// Checked `C_κ(x)`.
pub fn ck_cos(label: Label, x: f64) -> Result<f64, TrigError> {
    Ok(label.cos(check(x)?))
}

/// Checked `S_κ(x)`.
pub fn ck_sin(label: Label, x: f64) -> Result<f64, TrigError> {
    Ok(label.sin(check(x)?))
}

/// Checked `T_κ(x)`; errors at a zero of `C_κ` and reports the nearest pole.
pub fn ck_tan(label: Label, x: f64) -> Result<f64, TrigError> {
    let x = check(x)?;
    let c = label.cos(x);
    if c.abs() <= POLE_EPS {
        let pole = match label.quarter_period() {
            Some(q) => {
                let half = 2.0 * q;
                let n = ((x - q) / half).round();
                q + n * half
            }
            None => x,
        };
        return Err(TrigError::Pole { pole });
    }
    Ok(label.sin(x) / c)
}

/// Checked principal inverse of `T_κ`.
///
/// For κ < 0 the tangent is bounded by `1/√-κ`; arguments at or beyond that
/// bound are reported as [`TrigError::OutOfRange`].
pub fn ck_atan(label: Label, t: f64) -> Result<f64, TrigError> {
    let t = check(t)?;
    let bound = label.tan_bound();
    if t.abs() >= bound {
        return Err(TrigError::OutOfRange { value: t, bound });
    }
    Ok(label.atan(t))
}

/// Checked principal inverse of `S_κ`.
pub fn ck_asin(label: Label, s: f64) -> Result<f64, TrigError> {
    let s = check(s)?;
    if label.value() > 0.0 {
        let bound = 1.0 / label.value().sqrt();
        if s.abs() > bound {
            return Err(TrigError::OutOfRange { value: s, bound });
        }
    }
    Ok(label.asin(s))
}
