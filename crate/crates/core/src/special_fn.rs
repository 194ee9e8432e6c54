//! Special functions with tail-stable evaluation.
//!
//! Everything that lives on the `exp(-x^2/2)` scale is available in log form
//! through [`LogScaledValue`], so survival probabilities far below the
//! smallest positive `f64` remain representable.

use std::f64::consts::{E, FRAC_1_SQRT_2, PI};

use crate::error::{finite, Error, Result};
use crate::quadrature::integrate_doubling;

/// `ln(2π) / 2`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// `1 / √(2π)`
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const SQRT_FRAC_PI_2: f64 = 1.253_314_137_315_500_3;

/// Quadrature truncation: integrands are cut where their exponent drops below `-TAIL_EXPONENT`.
const TAIL_EXPONENT: f64 = 75.0;
const OWEN_REL_TOL: f64 = 1e-13;
const OWEN_MAX_PANELS: usize = 1 << 14;

/// Sign of a [`LogScaledValue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Zero => 0.0,
            Sign::Positive => 1.0,
        }
    }
}

/// A real number stored as `sign * exp(log_magnitude)`.
///
/// `log_magnitude` is finite whenever the sign is not [`Sign::Zero`]; the zero
/// value carries `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaledValue {
    log_magnitude: f64,
    sign: Sign,
}

impl LogScaledValue {
    pub const ZERO: Self = Self {
        log_magnitude: f64::NEG_INFINITY,
        sign: Sign::Zero,
    };

    /// Positive value `exp(ln)`. `ln = -inf` gives zero.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            debug_assert!(ln.is_finite(), "log magnitude must be finite, got {ln}");
            Self {
                log_magnitude: ln,
                sign: Sign::Positive,
            }
        }
    }

    /// `sign * exp(ln)`.
    pub fn with_sign(sign: Sign, ln: f64) -> Self {
        match sign {
            Sign::Zero => Self::ZERO,
            _ if ln == f64::NEG_INFINITY => Self::ZERO,
            _ => Self {
                log_magnitude: ln,
                sign,
            },
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v > 0.0 {
            Self::from_ln(v.ln())
        } else if v < 0.0 {
            Self::with_sign(Sign::Negative, (-v).ln())
        } else {
            Self::ZERO
        }
    }

    /// Natural log of the magnitude.
    pub fn ln(&self) -> f64 {
        self.log_magnitude
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn is_positive(&self) -> bool {
        self.sign == Sign::Positive
    }

    /// Reconstructed value; underflows to zero for very negative logs.
    pub fn value(&self) -> f64 {
        match self.sign {
            Sign::Zero => 0.0,
            s => s.as_f64() * self.log_magnitude.exp(),
        }
    }

    /// Multiply by `exp(ln_factor)`.
    pub fn scale(self, ln_factor: f64) -> Self {
        Self::with_sign(self.sign, self.log_magnitude + ln_factor)
    }

    /// Multiply by a real factor.
    pub fn times(self, factor: f64) -> Self {
        let s = factor_sign(factor);
        let sign = match (self.sign, s) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        };
        Self::with_sign(sign, self.log_magnitude + factor.abs().ln())
    }
}

fn factor_sign(v: f64) -> Sign {
    if v > 0.0 {
        Sign::Positive
    } else if v < 0.0 {
        Sign::Negative
    } else {
        Sign::Zero
    }
}

/// Standard normal density `exp(-x^2/2) / √(2π)`.
pub fn normal_pdf(x: f64) -> Result<f64> {
    finite("normal_pdf", x)?;
    Ok(FRAC_1_SQRT_2PI * (-0.5 * x * x).exp())
}

/// Standard normal density in log-scaled form.
pub fn normal_pdf_scaled(x: f64) -> Result<LogScaledValue> {
    finite("normal_pdf", x)?;
    Ok(LogScaledValue::from_ln(normal_ln_pdf(x)))
}

#[inline]
pub(crate) fn normal_ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Standard normal distribution function.
///
/// Computed from the survival function on the opposite side so that
/// `normal_cdf(x) + normal_survival(x).value() == 1` up to rounding.
pub fn normal_cdf(x: f64) -> Result<f64> {
    finite("normal_cdf", x)?;
    Ok(normal_cdf_unchecked(x))
}

pub(crate) fn normal_cdf_unchecked(x: f64) -> f64 {
    if x < 0.0 {
        normal_upper_tail(-x)
    } else {
        1.0 - normal_upper_tail(x)
    }
}

/// `1 - Φ(x)` in log-scaled form, relatively accurate for every finite `x`.
pub fn normal_survival(x: f64) -> Result<LogScaledValue> {
    finite("normal_survival", x)?;
    Ok(LogScaledValue::from_ln(normal_ln_survival(x)))
}

pub(crate) fn normal_ln_survival(x: f64) -> f64 {
    if x >= ERFC_SWITCH {
        normal_ln_pdf(x) + mills_ratio(x).ln()
    } else {
        (0.5 * libm::erfc(x * FRAC_1_SQRT_2)).ln()
    }
}

// Below this erfc is used directly; above it φ(x)·M(x).
const ERFC_SWITCH: f64 = 8.0;

/// Linear-scale `1 - Φ(x)`; underflows to zero past x ≈ 38.
pub(crate) fn normal_upper_tail(x: f64) -> f64 {
    if x >= ERFC_SWITCH {
        (FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()) * mills_ratio(x)
    } else {
        0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// `exp(y^2)` with the rounding error of `y*y` folded back in.
fn exp_square(y: f64) -> f64 {
    let hi = y * y;
    let lo = y.mul_add(y, -hi);
    hi.exp() * (1.0 + lo)
}

/// Scaled complementary error function `exp(y^2) erfc(y)`.
pub fn erfcx(y: f64) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    if y < 0.0 {
        return 2.0 * exp_square(y) - erfcx(-y);
    }
    if y < 6.0 {
        exp_square(y) * libm::erfc(y)
    } else {
        // erfc(y) = exp(-y^2)/√π · 1/(y + (1/2)/(y + 1/(y + (3/2)/(y + ...))))
        let mut t = y;
        for k in (1..=40).rev() {
            t = y + 0.5 * k as f64 / t;
        }
        FRAC_1_SQRT_PI / t
    }
}

/// Mills ratio `(1 - Φ(x)) / φ(x)` for `x ≥ 0`.
pub fn mills_ratio(x: f64) -> f64 {
    debug_assert!(x >= 0.0 || x.is_nan());
    if x < 8.5 {
        SQRT_FRAC_PI_2 * erfcx(x * FRAC_1_SQRT_2)
    } else {
        // 1/(x + 1/(x + 2/(x + 3/(x + ...))))
        let mut t = x;
        for k in (1..=60).rev() {
            t = x + k as f64 / t;
        }
        1.0 / t
    }
}

/// Owen's T function `T(h, a) = (1/2π) ∫_0^a exp(-h²(1+t²)/2) / (1+t²) dt`.
///
/// Evaluated with the substitution `t = tan θ` and composite Gauss–Legendre
/// panels whose count doubles until the estimate settles to 1e-13. For
/// `|a| > 1` the reciprocal-argument identity maps the work onto `|a| ≤ 1`.
pub fn owen_t(h: f64, a: f64) -> Result<f64> {
    finite("owen_t", h)?;
    finite("owen_t", a)?;
    if a == 0.0 {
        return Ok(0.0);
    }
    let h = h.abs();
    let scaled = owen_t_scaled(h, a.abs());
    Ok(a.signum() * (-0.5 * h * h).exp() * scaled)
}

/// `exp(h²/2) · T(h, a)` for `h ≥ 0`, `a ≥ 0`.
pub(crate) fn owen_t_scaled(h: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if h == 0.0 {
        return a.atan() / (2.0 * PI);
    }
    if a <= 1.0 {
        return owen_t_core(h, a);
    }
    // T(h,a) + T(ah,1/a) = Q(h)/2 + Q(ah)/2 - Q(h)Q(ah)   (h ≥ 0)
    let ah = a * h;
    let q_h_scaled = FRAC_1_SQRT_2PI * mills_ratio(h);
    let shift = (-0.5 * (a * a - 1.0) * h * h).exp();
    let q_ah = normal_upper_tail(ah);
    let q_ah_scaled_to_h = shift * FRAC_1_SQRT_2PI * mills_ratio(ah);
    0.5 * q_h_scaled + 0.5 * q_ah_scaled_to_h - q_h_scaled * q_ah - shift * owen_t_core(ah, 1.0 / a)
}

/// `(1/2π) ∫_0^{atan a} exp(-h² tan²θ / 2) dθ` for `0 < a ≤ 1`, `h > 0`.
fn owen_t_core(h: f64, a: f64) -> f64 {
    let h2 = h * h;
    let tan_cut = (2.0 * TAIL_EXPONENT).sqrt() / h;
    let upper = a.min(tan_cut).atan();
    let r = integrate_doubling(
        |theta| {
            let t = theta.tan();
            (-0.5 * h2 * t * t).exp()
        },
        0.0,
        upper,
        OWEN_REL_TOL,
        OWEN_MAX_PANELS,
    );
    r.value / (2.0 * PI)
}

/// `T(h, ∞) - T(h, a) = Q(|h|)/2 - T(h, a)` for `a ≥ 0`, in log-scaled form.
///
/// This is the Owen integral over `[a, ∞)`; it is computed directly rather
/// than by subtraction, with `exp(-h²(1+a²)/2)` factored out, so it stays
/// relatively accurate when both terms of the difference are nearly equal.
pub fn owen_t_complement(h: f64, a: f64) -> Result<LogScaledValue> {
    finite("owen_t_complement", h)?;
    finite("owen_t_complement", a)?;
    if a < 0.0 {
        return Err(Error::Domain {
            what: "owen_t_complement",
            value: a,
            reason: "requires a >= 0",
        });
    }
    let h = h.abs();
    if h == 0.0 {
        let j = 0.5 * PI - a.atan();
        return Ok(LogScaledValue::from_ln(j.ln() - (2.0 * PI).ln()));
    }
    let h2 = h * h;
    let a2 = a * a;
    let tan_cut = (a2 + 2.0 * TAIL_EXPONENT / h2).sqrt();
    let mut j = 0.0;
    if a < 1.0 {
        let lo = a.atan();
        let hi = tan_cut.min(1.0).atan();
        j += integrate_doubling(
            |theta| {
                let t = theta.tan();
                (-0.5 * h2 * (t * t - a2)).exp()
            },
            lo,
            hi,
            OWEN_REL_TOL,
            OWEN_MAX_PANELS,
        )
        .value;
    }
    if tan_cut > 1.0 {
        // v = cot θ = e^w on [1/tan_cut, min(1, 1/a)]
        let w_lo = -tan_cut.ln();
        let w_hi = if a < 1.0 { 0.0 } else { -a.ln() };
        j += integrate_doubling(
            |w| {
                let v = w.exp();
                let inv = 1.0 / v;
                (-0.5 * h2 * (inv * inv - a2)).exp() * v / (1.0 + v * v)
            },
            w_lo,
            w_hi,
            OWEN_REL_TOL,
            OWEN_MAX_PANELS,
        )
        .value;
    }
    let ln = -0.5 * h2 * (1.0 + a2) - (2.0 * PI).ln() + j.ln();
    Ok(LogScaledValue::from_ln(ln))
}

/// Principal branch of the Lambert W function: the `w ≥ -1` with `w e^w = x`.
///
/// Asymptotic or branch-point series start, refined by Halley iteration. For
/// `x > e` the iteration runs on `w + ln w = ln x` so that `e^w` never
/// overflows.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return Err(Error::NonFinite {
            what: "lambert_w0",
            value: x,
        });
    }
    if x == f64::INFINITY {
        return Err(Error::NonFinite {
            what: "lambert_w0",
            value: x,
        });
    }
    const BRANCH: f64 = -1.0 / E;
    if x < BRANCH {
        // tolerate the rounding of -1/e itself
        if x >= BRANCH * (1.0 + 4.0 * f64::EPSILON) {
            return Ok(-1.0);
        }
        return Err(Error::Domain {
            what: "lambert_w0",
            value: x,
            reason: "requires x >= -1/e",
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let p2 = 2.0 * (E * x + 1.0);
    if p2 <= 0.0 {
        return Ok(-1.0);
    }

    if x > E {
        let lx = x.ln();
        let llx = lx.ln();
        let mut w = lx - llx + llx / lx;
        for _ in 0..64 {
            let g = w + w.ln() - lx;
            let g1 = 1.0 + 1.0 / w;
            let g2 = -1.0 / (w * w);
            let step = g / (g1 - 0.5 * g * g2 / g1);
            w -= step;
            if step.abs() <= 1e-16 * w {
                break;
            }
        }
        return Ok(w);
    }

    let mut w = if x < -0.32 {
        let p = p2.sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l = x.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-12 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}
