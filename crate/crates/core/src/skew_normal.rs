//! The standard skew-normal distribution SN(λ) with density `2φ(x)Φ(λx)`.
//!
//! The survival function is the workhorse of the convergence experiments and
//! is evaluated in log-scaled form by one of two routes:
//!
//! * [`SurvivalMethod::DirectOwen`]: Owen's T representation
//!   `1 - F(x) = 1 - Φ(x) + 2T(x, λ)`. For `λ < 0, x ≥ 0` the difference is
//!   evaluated as a single complement integral, so no cancellation occurs.
//! * [`SurvivalMethod::LogTailQuadrature`]: for `x` at or past the tail
//!   threshold, the integral `∫_x^∞ 2φ(t)(1 - Φ(|λ|t)) dt` with
//!   `exp(-(1+λ²)x²/2)` pulled out analytically. Positive λ uses
//!   `2(1 - Φ(x))` minus that same integral.

use std::f64::consts::{E, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{finite, Error, Result};
use crate::quadrature::rule;
use crate::special_fn::{
    mills_ratio, normal_cdf_unchecked, normal_ln_pdf, normal_ln_survival, owen_t_complement,
    owen_t_scaled, LogScaledValue, FRAC_1_SQRT_2PI,
};

/// Sign class of the shape parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Negative,
    Zero,
    Positive,
}

impl Regime {
    pub fn of(lambda: f64) -> Self {
        if lambda < 0.0 {
            Regime::Negative
        } else if lambda > 0.0 {
            Regime::Positive
        } else {
            Regime::Zero
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Negative => "negative",
            Regime::Zero => "zero",
            Regime::Positive => "positive",
        }
    }
}

/// The skewness shape λ together with its regime.
///
/// Very large `|λ|` (beyond about 100) is accepted; the distribution is then
/// numerically a half-normal and is handled by the same code paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeParameter {
    lambda: f64,
    regime: Regime,
}

impl ShapeParameter {
    pub fn new(lambda: f64) -> Result<Self> {
        finite("shape parameter", lambda)?;
        // fold -0.0 into the zero regime
        let lambda = if lambda == 0.0 { 0.0 } else { lambda };
        Ok(Self {
            lambda,
            regime: Regime::of(lambda),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// The shape with the opposite sign.
    pub fn reflected(&self) -> Self {
        Self {
            lambda: -self.lambda,
            regime: Regime::of(-self.lambda),
        }
    }

    /// Point from which [`survival`] switches to the tail route.
    pub fn tail_threshold(&self) -> f64 {
        match self.regime {
            Regime::Negative => TAIL_START.max(TAIL_START / self.lambda.abs()),
            _ => TAIL_START,
        }
    }
}

const TAIL_START: f64 = 6.0;
/// Number of e-foldings of `exp(-(1+λ²)xs)` covered by the tail quadrature.
const TAIL_EFOLDS: f64 = 40.0;
const TAIL_PANELS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurvivalMethod {
    DirectOwen,
    LogTailQuadrature,
}

impl SurvivalMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SurvivalMethod::DirectOwen => "direct_owen",
            SurvivalMethod::LogTailQuadrature => "log_tail_quadrature",
        }
    }
}

/// `1 - F_λ(x)` together with the route used to compute it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalEvaluation {
    pub value: LogScaledValue,
    pub method: SurvivalMethod,
    pub x: f64,
}

/// Skew-normal density `2φ(x)Φ(λx)`.
pub fn pdf(sp: ShapeParameter, x: f64) -> Result<f64> {
    finite("skew-normal pdf", x)?;
    Ok(2.0 * FRAC_1_SQRT_2PI * (-0.5 * x * x).exp() * normal_cdf_unchecked(sp.lambda * x))
}

/// Skew-normal distribution function.
///
/// Numerically equal to `Φ(x) - 2T(x, λ)`; the lower tail is taken from the
/// reflected survival function so it stays relatively accurate.
pub fn cdf(sp: ShapeParameter, x: f64) -> Result<f64> {
    finite("skew-normal cdf", x)?;
    if sp.regime == Regime::Zero {
        Ok(normal_cdf_unchecked(x))
    } else if x < 0.0 {
        Ok(survival_ln(sp.reflected(), -x).exp())
    } else {
        Ok(1.0 - survival_ln(sp, x).exp())
    }
}

/// `1 - F_λ(x)`, relatively accurate far into the upper tail.
pub fn survival(sp: ShapeParameter, x: f64) -> Result<SurvivalEvaluation> {
    finite("skew-normal survival", x)?;
    let (value, method) = survival_routed(sp, x);
    Ok(SurvivalEvaluation { value, method, x })
}

fn survival_routed(sp: ShapeParameter, x: f64) -> (LogScaledValue, SurvivalMethod) {
    if sp.regime != Regime::Zero && x >= sp.tail_threshold() {
        (tail_route(sp, x), SurvivalMethod::LogTailQuadrature)
    } else {
        (direct_route(sp, x), SurvivalMethod::DirectOwen)
    }
}

/// Log of the survival function, routed as in [`survival`].
pub(crate) fn survival_ln(sp: ShapeParameter, x: f64) -> f64 {
    survival_routed(sp, x).0.ln()
}

/// Survival through Owen's T regardless of the tail threshold.
pub fn survival_direct(sp: ShapeParameter, x: f64) -> Result<LogScaledValue> {
    finite("skew-normal survival", x)?;
    Ok(direct_route(sp, x))
}

/// Survival through the tail integral regardless of the tail threshold.
/// Requires `x > 0`.
pub fn survival_tail(sp: ShapeParameter, x: f64) -> Result<LogScaledValue> {
    finite("skew-normal survival", x)?;
    if x <= 0.0 {
        return Err(Error::Domain {
            what: "survival_tail",
            value: x,
            reason: "the tail integral needs x > 0",
        });
    }
    if sp.regime == Regime::Zero {
        return Ok(LogScaledValue::from_ln(normal_ln_survival(x)));
    }
    Ok(tail_route(sp, x))
}

fn direct_route(sp: ShapeParameter, x: f64) -> LogScaledValue {
    let lambda = sp.lambda;
    match sp.regime {
        Regime::Zero => LogScaledValue::from_ln(normal_ln_survival(x)),
        Regime::Positive if x >= 0.0 => {
            // Q(x) + 2T(x, λ), both on the exp(-x²/2) scale
            let scaled = FRAC_1_SQRT_2PI * mills_ratio(x) + 2.0 * owen_t_scaled(x, lambda);
            LogScaledValue::from_ln(-0.5 * x * x + scaled.ln())
        }
        Regime::Positive => {
            let h = -x;
            let v = normal_cdf_unchecked(h) + 2.0 * (-0.5 * h * h).exp() * owen_t_scaled(h, lambda);
            LogScaledValue::from_value(v)
        }
        Regime::Negative if x >= 0.0 => {
            // Q(x) - 2T(x, |λ|) = 2 [T(x, ∞) - T(x, |λ|)]
            owen_t_complement(x, -lambda)
                .expect("finite arguments")
                .scale(std::f64::consts::LN_2)
        }
        Regime::Negative => {
            let h = -x;
            let v =
                normal_cdf_unchecked(h) - 2.0 * (-0.5 * h * h).exp() * owen_t_scaled(h, -lambda);
            LogScaledValue::from_value(v)
        }
    }
}

fn tail_route(sp: ShapeParameter, x: f64) -> LogScaledValue {
    match sp.regime {
        Regime::Negative => LogScaledValue::from_ln(ln_negative_tail_integral(-sp.lambda, x)),
        Regime::Zero => LogScaledValue::from_ln(normal_ln_survival(x)),
        Regime::Positive => {
            let ln_two_q = std::f64::consts::LN_2 + normal_ln_survival(x);
            let ln_corr = ln_negative_tail_integral(sp.lambda, x);
            LogScaledValue::from_ln(ln_two_q + (-(ln_corr - ln_two_q).exp()).ln_1p())
        }
    }
}

/// `ln ∫_x^∞ 2φ(t)(1 - Φ(a t)) dt` for `a > 0`, `x > 0`.
///
/// With `t = x + s` and `k = 1 + a²` the integrand is
/// `exp(-k x²/2) / π · exp(-k(xs + s²/2)) · M(a(x+s))`, `M` the Mills ratio.
/// The remaining integral is taken by Gauss–Legendre panels over the first
/// `TAIL_EFOLDS` e-foldings; the neglected remainder is below
/// `exp(-TAIL_EFOLDS)` of the leading panel's scale.
pub(crate) fn ln_negative_tail_integral(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x > 0.0);
    let k = 1.0 + a * a;
    let s_max = (TAIL_EFOLDS / (k * x)).min(-x + (x * x + 2.0 * TAIL_EFOLDS / k).sqrt());
    let gl = rule();
    let mut f = |s: f64| (-k * s * (x + 0.5 * s)).exp() * mills_ratio(a * (x + s));
    let integral = gl.composite(&mut f, 0.0, s_max, TAIL_PANELS);
    -0.5 * k * x * x - PI.ln() + integral.ln()
}

/// Order of the tail expansion returned by [`tail_expansion`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionOrder {
    /// Leading term only.
    Leading,
    /// Leading term times `1 + c x^{-2}`.
    WithCorrection,
}

impl ExpansionOrder {
    pub fn from_index(order: u8) -> Result<Self> {
        match order {
            0 => Ok(ExpansionOrder::Leading),
            1 => Ok(ExpansionOrder::WithCorrection),
            _ => Err(Error::Domain {
                what: "tail_expansion",
                value: order as f64,
                reason: "order must be 0 or 1",
            }),
        }
    }
}

/// Large-`x` expansion of `1 - F_λ(x)`.
///
/// * `λ > 0`: `2φ(x)/x · [1 - x^{-2}]`
/// * `λ < 0`: `exp(-(1+λ²)x²/2) / (π|λ|(1+λ²)x²) · [1 - (1+3λ²)/(λ²(1+λ²)) x^{-2}]`
pub fn tail_expansion(sp: ShapeParameter, x: f64, order: ExpansionOrder) -> Result<LogScaledValue> {
    finite("tail_expansion", x)?;
    if sp.regime == Regime::Zero {
        return Err(Error::Regime {
            what: "tail_expansion",
            lambda: sp.lambda,
            reason: "the expansion is stated for lambda != 0",
        });
    }
    if x <= 0.0 {
        return Err(Error::Domain {
            what: "tail_expansion",
            value: x,
            reason: "requires x > 0",
        });
    }
    let l2 = sp.lambda * sp.lambda;
    let k = 1.0 + l2;
    let (ln_lead, coeff) = match sp.regime {
        Regime::Positive => (std::f64::consts::LN_2 + normal_ln_pdf(x) - x.ln(), -1.0),
        _ => (
            -0.5 * k * x * x - (PI * sp.lambda.abs() * k * x * x).ln(),
            -(1.0 + 3.0 * l2) / (l2 * k),
        ),
    };
    let lead = LogScaledValue::from_ln(ln_lead);
    Ok(match order {
        ExpansionOrder::Leading => lead,
        ExpansionOrder::WithCorrection => lead.times(1.0 + coeff / (x * x)),
    })
}

/// Two-sided bracket on `1 - F_λ(x)` for `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MillsBracket {
    pub lower: LogScaledValue,
    pub upper: LogScaledValue,
}

impl MillsBracket {
    /// The lower bound is informative only when positive.
    pub fn lower_positive(&self) -> bool {
        self.lower.is_positive()
    }

    /// Strict containment of a positive log-scaled value.
    pub fn strictly_contains(&self, v: LogScaledValue) -> bool {
        if !v.is_positive() || !self.upper.is_positive() {
            return false;
        }
        let below_upper = v.ln() < self.upper.ln();
        let above_lower = !self.lower.is_positive() || v.ln() > self.lower.ln();
        below_upper && above_lower
    }
}

/// Mills-type bracket for the skew-normal tail, valid for all `x > 0`.
///
/// * `λ > 0`: `2φ(x)/x · [1 - (1 + 1/(λ²√(2πe))) x^{-2}] < 1 - F < 2φ(x)/x`
/// * `λ < 0`: with `U = 2φ(x)φ(λx) / (|λ|(1+λ²)x²)`,
///   `U · [1 - (1+λ²)²/λ² · x^{-2}] < 1 - F < U`
///
/// `λ = 0` is a regime error; use [`normal_mills_bracket`].
pub fn mills_bracket(sp: ShapeParameter, x: f64) -> Result<MillsBracket> {
    finite("mills_bracket", x)?;
    if x <= 0.0 {
        return Err(Error::Domain {
            what: "mills_bracket",
            value: x,
            reason: "requires x > 0",
        });
    }
    let l2 = sp.lambda * sp.lambda;
    let k = 1.0 + l2;
    let (ln_upper, coeff) = match sp.regime {
        Regime::Zero => {
            return Err(Error::Regime {
                what: "mills_bracket",
                lambda: 0.0,
                reason: "use the normal Mills bracket for lambda = 0",
            })
        }
        Regime::Positive => (
            std::f64::consts::LN_2 + normal_ln_pdf(x) - x.ln(),
            1.0 + 1.0 / (l2 * (2.0 * PI * E).sqrt()),
        ),
        Regime::Negative => (
            std::f64::consts::LN_2 + normal_ln_pdf(x) + normal_ln_pdf(sp.lambda * x)
                - (sp.lambda.abs() * k * x * x).ln(),
            k * k / l2,
        ),
    };
    let upper = LogScaledValue::from_ln(ln_upper);
    Ok(MillsBracket {
        lower: upper.times(1.0 - coeff / (x * x)),
        upper,
    })
}

/// `φ(x)/x · (1 - x^{-2}) < 1 - Φ(x) < φ(x)/x` for `x > 0`.
pub fn normal_mills_bracket(x: f64) -> Result<MillsBracket> {
    finite("normal_mills_bracket", x)?;
    if x <= 0.0 {
        return Err(Error::Domain {
            what: "normal_mills_bracket",
            value: x,
            reason: "requires x > 0",
        });
    }
    let upper = LogScaledValue::from_ln(normal_ln_pdf(x) - x.ln());
    Ok(MillsBracket {
        lower: upper.times(1.0 - 1.0 / (x * x)),
        upper,
    })
}

/// Weights of the additive representation `X = δ|U₀| + √(1-δ²) U₁`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Representation {
    delta: f64,
    rest: f64,
}

impl Representation {
    pub(crate) fn new(sp: ShapeParameter) -> Self {
        let root = (1.0 + sp.lambda * sp.lambda).sqrt();
        Self {
            delta: sp.lambda / root,
            rest: 1.0 / root,
        }
    }

    #[inline]
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u0: f64 = rng.sample(StandardNormal);
        let u1: f64 = rng.sample(StandardNormal);
        self.delta * u0.abs() + self.rest * u1
    }
}

/// `count` independent SN(λ) draws, reproducible from `seed`.
pub fn sample(sp: ShapeParameter, count: usize, seed: u64) -> Vec<f64> {
    let rep = Representation::new(sp);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rep.draw(&mut rng)).collect()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn sp(l: f64) -> ShapeParameter {
        ShapeParameter::new(l).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn regime_classification() {
        assert_eq!(sp(-0.3).regime(), Regime::Negative);
        assert_eq!(sp(0.0).regime(), Regime::Zero);
        assert_eq!(sp(-0.0).regime(), Regime::Zero);
        assert_eq!(sp(2.0).regime(), Regime::Positive);
        assert!(ShapeParameter::new(f64::NAN).is_err());
    }

    #[test]
    fn thresholds() {
        assert_eq!(sp(1.0).tail_threshold(), 6.0);
        assert_eq!(sp(0.0).tail_threshold(), 6.0);
        assert_eq!(sp(-2.0).tail_threshold(), 6.0);
        assert_eq!(sp(-0.5).tail_threshold(), 12.0);
    }

    #[test]
    fn pdf_reduces_to_normal_at_zero_shape() {
        for &x in &[-3.0f64, -0.2, 0.0, 1.1, 4.0] {
            let want = FRAC_1_SQRT_2PI * (-0.5 * x * x).exp();
            assert!(rel(pdf(sp(0.0), x).unwrap(), want) < 1e-15);
        }
        assert_eq!(pdf(sp(1.0), 0.0).unwrap(), FRAC_1_SQRT_2PI);
    }

    #[test]
    fn cdf_at_zero_has_arctan_form() {
        assert!((cdf(sp(1.0), 0.0).unwrap() - 0.25).abs() < 1e-15);
        let want = 0.5 + 2f64.atan() / PI;
        assert!((cdf(sp(-2.0), 0.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn unit_shapes_have_closed_forms() {
        // SN(1) is the max of two standard normals: F = Φ², and 1 - F_{-1}(x) = Q(x)².
        for &x in &[-2.0, -0.5, 0.3, 1.0, 3.5, 5.9, 6.0, 9.0, 20.0] {
            let q = normal_ln_survival(x);
            let want_neg = 2.0 * q;
            let got_neg = survival(sp(-1.0), x).unwrap().value.ln();
            assert!(
                (got_neg - want_neg).abs() < 1e-11 * want_neg.abs().max(1.0),
                "x={x}"
            );
            let want_pos = q + (2.0 - q.exp()).ln();
            let got_pos = survival(sp(1.0), x).unwrap().value.ln();
            assert!(
                (got_pos - want_pos).abs() < 1e-11 * want_pos.abs().max(1.0),
                "x={x}"
            );
        }
    }

    #[test]
    fn survival_routes_by_threshold() {
        assert_eq!(
            survival(sp(1.0), 5.9).unwrap().method,
            SurvivalMethod::DirectOwen
        );
        assert_eq!(
            survival(sp(1.0), 6.0).unwrap().method,
            SurvivalMethod::LogTailQuadrature
        );
        assert_eq!(
            survival(sp(-0.5), 11.0).unwrap().method,
            SurvivalMethod::DirectOwen
        );
        assert_eq!(
            survival(sp(-0.5), 12.0).unwrap().method,
            SurvivalMethod::LogTailQuadrature
        );
        assert_eq!(
            survival(sp(0.0), 30.0).unwrap().method,
            SurvivalMethod::DirectOwen
        );
    }

    #[test]
    fn survival_matches_high_precision_tail_values() {
        // ln(1 - F_λ(x)) from 40-digit quadrature
        let cases = [
            (1.0, 10.0, -52.538_137_969_952_525_269),
            (-1.0, 8.0, -70.026_874_319_829_099_791),
            (2.0, 7.0, -26.691_160_318_251_129_933),
            (-3.0, 10.0, -509.154_197_332_504_485_57),
            (-1.0, 20.0, -407.834_310_742_194_527_87),
            (-0.5, 13.0, -111.461_174_231_554_078_28),
            (-5.0, 12.0, -1_882.982_888_833_736_262_7),
            (-0.1, 70.0, -2_481.868_940_797_749_720_4),
            (0.5, 3.0, -5.967_693_026_377_680_720_6),
            (-2.0, 1.0, -6.366_082_394_875_571_620_7),
        ];
        for (l, x, ln_s) in cases {
            let got = survival(sp(l), x).unwrap().value.ln();
            // relative accuracy of the value: absolute accuracy of the log
            assert!((got - ln_s).abs() < 1e-10, "λ={l} x={x}: {got} vs {ln_s}");
        }
    }

    #[test]
    fn tail_expansion_elementary_substitutions() {
        let got = tail_expansion(sp(-1.0), 20.0, ExpansionOrder::Leading).unwrap();
        let want = -400.0 - (PI * 2.0 * 400.0).ln();
        assert!((got.ln() - want).abs() < 1e-12);
        let got = tail_expansion(sp(2.0), 15.0, ExpansionOrder::Leading).unwrap();
        let want = (2.0f64).ln() + normal_ln_pdf(15.0) - 15f64.ln();
        assert!((got.ln() - want).abs() < 1e-12);
    }

    #[test]
    fn tail_expansion_errors() {
        assert!(matches!(
            tail_expansion(sp(0.0), 3.0, ExpansionOrder::Leading),
            Err(Error::Regime { .. })
        ));
        assert!(matches!(
            tail_expansion(sp(1.0), 0.0, ExpansionOrder::Leading),
            Err(Error::Domain { .. })
        ));
        assert!(ExpansionOrder::from_index(2).is_err());
    }

    #[test]
    fn bracket_at_the_zero_lower_bound() {
        // (1+λ²)²/λ² = 4 at λ = -1, so the lower bound vanishes at x = 2
        let b = mills_bracket(sp(-1.0), 2.0).unwrap();
        assert!(!b.lower_positive());
        assert!(b.strictly_contains(survival(sp(-1.0), 2.0).unwrap().value));
        assert!(matches!(
            mills_bracket(sp(0.0), 1.0),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn bracket_contains_survival_at_examples() {
        for &(l, x) in &[(1.0, 5.0), (1.0, 10.0), (-1.0, 8.0), (-3.0, 10.0)] {
            let b = mills_bracket(sp(l), x).unwrap();
            assert!(b.lower_positive());
            assert!(
                b.strictly_contains(survival(sp(l), x).unwrap().value),
                "λ={l} x={x}"
            );
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample(sp(1.5), 100, 7);
        let b = sample(sp(1.5), 100, 7);
        let c = sample(sp(1.5), 100, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample(sp(1.0), 0, 1).is_empty());
    }

    #[test]
    fn tail_integral_matches_normal_squared_at_unit_shape() {
        for &x in &[0.5, 2.0, 6.0, 15.0] {
            let got = ln_negative_tail_integral(1.0, x);
            let want = 2.0 * normal_ln_survival(x);
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "x={x}");
        }
    }
}
