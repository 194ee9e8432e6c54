//! Norming constants `a_n`, `b_n` for skew-normal maxima.
//!
//! Each regime defines `b_n` implicitly:
//!
//! | regime | defining equation                                  | scale `a_n`         |
//! |--------|----------------------------------------------------|---------------------|
//! | λ > 0  | `√(π/2) · b · exp(b²/2) = n`                       | `1/b`               |
//! | λ < 0  | `π|λ|(1+λ²) · b² · exp((1+λ²)b²/2) = n`            | `1/((1+λ²) b)`      |
//! | λ = 0  | `2π · b² · exp(b²) = n²`                           | `1/b`               |
//!
//! All three reduce to Lambert W: `b² = W(2n²/π)`, `(1+λ²)b²/2 = W(n/(2π|λ|))`
//! and `b² = W(n²/(2π))` respectively. The closed form is polished by one
//! Newton step on the log of the defining equation and the relative defect is
//! reported as `residual`.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::skew_normal::Regime;
use crate::special_fn::lambert_w0;

/// Whether a constant set was solved at an integer sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSize {
    Integer,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormingConstants {
    pub n: f64,
    pub sample_size: SampleSize,
    pub lambda: f64,
    pub regime: Regime,
    pub b_n: f64,
    pub a_n: f64,
    /// Relative defect of the defining equation at the returned `b_n`.
    pub residual: f64,
}

impl NormingConstants {
    /// `1 + λ²` for the negative regime, `1` otherwise.
    pub fn tail_factor(&self) -> f64 {
        match self.regime {
            Regime::Negative => 1.0 + self.lambda * self.lambda,
            _ => 1.0,
        }
    }

    /// `u = (1+λ²) b_n²`, the argument of the auxiliary logarithms.
    pub fn scaled_b_squared(&self) -> f64 {
        self.tail_factor() * self.b_n * self.b_n
    }

    /// Affine normalisation `a_n x + b_n`.
    #[inline]
    pub fn location(&self, x: f64) -> f64 {
        self.a_n.mul_add(x, self.b_n)
    }

    /// Log of the defining equation, `ln(lhs) - ln(rhs)`, at `b`.
    pub fn log_defect(&self, b: f64) -> f64 {
        log_defect(self.regime, self.lambda, self.n, b)
    }
}

fn log_defect(regime: Regime, lambda: f64, n: f64, b: f64) -> f64 {
    match regime {
        Regime::Positive => 0.5 * (0.5 * PI).ln() + b.ln() + 0.5 * b * b - n.ln(),
        Regime::Negative => {
            let k = 1.0 + lambda * lambda;
            (PI * lambda.abs() * k).ln() + 2.0 * b.ln() + 0.5 * k * b * b - n.ln()
        }
        // half the log of 2π b² e^{b²} / n²
        Regime::Zero => 0.5 * (2.0 * PI).ln() + b.ln() + 0.5 * b * b - n.ln(),
    }
}

fn log_defect_slope(regime: Regime, lambda: f64, b: f64) -> f64 {
    match regime {
        Regime::Positive | Regime::Zero => 1.0 / b + b,
        Regime::Negative => 2.0 / b + (1.0 + lambda * lambda) * b,
    }
}

/// Constants at an integer sample size `n ≥ 2`.
pub fn solve_constants(lambda: f64, n: u64) -> Result<NormingConstants> {
    if n < 2 {
        return Err(Error::Domain {
            what: "solve_constants",
            value: n as f64,
            reason: "requires n >= 2",
        });
    }
    let mut nc = solve_constants_real(lambda, n as f64)?;
    nc.sample_size = SampleSize::Integer;
    Ok(nc)
}

/// Constants at a real sample size `n ≥ 2`, for smooth curves.
pub fn solve_constants_real(lambda: f64, n: f64) -> Result<NormingConstants> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite {
            what: "solve_constants",
            value: lambda,
        });
    }
    if !n.is_finite() || n < 2.0 {
        return Err(Error::Domain {
            what: "solve_constants",
            value: n,
            reason: "requires finite n >= 2",
        });
    }
    let regime = Regime::of(lambda);
    let k = 1.0 + lambda * lambda;
    let b0 = match regime {
        Regime::Positive => lambert_w0(2.0 * n * n / PI)?.sqrt(),
        Regime::Negative => (2.0 * lambert_w0(n / (2.0 * PI * lambda.abs()))? / k).sqrt(),
        Regime::Zero => lambert_w0(n * n / (2.0 * PI))?.sqrt(),
    };
    let g = log_defect(regime, lambda, n, b0);
    let b_n = b0 - g / log_defect_slope(regime, lambda, b0);
    let g = log_defect(regime, lambda, n, b_n);
    let residual = match regime {
        Regime::Zero => (2.0 * g).exp_m1(),
        _ => g.exp_m1(),
    };
    let a_n = match regime {
        Regime::Negative => 1.0 / (k * b_n),
        _ => 1.0 / b_n,
    };
    Ok(NormingConstants {
        n,
        sample_size: SampleSize::Real,
        lambda: if lambda == 0.0 { 0.0 } else { lambda },
        regime,
        b_n,
        a_n,
        residual,
    })
}

/// The auxiliary sequence that bounds the central region of the sup search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AuxSequence {
    /// `c_n = ln ln b_n²` (λ > 0).
    C(f64),
    /// `d_n = ln ln[(1+λ²) b_n²]` (λ < 0).
    D(f64),
}

impl AuxSequence {
    pub fn value(&self) -> f64 {
        match *self {
            AuxSequence::C(v) | AuxSequence::D(v) => v,
        }
    }
}

/// `c_n` or `d_n` for the regime of `nc`.
///
/// Fails with [`Error::BelowNZero`] when the inner logarithm is ≤ 1, i.e.
/// when the sequence would not be positive.
pub fn aux_sequences(nc: &NormingConstants) -> Result<AuxSequence> {
    let inner = nc.scaled_b_squared().ln();
    let below = inner <= 1.0;
    match nc.regime {
        Regime::Zero => Err(Error::Regime {
            what: "aux_sequences",
            lambda: 0.0,
            reason: "c_n and d_n belong to the skewed regimes",
        }),
        Regime::Positive if below => Err(Error::BelowNZero {
            lambda: nc.lambda,
            n: nc.n,
            n_zero: positive_regime_start(),
        }),
        Regime::Negative if below => Err(Error::BelowNZero {
            lambda: nc.lambda,
            n: nc.n,
            n_zero: n_zero(nc.lambda)?,
        }),
        Regime::Positive => Ok(AuxSequence::C(inner.ln())),
        Regime::Negative => Ok(AuxSequence::D(inner.ln())),
    }
}

/// Smallest integer `n ≥ 2` with `d_n > 0` (λ < 0).
///
/// `d_n > 0` iff `(1+λ²) b_n² > e`, and the defining equation is monotone in
/// `b_n`, so the threshold is `n > π|λ| e^{1+e/2}`. The candidate from that
/// closed form is confirmed against the solved constants.
pub fn n_zero(lambda: f64) -> Result<u64> {
    if lambda.is_nan() || lambda >= 0.0 {
        return Err(Error::Regime {
            what: "n_zero",
            lambda,
            reason: "n0 is defined for lambda < 0",
        });
    }
    let estimate = PI * lambda.abs() * (1.0 + 0.5 * E).exp();
    let mut n = (estimate.floor() as u64 + 1).max(2);
    let positive = |n: u64| -> Result<bool> {
        let nc = solve_constants(lambda, n)?;
        Ok(nc.scaled_b_squared() > E)
    };
    while !positive(n)? {
        n += 1;
    }
    while n > 2 && positive(n - 1)? {
        n -= 1;
    }
    Ok(n)
}

/// Smallest `n` with `c_n > 0` in the positive regime (`b_n² > e`).
pub fn positive_regime_start() -> u64 {
    // b_n² > e  <=>  2n²/π > e·e^e
    let n = (0.5 * PI * E * E.exp()).sqrt().floor() as u64 + 1;
    n.max(2)
}

/// Strictly increasing integer grid `start, start·r, start·r², …` capped by
/// and ending at `stop`.
pub fn geometric_grid(start: u64, stop: u64, ratio: f64) -> Result<Vec<u64>> {
    if !ratio.is_finite() || ratio <= 1.0 {
        return Err(Error::Grid(format!("ratio must exceed 1, got {ratio}")));
    }
    if start > stop {
        return Err(Error::Grid(format!("start {start} exceeds stop {stop}")));
    }
    let mut grid = vec![start];
    let mut value = start as f64;
    loop {
        value *= ratio;
        let n = value.round();
        if n > stop as f64 * (1.0 + 1e-12) {
            break;
        }
        let n = n as u64;
        if n > *grid.last().unwrap() {
            grid.push(n.min(stop));
        }
    }
    if *grid.last().unwrap() < stop {
        grid.push(stop);
    }
    Ok(grid)
}

/// One bounded quantity of the bound suite.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub expression: &'static str,
    pub bound: f64,
    pub start_n: u64,
    pub points: usize,
    pub max_observed: Option<f64>,
    pub argmax_n: Option<u64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub lambda: f64,
    pub n_max: u64,
    pub grid_ratio: f64,
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Ratio of the geometric n-grid used by [`bound_suite`].
pub const BOUND_GRID_RATIO: f64 = 1.1;

type Quantity = fn(&NormingConstants) -> f64;

struct BoundDef {
    expression: &'static str,
    bound: f64,
    from_n_zero: bool,
    quantity: Quantity,
}

fn ln_u(nc: &NormingConstants) -> f64 {
    nc.scaled_b_squared().ln()
}

fn positive_bounds() -> [BoundDef; 5] {
    [
        BoundDef {
            expression: "(1 - a_n^2 c_n)^-1",
            bound: 1.11,
            from_n_zero: true,
            quantity: |nc| 1.0 / (1.0 - nc.a_n * nc.a_n * ln_u(nc).ln()),
        },
        BoundDef {
            expression: "a_n^2 log b_n^2",
            bound: 0.37,
            from_n_zero: true,
            quantity: |nc| nc.a_n * nc.a_n * ln_u(nc),
        },
        BoundDef {
            expression: "a_n^2 (log b_n^2)^2",
            bound: 0.55,
            from_n_zero: true,
            quantity: |nc| nc.a_n * nc.a_n * ln_u(nc).powi(2),
        },
        BoundDef {
            expression: "n^-1 log b_n^2",
            bound: 0.17,
            from_n_zero: true,
            quantity: |nc| ln_u(nc) / nc.n,
        },
        BoundDef {
            expression: "b_n^3 exp(-b_n^2/2)",
            bound: 1.16,
            from_n_zero: true,
            quantity: |nc| nc.b_n.powi(3) * (-0.5 * nc.b_n * nc.b_n).exp(),
        },
    ]
}

fn negative_bounds() -> [BoundDef; 5] {
    // (1+λ²) a_n² = 1/u with u = (1+λ²) b_n²
    [
        BoundDef {
            expression: "[1 - (1+l^2) a_n^2 d_n]^-1",
            bound: 1.11,
            from_n_zero: true,
            quantity: |nc| {
                let u = nc.scaled_b_squared();
                1.0 / (1.0 - u.ln().ln() / u)
            },
        },
        BoundDef {
            expression: "(1+l^2) a_n^2 log[(1+l^2) b_n^2]",
            bound: 0.37,
            from_n_zero: false,
            quantity: |nc| ln_u(nc) / nc.scaled_b_squared(),
        },
        BoundDef {
            expression: "(1+l^2) a_n^2 (log[(1+l^2) b_n^2])^2",
            bound: 0.55,
            from_n_zero: true,
            quantity: |nc| ln_u(nc).powi(2) / nc.scaled_b_squared(),
        },
        BoundDef {
            expression: "n^-1 log[(1+l^2) b_n^2]",
            bound: 0.27,
            from_n_zero: false,
            quantity: |nc| ln_u(nc) / nc.n,
        },
        BoundDef {
            expression: "(1+l^2) b_n^2 exp(-(1+l^2) b_n^2 / 2)",
            bound: 0.74,
            from_n_zero: false,
            quantity: |nc| {
                let u = nc.scaled_b_squared();
                u * (-0.5 * u).exp()
            },
        },
    ]
}

/// Evaluate the five numeric bounds of the regime of `lambda` on a geometric
/// grid (ratio [`BOUND_GRID_RATIO`]) up to `n_max`.
///
/// λ > 0 quantities start at n = 9. For λ < 0 the quantities involving `d_n`
/// or the squared logarithm start at `n0(λ)`, the rest at n = 2. The report
/// records a finite grid; it is not a proof of the supremum.
pub fn bound_suite(lambda: f64, n_max: u64) -> Result<BoundReport> {
    if n_max < 9 {
        return Err(Error::Domain {
            what: "bound_suite",
            value: n_max as f64,
            reason: "requires n_max >= 9",
        });
    }
    let (defs, first) = match Regime::of(lambda) {
        Regime::Positive => (positive_bounds(), positive_regime_start()),
        Regime::Negative => (negative_bounds(), n_zero(lambda)?),
        Regime::Zero => {
            return Err(Error::Regime {
                what: "bound_suite",
                lambda,
                reason: "the bound suite covers the skewed regimes",
            })
        }
    };
    let mut checks = Vec::with_capacity(defs.len());
    for def in defs {
        let start = if def.from_n_zero { first } else { 2 };
        let mut max: Option<(f64, u64)> = None;
        let mut points = 0;
        if start <= n_max {
            for n in geometric_grid(start, n_max, BOUND_GRID_RATIO)? {
                let nc = solve_constants(lambda, n)?;
                let q = (def.quantity)(&nc);
                points += 1;
                if max.is_none_or(|(m, _)| q > m) {
                    max = Some((q, n));
                }
            }
        }
        checks.push(BoundCheck {
            expression: def.expression,
            bound: def.bound,
            start_n: start,
            points,
            max_observed: max.map(|m| m.0),
            argmax_n: max.map(|m| m.1),
            passed: max.is_none_or(|(m, _)| m < def.bound),
        });
    }
    Ok(BoundReport {
        lambda,
        n_max,
        grid_ratio: BOUND_GRID_RATIO,
        checks,
    })
}
