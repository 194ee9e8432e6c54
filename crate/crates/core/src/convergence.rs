//! Distribution of the normalised maximum and its distance to the Gumbel law.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{finite, Error, Result};
use crate::norming::{
    aux_sequences, n_zero, positive_regime_start, solve_constants, NormingConstants,
};
use crate::skew_normal::{cdf, survival_ln, Regime, Representation, ShapeParameter};

/// Gumbel distribution function `Λ(x) = exp(-e^{-x})`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Distribution of `(M_n - b_n)/a_n` for the maximum of `n` SN(λ) draws.
#[derive(Debug, Clone, Copy)]
pub struct MaxModel {
    sp: ShapeParameter,
    nc: NormingConstants,
}

impl MaxModel {
    /// Requires `n ≥ 2`, and `n ≥ n0(λ)` when λ < 0.
    pub fn new(lambda: f64, n: u64) -> Result<Self> {
        let model = Self::unchecked(lambda, n)?;
        if model.sp.regime() == Regime::Negative {
            let n0 = n_zero(lambda)?;
            if n < n0 {
                return Err(Error::BelowNZero {
                    lambda,
                    n: n as f64,
                    n_zero: n0,
                });
            }
        }
        Ok(model)
    }

    /// Any `n ≥ 2`, without the `n0(λ)` guard.
    pub fn unchecked(lambda: f64, n: u64) -> Result<Self> {
        let sp = ShapeParameter::new(lambda)?;
        let nc = solve_constants(lambda, n)?;
        Ok(Self { sp, nc })
    }

    pub fn shape(&self) -> ShapeParameter {
        self.sp
    }

    pub fn constants(&self) -> &NormingConstants {
        &self.nc
    }

    /// `ln Ψ(x)` where `Ψ(x) = 1 - F_λ(a_n x + b_n)`.
    pub fn ln_psi(&self, x: f64) -> f64 {
        survival_ln(self.sp, self.nc.location(x))
    }

    /// `ln F_λ(a_n x + b_n)`, accurate on both sides of the origin.
    pub fn ln_cdf(&self, x: f64) -> f64 {
        let t = self.nc.location(x);
        if t < 0.0 {
            cdf(self.sp, t).map_or(f64::NEG_INFINITY, f64::ln)
        } else {
            let psi = survival_ln(self.sp, t).exp();
            (-psi).ln_1p()
        }
    }

    /// `F_λ^n(a_n x + b_n)` computed as `exp(n ln F)`.
    pub fn max_cdf(&self, x: f64) -> f64 {
        (self.nc.n * self.ln_cdf(x)).exp()
    }

    /// `D(x) = F_λ^n(a_n x + b_n) - Λ(x)`.
    pub fn discrepancy(&self, x: f64) -> f64 {
        self.max_cdf(x) - gumbel_cdf(x)
    }
}

pub fn max_cdf(lambda: f64, n: u64, x: f64) -> Result<f64> {
    finite("max_cdf", x)?;
    Ok(MaxModel::new(lambda, n)?.max_cdf(x))
}

/// Uniform grid size of the sup search.
pub const SEARCH_GRID: usize = 4096;
/// Target x-bracket of the golden-section refinement.
pub const REFINE_TOL: f64 = 1e-8;
/// Widest search window before the search gives up.
pub const MAX_WINDOW_WIDTH: f64 = 2000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub n: u64,
    pub lambda: f64,
    pub a_n: f64,
    pub b_n: f64,
    pub delta_n: f64,
    pub argmax_x: f64,
    /// Signed `D(argmax_x)`.
    pub discrepancy: f64,
    pub delta_times_log_n: f64,
    pub bracket_width: f64,
    pub window: (f64, f64),
}

/// Maximise `f` on `[lo, hi]` by golden-section search until the bracket is
/// narrower than `tol`. Returns `(x, f(x), bracket)`.
pub fn golden_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1, hi - lo)
    } else {
        (x2, f2, hi - lo)
    }
}

/// `Δ_n = sup_x |F_λ^n(a_n x + b_n) - Λ(x)|`.
///
/// Scans [`SEARCH_GRID`] points on `[-2 - ln ln n, 3 + ln n]`, widening a side
/// by half the window width while `|D|` at its endpoint is at least `Δ_n/10`,
/// then refines every grid peak within half of the grid maximum by
/// golden-section search.
pub fn sup_distance(lambda: f64, n: u64) -> Result<DistanceReport> {
    let model = MaxModel::new(lambda, n)?;
    let ln_n = (n as f64).ln();
    let mut lo = -2.0 - ln_n.ln();
    let mut hi = 3.0 + ln_n;
    let abs_d = |x: f64| model.discrepancy(x).abs();
    loop {
        let step = (hi - lo) / (SEARCH_GRID - 1) as f64;
        let xs: Vec<f64> = (0..SEARCH_GRID).map(|i| lo + step * i as f64).collect();
        let ds: Vec<f64> = xs.iter().map(|&x| abs_d(x)).collect();
        let grid_max = ds.iter().cloned().fold(0.0, f64::max);
        let expand_lo = ds[0] >= grid_max / 10.0;
        let expand_hi = ds[SEARCH_GRID - 1] >= grid_max / 10.0;
        if expand_lo || expand_hi {
            let width = hi - lo;
            if width * 1.5 > MAX_WINDOW_WIDTH {
                let endpoint = if expand_lo { lo } else { hi };
                return Err(Error::SearchWindow {
                    lambda,
                    n,
                    lo,
                    hi,
                    endpoint,
                    delta: grid_max,
                });
            }
            if expand_lo {
                lo -= 0.5 * width;
            }
            if expand_hi {
                hi += 0.5 * width;
            }
            continue;
        }
        let mut best = (f64::NAN, -1.0, 0.0);
        for i in 1..SEARCH_GRID - 1 {
            let peak = ds[i] >= ds[i - 1] && ds[i] >= ds[i + 1];
            if !peak || ds[i] < 0.5 * grid_max {
                continue;
            }
            let (x, d, width) = golden_max(abs_d, xs[i - 1], xs[i + 1], REFINE_TOL);
            let (x, d) = if d >= ds[i] { (x, d) } else { (xs[i], ds[i]) };
            if d > best.1 {
                best = (x, d, width);
            }
        }
        let (argmax_x, delta_n, bracket_width) = best;
        let nc = model.constants();
        return Ok(DistanceReport {
            n,
            lambda: nc.lambda,
            a_n: nc.a_n,
            b_n: nc.b_n,
            delta_n,
            argmax_x,
            discrepancy: model.discrepancy(argmax_x),
            delta_times_log_n: delta_n * ln_n,
            bracket_width,
            window: (lo, hi),
        });
    }
}

/// Leading-term profile `P_λ(x)` such that `leading_term = a_n² P_λ(x)`:
///
/// * λ > 0: `Λ(x) e^{-x} (1 + x + x²/2)`
/// * λ < 0: `Λ(x) e^{-x} (1+λ²) ((1+3λ²)/λ² + 2x + x²/2)`
pub fn leading_profile(lambda: f64, x: f64) -> Result<f64> {
    finite("leading_profile", x)?;
    let weight = (-(-x).exp() - x).exp();
    match Regime::of(lambda) {
        Regime::Positive => Ok(weight * (1.0 + x + 0.5 * x * x)),
        Regime::Negative => {
            let l2 = lambda * lambda;
            Ok(weight * (1.0 + l2) * ((1.0 + 3.0 * l2) / l2 + 2.0 * x + 0.5 * x * x))
        }
        Regime::Zero => Err(no_leading_term()),
    }
}

fn no_leading_term() -> Error {
    Error::Regime {
        what: "leading_term",
        lambda: 0.0,
        reason: "no leading term is available for lambda = 0",
    }
}

/// `a_n² P_λ(x)`, the `a_n²`-order term of `F_λ^n(a_n x + b_n) - Λ(x)`.
pub fn leading_term(lambda: f64, n: u64, x: f64) -> Result<f64> {
    if Regime::of(lambda) == Regime::Zero {
        return Err(no_leading_term());
    }
    let nc = solve_constants(lambda, n)?;
    Ok(nc.a_n * nc.a_n * leading_profile(lambda, x)?)
}

/// `M_λ = sup_x |P_λ(x)|`, cached per λ.
pub fn leading_sup(lambda: f64) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite {
            what: "leading_sup",
            value: lambda,
        });
    }
    if Regime::of(lambda) == Regime::Zero {
        return Err(no_leading_term());
    }
    static CACHE: OnceLock<RwLock<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = lambda.to_bits();
    if let Some(&m) = cache.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(m);
    }
    let profile = |x: f64| leading_profile(lambda, x).map_or(0.0, f64::abs);
    let (lo, hi, points) = (-5.0, 40.0, 4501);
    let step = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, profile(lo));
    for i in 1..points {
        let x = lo + step * i as f64;
        let v = profile(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let (_, m, _) = golden_max(profile, best.0 - step, best.0 + step, 1e-12);
    let m = m.max(best.1);
    cache
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, m);
    Ok(m)
}

/// Outcome of one bounded proof quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl CheckStatus {
    fn of(applicable: bool, holds: bool) -> Self {
        match (applicable, holds) {
            (false, _) => CheckStatus::NotApplicable,
            (true, true) => CheckStatus::Pass,
            (true, false) => CheckStatus::Fail,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::NotApplicable => "n/a",
        }
    }
}

/// Bound on `Ψ` for λ > 0 (n ≥ 9, x > -c_n).
pub const PSI_BOUND_POSITIVE: f64 = 0.1887;
/// Bound on `R / a_n²` for λ > 0 (n ≥ 9, x > -c_n).
pub const R_BOUND_POSITIVE: f64 = 0.39;
/// Bound on `Ψ` for λ < 0 (n ≥ n0, x > -d_n).
pub const PSI_BOUND_NEGATIVE: f64 = 0.332667;

/// Quantities of the decomposition `F^n = Λ · A · B`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofDiagnostics {
    pub lambda: f64,
    pub n: u64,
    pub x: f64,
    /// `Ψ = 1 - F_λ(a_n x + b_n)`.
    pub psi: crate::special_fn::LogScaledValue,
    /// `R = -n ln F - nΨ`.
    pub r: f64,
    /// `h = -nΨ + e^{-x}`.
    pub h: f64,
    /// `A = e^h`.
    pub a_big: f64,
    /// `B = e^{-R}`.
    pub b_big: f64,
    pub max_cdf: f64,
    /// `|Λ A B / F^n - 1|`, evaluated in log space.
    pub identity_rel_error: f64,
    /// `c_n` (λ > 0) or `d_n` (λ < 0) when defined.
    pub aux: Option<f64>,
    pub psi_check: CheckStatus,
    pub r_check: CheckStatus,
    /// `0 ≤ R ≤ nΨ²/(2(1-Ψ))`.
    pub r_bracket: CheckStatus,
}

// -ln(1-p) - p, accurate for small p
fn log1m_excess(p: f64) -> f64 {
    if p < 1e-3 {
        let mut term = p;
        let mut sum = 0.0;
        for k in 2..12 {
            term *= p;
            sum += term / k as f64;
        }
        sum
    } else {
        -(-p).ln_1p() - p
    }
}

pub fn proof_diagnostics(lambda: f64, n: u64, x: f64) -> Result<ProofDiagnostics> {
    finite("proof_diagnostics", x)?;
    let model = MaxModel::unchecked(lambda, n)?;
    let nc = *model.constants();
    let nf = n as f64;
    let ln_psi = model.ln_psi(x);
    let psi = ln_psi.exp();
    let ln_f = model.ln_cdf(x);
    let r = if model.constants().location(x) >= 0.0 {
        nf * log1m_excess(psi)
    } else {
        -nf * ln_f - nf * psi
    };
    let e_neg_x = (-x).exp();
    let h = -nf * psi + e_neg_x;
    let ln_fn = nf * ln_f;
    let ln_product = -e_neg_x + h - r;
    let identity_rel_error = (ln_product - ln_fn).exp_m1().abs();

    let (aux, applicable) = match nc.regime {
        Regime::Positive => {
            let aux = aux_sequences(&nc).ok().map(|a| a.value());
            let ok = n >= positive_regime_start() && aux.is_some_and(|c| x > -c);
            (aux, ok)
        }
        Regime::Negative => {
            let aux = aux_sequences(&nc).ok().map(|a| a.value());
            let ok = n >= n_zero(lambda)? && aux.is_some_and(|d| x > -d);
            (aux, ok)
        }
        Regime::Zero => (None, false),
    };
    let (psi_check, r_check) = match nc.regime {
        Regime::Positive => (
            CheckStatus::of(applicable, psi < PSI_BOUND_POSITIVE),
            CheckStatus::of(applicable, r < R_BOUND_POSITIVE * nc.a_n * nc.a_n),
        ),
        Regime::Negative => (
            CheckStatus::of(applicable, psi < PSI_BOUND_NEGATIVE),
            CheckStatus::NotApplicable,
        ),
        Regime::Zero => (CheckStatus::NotApplicable, CheckStatus::NotApplicable),
    };
    // once Ψ < ε both sides are nΨ²/2 up to rounding
    let r_upper = nf * psi * psi / (2.0 * (1.0 - psi));
    let r_bracket = CheckStatus::of(
        psi < 1.0,
        r >= 0.0 && r <= r_upper * (1.0 + 4.0 * f64::EPSILON),
    );
    Ok(ProofDiagnostics {
        lambda: nc.lambda,
        n,
        x,
        psi: crate::special_fn::LogScaledValue::from_ln(ln_psi),
        r,
        h,
        a_big: h.exp(),
        b_big: (-r).exp(),
        max_cdf: ln_fn.exp(),
        identity_rel_error,
        aux,
        psi_check,
        r_check,
        r_bracket,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSummary {
    /// `min Δ_n log n`, an empirical lower band constant.
    pub k1: f64,
    /// `max Δ_n log n`, an empirical upper band constant.
    pub k2: f64,
    /// `k2 / k1`.
    pub band_ratio: f64,
    /// Largest `|Δ_n / (a_n² M_λ) - 1|` over points with `n ≥ n_max/10`.
    pub top_decade_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub lambda: f64,
    pub points: Vec<DistanceReport>,
    /// `a_n² M_λ` per point; `None` for λ = 0.
    pub predicted: Vec<Option<f64>>,
    pub summary: RateSummary,
}

/// Sup distances over a strictly increasing grid, computed in parallel.
pub fn rate_curve(lambda: f64, n_grid: &[u64]) -> Result<RateCurve> {
    if n_grid.is_empty() {
        return Err(Error::Grid("empty n-grid".into()));
    }
    if let Some(w) = n_grid.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Grid(format!(
            "n-grid must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    let points = n_grid
        .par_iter()
        .map(|&n| sup_distance(lambda, n))
        .collect::<Result<Vec<_>>>()?;
    let m = match Regime::of(lambda) {
        Regime::Zero => None,
        _ => Some(leading_sup(lambda)?),
    };
    let predicted: Vec<Option<f64>> = points
        .iter()
        .map(|p| m.map(|m| p.a_n * p.a_n * m))
        .collect();
    let scaled = points.iter().map(|p| p.delta_times_log_n);
    let k1 = scaled.clone().fold(f64::INFINITY, f64::min);
    let k2 = scaled.fold(0.0, f64::max);
    let n_max = *n_grid.last().unwrap() as f64;
    let top_decade_deviation = m.map(|_| {
        points
            .iter()
            .zip(&predicted)
            .filter(|(p, _)| p.n as f64 >= n_max / 10.0)
            .filter_map(|(p, q)| q.map(|q| (p.delta_n / q - 1.0).abs()))
            .fold(0.0, f64::max)
    });
    Ok(RateCurve {
        lambda,
        points,
        predicted,
        summary: RateSummary {
            k1,
            k2,
            band_ratio: k2 / k1,
            top_decade_deviation,
        },
    })
}

/// Largest `reps * n` accepted by [`monte_carlo_check`].
pub const MONTE_CARLO_LIMIT: u128 = 20_000_000_000;

/// Normalised maxima `(M_n - b_n)/a_n` for `reps` independent blocks.
///
/// Block `r` draws from a ChaCha8 stream selected by `(seed, r)`, so the
/// output does not depend on how blocks are scheduled.
pub fn normalized_maxima(lambda: f64, n: u64, reps: usize, seed: u64) -> Result<Vec<f64>> {
    let requested = reps as u128 * n as u128;
    if requested > MONTE_CARLO_LIMIT {
        return Err(Error::ResourceCap {
            requested,
            limit: MONTE_CARLO_LIMIT,
        });
    }
    let model = MaxModel::new(lambda, n)?;
    let nc = *model.constants();
    let rep = Representation::new(model.shape());
    Ok((0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut max = f64::NEG_INFINITY;
            for _ in 0..n {
                max = max.max(rep.draw(&mut rng));
            }
            (max - nc.b_n) / nc.a_n
        })
        .collect())
}

/// Kolmogorov–Smirnov distance between a sample and Λ.
pub fn ks_to_gumbel(mut sample: Vec<f64>) -> f64 {
    sample.sort_by(f64::total_cmp);
    let m = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let g = gumbel_cdf(z);
            ((i + 1) as f64 / m - g).max(g - i as f64 / m)
        })
        .fold(0.0, f64::max)
}

/// DKW half-width `√(ln(2/α) / (2m))`.
pub fn dkw_margin(m: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * m as f64)).sqrt()
}

/// KS distance between `reps` simulated normalised maxima and Λ.
pub fn monte_carlo_check(lambda: f64, n: u64, reps: usize, seed: u64) -> Result<f64> {
    if reps < 1000 {
        return Err(Error::Domain {
            what: "monte_carlo_check",
            value: reps as f64,
            reason: "requires reps >= 1000",
        });
    }
    Ok(ks_to_gumbel(normalized_maxima(lambda, n, reps, seed)?))
}
