//! One function per subcommand. Each returns the rendered table and whether
//! the command's own pass/fail criterion held.

use snevt_core::convergence::{
    dkw_margin, leading_sup, monte_carlo_check, proof_diagnostics, rate_curve, sup_distance,
    CheckStatus, DistanceReport, RateCurve, PSI_BOUND_NEGATIVE, PSI_BOUND_POSITIVE,
    R_BOUND_POSITIVE,
};
use snevt_core::norming::{
    aux_sequences, bound_suite, geometric_grid, n_zero, positive_regime_start, solve_constants,
    AuxSequence, SampleSize,
};
use snevt_core::skew_normal::{
    cdf, mills_bracket, normal_mills_bracket, pdf, survival, tail_expansion, ExpansionOrder,
    MillsBracket, Regime, ShapeParameter,
};
use snevt_core::special_fn::normal_survival;
use snevt_core::Error;

use crate::error::CliError;
use crate::output::{Cell, Table};
use crate::svg::{line_chart, Series};

pub struct Outcome {
    pub table: Table,
    pub params: Vec<(&'static str, Cell)>,
    pub passed: bool,
}

pub const CONSTANTS_COLUMNS: &[&str] = &[
    "lambda",
    "regime",
    "n",
    "sample_size",
    "a_n",
    "b_n",
    "residual",
    "aux_name",
    "aux_value",
    "n_zero",
    "b_at_n_zero",
    "note",
];

pub fn constants(lambda: f64, grid: &[u64]) -> Result<Outcome, CliError> {
    let mut table = Table::new(CONSTANTS_COLUMNS);
    let regime = Regime::of(lambda);
    let threshold = match regime {
        Regime::Negative => Some(n_zero(lambda)?),
        Regime::Positive => Some(positive_regime_start()),
        Regime::Zero => None,
    };
    // any admissible lower constant for b_n on n >= n0 lies below this value
    let b_at_threshold = match threshold {
        Some(n0) => Some(solve_constants(lambda, n0)?.b_n),
        None => None,
    };
    for &n in grid {
        let nc = solve_constants(lambda, n)?;
        let (name, value, note) = match aux_sequences(&nc) {
            Ok(AuxSequence::C(c)) => ("c_n", Some(c), String::new()),
            Ok(AuxSequence::D(d)) => ("d_n", Some(d), String::new()),
            Err(Error::BelowNZero { n_zero, .. }) => {
                let name = if regime == Regime::Negative {
                    "d_n"
                } else {
                    "c_n"
                };
                let note = format!("below n0({lambda}) = {n_zero}");
                eprintln!("snevt: n = {n} is {note}; {name} is not positive there");
                (name, None, note)
            }
            Err(Error::Regime { .. }) => ("", None, String::new()),
            Err(e) => return Err(e.into()),
        };
        let sample_size = match nc.sample_size {
            SampleSize::Integer => "integer",
            SampleSize::Real => "real",
        };
        table.push(vec![
            lambda.into(),
            regime.as_str().into(),
            n.into(),
            sample_size.into(),
            nc.a_n.into(),
            nc.b_n.into(),
            nc.residual.into(),
            name.into(),
            value.into(),
            threshold.into(),
            b_at_threshold.into(),
            note.into(),
        ]);
    }
    Ok(Outcome {
        table,
        params: vec![("lambda", lambda.into()), ("n", grid_cell(grid))],
        passed: true,
    })
}

pub const DIST_COLUMNS: &[&str] = &[
    "lambda",
    "x",
    "pdf",
    "cdf",
    "survival",
    "ln_survival",
    "method",
    "expansion_order",
    "ln_expansion",
    "ln_bracket_lower",
    "ln_bracket_upper",
    "inside_bracket",
];

pub fn dist(lambda: f64, xs: &[f64], expansion: Option<u8>) -> Result<Outcome, CliError> {
    let sp = ShapeParameter::new(lambda)?;
    let order = expansion.map(ExpansionOrder::from_index).transpose()?;
    let mut table = Table::new(DIST_COLUMNS);
    for &x in xs {
        let s = survival(sp, x)?;
        // the expansion is a large-x statement; other points get an empty cell
        let ln_expansion = match order {
            Some(o) if x > 0.0 => Some(tail_expansion(sp, x, o)?.ln()),
            _ => None,
        };
        let bracket: Option<MillsBracket> = if x > 0.0 {
            Some(match sp.regime() {
                Regime::Zero => normal_mills_bracket(x)?,
                _ => mills_bracket(sp, x)?,
            })
        } else {
            None
        };
        let lower = bracket
            .filter(MillsBracket::lower_positive)
            .map(|b| b.lower.ln());
        table.push(vec![
            lambda.into(),
            x.into(),
            pdf(sp, x)?.into(),
            cdf(sp, x)?.into(),
            s.value.value().into(),
            s.value.ln().into(),
            s.method.as_str().into(),
            expansion.map(u64::from).into(),
            ln_expansion.into(),
            lower.into(),
            bracket.map(|b| b.upper.ln()).into(),
            bracket.map(|b| b.strictly_contains(s.value)).into(),
        ]);
    }
    let mut params = vec![("lambda", lambda.into()), ("x", Cell::Text(join(xs)))];
    params.push(("expansion", expansion.map(u64::from).into()));
    Ok(Outcome {
        table,
        params,
        passed: true,
    })
}

pub const DISTANCE_COLUMNS: &[&str] = &[
    "lambda",
    "n",
    "a_n",
    "b_n",
    "delta_n",
    "argmax_x",
    "discrepancy",
    "delta_times_log_n",
    "bracket_width",
    "window_lo",
    "window_hi",
    "predicted",
    "ratio",
];

fn distance_row(r: &DistanceReport, predicted: Option<f64>) -> Vec<Cell> {
    vec![
        r.lambda.into(),
        r.n.into(),
        r.a_n.into(),
        r.b_n.into(),
        r.delta_n.into(),
        r.argmax_x.into(),
        r.discrepancy.into(),
        r.delta_times_log_n.into(),
        r.bracket_width.into(),
        r.window.0.into(),
        r.window.1.into(),
        predicted.into(),
        predicted.map(|p| r.delta_n / p).into(),
    ]
}

fn predicted_for(lambda: f64, a_n: f64) -> Result<Option<f64>, CliError> {
    Ok(match Regime::of(lambda) {
        Regime::Zero => None,
        _ => Some(a_n * a_n * leading_sup(lambda)?),
    })
}

pub fn maxdist(lambda: f64, n: u64) -> Result<Outcome, CliError> {
    let r = sup_distance(lambda, n)?;
    let mut table = Table::new(DISTANCE_COLUMNS);
    let predicted = predicted_for(lambda, r.a_n)?;
    table.push(distance_row(&r, predicted));
    Ok(Outcome {
        table,
        params: vec![("lambda", lambda.into()), ("n", n.into())],
        passed: true,
    })
}

pub fn ratecurve(lambda: f64, grid: &[u64]) -> Result<(Outcome, RateCurve), CliError> {
    let curve = rate_curve(lambda, grid)?;
    let mut table = Table::new(DISTANCE_COLUMNS);
    for (p, q) in curve.points.iter().zip(&curve.predicted) {
        table.push(distance_row(p, *q));
    }
    let m = match Regime::of(lambda) {
        Regime::Zero => None,
        _ => Some(leading_sup(lambda)?),
    };
    let s = &curve.summary;
    table.summary = vec![
        ("k1", s.k1.into()),
        ("k2", s.k2.into()),
        ("band_ratio", s.band_ratio.into()),
        ("top_decade_deviation", s.top_decade_deviation.into()),
        ("m_lambda", m.into()),
    ];
    let outcome = Outcome {
        table,
        params: vec![("lambda", lambda.into()), ("n_grid", grid_cell(grid))],
        passed: true,
    };
    Ok((outcome, curve))
}

/// SVG of `Δ_n log n` and `Δ_n / (a_n² M_λ)` against n on a log axis.
pub fn rate_plot(curve: &RateCurve) -> String {
    let scaled = Series {
        label: "delta_n * log n",
        color: "#1f77b4",
        points: curve
            .points
            .iter()
            .map(|p| (p.n as f64, p.delta_times_log_n))
            .collect(),
    };
    let ratio = Series {
        label: "delta_n / (a_n^2 M)",
        color: "#d62728",
        points: curve
            .points
            .iter()
            .zip(&curve.predicted)
            .filter_map(|(p, q)| q.map(|q| (p.n as f64, p.delta_n / q)))
            .collect(),
    };
    let title = format!(
        "Uniform distance to the Gumbel law, lambda = {}",
        curve.lambda
    );
    line_chart(&title, "n", &[scaled, ratio])
}

pub const VERIFY_COLUMNS: &[&str] = &[
    "family",
    "lambda",
    "expression",
    "bound",
    "points",
    "failures",
    "worst",
    "witness_n",
    "witness_x",
    "status",
];

/// One battery entry, accumulated over its grid.
struct Entry {
    family: &'static str,
    lambda: f64,
    expression: String,
    bound: Option<f64>,
    points: u64,
    failures: u64,
    worst: Option<f64>,
    witness: (Option<u64>, Option<f64>),
}

impl Entry {
    fn new(
        family: &'static str,
        lambda: f64,
        expression: impl Into<String>,
        bound: Option<f64>,
    ) -> Self {
        Self {
            family,
            lambda,
            expression: expression.into(),
            bound,
            points: 0,
            failures: 0,
            worst: None,
            witness: (None, None),
        }
    }

    /// Records one evaluation; the witness is the first failure or, while
    /// everything passes, the point attaining `worst`.
    fn record(&mut self, holds: bool, value: f64, n: Option<u64>, x: Option<f64>) {
        self.points += 1;
        let worse = self.worst.is_none_or(|w| value > w);
        if worse {
            self.worst = Some(value);
        }
        if !holds {
            if self.failures == 0 {
                self.witness = (n, x);
            }
            self.failures += 1;
        } else if self.failures == 0 && worse {
            self.witness = (n, x);
        }
    }

    fn passed(&self) -> bool {
        self.points > 0 && self.failures == 0
    }

    fn row(&self) -> Vec<Cell> {
        vec![
            self.family.into(),
            self.lambda.into(),
            self.expression.clone().into(),
            self.bound.into(),
            self.points.into(),
            self.failures.into(),
            self.worst.into(),
            self.witness.0.into(),
            self.witness.1.into(),
            if self.passed() { "pass" } else { "fail" }.into(),
        ]
    }
}

const BRACKET_SHAPES: [f64; 8] = [-5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0];
const BRACKET_POINTS: usize = 2000;

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Margin of `v` inside the bracket in log units; negative when outside.
fn bracket_margin(b: &MillsBracket, v: f64) -> f64 {
    let upper = b.upper.ln() - v;
    if b.lower_positive() {
        upper.min(v - b.lower.ln())
    } else {
        upper
    }
}

fn bracket_entries() -> Result<Vec<Entry>, CliError> {
    let grid = log_grid(0.5, 50.0, BRACKET_POINTS);
    let mut entries = Vec::new();
    // worst is minus the smallest log margin, so a pass needs worst < 0
    let mut normal = Entry::new(
        "bracket",
        0.0,
        "phi(x)/x (1 - x^-2) < 1 - Phi(x) < phi(x)/x",
        Some(0.0),
    );
    for &x in &grid {
        let b = normal_mills_bracket(x)?;
        if b.lower_positive() {
            let v = normal_survival(x)?;
            normal.record(
                b.strictly_contains(v),
                -bracket_margin(&b, v.ln()),
                None,
                Some(x),
            );
        }
    }
    entries.push(normal);
    for &lambda in &BRACKET_SHAPES {
        let sp = ShapeParameter::new(lambda)?;
        let expression = if lambda > 0.0 {
            "2phi(x)/x [1 - (1 + 1/(l^2 sqrt(2 pi e))) x^-2] < 1 - F(x) < 2phi(x)/x"
        } else {
            "U [1 - (1+l^2)^2/l^2 x^-2] < 1 - F(x) < U, U = 2phi(x)phi(lx)/(|l|(1+l^2)x^2)"
        };
        let mut e = Entry::new("bracket", lambda, expression, Some(0.0));
        for &x in &grid {
            let b = mills_bracket(sp, x)?;
            if b.lower_positive() {
                let v = survival(sp, x)?.value;
                e.record(
                    b.strictly_contains(v),
                    -bracket_margin(&b, v.ln()),
                    None,
                    Some(x),
                );
            }
        }
        entries.push(e);
    }
    Ok(entries)
}

fn bound_entries(n_max: u64) -> Result<Vec<Entry>, CliError> {
    let mut entries = Vec::new();
    for lambda in [1.0, -1.0] {
        let report = bound_suite(lambda, n_max)?;
        for c in report.checks {
            entries.push(Entry {
                family: "norming_bound",
                lambda,
                expression: format!("{} < {} for n >= {}", c.expression, c.bound, c.start_n),
                bound: Some(c.bound),
                points: c.points as u64,
                failures: u64::from(!c.passed),
                worst: c.max_observed,
                witness: (c.argmax_n, None),
            });
        }
    }
    Ok(entries)
}

const DIAGNOSTIC_X_POINTS: usize = 120;
const DIAGNOSTIC_X_MAX: f64 = 20.0;

fn diagnostic_entries(n_max: u64) -> Result<Vec<Entry>, CliError> {
    let mut entries = Vec::new();
    for lambda in [1.0, -1.0] {
        let (first, psi_bound, aux) = if lambda > 0.0 {
            (positive_regime_start(), PSI_BOUND_POSITIVE, "c_n")
        } else {
            (n_zero(lambda)?, PSI_BOUND_NEGATIVE, "d_n")
        };
        let mut psi = Entry::new(
            "proof_diagnostic",
            lambda,
            format!("Psi_n(x) < {psi_bound} for x > -{aux}"),
            Some(psi_bound),
        );
        let mut r = Entry::new(
            "proof_diagnostic",
            lambda,
            format!("R_n(x) / a_n^2 < {R_BOUND_POSITIVE} for x > -{aux}"),
            Some(R_BOUND_POSITIVE),
        );
        let mut identity = Entry::new(
            "proof_diagnostic",
            lambda,
            "F^n = Lambda A B (relative error)",
            Some(1e-10),
        );
        let mut r_bracket = Entry::new(
            "proof_diagnostic",
            lambda,
            "0 <= R_n <= n Psi^2 / (2(1 - Psi))",
            None,
        );
        let grid = geometric_grid(first, n_max.max(first), 2.0)?;
        for &n in &grid {
            let nc = solve_constants(lambda, n)?;
            let a = aux_sequences(&nc)?.value();
            for i in 0..=DIAGNOSTIC_X_POINTS {
                let x = -a + 1e-6 + (DIAGNOSTIC_X_MAX + a) * i as f64 / DIAGNOSTIC_X_POINTS as f64;
                let d = proof_diagnostics(lambda, n, x)?;
                if d.psi_check != CheckStatus::NotApplicable {
                    psi.record(
                        d.psi_check == CheckStatus::Pass,
                        d.psi.value(),
                        Some(n),
                        Some(x),
                    );
                }
                if d.r_check != CheckStatus::NotApplicable {
                    r.record(
                        d.r_check == CheckStatus::Pass,
                        d.r / (nc.a_n * nc.a_n),
                        Some(n),
                        Some(x),
                    );
                }
                identity.record(
                    d.identity_rel_error <= 1e-10,
                    d.identity_rel_error,
                    Some(n),
                    Some(x),
                );
                if d.r_bracket != CheckStatus::NotApplicable {
                    r_bracket.record(d.r_bracket == CheckStatus::Pass, d.r, Some(n), Some(x));
                }
            }
        }
        entries.push(psi);
        if lambda > 0.0 {
            entries.push(r);
        }
        entries.push(identity);
        entries.push(r_bracket);
    }
    Ok(entries)
}

pub fn verify(n_max: u64) -> Result<Outcome, CliError> {
    let mut entries = bracket_entries()?;
    entries.extend(bound_entries(n_max)?);
    entries.extend(diagnostic_entries(n_max)?);
    let mut table = Table::new(VERIFY_COLUMNS);
    let mut passed = true;
    for e in &entries {
        if !e.passed() {
            passed = false;
            eprintln!(
                "snevt: FAIL lambda = {}: {} (witness n = {:?}, x = {:?}, value {:?})",
                e.lambda, e.expression, e.witness.0, e.witness.1, e.worst
            );
        }
        table.push(e.row());
    }
    let failed = entries.iter().filter(|e| !e.passed()).count() as u64;
    table.summary = vec![
        ("entries", (entries.len() as u64).into()),
        ("failed", failed.into()),
        ("all_passed", passed.into()),
    ];
    Ok(Outcome {
        table,
        params: vec![("n_max", n_max.into())],
        passed,
    })
}

pub const SIMULATE_COLUMNS: &[&str] = &[
    "lambda",
    "n",
    "reps",
    "seed",
    "ks",
    "delta_n",
    "dkw_margin",
    "alpha",
    "bound",
    "passed",
];

/// Confidence level of the DKW noise budget.
pub const SIMULATE_ALPHA: f64 = 0.001;

pub fn simulate(lambda: f64, n: u64, reps: usize, seed: u64) -> Result<Outcome, CliError> {
    let ks = monte_carlo_check(lambda, n, reps, seed)?;
    let delta = sup_distance(lambda, n)?.delta_n;
    let margin = dkw_margin(reps, SIMULATE_ALPHA);
    let bound = delta + 3.0 * margin;
    let passed = ks <= bound;
    let mut table = Table::new(SIMULATE_COLUMNS);
    table.push(vec![
        lambda.into(),
        n.into(),
        (reps as u64).into(),
        seed.into(),
        ks.into(),
        delta.into(),
        margin.into(),
        SIMULATE_ALPHA.into(),
        bound.into(),
        passed.into(),
    ]);
    Ok(Outcome {
        table,
        params: vec![
            ("lambda", lambda.into()),
            ("n", n.into()),
            ("reps", (reps as u64).into()),
            ("seed", seed.into()),
        ],
        passed,
    })
}

fn join<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn grid_cell(grid: &[u64]) -> Cell {
    match grid {
        [n] => Cell::Int(*n),
        _ => Cell::Text(join(grid)),
    }
}
