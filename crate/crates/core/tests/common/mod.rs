//! Test-side oracles, written independently of the library internals.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    // stop at the rounding floor of the panel
    let floor = 8.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || diff.abs() <= 15.0 * tol.max(floor) {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Upper normal tail from libm's erfc.
pub fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Owen's T from its defining integral.
pub fn owen_t(h: f64, a: f64) -> f64 {
    let f = |t: f64| (-0.5 * h * h * (1.0 + t * t)).exp() / (1.0 + t * t);
    let sign = a.signum();
    sign * simpson(&f, 0.0, a.abs(), 1e-16) / (2.0 * PI)
}

/// Bisection root of a sign-changing `g` on `[lo, hi]`, to the last bit.
pub fn bisect<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo);
    assert!(glo * g(hi) < 0.0, "root not bracketed");
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) < 0.0) == (glo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `b_n` by bisection on the logarithm of the defining equation.
pub fn b_n_bisection(lambda: f64, n: f64) -> f64 {
    let k = 1.0 + lambda * lambda;
    let g = |b: f64| {
        if lambda > 0.0 {
            // √(π/2) b e^{b²/2} = n
            0.5 * (PI / 2.0).ln() + b.ln() + 0.5 * b * b - n.ln()
        } else if lambda < 0.0 {
            // π|λ|(1+λ²) b² e^{(1+λ²)b²/2} = n
            (PI * lambda.abs() * k).ln() + 2.0 * b.ln() + 0.5 * k * b * b - n.ln()
        } else {
            // 2π b² e^{b²} = n²
            (2.0 * PI).ln() + 2.0 * b.ln() + b * b - 2.0 * n.ln()
        }
    };
    bisect(g, 1e-12, 100.0)
}

/// Log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Brute-force `sup |Φ(a x + b)^{2n} - Λ(x)|` over `points` grid points,
/// using that SN(1) has distribution function Φ².
pub fn brute_force_sup_unit_shape(
    n: u64,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> (f64, f64) {
    let step = (hi - lo) / (points - 1) as f64;
    let mut best = (0.0, lo);
    for i in 0..points {
        let x = lo + step * i as f64;
        let t = a * x + b;
        let ln_phi = if t < 0.0 { q(-t).ln() } else { (-q(t)).ln_1p() };
        let fn_ = (2.0 * n as f64 * ln_phi).exp();
        let d = (fn_ - (-(-x).exp()).exp()).abs();
        if d > best.0 {
            best = (d, x);
        }
    }
    best
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}
