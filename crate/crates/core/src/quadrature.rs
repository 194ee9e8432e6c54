//! Composite Gauss–Legendre rules.
//!
//! Nodes and weights are generated once by Newton iteration on the Legendre
//! recurrence and cached for the lifetime of the process.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Points per panel.
pub const ORDER: usize = 20;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess for the i-th root.
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over [lo, hi] with one application of the rule.
    #[inline]
    pub fn panel<F: FnMut(f64) -> f64>(&self, f: &mut F, lo: f64, hi: f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum();
        sum * half
    }

    /// Composite rule with `panels` equal-width panels.
    pub fn composite<F: FnMut(f64) -> f64>(
        &self,
        f: &mut F,
        lo: f64,
        hi: f64,
        panels: usize,
    ) -> f64 {
        let width = (hi - lo) / panels as f64;
        (0..panels)
            .map(|k| {
                let a = lo + width * k as f64;
                let b = if k + 1 == panels { hi } else { a + width };
                self.panel(f, a, b)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

pub fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(ORDER))
}

/// Result of [`integrate_doubling`].
#[derive(Debug, Clone, Copy)]
pub struct Doubled {
    pub value: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Composite Gauss–Legendre on [lo, hi], doubling the panel count until two
/// successive estimates agree to `rel_tol` (relative to the finer estimate)
/// or `max_panels` is reached.
pub fn integrate_doubling<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Doubled {
    let gl = rule();
    if hi <= lo {
        return Doubled {
            value: 0.0,
            panels: 0,
            converged: true,
        };
    }
    let mut panels = 1;
    let mut coarse = gl.composite(&mut f, lo, hi, panels);
    while panels < max_panels {
        panels *= 2;
        let fine = gl.composite(&mut f, lo, hi, panels);
        if (fine - coarse).abs() <= rel_tol * fine.abs() || fine == coarse {
            return Doubled {
                value: fine,
                panels,
                converged: true,
            };
        }
        coarse = fine;
    }
    Doubled {
        value: coarse,
        panels,
        converged: false,
    }
}
