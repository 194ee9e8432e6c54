mod common;

use common::brute_force_sup_unit_shape;
use snevt_core::convergence::{
    dkw_margin, gumbel_cdf, leading_profile, leading_sup, max_cdf, monte_carlo_check,
    proof_diagnostics, rate_curve, sup_distance, CheckStatus, MaxModel,
};
use snevt_core::norming::{aux_sequences, geometric_grid, n_zero, solve_constants};

const BRUTE_POINTS: usize = 1_000_000;

fn brute(n: u64) -> (f64, f64) {
    let nc = solve_constants(1.0, n).unwrap();
    let ln_n = (n as f64).ln();
    brute_force_sup_unit_shape(
        n,
        nc.a_n,
        nc.b_n,
        -2.0 - ln_n.ln(),
        3.0 + ln_n,
        BRUTE_POINTS,
    )
}

#[test]
fn refined_search_agrees_with_dense_grid() {
    for n in [1_000u64, 1_000_000, 1_000_000_000] {
        let (d_brute, x_brute) = brute(n);
        let r = sup_distance(1.0, n).unwrap();
        assert!(
            r.delta_n >= d_brute - 1e-14,
            "n={n}: {} < {d_brute}",
            r.delta_n
        );
        assert!(
            r.delta_n - d_brute < 1e-9,
            "n={n}: {} vs {d_brute}",
            r.delta_n
        );
        assert!((r.argmax_x - x_brute).abs() < 1e-4);
        assert!(r.bracket_width < 1e-8);
    }
}

#[test]
fn scaled_distance_stays_in_the_calibrated_band() {
    let calibration: Vec<f64> = [1_000u64, 1_000_000, 1_000_000_000]
        .iter()
        .map(|&n| brute(n).0 * (n as f64).ln())
        .collect();
    let lo = calibration.iter().cloned().fold(f64::INFINITY, f64::min) / 1.5;
    let hi = calibration.iter().cloned().fold(0.0, f64::max) * 1.5;
    for n in geometric_grid(9, 1_000_000_000, 10.0).unwrap() {
        let r = sup_distance(1.0, n).unwrap();
        assert!(
            r.delta_times_log_n > lo && r.delta_times_log_n < hi,
            "n={n}: {} outside [{lo}, {hi}]",
            r.delta_times_log_n
        );
    }
}

#[test]
fn distance_decreases_where_the_oracle_confirms() {
    for n in [1_000u64, 100_000, 10_000_000] {
        let (small, large) = (brute(n).0, brute(4 * n).0);
        let (a, b) = (
            sup_distance(1.0, n).unwrap(),
            sup_distance(1.0, 4 * n).unwrap(),
        );
        assert_eq!(b.delta_n < a.delta_n, large < small, "n={n}");
    }
}

#[test]
fn report_invariants_and_window_endpoints() {
    for &(l, n) in &[
        (1.0, 9u64),
        (2.0, 500),
        (-1.0, 34),
        (-2.0, 10_000),
        (0.0, 2),
        (0.0, 1_000_000),
        (-0.1, 50),
    ] {
        let r = sup_distance(l, n).unwrap();
        let model = MaxModel::new(l, n).unwrap();
        assert!(r.delta_n > 0.0 && r.delta_n < 1.0);
        assert!(model.discrepancy(r.argmax_x).abs() >= r.delta_n - r.bracket_width);
        assert!(
            model.discrepancy(r.window.0).abs() < r.delta_n / 10.0,
            "λ={l} n={n}"
        );
        assert!(
            model.discrepancy(r.window.1).abs() < r.delta_n / 10.0,
            "λ={l} n={n}"
        );
    }
}

#[test]
fn max_cdf_near_gumbel_at_origin() {
    let n = 1_000_000;
    let a2 = solve_constants(1.0, n).unwrap().a_n.powi(2);
    let v = max_cdf(1.0, n, 0.0).unwrap();
    assert!((v - (-1.0f64).exp()).abs() < 3.0 * a2);
}

#[test]
fn max_cdf_tends_to_one_with_hall_constants() {
    for &x in &[10.0, 20.0, 40.0] {
        let v = max_cdf(0.0, 1000, x).unwrap();
        assert!((1.0 - v) < 2.0 * (-x).exp());
    }
    assert!((max_cdf(0.0, 1000, 60.0).unwrap() - 1.0).abs() < 1e-16);
}

#[test]
fn max_cdf_is_monotone() {
    for &l in &[-1.0, 0.0, 1.0] {
        let mut prev = 0.0;
        for i in 0..=2000 {
            let x = -5.0 + 0.01 * i as f64;
            let v = max_cdf(l, 1_000_000, x).unwrap();
            assert!(v >= prev, "λ={l} x={x}");
            prev = v;
        }
    }
}

#[test]
fn negative_shape_decomposition_identity() {
    let n = 1_000_000;
    for &x in &[-1.5, -0.5, 0.0, 1.0, 4.0, 12.0] {
        let d = proof_diagnostics(-1.0, n, x).unwrap();
        let nf = n as f64;
        let direct = max_cdf(-1.0, n, x).unwrap();
        let decomposed = (-nf * d.psi.value() - d.r).exp();
        assert!(((decomposed - direct) / direct).abs() < 1e-10, "x={x}");
        let product = gumbel_cdf(x) * d.a_big * d.b_big;
        assert!(((product - direct) / direct).abs() < 1e-10, "x={x}");
    }
}

#[test]
fn psi_bound_at_half_d_n() {
    let n0 = n_zero(-1.0).unwrap();
    for n in geometric_grid(n0, 1_000_000_000, 1.5).unwrap() {
        let d_n = aux_sequences(&solve_constants(-1.0, n).unwrap())
            .unwrap()
            .value();
        let diag = proof_diagnostics(-1.0, n, -d_n / 2.0).unwrap();
        assert_eq!(diag.psi_check, CheckStatus::Pass, "n={n}");
    }
}

#[test]
fn positive_reference_point_bounds() {
    let d = proof_diagnostics(1.0, 100, 0.0).unwrap();
    assert_eq!(d.psi_check, CheckStatus::Pass);
    assert_eq!(d.r_check, CheckStatus::Pass);
    assert!(d.psi.value() < 0.1887);
}

#[test]
fn r_stays_in_its_bracket() {
    for &l in &[-2.0, -1.0, 0.0, 1.0, 3.0] {
        for &n in &[50u64, 10_000, 100_000_000] {
            for i in 0..=60 {
                let x = -1.0 + 0.25 * i as f64;
                let d = proof_diagnostics(l, n, x).unwrap();
                assert!(d.r >= 0.0);
                assert_eq!(d.r_bracket, CheckStatus::Pass, "λ={l} n={n} x={x}");
                assert!(d.identity_rel_error < 1e-10);
            }
        }
    }
}

#[test]
fn two_sided_rate_band_constants() {
    let grid = geometric_grid(1_000, 1_000_000_000, 10.0).unwrap();
    for &l in &[-2.0, -1.0, 1.0, 2.0] {
        let curve = rate_curve(l, &grid).unwrap();
        let s = &curve.summary;
        println!("λ={l}: k1={:.6} k2={:.6}", s.k1, s.k2);
        assert!(s.k1 > 0.0 && s.k2 < f64::INFINITY);
        for p in &curve.points {
            let ln_n = (p.n as f64).ln();
            assert!(
                s.k1 / ln_n <= p.delta_n * (1.0 + 1e-15)
                    && p.delta_n <= s.k2 / ln_n * (1.0 + 1e-15)
            );
        }
    }
}

#[test]
fn ratio_rises_toward_one_on_the_top_decades() {
    let grid = [10_000_000u64, 100_000_000, 1_000_000_000];
    for &l in &[1.0, -1.0] {
        let curve = rate_curve(l, &grid).unwrap();
        let ratios: Vec<f64> = curve
            .points
            .iter()
            .zip(&curve.predicted)
            .map(|(p, q)| p.delta_n / q.unwrap())
            .collect();
        assert!(
            ratios.windows(2).all(|w| w[1] > w[0] && w[1] < 1.0),
            "λ={l}: {ratios:?}"
        );
    }
}

#[test]
fn hall_curve_is_banded_and_unpredicted() {
    let grid = geometric_grid(1_000, 1_000_000_000, 10.0).unwrap();
    let curve = rate_curve(0.0, &grid).unwrap();
    assert_eq!(curve.predicted.len(), curve.points.len());
    assert!(curve.predicted.iter().all(Option::is_none));
    assert!(curve.summary.band_ratio < 3.0);
    assert!(curve.summary.top_decade_deviation.is_none());
}

#[test]
fn leading_sup_matches_dense_scan() {
    for &l in &[1.0, -1.0, 0.5, -3.0] {
        let dense = (0..=450_000)
            .map(|i| leading_profile(l, -5.0 + 1e-4 * i as f64).unwrap().abs())
            .fold(0.0, f64::max);
        let m = leading_sup(l).unwrap();
        assert!(
            m >= dense - 1e-15 && m - dense < 1e-8,
            "λ={l}: {m} vs {dense}"
        );
    }
}

#[test]
fn monte_carlo_hall_constants() {
    let (n, reps) = (1_000, 100_000);
    let ks = monte_carlo_check(0.0, n, reps, 5).unwrap();
    let delta = sup_distance(0.0, n).unwrap().delta_n;
    assert!(
        ks <= delta + 3.0 * dkw_margin(reps, 0.001),
        "KS {ks} delta {delta}"
    );
}

#[test]
fn monte_carlo_smoke_negative_shape() {
    let n = n_zero(-1.0).unwrap().max(1000);
    let ks = monte_carlo_check(-1.0, n, 1_000, 17).unwrap();
    assert!(ks < 0.15, "KS {ks}");
}
