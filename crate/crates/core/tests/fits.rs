use std::f64::consts::PI;

use steer_core::fits::{
    fit_entropy_extrapolation, fit_gap_series, levenberg_marquardt, linear_fit, truncated_entropy, GapSeries,
    LmOptions,
};
use steer_core::protocol::PeriodStats;

fn geometric(xi: f64, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|k| (-(k as f64) / xi).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|p| (p / z).sqrt()).collect()
}

fn exact_entropy(values: &[f64]) -> f64 {
    let z: f64 = values.iter().map(|v| v * v).sum();
    values
        .iter()
        .map(|v| v * v / z)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

#[test]
fn truncated_entropy_is_nonnegative_and_monotone_on_geometric_spectra() {
    let v = geometric(4.0, 200);
    let mut last = 0.0;
    for cut in 1..60 {
        let s = truncated_entropy(&v, cut).unwrap();
        assert!(s >= 0.0);
        assert!(s >= last - 1e-12);
        last = s;
    }
    assert!((truncated_entropy(&v, 200).unwrap() - exact_entropy(&v)).abs() < 1e-12);
}

#[test]
fn short_correlation_spectra_extrapolate_within_five_percent() {
    let v = geometric(4.0, 400);
    let truth = exact_entropy(&v);
    let ex = fit_entropy_extrapolation(&v, 40).unwrap();
    assert!((ex.s_sat - truth).abs() / truth < 0.05, "{} vs {truth}", ex.s_sat);
    assert!(ex.valid);
    assert!(ex.s_sat >= ex.large.max_observed - ex.large.residual_norm);
}

#[test]
fn gap_self_test_recovers_the_rate() {
    let series: Vec<GapSeries> = [0.1, 0.2, 0.3, 0.4, 0.5]
        .iter()
        .map(|f| GapSeries {
            dt: f * PI,
            energy: (0..25)
                .map(|k| PeriodStats {
                    mean: 0.7 * (-0.35 * (f * PI).powi(2) * k as f64).exp(),
                    se: 1e-3 * (-0.35 * (f * PI).powi(2) * k as f64).exp(),
                })
                .collect(),
        })
        .collect();
    let g = fit_gap_series(&series, 0.5 * PI).unwrap();
    assert!((g.gap - 0.35).abs() < 5e-4, "{}", g.gap);
}

#[test]
fn weighted_line_and_lm_agree_on_exact_data() {
    let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
    let y: Vec<f64> = x.iter().map(|t| 2.0 - 0.5 * t).collect();
    let f = linear_fit(&x, &y, Some(&vec![2.0; 10])).unwrap();
    assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 2.0).abs() < 1e-12);
    assert!((f.r2 - 1.0).abs() < 1e-12);
    let data: Vec<(f64, f64)> = x.iter().map(|&t| (t, 3.0 * (-0.2 * t).exp())).collect();
    let r = levenberg_marquardt(
        |p| data.iter().map(|(t, v)| p[0] * (-p[1] * t).exp() - v).collect(),
        |_| {},
        &[1.0, 0.5],
        &LmOptions::default(),
    )
    .unwrap();
    assert!(r.converged);
    assert!((r.params[0] - 3.0).abs() < 1e-7 && (r.params[1] - 0.2).abs() < 1e-8);
}
