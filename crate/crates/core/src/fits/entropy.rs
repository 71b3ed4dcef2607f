use super::lm::{levenberg_marquardt, LmOptions};
use crate::error::{Result, SteerError};

/// Entropy `−Σ p log p` of the `cut` largest Schmidt values with
/// `pᵢ = λᵢ² / Σ_{j ≤ cut} λⱼ²`. `values` need not be sorted.
pub fn truncated_entropy(values: &[f64], cut: usize) -> Result<f64> {
    if cut == 0 || cut > values.len() {
        return Err(SteerError::InvalidArgument(format!(
            "cut {cut} outside 1..={}",
            values.len()
        )));
    }
    let mut w: Vec<f64> = values.iter().map(|v| v * v).collect();
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    w.truncate(cut);
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(SteerError::InvalidArgument("spectrum has no weight".into()));
    }
    Ok(-w
        .iter()
        .map(|x| x / total)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>())
}

/// `S(cut)` for `cut = lo..=hi`, clamping cuts beyond the spectrum length.
pub fn entropy_curve(values: &[f64], lo: usize, hi: usize) -> Result<Vec<(usize, f64)>> {
    (lo..=hi)
        .map(|c| Ok((c, truncated_entropy(values, c.min(values.len()))?)))
        .collect()
}

fn ansatz(p: &[f64], cut: f64) -> f64 {
    let l = cut.ln();
    p[0] * ((p[1] * l + p[2] * l * l + p[3] * l.sqrt()) / p[0]).tanh()
}

/// One fit of `S(cut) = S_sat tanh((σ₁ log c + σ₂ log² c + σ₃ √log c) / S_sat)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TanhFit {
    pub s_sat: f64,
    pub sigma: [f64; 3],
    /// Standard errors of `(S_sat, σ₁, σ₂, σ₃)`.
    pub stderr: [f64; 4],
    pub residual_norm: f64,
    /// Cut window `[lo, hi]` used in the fit.
    pub window: (usize, usize),
    pub cut_max: usize,
    pub max_observed: f64,
}

impl TanhFit {
    pub fn evaluate(&self, cut: f64) -> f64 {
        ansatz(&[self.s_sat, self.sigma[0], self.sigma[1], self.sigma[2]], cut)
    }
}

/// Saturation estimates at two truncation levels.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyExtrapolation {
    pub small: TanhFit,
    pub large: TanhFit,
    /// The large-truncation estimate.
    pub s_sat: f64,
    /// Both estimates agree within 5 %.
    pub valid: bool,
}

/// Fit the ansatz to the `cut_max` largest values over `cut ∈ [2, 0.9·cut_max]`.
pub fn fit_entropy_window(values: &[f64], cut_max: usize) -> Result<TanhFit> {
    if values.len() < 10 {
        return Err(SteerError::InvalidArgument(format!(
            "entropy extrapolation needs at least 10 Schmidt values, got {}",
            values.len()
        )));
    }
    let hi = (0.9 * cut_max as f64).floor() as usize;
    if hi < 6 {
        return Err(SteerError::InvalidArgument(format!("cut_max {cut_max} leaves fewer than 5 fit points")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sorted.truncate(cut_max);
    let curve = entropy_curve(&sorted, 2, hi)?;
    let max_observed = curve.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let residuals = |p: &[f64]| curve.iter().map(|&(c, s)| ansatz(p, c as f64) - s).collect::<Vec<_>>();
    let project = |p: &mut [f64]| p[0] = p[0].max(1e-6);
    let opts = LmOptions::default();
    let mut best: Option<super::lm::LmResult> = None;
    let last = curve.last().unwrap().1.max(1e-3);
    for s0 in [1.2 * last, 2.0 * last, last + 0.05] {
        for s1 in [1.0, 0.3] {
            for s3 in [0.0, 0.5] {
                let Ok(fit) = levenberg_marquardt(residuals, project, &[s0, s1, 0.0, s3], &opts) else {
                    continue;
                };
                if fit.params.iter().all(|v| v.is_finite())
                    && best.as_ref().is_none_or(|b| fit.residual_norm < b.residual_norm)
                {
                    best = Some(fit);
                }
            }
        }
    }
    let fit = best.ok_or_else(|| SteerError::Fit("tanh extrapolation: no start produced a finite fit".into()))?;
    let rms = fit.residual_norm / (curve.len() as f64).sqrt();
    if !fit.converged && rms > 1e-2 * max_observed.max(1e-3) {
        return Err(SteerError::Fit(format!(
            "tanh extrapolation did not converge: residual {:.3e} after {} iterations",
            fit.residual_norm, fit.iterations
        )));
    }
    let p = &fit.params;
    Ok(TanhFit {
        s_sat: p[0],
        sigma: [p[1], p[2], p[3]],
        stderr: [fit.stderr[0], fit.stderr[1], fit.stderr[2], fit.stderr[3]],
        residual_norm: fit.residual_norm,
        window: (2, hi),
        cut_max,
        max_observed,
    })
}

/// Two-truncation extrapolation at `cut_small < cut_large`.
pub fn fit_entropy_pair(values: &[f64], cut_small: usize, cut_large: usize) -> Result<EntropyExtrapolation> {
    if cut_small >= cut_large {
        return Err(SteerError::InvalidArgument("cut_small must be below cut_large".into()));
    }
    let small = fit_entropy_window(values, cut_small)?;
    let large = fit_entropy_window(values, cut_large)?;
    let valid = (small.s_sat - large.s_sat).abs() < 0.05 * large.s_sat;
    Ok(EntropyExtrapolation {
        s_sat: large.s_sat,
        small,
        large,
        valid,
    })
}

/// Two-truncation extrapolation with the small level at `cut_max / 2`.
pub fn fit_entropy_extrapolation(values: &[f64], cut_max: usize) -> Result<EntropyExtrapolation> {
    fit_entropy_pair(values, cut_max / 2, cut_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(xi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (-(i as f64) / xi).exp().sqrt()).collect()
    }

    #[test]
    fn truncated_entropy_limits() {
        let g = geometric(8.0, 60);
        assert_eq!(truncated_entropy(&g, 1).unwrap(), 0.0);
        let full = crate::engine::SchmidtSpectrum::from_values(1, g.clone()).entropy();
        assert!((truncated_entropy(&g, 60).unwrap() - full).abs() < 1e-14);
        let flat = vec![1.0; 9];
        assert!((truncated_entropy(&flat, 3).unwrap() - 3f64.ln()).abs() < 1e-14);
        let curve = entropy_curve(&g, 1, 60).unwrap();
        assert!(curve.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!(truncated_entropy(&g, 0).is_err() && truncated_entropy(&g, 61).is_err());
    }

    #[test]
    fn fast_decay_is_recovered() {
        let g = geometric(4.0, 2000);
        let exact = truncated_entropy(&g, 2000).unwrap();
        let e = fit_entropy_extrapolation(&g, 40).unwrap();
        assert!((e.s_sat - exact).abs() < 0.05 * exact, "{} vs {exact}", e.s_sat);
        assert!(e.large.s_sat >= e.large.max_observed - e.large.residual_norm);
    }

    #[test]
    fn heavy_tail_is_flagged() {
        // a steep head followed by a long flat plateau that only the larger
        // truncation begins to see
        let mut v: Vec<f64> = (0..20).map(|i| (-(i as f64) / 2.0).exp().sqrt()).collect();
        v.extend(std::iter::repeat_n((-5.0f64).exp().sqrt(), 500));
        let e = fit_entropy_pair(&v, 20, 40).unwrap();
        assert!(!e.valid, "{} vs {}", e.small.s_sat, e.large.s_sat);
    }

    #[test]
    fn rejects_short_spectra() {
        assert!(fit_entropy_extrapolation(&[1.0; 9], 40).is_err());
    }
}
