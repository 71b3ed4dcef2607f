use crate::error::{Result, SteerError};

/// Weighted least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub r2: f64,
    /// `sqrt(Σ wᵢ rᵢ²)`.
    pub residual_norm: f64,
    pub n: usize,
}

/// Weights are inverse variances; without weights the standard errors
/// come from the residual scatter.
pub fn linear_fit(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || weights.is_some_and(|w| w.len() != n) {
        return Err(SteerError::InvalidArgument("fit inputs differ in length".into()));
    }
    if n < 2 {
        return Err(SteerError::Fit(format!("need at least 2 points, got {n}")));
    }
    let w: Vec<f64> = weights.map_or_else(|| vec![1.0; n], <[f64]>::to_vec);
    if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) || x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(SteerError::Fit("non-finite data or non-positive weight".into()));
    }
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = (0..n).map(|i| w[i] * (x[i] - mx) * (y[i] - my)).sum();
    let syy: f64 = w.iter().zip(y).map(|(w, y)| w * (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(SteerError::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = (0..n).map(|i| w[i] * (y[i] - slope * x[i] - intercept).powi(2)).sum();
    let scale = if weights.is_some() {
        1.0
    } else if n > 2 {
        rss / (n - 2) as f64
    } else {
        0.0
    };
    let slope_var = scale / sxx;
    let intercept_var = scale * (1.0 / sw + mx * mx / sxx);
    Ok(LinearFit {
        slope,
        intercept,
        slope_se: slope_var.sqrt(),
        intercept_se: intercept_var.sqrt(),
        r2: if syy > 0.0 { 1.0 - rss / syy } else { 1.0 },
        residual_norm: rss.sqrt(),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let f = linear_fit(&x, &y, None).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scatter_standard_error() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, 2.0, 1.0];
        let f = linear_fit(&x, &y, None).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        // rss = 1.5, sxx = 2
        assert!((f.slope_se - (1.5f64 / 2.0).sqrt()).abs() < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0], None).is_err());
    }
}
