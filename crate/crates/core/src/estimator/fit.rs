//! Least-squares recovery of a decay constant from a grid of estimates.

use super::EstimationResult;
use crate::error::{Error, Result};
use crate::rates::Speed;

/// Outcome of fitting `−log P ≈ c · speed(n)` over a horizon grid.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Fitted decay constant: the slope of the transformed log-estimates
    /// against the signed speed regressor.
    pub slope: f64,
    /// Fitted offset, absorbing prefactors the theorems do not pin down.
    pub intercept: f64,
    /// Coefficient of determination of the regression.
    pub r_squared: f64,
    /// Horizons that entered the fit.
    pub used: Vec<u32>,
    /// Results dropped because their estimate supports no log (zero or, on
    /// the doubly-exponential scale, at least one).
    pub excluded: u32,
}

/// Fits the predicted decay shape to a grid of estimates.
///
/// For polynomial speeds the response is `ln(estimate) ≈ −c·speed(n)` and
/// the regressor is `x = −speed(n)`; for doubly exponential decay the
/// response is `ln(−ln(estimate)) ≈ +c·speed(n)` and the regressor is
/// `x = +speed(n)`.  Either way the expected slope is `+c`.  Estimates that
/// carry no information on the chosen scale (zeros; values ≥ 1 on the doubly
/// exponential scale) are excluded and counted.  At least three usable
/// points are required.
pub fn fit_rate(results: &[EstimationResult], speed: &Speed) -> Result<FitResult> {
    let mut xs = Vec::with_capacity(results.len());
    let mut ys = Vec::with_capacity(results.len());
    let mut used = Vec::with_capacity(results.len());
    let mut excluded = 0u32;
    for r in results {
        let (y, x) = if speed.is_log_log() {
            if r.estimate <= 0.0 || r.estimate >= 1.0 {
                excluded += 1;
                continue;
            }
            ((-r.estimate.ln()).ln(), speed.value(r.n as f64))
        } else {
            if r.estimate <= 0.0 {
                excluded += 1;
                continue;
            }
            (r.estimate.ln(), -speed.value(r.n as f64))
        };
        xs.push(x);
        ys.push(y);
        used.push(r.n);
    }
    if xs.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 usable estimates to fit a decay constant, have {} \
             ({excluded} excluded)",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Fit("all usable estimates share one horizon; no slope".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr = syy - slope * sxy;
    let r_squared = if syy > 0.0 { 1.0 - (ssr / syy).max(0.0) } else { 1.0 };
    Ok(FitResult { slope, intercept, r_squared, used, excluded })
}
