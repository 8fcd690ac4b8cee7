//! Log-log least squares and dB-domain curve interpolation.

use thiserror::Error;

/// Least-squares slope of log y against log x.
#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    /// Abscissa range the fit used, (min x, max x).
    pub range: (f64, f64),
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all points must be strictly positive")]
    NonPositive,
    #[error("degenerate abscissa: all x values equal")]
    DegenerateAbscissa,
    #[error("target {target:.3e} outside curve value range [{min:.3e}, {max:.3e}]")]
    TargetOutOfRange { target: f64, min: f64, max: f64 },
}

/// Least-squares slope of log y vs log x with its standard error.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        return Err(FitError::NonPositive);
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx < 1e-300 {
        return Err(FitError::DegenerateAbscissa);
    }
    let sxy: f64 = logs
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let stderr = if points.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, _) in points {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok(SlopeFit {
        slope,
        stderr,
        range: (lo, hi),
    })
}

/// SNR (dB) where a decreasing curve crosses `target`, interpolating
/// linearly in (dB, log10 value) space.
pub fn crossing_snr(curve: &[(f64, f64)], target: f64) -> Result<f64, FitError> {
    if curve.len() < 2 {
        return Err(FitError::TooFewPoints {
            needed: 2,
            got: curve.len(),
        });
    }
    if curve.iter().any(|&(_, v)| !(v > 0.0)) || !(target > 0.0) {
        return Err(FitError::NonPositive);
    }
    let (min_v, max_v) = curve.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &(_, v)| {
        (lo.min(v), hi.max(v))
    });
    // exact grid hit first
    for &(db, v) in curve {
        if v == target {
            return Ok(db);
        }
    }
    for win in curve.windows(2) {
        let (db0, v0) = win[0];
        let (db1, v1) = win[1];
        if (v0 > target && v1 < target) || (v0 < target && v1 > target) {
            let l0 = v0.log10();
            let l1 = v1.log10();
            let lt = target.log10();
            return Ok(db0 + (db1 - db0) * (lt - l0) / (l1 - l0));
        }
    }
    Err(FitError::TargetOutOfRange {
        target,
        min: min_v,
        max: max_v,
    })
}
