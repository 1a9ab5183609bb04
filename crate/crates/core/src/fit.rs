//! Small least-squares line fits shared by the decay and trend diagnostics.

/// Ordinary least-squares line through `(x, y)` points.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LineFit {
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub rms: f64,
}

/// Fits `y ~ intercept + slope * x`. Needs at least two points; with exactly
/// two the fit is the interpolating line.
pub(crate) fn line_fit(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss: f64 = points
        .iter()
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Some(LineFit {
        slope,
        rms: (ss / nf).sqrt(),
    })
}
