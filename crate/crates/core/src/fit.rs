//! Least-squares line fitting for the scaling and growth experiments.

/// Ordinary least squares of `y = slope·x + intercept`.
/// Returns `(slope, intercept, r_squared)`. A constant `y` (no variance)
/// fits exactly with slope 0 and r² = 1.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(xs.len() >= 2, "need at least two points to fit a line");
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if syy < 1e-18 * (1.0 + my * my) {
        return (0.0, my, 1.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = syy - slope * sxy;
    let r2 = 1.0 - (ss_res / syy).max(0.0);
    (slope, intercept, r2)
}
