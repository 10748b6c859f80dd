use crate::error::{Error, Result};

/// 1-based rank `k = ceil(q * n)` of the order statistic selected at level `q`,
/// clamped to `1..=n`. Products within 1e-9 of an integer are snapped so that
/// e.g. `0.07 * 100` selects rank 7 rather than 8.
pub fn order_statistic_rank(n: usize, q: f64) -> usize {
    let x = q * n as f64;
    let nearest = x.round();
    let k = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (k as usize).clamp(1, n.max(1))
}

/// Order statistic `x_(k)` with `k = ceil(q * n)`.
pub fn empirical_quantile(xs: &[f64], q: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::domain("empirical quantile of an empty vector"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain(format!("quantile level must lie in (0, 1], got {q}")));
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("empirical quantile of a vector containing NaN"));
    }
    let k = order_statistic_rank(xs.len(), q);
    let mut buf = xs.to_vec();
    let (_, kth, _) = buf.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}
