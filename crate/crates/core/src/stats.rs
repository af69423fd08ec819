//! Elementary reductions shared by the estimators and interval code.

/// Mean shifted by the first element: exact for constant input and less
/// sensitive to a large common offset.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

/// Sample variance with divisor `len - 1`, two-pass. Callers guarantee
/// `xs.len() >= 2`.
pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    ss / (xs.len() - 1) as f64
}
