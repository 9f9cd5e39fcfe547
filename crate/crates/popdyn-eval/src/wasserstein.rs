use crate::error::EvalError;

/// Exact first Wasserstein distance between the empirical laws of two
/// real-valued samples.
///
/// For equal sample sizes the optimal coupling pairs order statistics, so
/// the distance is the mean absolute difference of the sorted lists. For
/// unequal sizes it is the integral of the absolute quantile difference;
/// both quantile functions are piecewise constant with breakpoints at
/// integer multiples of `1/n`, so the integral is a finite sum over the
/// merged breakpoint grid.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.is_empty() || b.is_empty() {
        return Err(EvalError::Empty("wasserstein_1d needs two nonempty samples".into()));
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);

    if xa.len() == xb.len() {
        let n = xa.len() as f64;
        return Ok(xa.iter().zip(&xb).map(|(x, y)| (x - y).abs()).sum::<f64>() / n);
    }

    // Segment ends are the fractions (i+1)/na and (j+1)/nb; comparing and
    // subtracting them as integer numerators over the common denominator
    // na*nb keeps the walk exact.
    let (na, nb) = (xa.len() as u64, xb.len() as u64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut cur = 0u64;
    let mut total = 0.0;
    while i < xa.len() && j < xb.len() {
        let end_a = (i as u64 + 1) * nb;
        let end_b = (j as u64 + 1) * na;
        let end = end_a.min(end_b);
        total += (end - cur) as f64 * (xa[i] - xb[j]).abs();
        cur = end;
        if end == end_a {
            i += 1;
        }
        if end == end_b {
            j += 1;
        }
    }
    Ok(total / (na * nb) as f64)
}
