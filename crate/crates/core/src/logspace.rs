//! Log-space arithmetic helpers.
//!
//! All spectral weights in this crate are carried as natural logarithms.
//! These helpers combine them without leaving log space until the last step.

/// Compensated (Neumaier) summation.
///
/// Accurate to a few ulps of the total regardless of the number of terms,
/// which keeps unit-sum normalization honest for very large grids.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `ln(sum(exp(x)))` over the finite entries of `xs`.
///
/// Non-finite `-inf` entries contribute nothing. Returns `-inf` for an empty
/// (or all `-inf`) input. The result does not depend on the order of `xs`:
/// values are sorted before the compensated reduction.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let mut finite: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.is_empty() {
        return f64::NEG_INFINITY;
    }
    finite.sort_by(|a, b| a.total_cmp(b));
    let max = *finite.last().unwrap();
    let total = neumaier_sum(finite.iter().map(|&x| (x - max).exp()));
    max + total.ln()
}

/// `p ln p` for `p = exp(log_p)`, with the `0 ln 0 = 0` convention.
#[inline]
pub fn plogp_from_log(log_p: f64) -> f64 {
    if log_p == f64::NEG_INFINITY {
        0.0
    } else {
        log_p.exp() * log_p
    }
}

/// Exponentiate a log-weight for output; underflow renders as `0.0`.
#[inline]
pub fn exp_or_zero(log_w: f64) -> f64 {
    if log_w.is_nan() {
        return f64::NAN;
    }
    let w = log_w.exp();
    if w.is_finite() {
        w
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_of_equal_terms() {
        let v = vec![-3.0; 8];
        assert!((logsumexp(&v) - (-3.0 + 8f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn logsumexp_survives_huge_negative_values() {
        let v = [-1.0e6, -1.0e6 - 2f64.ln()];
        let got = logsumexp(&v);
        assert!((got - (-1.0e6 + 1.5f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn logsumexp_empty_and_neg_inf() {
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
        assert_eq!(logsumexp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(logsumexp(&[0.0, f64::NEG_INFINITY]), 0.0);
    }

    #[test]
    fn logsumexp_is_order_independent() {
        let a = [0.3, -1.7, 2.2, -40.0, 0.0001];
        let mut b = a;
        b.reverse();
        assert_eq!(logsumexp(&a).to_bits(), logsumexp(&b).to_bits());
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
    }

    #[test]
    fn zero_log_zero() {
        assert_eq!(plogp_from_log(f64::NEG_INFINITY), 0.0);
        assert_eq!(plogp_from_log(0.0), 0.0);
    }

    #[test]
    fn underflow_renders_zero() {
        assert_eq!(exp_or_zero(-1.0e5), 0.0);
        assert_eq!(exp_or_zero(0.0), 1.0);
    }
}
