//! Small numeric helpers shared across the estimation code.

/// Stable log(sum(exp(xs))) over a slice.
///
/// Returns `NEG_INFINITY` for an empty slice or all-`-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Softmax of `xs`, computed through log-space for stability.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(xs);
    xs.iter().map(|x| (x - lse).exp()).collect()
}

/// Two-sided p-value for a standard-normal Wald statistic.
pub fn normal_two_sided_p(z: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let n = Normal::new(0.0, 1.0).unwrap();
    2.0 * n.cdf(-z.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [0.3f64, -1.2, 2.5];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_large_offsets() {
        let xs = [-1000.0, -1000.5];
        let expected = -1000.0 + (1.0 + (-0.5f64).exp()).ln();
        assert!((log_sum_exp(&xs) - expected).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_empty_is_neg_inf() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1.0, 2.0, -3.0]);
        let s: f64 = p.iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn p_value_symmetric() {
        assert!((normal_two_sided_p(1.96) - 0.05).abs() < 1e-3);
        assert_eq!(normal_two_sided_p(1.5), normal_two_sided_p(-1.5));
    }
}
