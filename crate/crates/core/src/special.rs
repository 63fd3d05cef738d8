//! Log-space binomial helpers.
//!
//! `ln C(n, k)` is accumulated as a sum of `ln(1 + (n − k)/j)` terms over the
//! shorter side, so it never forms a factorial and stays accurate to a few
//! ulps for the sample counts used here.

/// ln C(n, k); `-inf` when k > n.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let rest = (n - k) as f64;
    (1..=k).map(|j| (rest / j as f64).ln_1p()).sum()
}

/// `ln C(n, i)` for every `i = 0..=n`.
pub fn ln_choose_row(n: u64) -> Vec<f64> {
    let len = n as usize + 1;
    let mut row = vec![0.0; len];
    let half = len / 2;
    let mut acc = 0.0;
    for i in 1..=half {
        acc += ((n as f64 - i as f64 + 1.0) / i as f64).ln();
        row[i] = acc;
    }
    for i in half + 1..len {
        row[i] = row[len - 1 - i];
    }
    row
}

/// `l ln α + (n − l) ln(1 − α)` with the 0·ln 0 = 0 convention.
pub fn ln_bernoulli_power(n: u64, l: u64, alpha: f64) -> f64 {
    let a = if l == 0 { 0.0 } else { l as f64 * alpha.ln() };
    let b = if l == n { 0.0 } else { (n - l) as f64 * (-alpha).ln_1p() };
    a + b
}

/// Binomial probability mass `C(n, l) α^l (1 − α)^(n − l)`.
pub fn binom_pmf(n: u64, l: u64, alpha: f64) -> f64 {
    if l > n {
        return 0.0;
    }
    (ln_choose(n, l) + ln_bernoulli_power(n, l, alpha)).exp()
}

/// The full pmf row `binom_pmf(n, i, α)` for `i = 0..=n`.
pub fn binom_pmf_row(n: u64, alpha: f64) -> Vec<f64> {
    ln_choose_row(n)
        .into_iter()
        .enumerate()
        .map(|(i, lc)| (lc + ln_bernoulli_power(n, i as u64, alpha)).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_values_exact() {
        assert_eq!(binom_pmf(10, 0, 0.0), 1.0);
        assert_eq!(binom_pmf(10, 3, 0.0), 0.0);
        assert_eq!(binom_pmf(10, 10, 1.0), 1.0);
        assert_relative_eq!(binom_pmf(4, 2, 0.5), 0.375, max_relative = 1e-15);
        assert_relative_eq!(ln_choose(52, 5), 2_598_960f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn large_n_does_not_overflow() {
        // C(1000, 2) 0.002^2 0.998^998, evaluated in exact rational form:
        // 499500 * 4e-6 * exp(998 ln 0.998)
        let expected = 499_500.0 * 4e-6 * (998.0 * (-0.002f64).ln_1p()).exp();
        assert_relative_eq!(binom_pmf(1000, 2, 0.002), expected, max_relative = 1e-14);
        assert_relative_eq!(binom_pmf(1000, 2, 0.002), 0.270_935, epsilon = 1e-4);
        assert!(binom_pmf(100_000, 50_000, 0.5) > 0.0);
    }

    #[test]
    fn row_matches_pointwise_and_sums_to_one() {
        let row = binom_pmf_row(1000, 0.013);
        let total: f64 = row.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for i in [0u64, 1, 2, 13, 40, 500, 999, 1000] {
            let p = binom_pmf(1000, i, 0.013);
            assert!((row[i as usize] - p).abs() <= 1e-13 * p.max(1e-300), "i={i}");
        }
    }
}
