//! Exact two-sided sign test for paired binary outcomes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    /// Pairs where only arm A succeeded.
    pub a_only: usize,
    /// Pairs where only arm B succeeded.
    pub b_only: usize,
    pub p_value: f64,
}

/// Two-sided exact binomial test of `a_only` vs `b_only` discordant pairs
/// under p = 1/2. Ties (both or neither succeeded) carry no information and
/// are not passed in. No discordant pairs gives p = 1.
pub fn sign_test(a_only: usize, b_only: usize) -> SignTest {
    let n = a_only + b_only;
    let k = a_only.min(b_only);
    let p_value = if n == 0 { 1.0 } else { (2.0 * binomial_cdf_half(n, k)).min(1.0) };
    SignTest { a_only, b_only, p_value }
}

/// Pairs up two equally long success vectors and tests them.
pub fn paired_sign_test(a: &[bool], b: &[bool]) -> SignTest {
    assert_eq!(a.len(), b.len(), "paired samples must align");
    let a_only = a.iter().zip(b).filter(|(x, y)| **x && !**y).count();
    let b_only = a.iter().zip(b).filter(|(x, y)| !**x && **y).count();
    sign_test(a_only, b_only)
}

/// P(X <= k) for X ~ Binomial(n, 1/2), summed in log space.
fn binomial_cdf_half(n: usize, k: usize) -> f64 {
    let ln_half_n = n as f64 * std::f64::consts::LN_2;
    let mut ln_choose = 0.0f64;
    let mut total = 0.0;
    for i in 0..=k {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        total += (ln_choose - ln_half_n).exp();
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(a: u64, b: u64) -> f64 {
        // Rational reference: 2 * sum_{i<=min} C(n, i) / 2^n.
        let n = a + b;
        let k = a.min(b);
        let mut c: u128 = 1;
        let mut s: u128 = 0;
        for i in 0..=k {
            if i > 0 {
                c = c * (n - i + 1) as u128 / i as u128;
            }
            s += c;
        }
        (2.0 * s as f64 / (1u128 << n) as f64).min(1.0)
    }

    #[test]
    fn matches_rational_reference() {
        for a in 0..40u64 {
            for b in 0..40u64 {
                if a + b == 0 {
                    continue;
                }
                let got = sign_test(a as usize, b as usize).p_value;
                assert!((got - exact(a, b)).abs() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn known_values() {
        assert_eq!(sign_test(0, 0).p_value, 1.0);
        assert!((sign_test(0, 5).p_value - 0.0625).abs() < 1e-15);
        assert!((sign_test(9, 1).p_value - 22.0 / 1024.0).abs() < 1e-15);
        assert!(sign_test(500, 0).p_value < 1e-100);
    }
}
