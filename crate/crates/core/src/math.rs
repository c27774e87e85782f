//! Log-domain combinatorics and binomial distribution tables.
//!
//! Binomial products for photon numbers up to a few hundred overflow doubles
//! long before the coefficients themselves become large, so everything here
//! works with `ln n!` and exponentiates once per term.

use std::sync::OnceLock;

/// Largest argument `ln_factorial` supports. Photon sectors are capped well
/// below this; the slack covers SPDC truncation tails at high gain.
const LN_FACT_MAX: usize = 8192;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; LN_FACT_MAX + 1];
        for i in 1..=LN_FACT_MAX {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    })
}

/// ln(n!) from a cumulative table; exact to double rounding for all supported n.
pub fn ln_factorial(n: usize) -> f64 {
    ln_fact_table()[n]
}

/// ln C(n, k). Returns negative infinity when k > n (empty coefficient).
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Probability mass function of Binomial(n, p), as a vector of length n + 1.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    debug_assert!((0.0..=1.0).contains(&p));
    if p == 0.0 {
        let mut row = vec![0.0; n + 1];
        row[0] = 1.0;
        return row;
    }
    if p == 1.0 {
        let mut row = vec![0.0; n + 1];
        row[n] = 1.0;
        return row;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    (0..=n)
        .map(|k| (ln_binomial(n, k) + k as f64 * lp + (n - k) as f64 * lq).exp())
        .collect()
}

/// Pre-tabulated Binomial(c, eta) pmf and cdf rows for every trial count
/// c = 0..=max_count. Shared by the exact loss path, which reduces every
/// four-fold thinning to sums over these rows.
pub struct BinomialTable {
    eta: f64,
    pmf: Vec<Vec<f64>>,
    cdf: Vec<Vec<f64>>,
}

impl BinomialTable {
    pub fn new(max_count: usize, eta: f64) -> Self {
        let pmf: Vec<Vec<f64>> = (0..=max_count).map(|c| binomial_pmf(c, eta)).collect();
        let cdf = pmf
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|&p| {
                        acc += p;
                        acc.min(1.0)
                    })
                    .collect()
            })
            .collect();
        Self { eta, pmf, cdf }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn max_count(&self) -> usize {
        self.pmf.len() - 1
    }

    /// pmf row of Binomial(c, eta).
    pub fn pmf(&self, c: usize) -> &[f64] {
        &self.pmf[c]
    }

    /// P(X <= j) for X ~ Binomial(c, eta), clamped for out-of-range j.
    pub fn cdf(&self, c: usize, j: i64) -> f64 {
        if j < 0 {
            0.0
        } else if j as usize >= c {
            1.0
        } else {
            self.cdf[c][j as usize]
        }
    }
}

/// SplitMix64 step; used to derive independent per-cell RNG seeds from a
/// single user seed so Monte Carlo results do not depend on scheduling.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_factorial_small_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert_relative_eq!(ln_factorial(5), 120.0_f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_factorial(20), 2.432902008176640e18_f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn ln_binomial_matches_exact() {
        assert_relative_eq!(ln_binomial(10, 3).exp(), 120.0, max_relative = 1e-12);
        assert_relative_eq!(ln_binomial(52, 5).exp(), 2_598_960.0, max_relative = 1e-10);
        assert_eq!(ln_binomial(3, 5), f64::NEG_INFINITY);
    }

    #[test]
    fn pmf_normalizes_and_matches_mean() {
        for &(n, p) in &[(0usize, 0.3), (7, 0.5), (60, 0.05), (200, 0.97)] {
            let row = binomial_pmf(n, p);
            let total: f64 = row.iter().sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-12);
            let mean: f64 = row.iter().enumerate().map(|(k, &w)| k as f64 * w).sum();
            assert_relative_eq!(mean, n as f64 * p, epsilon = 1e-10);
        }
    }

    #[test]
    fn pmf_degenerate_edges() {
        assert_eq!(binomial_pmf(4, 0.0), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(binomial_pmf(4, 1.0), vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn cdf_clamps() {
        let t = BinomialTable::new(5, 0.5);
        assert_eq!(t.cdf(3, -1), 0.0);
        assert_eq!(t.cdf(3, 3), 1.0);
        assert_eq!(t.cdf(3, 10), 1.0);
        assert_relative_eq!(t.cdf(2, 0), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn splitmix_distinct_streams() {
        let a = splitmix64(1);
        let b = splitmix64(2);
        assert_ne!(a, b);
        assert_eq!(splitmix64(1), a);
    }
}
