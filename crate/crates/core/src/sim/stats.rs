use statrs::distribution::{Beta, ContinuousCDF};

/// Two-sided confidence level used for every reported interval.
pub const CONFIDENCE: f64 = 0.99;

/// Observed success rate with an exact (Clopper-Pearson) binomial interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let (ci_low, ci_high) = clopper_pearson(successes, trials, CONFIDENCE);
        RateEstimate {
            trials,
            successes,
            rate: successes as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Exact binomial interval at the given two-sided confidence.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    let alpha = 1.0 - confidence;
    let (x, n) = (successes as f64, trials as f64);
    let low = if successes == 0 {
        0.0
    } else {
        Beta::new(x, n - x + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        Beta::new(x + 1.0, n - x)
            .unwrap()
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    // clamp against round-off so the point estimate always lies inside
    let rate = x / n;
    (low.min(rate), high.max(rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from scipy.stats.beta.ppf.
    #[test]
    fn matches_reference_intervals() {
        let cases = [
            (391u64, 100_000u64, 0.0034202762, 0.00444755366),
            (0, 100_000, 0.0, 5.29817701e-05),
            (5, 10, 0.128310554, 0.871689446),
            (1000, 1000, 0.994715694, 1.0),
        ];
        for (x, n, lo, hi) in cases {
            let (l, h) = clopper_pearson(x, n, 0.99);
            assert!(
                (l - lo).abs() <= 1e-6 * lo.max(1e-3),
                "{x}/{n}: low {l} vs {lo}"
            );
            assert!(
                (h - hi).abs() <= 1e-6 * hi.max(1e-3),
                "{x}/{n}: high {h} vs {hi}"
            );
        }
    }

    #[test]
    fn rate_inside_interval() {
        for (x, n) in [(0, 1000), (1, 1000), (500, 1000), (999, 1000), (1000, 1000)] {
            let r = RateEstimate::from_counts(x, n);
            assert!(r.ci_low <= r.rate && r.rate <= r.ci_high);
        }
    }
}
