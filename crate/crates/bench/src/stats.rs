//! Summary statistics for benchmark results.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for a single value.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Percentage reduction of `mean` relative to `baseline`.
pub fn improvement_pct(baseline: f64, mean: f64) -> f64 {
    if baseline == mean {
        return 0.0;
    }
    100.0 * (baseline - mean) / baseline
}

/// Outcome of a paired one-sided sign test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignTest {
    /// Pairs where the candidate is strictly lower.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// Probability of at least `wins` successes in `wins + losses` fair
    /// coin flips.
    pub p_value: f64,
}

/// Tests whether `candidate` tends to be lower than `baseline`, pair by pair.
/// Ties are dropped.
pub fn sign_test(candidate: &[f64], baseline: &[f64]) -> SignTest {
    assert_eq!(candidate.len(), baseline.len(), "paired samples differ in length");
    let wins = candidate.iter().zip(baseline).filter(|(c, b)| c < b).count();
    let losses = candidate.iter().zip(baseline).filter(|(c, b)| c > b).count();
    let ties = candidate.len() - wins - losses;
    SignTest {
        wins,
        losses,
        ties,
        p_value: binomial_upper_tail(wins + losses, wins),
    }
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
pub fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    // accumulate C(n, j) / 2^n in log space
    let ln_half_n = n as f64 * 0.5f64.ln();
    let mut ln_choose = 0.0;
    let mut total = 0.0;
    for j in 0..=n {
        if j > 0 {
            ln_choose += ((n - j + 1) as f64).ln() - (j as f64).ln();
        }
        if j >= k {
            total += (ln_choose + ln_half_n).exp();
        }
    }
    total.min(1.0)
}
