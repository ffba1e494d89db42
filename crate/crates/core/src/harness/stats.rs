use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::statistics::Statistics;

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().mean()
}

/// Sample standard deviation (n − 1 denominator); 0 below two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    values.iter().std_dev()
}

/// Outcome of a one-sided sign test that `a` tends to exceed `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// P(X ≥ wins) for X ~ Binomial(wins + losses, 1/2).
    pub p_value: f64,
}

/// Pairs are compared elementwise; ties are dropped.
pub fn sign_test(a: &[f64], b: &[f64]) -> SignTest {
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Greater) => wins += 1,
            Some(std::cmp::Ordering::Less) => losses += 1,
            _ => ties += 1,
        }
    }
    SignTest {
        wins,
        losses,
        ties,
        p_value: binomial_upper_tail(wins + losses, wins),
    }
}

/// P(X ≥ k) for X ~ Binomial(n, 1/2).
pub fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let dist = Binomial::new(0.5, n as u64).expect("p = 1/2 is a valid probability");
    dist.sf(k as u64 - 1)
}

/// Direction a sweep is expected to move in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    NonIncreasing,
    NonDecreasing,
}

/// Consecutive pairs that move against `trend`.
pub fn inversions(values: &[f64], trend: Trend) -> usize {
    values
        .windows(2)
        .filter(|w| match trend {
            Trend::NonIncreasing => w[1] > w[0],
            Trend::NonDecreasing => w[1] < w[0],
        })
        .count()
}

/// Moving average over a trailing window; entry i averages
/// `values[i + 1 - window ..= i]`, shortened at the start.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..values.len())
        .map(|i| mean(&values[(i + 1).saturating_sub(window)..=i]))
        .collect()
}
