use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::util::log_sum_exp;
use crate::{Error, Result};

/// Per-system label counts from a three-way judgment task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct JudgmentCounts {
    pub no: usize,
    pub unsure: usize,
    pub yes: usize,
}

impl JudgmentCounts {
    pub fn total(&self) -> usize {
        self.no + self.unsure + self.yes
    }

    pub fn yes_pct(&self) -> f64 {
        100.0 * self.yes as f64 / self.total().max(1) as f64
    }

    /// One agree/not-agree outcome per item, `yes` items first.
    pub fn outcomes(&self) -> Vec<bool> {
        let mut v = vec![true; self.yes];
        v.resize(self.total(), false);
        v
    }
}

/// Two-sided paired bootstrap on the difference in agree rates.
///
/// Items are resampled with replacement, the same indices for both
/// systems. `p` is twice the fraction of resamples whose difference has
/// the opposite sign to the observed one or is zero, capped at 1. An
/// observed difference of exactly zero gives `p = 1`.
pub fn bootstrap_diff_test(a: &[bool], b: &[bool], iterations: usize, seed: u64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Empty("paired outcomes"));
    }
    if iterations < 1000 {
        return Err(Error::InvalidConfig("bootstrap needs at least 1000 iterations".into()));
    }
    let n = a.len();
    // +1 / -1 / 0 per item; the difference in means is the mean of these.
    let d: Vec<i64> = a.iter().zip(b).map(|(&x, &y)| i64::from(x) - i64::from(y)).collect();
    let observed: i64 = d.iter().sum();
    if observed == 0 {
        return Ok(1.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut against = 0usize;
    for _ in 0..iterations {
        let s: i64 = (0..n).map(|_| d[rng.gen_range(0..n)]).sum();
        if s.signum() != observed.signum() {
            against += 1;
        }
    }
    Ok((2.0 * against as f64 / iterations as f64).min(1.0))
}

/// Exact two-sided binomial test: the total probability of outcomes no
/// more likely than the observed one, evaluated in log space.
pub fn binomial_test(successes: usize, trials: usize, p0: f64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Empty("binomial trials"));
    }
    if successes > trials {
        return Err(Error::OutOfRange { what: "successes", value: successes });
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidConfig(format!("p0 = {p0} must lie in (0, 1)")));
    }
    let n = trials as f64;
    let odds = (p0 / (1.0 - p0)).ln();
    let mut lp = Vec::with_capacity(trials + 1);
    lp.push(n * (1.0 - p0).ln());
    for i in 0..trials {
        let prev = lp[i];
        lp.push(prev + ((n - i as f64) / (i as f64 + 1.0)).ln() + odds);
    }
    // relative slack so tails equal to the observed mass up to rounding count
    let cut = lp[successes] + 1e-7f64.ln_1p();
    let tail: Vec<f64> = lp.into_iter().filter(|&x| x <= cut).collect();
    Ok(log_sum_exp(&tail).exp().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{Binomial, Discrete, DiscreteCDF};

    #[test]
    fn binomial_hand_values() {
        assert!((binomial_test(3, 3, 0.5).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(binomial_test(5, 10, 0.5).unwrap(), 1.0);
        assert!(binomial_test(560, 1000, 0.5).unwrap() < 4e-4);
        assert!(binomial_test(0, 0, 0.5).is_err());
        assert!(binomial_test(4, 3, 0.5).is_err());
        assert!(binomial_test(1, 3, 1.0).is_err());
    }

    #[test]
    fn binomial_matches_reference_tails() {
        for (k, n) in [(560, 1000), (7, 10), (13, 40), (90, 150)] {
            let d = Binomial::new(0.5, n).unwrap();
            let upper = if 2 * k >= n as usize { 1.0 - d.cdf(k as u64 - 1) } else { d.cdf(k as u64) };
            let expected = (2.0 * upper).min(1.0);
            let got = binomial_test(k, n as usize, 0.5).unwrap();
            assert!((got - expected).abs() < 1e-9 * expected.max(1e-300), "{k}/{n}: {got} vs {expected}");
        }
    }

    #[test]
    fn binomial_asymmetric_null() {
        // n=4, p0=0.25, k=3: pmf = [.3164, .4219, .2109, .0469, .0039]; p = P(3)+P(4)
        let d = Binomial::new(0.25, 4).unwrap();
        let expected = d.pmf(3) + d.pmf(4);
        assert!((binomial_test(3, 4, 0.25).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_extremes() {
        let yes = vec![true; 100];
        let no = vec![false; 100];
        assert!(bootstrap_diff_test(&yes, &no, 2000, 1).unwrap() < 1e-3);
        let mixed: Vec<bool> = (0..100).map(|i| i % 3 == 0).collect();
        assert_eq!(bootstrap_diff_test(&mixed, &mixed, 2000, 1).unwrap(), 1.0);
        assert!(bootstrap_diff_test(&yes, &no[..99], 2000, 1).is_err());
        assert!(bootstrap_diff_test(&yes, &no, 999, 1).is_err());
    }

    #[test]
    fn bootstrap_is_seeded() {
        let a: Vec<bool> = (0..200).map(|i| i % 2 == 0).collect();
        let b: Vec<bool> = (0..200).map(|i| i % 5 < 2).collect();
        let p1 = bootstrap_diff_test(&a, &b, 5000, 9).unwrap();
        assert_eq!(p1, bootstrap_diff_test(&a, &b, 5000, 9).unwrap());
        assert!(p1 > 0.0 && p1 < 1.0);
    }

    #[test]
    fn judgment_counts_outcomes() {
        let c = JudgmentCounts { no: 2, unsure: 1, yes: 3 };
        assert_eq!(c.outcomes(), vec![true, true, true, false, false, false]);
        assert_eq!(c.yes_pct(), 50.0);
    }

    proptest! {
        #[test]
        fn binomial_symmetry(n in 1usize..300, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).round() as usize;
            let a = binomial_test(k, n, 0.5).unwrap();
            let b = binomial_test(n - k, n, 0.5).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300) || (a - b).abs() < 1e-15);
            prop_assert!(a > 0.0 && a <= 1.0);
        }
    }
}
