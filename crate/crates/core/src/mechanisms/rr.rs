use rand::Rng;
use serde::{Deserialize, Serialize};

use super::check_probability;
use crate::error::{Error, Result};

/// Two-coin randomized response: with probability `pi1` answer truthfully,
/// otherwise answer "yes" with probability `pi2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RrParams {
    pub pi1: f64,
    pub pi2: f64,
}

impl RrParams {
    pub fn new(pi1: f64, pi2: f64) -> Result<Self> {
        let p = RrParams { pi1, pi2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("pi1", self.pi1)?;
        check_probability("pi2", self.pi2)
    }

    /// Per-owner probability of a noise "yes": (1 - pi1) * pi2.
    pub fn noise_rate(&self) -> f64 {
        (1.0 - self.pi1) * self.pi2
    }
}

pub fn rr_privatize<R: Rng + ?Sized>(truth: bool, params: &RrParams, rng: &mut R) -> bool {
    if rng.gen_bool(params.pi1) {
        truth
    } else {
        rng.gen_bool(params.pi2)
    }
}

/// Subtracts the expected noise and rescales by `pi1`. May return a negative
/// value; callers report it rather than clamp.
pub fn rr_estimate(private_sum: f64, total: f64, params: &RrParams) -> f64 {
    (private_sum - params.noise_rate() * total) / params.pi1
}

/// Standard deviation of the noise count over `total` owners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseStddev {
    /// Binomial: sqrt(total * q * (1 - q)).
    pub exact: f64,
    /// Poisson-style shortcut sqrt(total * q), the figure usually quoted.
    pub approx: f64,
}

pub fn rr_noise_stddev(params: &RrParams, total: u64) -> NoiseStddev {
    let q = params.noise_rate();
    let t = total as f64;
    NoiseStddev { exact: (t * q * (1.0 - q)).sqrt(), approx: (t * q).sqrt() }
}

/// ln( (pi1 + (1-pi1) pi2) / ((1-pi1) pi2) ).
pub fn rr_epsilon(params: &RrParams) -> Result<f64> {
    let q = params.noise_rate();
    if q <= 0.0 {
        return Err(Error::InfiniteLeakage("(1 - pi1) * pi2 is zero"));
    }
    Ok(((params.pi1 + q) / q).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_truthful_coin() {
        let p = RrParams::new(1.0, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert!(rr_privatize(true, &p, &mut rng));
            assert!(!rr_privatize(false, &p, &mut rng));
        }
    }

    #[test]
    fn yes_rate_matches_binomial_oracle() {
        let p = RrParams::new(0.85, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 1_000_000;
        let ones = (0..trials).filter(|_| rr_privatize(true, &p, &mut rng)).count();
        let rate = 0.85 + 0.15 * 0.3;
        let mean = ones as f64 / trials as f64;
        let sigma = (rate * (1.0 - rate) / trials as f64).sqrt();
        assert!((mean - rate).abs() < 4.0 * sigma, "mean {mean} vs {rate}");
    }

    #[test]
    fn estimate_examples() {
        let p = RrParams::new(0.85, 0.3).unwrap();
        assert!((rr_estimate(55.5, 100.0, &p) - 60.0).abs() < 1e-9);
        assert!(rr_estimate(p.noise_rate() * 100.0, 100.0, &p).abs() < 1e-12);
        let truthful = RrParams::new(1.0, 0.3).unwrap();
        assert_eq!(rr_estimate(42.0, 100.0, &truthful), 42.0);
        // Negative estimates pass through unclamped.
        assert!(rr_estimate(0.0, 100.0, &p) < 0.0);
    }

    #[test]
    fn stddev_reference_values() {
        let p = RrParams::new(0.85, 0.3).unwrap();
        assert!((rr_noise_stddev(&p, 10_000).approx - 21.2).abs() < 0.05);
        assert!((rr_noise_stddev(&p, 1_000_000).approx - 212.0).abs() < 0.5);
        let zero = rr_noise_stddev(&p, 0);
        assert_eq!((zero.exact, zero.approx), (0.0, 0.0));
        let s = rr_noise_stddev(&p, 10_000);
        assert!((s.exact - (10_000.0f64 * 0.045 * 0.955).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn epsilon_values() {
        let e = rr_epsilon(&RrParams::new(0.8, 0.2).unwrap()).unwrap();
        assert!((e - 21f64.ln()).abs() < 1e-12);
        assert!((e - 3.0445).abs() < 1e-4);
        let e = rr_epsilon(&RrParams::new(0.85, 0.3).unwrap()).unwrap();
        assert!((e - (0.895f64 / 0.045).ln()).abs() < 1e-12);
        assert!((e - 2.990).abs() < 1e-3);
        let e = rr_epsilon(&RrParams::new(0.0, 0.3).unwrap()).unwrap();
        assert_eq!(e, 0.0);
        assert!(matches!(rr_epsilon(&RrParams::new(1.0, 0.3).unwrap()), Err(Error::InfiniteLeakage(_))));
    }

    #[test]
    fn epsilon_increases_in_pi1() {
        for j in 1..20 {
            let pi2 = j as f64 / 20.0;
            let mut prev = -1.0;
            for i in 0..20 {
                let e = rr_epsilon(&RrParams::new(i as f64 / 20.0, pi2).unwrap()).unwrap();
                assert!(e > prev);
                prev = e;
            }
        }
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(RrParams::new(1.2, 0.3).is_err());
        assert!(RrParams::new(0.5, f64::NAN).is_err());
    }
}
