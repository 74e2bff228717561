use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_probability, TwoRoundResponse, Vote};
use crate::error::{Error, Result};

/// Per-population, per-round "1" rates for the calibrated two-round variant.
///
/// The No-population rate must match across rounds so it cancels in the
/// round difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibratedParams {
    pub pi_s_yes_1: f64,
    pub pi_s_no_1: f64,
    pub pi_s_yes_2: f64,
    pub pi_s_no_2: f64,
    /// Published "0" rate; informational, each round is a Bernoulli draw.
    pub pi_no: f64,
}

impl CalibratedParams {
    pub fn new(pi_s_yes_1: f64, pi_s_no_1: f64, pi_s_yes_2: f64, pi_s_no_2: f64, pi_no: f64) -> Result<Self> {
        let p = CalibratedParams { pi_s_yes_1, pi_s_no_1, pi_s_yes_2, pi_s_no_2, pi_no };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("pi_s_yes_1", self.pi_s_yes_1)?;
        check_probability("pi_s_no_1", self.pi_s_no_1)?;
        check_probability("pi_s_yes_2", self.pi_s_yes_2)?;
        check_probability("pi_s_no_2", self.pi_s_no_2)?;
        check_probability("pi_no", self.pi_no)?;
        if self.pi_s_yes_1 <= self.pi_s_yes_2 {
            return Err(Error::InvalidParams("pi_s_yes_1 must exceed pi_s_yes_2".into()));
        }
        if (self.pi_s_no_1 - self.pi_s_no_2).abs() > 1e-12 {
            return Err(Error::InvalidParams("pi_s_no_1 must equal pi_s_no_2".into()));
        }
        Ok(())
    }

    /// The effective sampling rate seen by the estimator.
    pub fn divisor(&self) -> f64 {
        self.pi_s_yes_1 - self.pi_s_yes_2
    }
}

/// Independent fresh draws per round. `sampled` records whether the
/// round-one coin emitted a 1.
pub fn calibrated_privatize<R: Rng + ?Sized>(
    truth: bool,
    params: &CalibratedParams,
    rng: &mut R,
) -> TwoRoundResponse<Vote> {
    let (p1, p2) = if truth { (params.pi_s_yes_1, params.pi_s_yes_2) } else { (params.pi_s_no_1, params.pi_s_no_2) };
    let r1 = rng.gen_bool(p1);
    let r2 = rng.gen_bool(p2);
    TwoRoundResponse { round1: Vote::from_bit(r1), round2: Vote::from_bit(r2), sampled: r1 }
}

pub fn calibrated_estimate(sum1: f64, sum2: f64, params: &CalibratedParams) -> Result<f64> {
    let d = params.divisor();
    if d == 0.0 {
        return Err(Error::DegenerateCalibration);
    }
    Ok((sum1 - sum2) / d)
}
