use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_probability, TwoRoundResponse, Vote};
use crate::error::{Error, Result};

/// Three-sided die for the binary two-round mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XyzBinaryParams {
    /// Probability the owner answers truthfully in round one and abstains in round two.
    pub pi_s: f64,
    /// Probability of a random "yes" held across both rounds.
    pub pi_yes: f64,
    /// Probability of a random "no" held across both rounds.
    pub pi_no: f64,
}

impl XyzBinaryParams {
    pub fn new(pi_s: f64, pi_yes: f64, pi_no: f64) -> Result<Self> {
        let p = XyzBinaryParams { pi_s, pi_yes, pi_no };
        p.validate()?;
        Ok(p)
    }

    /// Fills `pi_no` so the die sums to one.
    pub fn from_sampling(pi_s: f64, pi_yes: f64) -> Result<Self> {
        let rest = 1.0 - pi_s - pi_yes;
        // round-off from e.g. 1 - 0.8 - 0.2
        let pi_no = if rest < 0.0 && rest > -1e-12 { 0.0 } else { rest };
        Self::new(pi_s, pi_yes, pi_no)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("pi_s", self.pi_s)?;
        check_probability("pi_yes", self.pi_yes)?;
        check_probability("pi_no", self.pi_no)?;
        let total = self.pi_s + self.pi_yes + self.pi_no;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("die probabilities sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// Parameters of the multi-value mechanism over the value domain `0..domain_size`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XyzMultiParams {
    pub pi_s: f64,
    /// Per-value probability of a random claim.
    pub pi_v: f64,
    pub domain_size: u32,
}

impl XyzMultiParams {
    pub fn new(pi_s: f64, pi_v: f64, domain_size: u32) -> Result<Self> {
        let p = XyzMultiParams { pi_s, pi_v, domain_size };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("pi_s", self.pi_s)?;
        check_probability("pi_v", self.pi_v)?;
        if self.pi_s <= 0.0 || self.pi_v <= 0.0 {
            return Err(Error::InvalidParams("pi_s and pi_v must be positive".into()));
        }
        if self.pi_s + self.pi_v > 1.0 + 1e-12 {
            return Err(Error::InvalidParams(format!("pi_s + pi_v = {} exceeds 1", self.pi_s + self.pi_v)));
        }
        if self.domain_size == 0 {
            return Err(Error::InvalidParams("domain_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// One die roll: sampled owners answer truthfully then abstain; the rest
/// repeat a random answer in both rounds.
pub fn xyz_privatize_binary<R: Rng + ?Sized>(
    truth: bool,
    params: &XyzBinaryParams,
    rng: &mut R,
) -> TwoRoundResponse<Vote> {
    let roll: f64 = rng.gen();
    if roll < params.pi_s {
        TwoRoundResponse { round1: Vote::from_bit(truth), round2: Vote::Abstain, sampled: true }
    } else if roll < params.pi_s + params.pi_yes {
        TwoRoundResponse { round1: Vote::Yes, round2: Vote::Yes, sampled: false }
    } else {
        TwoRoundResponse { round1: Vote::No, round2: Vote::No, sampled: false }
    }
}

/// (round-one sum - round-two sum) / pi_s.
pub fn xyz_estimate(sum_round1: f64, sum_round2: f64, pi_s: f64) -> f64 {
    (sum_round1 - sum_round2) / pi_s
}

/// Multi-value privatization for an owner whose truthful value is `truth`.
///
/// The truthful value gets its own die: sampled with `pi_s`, randomly
/// claimed with `pi_v`, otherwise omitted. Every other value is claimed
/// independently with `pi_v`. A sampled owner drops only the truthful value
/// in round two.
pub fn xyz_privatize_multi<R: Rng + ?Sized>(
    truth: u32,
    params: &XyzMultiParams,
    rng: &mut R,
) -> Result<TwoRoundResponse<BTreeSet<u32>>> {
    if truth >= params.domain_size {
        return Err(Error::InvalidTruth { value: truth, domain_size: params.domain_size });
    }
    Ok(privatize_multi(Some(truth), params, rng))
}

/// Multi-value privatization for an owner holding none of the domain values:
/// only random claims, identical in both rounds.
pub fn xyz_privatize_multi_absent<R: Rng + ?Sized>(
    params: &XyzMultiParams,
    rng: &mut R,
) -> TwoRoundResponse<BTreeSet<u32>> {
    privatize_multi(None, params, rng)
}

fn privatize_multi<R: Rng + ?Sized>(
    truth: Option<u32>,
    params: &XyzMultiParams,
    rng: &mut R,
) -> TwoRoundResponse<BTreeSet<u32>> {
    let mut round1 = BTreeSet::new();
    let mut sampled = false;
    for v in 0..params.domain_size {
        if Some(v) == truth {
            let roll: f64 = rng.gen();
            if roll < params.pi_s {
                sampled = true;
                round1.insert(v);
            } else if roll < params.pi_s + params.pi_v {
                round1.insert(v);
            }
        } else if rng.gen_bool(params.pi_v) {
            round1.insert(v);
        }
    }
    let mut round2 = round1.clone();
    if sampled {
        round2.remove(&truth.expect("only a truthful value can be sampled"));
    }
    TwoRoundResponse { round1, round2, sampled }
}

/// Leakage of the round-one "yes": ln((pi_yes + pi_s) / pi_yes).
pub fn xyz_epsilon_binary(params: &XyzBinaryParams) -> Result<f64> {
    if params.pi_yes <= 0.0 {
        return Err(Error::InfiniteLeakage("pi_yes is zero"));
    }
    let ratio = (params.pi_yes + params.pi_s) / params.pi_yes;
    Ok(ratio.ln().max((1.0 / ratio).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DominantRound {
    Round1,
    Round2,
    Tie,
}

/// Per-round leakage of the multi-value mechanism and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiLeakage {
    pub round1: f64,
    pub round2: f64,
    pub epsilon: f64,
    pub dominant: DominantRound,
}

/// Round one: ln((pi_v + pi_s) / pi_v). Round two: ln(pi_v / (pi_v - pi_s)),
/// which needs `pi_v > pi_s`.
pub fn xyz_epsilon_multi(params: &XyzMultiParams) -> Result<MultiLeakage> {
    let (s, v) = (params.pi_s, params.pi_v);
    if v <= s {
        return Err(Error::UndefinedLeakage("round-two ratio needs pi_v > pi_s"));
    }
    let sym = |ratio: f64| ratio.ln().max((1.0 / ratio).ln());
    let round1 = sym((v + s) / v);
    let round2 = sym((v - s) / v);
    let dominant = if round1 > round2 {
        DominantRound::Round1
    } else if round2 > round1 {
        DominantRound::Round2
    } else {
        DominantRound::Tie
    };
    Ok(MultiLeakage { round1, round2, epsilon: round1.max(round2), dominant })
}
