use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{
    calibrated_estimate, calibrated_privatize, rr_estimate, rr_privatize, xyz_estimate, xyz_privatize_binary,
    xyz_privatize_multi, xyz_privatize_multi_absent, CalibratedParams, RrParams, TwoRoundResponse, Vote,
    XyzBinaryParams, XyzMultiParams,
};

/// Identifier written for a "yes" under the binary mechanisms.
pub const YES_ID: u32 = 1;

/// The privatization applied by every owner in an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    Rr(RrParams),
    XyzBinary(XyzBinaryParams),
    XyzMulti(XyzMultiParams),
    Calibrated(CalibratedParams),
}

/// One owner's claims: per round, one entry per write, `None` for a null write.
///
/// Every round of one owner carries the same number of writes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnerClaims {
    pub rounds: Vec<Vec<Option<u32>>>,
    /// The truthful value whose round-two write was withheld, if sampled.
    pub sampled_truth: Option<u32>,
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Rr(_) => "rr",
            Mechanism::XyzBinary(_) => "xyz_binary",
            Mechanism::XyzMulti(_) => "xyz_multi",
            Mechanism::Calibrated(_) => "calibrated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Mechanism::Rr(p) => p.validate(),
            Mechanism::XyzBinary(p) => p.validate(),
            Mechanism::XyzMulti(p) => p.validate(),
            Mechanism::Calibrated(p) => p.validate(),
        }
    }

    pub fn rounds(&self) -> usize {
        match self {
            Mechanism::Rr(_) => 1,
            _ => 2,
        }
    }

    pub fn is_binary(&self) -> bool {
        !matches!(self, Mechanism::XyzMulti(_))
    }

    /// Largest value an owner can claim.
    pub fn max_value(&self) -> u32 {
        match self {
            Mechanism::XyzMulti(p) => p.domain_size - 1,
            _ => YES_ID,
        }
    }

    /// Width of the identifier field. Identifiers are written as `value + 1`
    /// so a real write never has an all-zero identifier.
    pub fn id_bits(&self) -> u32 {
        32 - (self.max_value() + 1).leading_zeros()
    }

    /// Identifiers that receive an estimate.
    pub fn estimated_values(&self) -> Vec<u32> {
        match self {
            Mechanism::XyzMulti(p) => (0..p.domain_size).collect(),
            _ => vec![YES_ID],
        }
    }

    /// Ground-truth count per estimated identifier. Binary mechanisms treat
    /// any held value as "yes".
    pub fn true_counts(&self, truths: &[Option<u32>]) -> BTreeMap<u32, u64> {
        let mut out: BTreeMap<u32, u64> = self.estimated_values().into_iter().map(|v| (v, 0)).collect();
        for t in truths.iter().flatten() {
            let key = if self.is_binary() { YES_ID } else { *t };
            if let Some(c) = out.get_mut(&key) {
                *c += 1;
            }
        }
        out
    }

    /// Upper bound on the expected number of non-null writes in any round.
    pub fn expected_writes(&self, truths: &[Option<u32>]) -> f64 {
        let holders = truths.iter().filter(|t| t.is_some()).count() as f64;
        let total = truths.len() as f64;
        match self {
            Mechanism::Rr(p) => holders * p.pi1 + total * p.noise_rate(),
            Mechanism::XyzBinary(p) => holders * p.pi_s + total * p.pi_yes,
            Mechanism::XyzMulti(p) => holders * p.pi_s + total * p.pi_v * p.domain_size as f64,
            Mechanism::Calibrated(p) => holders * p.pi_s_yes_1 + (total - holders) * p.pi_s_no_1,
        }
    }

    pub fn privatize<R: Rng + ?Sized>(&self, truth: Option<u32>, rng: &mut R) -> Result<OwnerClaims> {
        let yes = |v: Vote| v.is_yes().then_some(YES_ID);
        let binary = |resp: TwoRoundResponse<Vote>, sampled_truth| OwnerClaims {
            rounds: vec![vec![yes(resp.round1)], vec![yes(resp.round2)]],
            sampled_truth,
        };
        Ok(match self {
            Mechanism::Rr(p) => {
                let bit = rr_privatize(truth.is_some(), p, rng);
                OwnerClaims { rounds: vec![vec![bit.then_some(YES_ID)]], sampled_truth: None }
            }
            Mechanism::XyzBinary(p) => {
                let resp = xyz_privatize_binary(truth.is_some(), p, rng);
                let sampled = (resp.sampled && truth.is_some()).then_some(YES_ID);
                binary(resp, sampled)
            }
            Mechanism::Calibrated(p) => binary(calibrated_privatize(truth.is_some(), p, rng), None),
            Mechanism::XyzMulti(p) => {
                let resp = match truth {
                    Some(v) => xyz_privatize_multi(v, p, rng)?,
                    None => xyz_privatize_multi_absent(p, rng),
                };
                let round1: Vec<Option<u32>> = resp.round1.iter().map(|&v| Some(v)).collect();
                let round2 = resp.round1.iter().map(|v| resp.round2.contains(v).then_some(*v)).collect();
                OwnerClaims { rounds: vec![round1, round2], sampled_truth: if resp.sampled { truth } else { None } }
            }
        })
    }

    /// Applies the mechanism's estimator to per-round counts.
    pub fn estimate(&self, counts: &[BTreeMap<u32, u64>], participants: u64) -> Result<BTreeMap<u32, f64>> {
        if counts.len() != self.rounds() {
            return Err(Error::InvalidParams(format!("expected {} rounds of counts", self.rounds())));
        }
        let get = |round: usize, v: u32| counts[round].get(&v).copied().unwrap_or(0) as f64;
        let mut out = BTreeMap::new();
        for v in self.estimated_values() {
            let e = match self {
                Mechanism::Rr(p) => rr_estimate(get(0, v), participants as f64, p),
                Mechanism::XyzBinary(p) => xyz_estimate(get(0, v), get(1, v), p.pi_s),
                Mechanism::XyzMulti(p) => xyz_estimate(get(0, v), get(1, v), p.pi_s),
                Mechanism::Calibrated(p) => calibrated_estimate(get(0, v), get(1, v), p)?,
            };
            out.insert(v, e);
        }
        Ok(out)
    }
}
