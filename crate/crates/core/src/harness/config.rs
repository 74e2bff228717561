use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::encode::DEFAULT_CHECKSUM_BITS;
use super::mechanism::Mechanism;
use crate::error::{Error, Result};
use crate::privwrite::FssParams;
use crate::verify::BlindingKind;

/// How aggregators receive writes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WriteMode {
    /// FSS keys, one per aggregator.
    #[default]
    Full,
    /// The point function in the clear. Same randomness and database as
    /// `Full`, without the key generation and evaluation cost.
    Plaintext,
}

/// When an owner draws database slots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotPolicy {
    /// One slot per write position for the whole epoch: the `w`-th write of
    /// round two lands where the `w`-th write of round one did. Owners whose
    /// claims repeat across rounds then collide identically in both rounds,
    /// and those collisions cancel in the round difference.
    #[default]
    PerEpoch,
    /// A fresh slot for every write of every round.
    PerRound,
}

/// Default database size is this many times the expected writes per round.
pub const SLOT_HEADROOM: f64 = 16.0;

fn default_parties() -> usize {
    3
}

fn default_k() -> u64 {
    2
}

fn default_checksum_bits() -> u32 {
    DEFAULT_CHECKSUM_BITS
}

fn default_verification() -> Option<BlindingKind> {
    Some(BlindingKind::Square)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochConfig {
    #[serde(default = "default_parties")]
    pub parties: usize,
    #[serde(default = "default_k")]
    pub k_threshold: u64,
    /// Power of two. Derived from the expected write count when absent.
    #[serde(default)]
    pub db_slots: Option<u64>,
    /// Row width override; the row count follows.
    #[serde(default)]
    pub mu: Option<u64>,
    pub mechanism: Mechanism,
    #[serde(default = "default_checksum_bits")]
    pub checksum_bits: u32,
    #[serde(default)]
    pub epoch_id: u64,
    #[serde(default)]
    pub master_seed: u64,
    /// `None` disables unit-vector verification.
    #[serde(default = "default_verification")]
    pub verification: Option<BlindingKind>,
    #[serde(default)]
    pub write_mode: WriteMode,
    #[serde(default)]
    pub slot_policy: SlotPolicy,
}

impl EpochConfig {
    pub fn new(mechanism: Mechanism) -> Self {
        EpochConfig {
            parties: default_parties(),
            k_threshold: default_k(),
            db_slots: None,
            mu: None,
            mechanism,
            checksum_bits: DEFAULT_CHECKSUM_BITS,
            epoch_id: 0,
            master_seed: 0,
            verification: default_verification(),
            write_mode: WriteMode::Full,
            slot_policy: SlotPolicy::PerEpoch,
        }
    }

    /// Checks everything that does not depend on the population.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        self.mechanism.validate()?;
        if self.parties < 2 {
            return bad(format!("need at least 2 parties, got {}", self.parties));
        }
        if self.k_threshold < 2 {
            return bad(format!("k_threshold must be at least 2, got {}", self.k_threshold));
        }
        if !(1..=32).contains(&self.checksum_bits) {
            return bad(format!("checksum_bits must be in 1..=32, got {}", self.checksum_bits));
        }
        if self.message_bits() > 64 {
            return bad(format!("message width {} exceeds 64 bits", self.message_bits()));
        }
        if self.verification == Some(BlindingKind::Inverse) {
            return bad("inverse verification rejects null writes; use square or product".into());
        }
        if let Some(n) = self.db_slots {
            if n < 2 || !n.is_power_of_two() {
                return bad(format!("db_slots must be a power of two >= 2, got {n}"));
            }
        }
        Ok(())
    }

    pub fn message_bits(&self) -> u32 {
        self.mechanism.id_bits() + self.checksum_bits
    }

    /// Smallest power of two at least `SLOT_HEADROOM` times the expected writes.
    pub fn default_db_slots(&self, truths: &[Option<u32>]) -> u64 {
        let want = (self.mechanism.expected_writes(truths) * SLOT_HEADROOM).ceil().max(2.0) as u64;
        want.next_power_of_two()
    }

    /// FSS layout for this epoch and population.
    pub fn fss_params(&self, truths: &[Option<u32>]) -> Result<FssParams> {
        self.validate()?;
        let slots = self.db_slots.unwrap_or_else(|| self.default_db_slots(truths));
        let expected = self.mechanism.expected_writes(truths);
        if (slots as f64) < expected {
            return Err(Error::InvalidParams(format!("{slots} slots cannot hold {expected:.0} expected writes")));
        }
        let params = FssParams::new(slots.trailing_zeros(), self.parties, self.message_bits())?;
        match self.mu {
            Some(mu) => params.with_mu(mu),
            None => Ok(params),
        }
    }

    /// Independent randomness for one owner and one purpose.
    pub(crate) fn owner_rng(&self, purpose: Purpose, owner_index: u64) -> ChaCha20Rng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.epoch_id.to_le_bytes());
        seed[16..24].copy_from_slice(&(purpose as u64).to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(seed);
        rng.set_stream(owner_index);
        rng
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Purpose {
    Mechanism = 1,
    Slots = 2,
    Keys = 3,
    Verify = 4,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{RrParams, XyzBinaryParams};

    fn xyz() -> EpochConfig {
        EpochConfig::new(Mechanism::XyzBinary(XyzBinaryParams::from_sampling(0.45, 0.2).unwrap()))
    }

    #[test]
    fn default_slots() {
        let mut truths = vec![None; 10_000];
        truths[..100].fill(Some(0));
        let cfg = xyz();
        // 100 * 0.45 + 10_000 * 0.2 = 2045 expected writes
        assert_eq!(cfg.default_db_slots(&truths), 32_768);
        let params = cfg.fss_params(&truths).unwrap();
        assert_eq!(params.n, 15);
        assert_eq!(params.m, 18);
        assert_eq!(params.p, 3);
    }

    #[test]
    fn rejects() {
        let mut cfg = xyz();
        cfg.parties = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = xyz();
        cfg.k_threshold = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = xyz();
        cfg.verification = Some(BlindingKind::Inverse);
        assert!(cfg.validate().is_err());
        let mut cfg = xyz();
        cfg.db_slots = Some(1000);
        assert!(cfg.validate().is_err());
        let mut cfg = xyz();
        cfg.db_slots = Some(4);
        assert!(cfg.fss_params(&[Some(0); 100]).is_err());
    }

    #[test]
    fn json_defaults() {
        let cfg: EpochConfig = serde_json::from_str(r#"{"mechanism":{"kind":"rr","pi1":0.8,"pi2":0.2}}"#).unwrap();
        assert_eq!(cfg, EpochConfig::new(Mechanism::Rr(RrParams::new(0.8, 0.2).unwrap())));
        assert!(
            serde_json::from_str::<EpochConfig>(r#"{"mechanism":{"kind":"rr","pi1":0.8,"pi2":0.2},"zz":1}"#).is_err()
        );
    }
}
