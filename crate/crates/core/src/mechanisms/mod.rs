//! Local privatization mechanisms and their estimators.
//!
//! Randomness is always injected by the caller. The two-round mechanisms
//! return both rounds at once because the second round is a deterministic
//! function of the first round's die roll.

mod calibrated;
mod discretize;
mod rr;
mod xyz;

use serde::{Deserialize, Serialize};

pub use calibrated::{calibrated_estimate, calibrated_privatize, CalibratedParams};
pub use discretize::{discretize, row_major_index, GridSpec};
pub use rr::{rr_epsilon, rr_estimate, rr_noise_stddev, rr_privatize, NoiseStddev, RrParams};
pub use xyz::{
    xyz_epsilon_binary, xyz_epsilon_multi, xyz_estimate, xyz_privatize_binary, xyz_privatize_multi,
    xyz_privatize_multi_absent, DominantRound, MultiLeakage, XyzBinaryParams, XyzMultiParams,
};

use crate::error::{Error, Result};

/// One round's answer to a binary query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vote {
    No,
    Yes,
    /// The owner sits the round out; on the wire this is a null write.
    Abstain,
}

impl Vote {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Vote::Yes
        } else {
            Vote::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Vote::Yes
    }
}

/// The `<round1, round2>` tuple an owner uploads in one epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoRoundResponse<T> {
    pub round1: T,
    pub round2: T,
    /// Whether the truthful-sampling outcome fired for this owner.
    pub sampled: bool,
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidParams(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}
