//! End-to-end epochs.
//!
//! Each owner privatizes locally, then turns every claimed value of every
//! round into an independent FSS write of `(value + 1) || checksum` at a
//! uniformly random slot of that round's database. Unclaimed positions are
//! null writes, so every owner of a mechanism sends the same traffic shape.
//! Aggregators drop replays, verify each write is a unit vector, XOR key
//! evaluations into per-round accumulators, and at the end of the epoch
//! reconstruct, scan the slots and apply the mechanism's estimator. Nothing
//! is released unless at least `k_threshold` owners were accepted.
//!
//! Two writes landing in the same slot XOR together. Distinct values fail
//! the checksum and are counted in `collision_drops`; two equal messages
//! cancel to an empty slot. `colliding_writes` reports both cases.
//!
//! By default an owner keeps its slots for both rounds of an epoch
//! ([`SlotPolicy::PerEpoch`]). Claims that repeat across rounds then collide
//! the same way twice and cancel in the round difference, so collision loss
//! does not grow with the population. What remains is a bias of roughly
//! `-2 W / N` on the estimate, from sampled writes sharing a slot with an
//! equal message (`W` writes per round, `N` slots). Fresh slots per round
//! ([`SlotPolicy::PerRound`]) add independent losses to each round and the
//! estimate error then grows with the population.

mod config;
mod encode;
mod epoch;
mod mechanism;
mod population;

pub use config::{EpochConfig, SlotPolicy, WriteMode, SLOT_HEADROOM};
pub use encode::{checksum, count_values, encode_message, reconstruct, xor_all, SlotCounts, DEFAULT_CHECKSUM_BITS};
pub use epoch::{
    build_submission, run_direct, run_epoch, Diagnostics, EpochResult, EpochState, OwnerSubmission, Participation,
    Release, SubmitOutcome, WriteBundle,
};
pub use mechanism::{Mechanism, OwnerClaims, YES_ID};
pub use population::{generate_population, Owner, PopulationSpec};
