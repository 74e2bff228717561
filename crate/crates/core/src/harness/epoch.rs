use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EpochConfig, Purpose, SlotPolicy, WriteMode};
use super::encode::{count_values, encode_message, xor_all};
use super::population::Owner;
use crate::error::{Error, Result};
use crate::field::{BitString, Fe};
use crate::privwrite::{fss_evaluate_share_into, fss_gen, messages, FssKey, FssParams, PointFunction};
use crate::verify::{blind_sparse, verify_owner, BlindedShare, BlindingKind};

/// Owners are generated, verified and folded in batches of this size.
const CHUNK: usize = 256;

/// One write as the aggregators receive it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WriteBundle {
    /// `keys[c][party]`: one key per party for each point function `c` the
    /// write carries. Honest writes carry exactly one. Empty in plaintext mode.
    pub keys: Vec<Vec<FssKey>>,
    /// The point functions in the clear. Read by aggregators only in
    /// plaintext mode; otherwise kept for diagnostics.
    pub plaintext: Vec<PointFunction>,
    /// One blinded share per party.
    pub blinded: Vec<BlindedShare<{ crate::field::MERSENNE_61 }>>,
}

/// Everything one owner uploads in an epoch; both rounds travel together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnerSubmission {
    pub owner_id: String,
    /// `rounds[r]` holds the writes for round `r`.
    pub rounds: Vec<Vec<WriteBundle>>,
    /// Truthful value withheld in round two, for diagnostics only.
    pub sampled_truth: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmitOutcome {
    Accepted,
    Rejected,
    Duplicate,
}

/// Public participation signal: only whether the threshold was met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Participation {
    AtLeast(u64),
    BelowThreshold,
}

/// What the aggregators publish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Release {
    pub halted: bool,
    pub participation: Participation,
    /// Per round, per value.
    pub counts: Option<Vec<BTreeMap<u32, u64>>>,
    pub estimates: Option<BTreeMap<u32, f64>>,
}

/// Exact numbers that are not published; for tests and experiments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub participants: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub rejected_owners: Vec<String>,
    pub duplicates: u64,
    /// Per round, slots that failed the checksum.
    pub collision_drops: Vec<u64>,
    /// Per round, non-null writes that shared a slot with another non-null write.
    pub colliding_writes: Vec<u64>,
    /// Per round, non-null writes submitted by accepted owners.
    pub writes: Vec<u64>,
    /// Accepted owners whose truthful value was withheld in round two.
    pub sampled_truthful: BTreeMap<u32, u64>,
    pub negative_estimates: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochResult {
    pub released: Release,
    /// Per round; empty when halted or when no database was built.
    pub reconstructed_db: Vec<BitString>,
    pub diagnostics: Diagnostics,
}

/// Builds one owner's submission from the owner's own random streams.
///
/// `owner_index` selects the streams, so submissions can be built in any
/// order or in parallel with identical results.
pub fn build_submission(
    config: &EpochConfig,
    params: &FssParams,
    owner_index: u64,
    owner: &Owner,
) -> Result<OwnerSubmission> {
    let mut mech_rng = config.owner_rng(Purpose::Mechanism, owner_index);
    let mut slot_rng = config.owner_rng(Purpose::Slots, owner_index);
    let mut key_rng = config.owner_rng(Purpose::Keys, owner_index);
    let mut verify_rng = config.owner_rng(Purpose::Verify, owner_index);

    let claims = config.mechanism.privatize(owner.value, &mut mech_rng)?;
    let slots = draw_slots(config, params, &claims.rounds, &mut slot_rng);
    let mut rounds = Vec::with_capacity(claims.rounds.len());
    for (round, writes) in claims.rounds.iter().enumerate() {
        let mut bundles = Vec::with_capacity(writes.len());
        for (w, claim) in writes.iter().enumerate() {
            let slot = slots[round][w];
            let mut pfs = vec![point_function(config, slot, *claim)?];
            if owner.two_row_writer && round == 0 && w == 0 {
                let value = claim.unwrap_or(config.mechanism.max_value());
                pfs = vec![point_function(config, slot, Some(value))?];
                pfs.push(point_function(config, other_row_slot(params, slot, &mut slot_rng)?, Some(value))?);
            }
            bundles.push(seal(config, params, pfs, &mut key_rng, &mut verify_rng)?);
        }
        rounds.push(bundles);
    }
    Ok(OwnerSubmission { owner_id: owner.id.clone(), rounds, sampled_truth: claims.sampled_truth })
}

/// `slots[round][w]` for every write the owner makes.
fn draw_slots<R: Rng + ?Sized>(
    config: &EpochConfig,
    params: &FssParams,
    rounds: &[Vec<Option<u32>>],
    rng: &mut R,
) -> Vec<Vec<u64>> {
    match config.slot_policy {
        SlotPolicy::PerRound => {
            rounds.iter().map(|r| r.iter().map(|_| rng.gen_range(0..params.domain())).collect()).collect()
        }
        SlotPolicy::PerEpoch => {
            let width = rounds.iter().map(Vec::len).max().unwrap_or(0);
            let shared: Vec<u64> = (0..width).map(|_| rng.gen_range(0..params.domain())).collect();
            rounds.iter().map(|r| shared[..r.len()].to_vec()).collect()
        }
    }
}

fn point_function(config: &EpochConfig, slot: u64, claim: Option<u32>) -> Result<PointFunction> {
    let b = match claim {
        Some(v) => encode_message(v, config.mechanism.id_bits(), config.checksum_bits, config.epoch_id)?,
        None => 0,
    };
    Ok(PointFunction::new(slot, b))
}

fn other_row_slot<R: Rng + ?Sized>(params: &FssParams, slot: u64, rng: &mut R) -> Result<u64> {
    let rows_used = params.domain().div_ceil(params.mu);
    if rows_used < 2 {
        return Err(Error::InvalidParams("a two-row write needs at least two rows".into()));
    }
    let (row, _) = params.split(slot);
    loop {
        let other = rng.gen_range(0..params.domain());
        if params.split(other).0 != row {
            return Ok(other);
        }
    }
}

fn seal<R1: Rng, R2: Rng>(
    config: &EpochConfig,
    params: &FssParams,
    pfs: Vec<PointFunction>,
    key_rng: &mut R1,
    verify_rng: &mut R2,
) -> Result<WriteBundle> {
    let keys = match config.write_mode {
        WriteMode::Full => pfs.iter().map(|pf| fss_gen(pf, params, key_rng)).collect::<Result<_>>()?,
        WriteMode::Plaintext => Vec::new(),
    };
    let entries: Vec<(u64, Fe)> = pfs.iter().filter(|pf| pf.b != 0).map(|pf| (pf.a, Fe::ONE)).collect();
    let kind = config.verification.unwrap_or(BlindingKind::Square);
    let blinded = blind_sparse(kind, &entries, config.parties, verify_rng);
    Ok(WriteBundle { keys, plaintext: pfs, blinded })
}

/// Aggregator-side state for one epoch.
pub struct EpochState {
    config: EpochConfig,
    params: FssParams,
    /// `accumulators[round * parties + party]`; one per round in plaintext mode.
    accumulators: Vec<BitString>,
    present: Vec<bool>,
    seen: HashSet<String>,
    diagnostics: Diagnostics,
    /// Per round, non-null write count per slot.
    occupancy: Vec<HashMap<u64, u64>>,
}

impl EpochState {
    pub fn new(config: EpochConfig, params: FssParams) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        if params.p != config.parties || params.m != config.message_bits() {
            return Err(Error::InvalidParams("FSS parameters disagree with the epoch config".into()));
        }
        let rounds = config.mechanism.rounds();
        let per_round = match config.write_mode {
            WriteMode::Full => config.parties,
            WriteMode::Plaintext => 1,
        };
        let accumulators = vec![BitString::zeros(params.domain_bits()); rounds * per_round];
        Ok(EpochState {
            present: vec![true; config.parties],
            seen: HashSet::new(),
            diagnostics: Diagnostics {
                collision_drops: vec![0; rounds],
                colliding_writes: vec![0; rounds],
                writes: vec![0; rounds],
                ..Diagnostics::default()
            },
            occupancy: vec![HashMap::new(); rounds],
            accumulators,
            config,
            params,
        })
    }

    pub fn params(&self) -> &FssParams {
        &self.params
    }

    /// Marks an aggregator as gone; [`EpochState::finish`] will abort.
    pub fn withdraw_party(&mut self, party: usize) {
        if let Some(p) = self.present.get_mut(party) {
            *p = false;
        }
    }

    pub fn submit(&mut self, submission: OwnerSubmission) -> SubmitOutcome {
        self.submit_batch(vec![submission])[0]
    }

    /// Dedups in order, verifies in parallel, then folds accepted writes
    /// into every party's accumulators.
    pub fn submit_batch(&mut self, submissions: Vec<OwnerSubmission>) -> Vec<SubmitOutcome> {
        let fresh: Vec<bool> = submissions.iter().map(|s| self.seen.insert(s.owner_id.clone())).collect();
        let valid: Vec<bool> =
            submissions.par_iter().zip(&fresh).map(|(s, &fresh)| fresh && self.is_valid(s)).collect();

        let mut outcomes = Vec::with_capacity(submissions.len());
        let mut accepted = Vec::new();
        for ((s, fresh), valid) in submissions.into_iter().zip(fresh).zip(valid) {
            let outcome = if !fresh {
                self.diagnostics.duplicates += 1;
                SubmitOutcome::Duplicate
            } else if !valid {
                self.diagnostics.rejected += 1;
                self.diagnostics.rejected_owners.push(s.owner_id.clone());
                SubmitOutcome::Rejected
            } else {
                self.diagnostics.accepted += 1;
                accepted.push(s);
                SubmitOutcome::Accepted
            };
            outcomes.push(outcome);
        }
        self.fold(&accepted);
        outcomes
    }

    fn is_valid(&self, s: &OwnerSubmission) -> bool {
        let cfg = &self.config;
        if s.rounds.len() != cfg.mechanism.rounds() || s.rounds.iter().any(|r| r.len() != s.rounds[0].len()) {
            return false;
        }
        s.rounds.iter().flatten().all(|w| {
            let keys_ok = match cfg.write_mode {
                WriteMode::Full => {
                    !w.keys.is_empty()
                        && w.keys.iter().all(|ks| {
                            ks.len() == cfg.parties
                                && ks.iter().enumerate().all(|(i, k)| k.party == i && k.params == self.params)
                        })
                }
                WriteMode::Plaintext => w.plaintext.iter().all(|pf| pf.check(self.params.n, self.params.m).is_ok()),
            };
            let shape_ok = match cfg.verification {
                Some(kind) => verify_owner(&w.blinded, kind, cfg.parties).unwrap_or(false),
                None => true,
            };
            keys_ok && shape_ok
        })
    }

    fn fold(&mut self, accepted: &[OwnerSubmission]) {
        for s in accepted {
            if let Some(v) = s.sampled_truth {
                *self.diagnostics.sampled_truthful.entry(v).or_insert(0) += 1;
            }
            for (round, writes) in s.rounds.iter().enumerate() {
                for pf in writes.iter().flat_map(|w| &w.plaintext).filter(|pf| pf.b != 0) {
                    self.diagnostics.writes[round] += 1;
                    *self.occupancy[round].entry(pf.a).or_insert(0) += 1;
                }
            }
        }
        let m = self.params.m as usize;
        let parties = self.config.parties;
        match self.config.write_mode {
            WriteMode::Full => self.accumulators.par_iter_mut().enumerate().for_each(|(i, acc)| {
                let (round, party) = (i / parties, i % parties);
                for w in accepted.iter().flat_map(|s| &s.rounds[round]) {
                    for keys in &w.keys {
                        fss_evaluate_share_into(&keys[party], acc);
                    }
                }
            }),
            WriteMode::Plaintext => {
                for (round, acc) in self.accumulators.iter_mut().enumerate() {
                    for pf in accepted.iter().flat_map(|s| &s.rounds[round]).flat_map(|w| &w.plaintext) {
                        let offset = pf.a as usize * m;
                        let cur = acc.get_bits(offset, m);
                        acc.set_bits(offset, m, cur ^ pf.b);
                    }
                }
            }
        }
    }

    /// Exchanges accumulators, reconstructs, counts and estimates.
    pub fn finish(self) -> Result<EpochResult> {
        if let Some(p) = self.present.iter().position(|&here| !here) {
            return Err(Error::ProtocolAbort(format!("aggregator {p} did not deliver its accumulator")));
        }
        let EpochState { config, params, accumulators, mut diagnostics, occupancy, .. } = self;
        diagnostics.participants = diagnostics.accepted;
        diagnostics.colliding_writes = occupancy.iter().map(|occ| occ.values().filter(|&&c| c > 1).sum()).collect();

        if diagnostics.participants < config.k_threshold {
            return Ok(halted(diagnostics));
        }
        let per_round = accumulators.len() / config.mechanism.rounds();
        let mut dbs = Vec::new();
        let mut counts = Vec::new();
        for (round, accs) in accumulators.chunks(per_round).enumerate() {
            let db = xor_all(accs)?;
            let scan = count_values(
                &messages(&db, params.m),
                config.mechanism.id_bits(),
                config.checksum_bits,
                config.epoch_id,
            );
            diagnostics.collision_drops[round] = scan.collision_drops;
            counts.push(scan.counts);
            dbs.push(db);
        }
        release(&config, counts, dbs, diagnostics)
    }
}

fn halted(diagnostics: Diagnostics) -> EpochResult {
    EpochResult {
        released: Release { halted: true, participation: Participation::BelowThreshold, counts: None, estimates: None },
        reconstructed_db: Vec::new(),
        diagnostics,
    }
}

fn release(
    config: &EpochConfig,
    counts: Vec<BTreeMap<u32, u64>>,
    dbs: Vec<BitString>,
    mut diagnostics: Diagnostics,
) -> Result<EpochResult> {
    let estimates = config.mechanism.estimate(&counts, diagnostics.participants)?;
    diagnostics.negative_estimates = estimates.values().filter(|e| **e < 0.0).count() as u64;
    Ok(EpochResult {
        released: Release {
            halted: false,
            participation: Participation::AtLeast(config.k_threshold),
            counts: Some(counts),
            estimates: Some(estimates),
        },
        reconstructed_db: dbs,
        diagnostics,
    })
}

/// Runs a whole epoch: every owner privatizes, writes, and is verified;
/// aggregators then reconstruct, count and estimate.
pub fn run_epoch(owners: &[Owner], config: &EpochConfig) -> Result<EpochResult> {
    if owners.is_empty() {
        return Err(Error::InvalidParams("population is empty".into()));
    }
    let truths: Vec<Option<u32>> = owners.iter().map(|o| o.value).collect();
    let params = config.fss_params(&truths)?;
    let mut state = EpochState::new(config.clone(), params)?;
    for (c, chunk) in owners.chunks(CHUNK).enumerate() {
        let subs = chunk
            .par_iter()
            .enumerate()
            .map(|(i, owner)| build_submission(config, &params, (c * CHUNK + i) as u64, owner))
            .collect::<Result<Vec<_>>>()?;
        state.submit_batch(subs);
    }
    state.finish()
}

/// The same epoch without writes: counts come straight from the claims.
///
/// Uses the same per-owner streams as [`run_epoch`], so claims and slots
/// match it exactly. Nothing is lost to slot collisions here; the
/// `colliding_writes` diagnostic says how many writes the database path
/// would have put in shared slots. Two-row writers are dropped, as
/// verification would.
pub fn run_direct(owners: &[Owner], config: &EpochConfig) -> Result<EpochResult> {
    if owners.is_empty() {
        return Err(Error::InvalidParams("population is empty".into()));
    }
    let truths: Vec<Option<u32>> = owners.iter().map(|o| o.value).collect();
    let params = config.fss_params(&truths)?;
    let rounds = config.mechanism.rounds();
    let per_owner = owners
        .par_iter()
        .enumerate()
        .map(|(i, owner)| {
            let mut mech_rng = config.owner_rng(Purpose::Mechanism, i as u64);
            let mut slot_rng = config.owner_rng(Purpose::Slots, i as u64);
            let claims = config.mechanism.privatize(owner.value, &mut mech_rng)?;
            let slots = draw_slots(config, &params, &claims.rounds, &mut slot_rng);
            let slotted: Vec<Vec<(u64, Option<u32>)>> = claims
                .rounds
                .iter()
                .zip(slots)
                .map(|(round, s)| round.iter().copied().zip(s).map(|(c, slot)| (slot, c)).collect())
                .collect();
            Ok((slotted, claims.sampled_truth))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut diagnostics = Diagnostics {
        collision_drops: vec![0; rounds],
        colliding_writes: vec![0; rounds],
        writes: vec![0; rounds],
        ..Diagnostics::default()
    };
    let mut counts = vec![BTreeMap::new(); rounds];
    let mut slots: Vec<Vec<u64>> = vec![Vec::new(); rounds];
    for (owner, (slotted, sampled)) in owners.iter().zip(per_owner) {
        if owner.two_row_writer {
            diagnostics.rejected += 1;
            diagnostics.rejected_owners.push(owner.id.clone());
            continue;
        }
        diagnostics.accepted += 1;
        if let Some(v) = sampled {
            *diagnostics.sampled_truthful.entry(v).or_insert(0) += 1;
        }
        for (round, writes) in slotted.into_iter().enumerate() {
            for (slot, claim) in writes {
                if let Some(v) = claim {
                    *counts[round].entry(v).or_insert(0) += 1;
                    diagnostics.writes[round] += 1;
                    slots[round].push(slot);
                }
            }
        }
    }
    diagnostics.participants = diagnostics.accepted;
    for (round, s) in slots.iter_mut().enumerate() {
        s.sort_unstable();
        diagnostics.colliding_writes[round] =
            s.chunk_by(|a, b| a == b).filter(|run| run.len() > 1).map(|run| run.len() as u64).sum();
    }
    if diagnostics.participants < config.k_threshold {
        return Ok(halted(diagnostics));
    }
    release(config, counts, Vec::new(), diagnostics)
}
