use std::collections::{BTreeMap, HashSet};

use privcount_core::harness::{
    build_submission, count_values, encode_message, generate_population, reconstruct, run_direct, run_epoch,
    EpochConfig, EpochState, Mechanism, Owner, Participation, PopulationSpec, SlotPolicy, SubmitOutcome, WriteMode,
};
use privcount_core::mechanisms::{RrParams, XyzBinaryParams, XyzMultiParams};
use privcount_core::privwrite::{fss_evaluate_share, fss_gen, FssParams, PointFunction};
use privcount_core::verify::BlindingKind;
use privcount_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn xyz(pi_s: f64, pi_yes: f64) -> Mechanism {
    Mechanism::XyzBinary(XyzBinaryParams::from_sampling(pi_s, pi_yes).unwrap())
}

fn owners(total: u64, yes: u64, seed: u64) -> Vec<Owner> {
    let spec = PopulationSpec { total, groups: vec![yes] };
    Owner::from_values(&generate_population(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap())
}

fn config(mech: Mechanism, seed: u64) -> EpochConfig {
    let mut cfg = EpochConfig::new(mech);
    cfg.master_seed = seed;
    cfg
}

#[test]
fn below_threshold_halts() {
    let cfg = config(xyz(0.45, 0.2), 1);
    let res = run_epoch(&owners(1, 1, 0), &cfg).unwrap();
    assert!(res.released.halted);
    assert_eq!(res.released.participation, Participation::BelowThreshold);
    assert!(res.released.counts.is_none() && res.released.estimates.is_none());
    assert!(res.reconstructed_db.is_empty());

    let res = run_epoch(&owners(2, 1, 0), &cfg).unwrap();
    assert!(!res.released.halted);
    assert_eq!(res.released.participation, Participation::AtLeast(2));
}

#[test]
fn single_write_lands_in_its_slot() {
    let params = FssParams::new(6, 3, 18).unwrap();
    let msg = encode_message(1, 2, 16, 0).unwrap();
    let keys = fss_gen(&PointFunction::new(37, msg), &params, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let accs: Vec<_> = keys.iter().map(fss_evaluate_share).collect();
    let slots = reconstruct(&accs, 18).unwrap();
    for (i, s) in slots.iter().enumerate() {
        assert_eq!(*s, if i == 37 { msg } else { 0 });
    }
    assert_eq!(count_values(&slots, 2, 16, 0).counts, BTreeMap::from([(1, 1)]));
}

#[test]
fn two_owners_distinct_slots() {
    let params = FssParams::new(8, 4, 20).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = encode_message(3, 4, 16, 5).unwrap();
    let b = encode_message(9, 4, 16, 5).unwrap();
    let ka = fss_gen(&PointFunction::new(10, a), &params, &mut rng).unwrap();
    let kb = fss_gen(&PointFunction::new(200, b), &params, &mut rng).unwrap();
    let accs: Vec<_> = (0..4).map(|i| fss_evaluate_share(&ka[i]).xor(&fss_evaluate_share(&kb[i])).unwrap()).collect();
    let slots = reconstruct(&accs, 20).unwrap();
    assert_eq!(slots[10], a);
    assert_eq!(slots[200], b);
    assert_eq!(count_values(&slots, 4, 16, 5).counts, BTreeMap::from([(3, 1), (9, 1)]));
}

#[test]
fn full_and_plaintext_agree() {
    let pop = owners(400, 40, 3);
    let mut cfg = config(xyz(0.45, 0.2), 77);
    let full = run_epoch(&pop, &cfg).unwrap();
    cfg.write_mode = WriteMode::Plaintext;
    let plain = run_epoch(&pop, &cfg).unwrap();
    assert_eq!(full, plain);
    assert_eq!(full.reconstructed_db.len(), 2);
}

#[test]
fn direct_path_matches_without_collisions() {
    let pop = owners(500, 50, 4);
    let mut cfg = config(xyz(0.45, 0.2), 5);
    cfg.db_slots = Some(1 << 20);
    cfg.write_mode = WriteMode::Plaintext;
    let db = run_epoch(&pop, &cfg).unwrap();
    let direct = run_direct(&pop, &cfg).unwrap();
    assert_eq!(db.diagnostics.colliding_writes, vec![0, 0]);
    assert_eq!(direct.diagnostics.colliding_writes, vec![0, 0]);
    assert_eq!(db.released, direct.released);
}

#[test]
fn conservation_and_cancellation() {
    let spec = PopulationSpec { total: 600, groups: vec![30, 20, 10, 5] };
    let pop = Owner::from_values(&generate_population(&spec, &mut ChaCha8Rng::seed_from_u64(8)).unwrap());
    let mech = Mechanism::XyzMulti(XyzMultiParams::new(0.4, 0.05, 4).unwrap());
    let mut cfg = config(mech, 23);
    cfg.db_slots = Some(1 << 22);
    cfg.verification = None;
    cfg.write_mode = WriteMode::Plaintext;
    let res = run_epoch(&pop, &cfg).unwrap();
    let d = &res.diagnostics;
    assert_eq!(d.colliding_writes, vec![0, 0]);
    let counts = res.released.counts.unwrap();
    for (c, &w) in counts.iter().zip(&d.writes) {
        assert_eq!(c.values().sum::<u64>(), w);
    }
    for v in 0..4 {
        let diff = counts[0].get(&v).copied().unwrap_or(0) - counts[1].get(&v).copied().unwrap_or(0);
        assert_eq!(diff, d.sampled_truthful.get(&v).copied().unwrap_or(0), "value {v}");
    }
}

#[test]
fn two_row_writer_is_excluded() {
    let honest = owners(300, 30, 6);
    let mut with_bad = honest.clone();
    with_bad.push(Owner { id: "mallory".into(), value: Some(0), two_row_writer: true });
    let cfg = config(xyz(0.45, 0.2), 12);
    let clean = run_epoch(&honest, &cfg).unwrap();
    let dirty = run_epoch(&with_bad, &cfg).unwrap();
    assert_eq!(dirty.diagnostics.rejected, 1);
    assert_eq!(dirty.diagnostics.rejected_owners, vec!["mallory".to_string()]);
    assert_eq!(clean.released, dirty.released);
    assert_eq!(clean.reconstructed_db, dirty.reconstructed_db);

    // Without verification the write gets through and touches two slots.
    let mut open = cfg.clone();
    open.verification = None;
    let polluted = run_epoch(&with_bad, &open).unwrap();
    assert_eq!(polluted.diagnostics.rejected, 0);
    assert_eq!(polluted.diagnostics.writes[0], clean.diagnostics.writes[0] + 2);
}

#[test]
fn replay_is_idempotent() {
    let pop = owners(50, 10, 2);
    let cfg = config(xyz(0.45, 0.2), 3);
    let params = cfg.fss_params(&pop.iter().map(|o| o.value).collect::<Vec<_>>()).unwrap();
    let subs: Vec<_> =
        pop.iter().enumerate().map(|(i, o)| build_submission(&cfg, &params, i as u64, o).unwrap()).collect();

    let mut once = EpochState::new(cfg.clone(), params).unwrap();
    once.submit_batch(subs.clone());
    let once = once.finish().unwrap();

    let mut twice = EpochState::new(cfg.clone(), params).unwrap();
    twice.submit_batch(subs.clone());
    assert_eq!(twice.submit(subs[7].clone()), SubmitOutcome::Duplicate);
    let mut forged = subs[8].clone();
    forged.rounds.swap(0, 1);
    assert_eq!(twice.submit(forged), SubmitOutcome::Duplicate);
    let twice = twice.finish().unwrap();

    assert_eq!(twice.diagnostics.duplicates, 2);
    assert_eq!(once.released, twice.released);
    assert_eq!(once.reconstructed_db, twice.reconstructed_db);
}

#[test]
fn incomplete_submission_rejected() {
    let pop = owners(20, 5, 2);
    let cfg = config(xyz(0.45, 0.2), 3);
    let params = cfg.fss_params(&[None; 20]).unwrap();
    let mut sub = build_submission(&cfg, &params, 0, &pop[0]).unwrap();
    sub.rounds[1][0].blinded.pop();
    let mut state = EpochState::new(cfg, params).unwrap();
    assert_eq!(state.submit(sub), SubmitOutcome::Rejected);
}

#[test]
fn missing_party_aborts() {
    let pop = owners(20, 5, 2);
    let cfg = config(xyz(0.45, 0.2), 3);
    let params = cfg.fss_params(&[None; 20]).unwrap();
    let mut state = EpochState::new(cfg.clone(), params).unwrap();
    state.submit_batch(
        pop.iter().enumerate().map(|(i, o)| build_submission(&cfg, &params, i as u64, o).unwrap()).collect(),
    );
    state.withdraw_party(1);
    assert!(matches!(state.finish(), Err(Error::ProtocolAbort(_))));
}

#[test]
fn deterministic_bytes() {
    let pop = owners(300, 20, 1);
    let cfg = config(Mechanism::Rr(RrParams::new(0.8, 0.2).unwrap()), 99);
    let a = serde_json::to_vec(&run_epoch(&pop, &cfg).unwrap()).unwrap();
    let b = serde_json::to_vec(&run_epoch(&pop, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.master_seed = 100;
    assert_ne!(a, serde_json::to_vec(&run_epoch(&pop, &other).unwrap()).unwrap());
}

/// Chi-square of 10,000 independent slot draws over 64 slots.
fn slot_chi_square(policy: SlotPolicy) -> f64 {
    const BINS: usize = 64;
    let (owners_needed, rounds_counted) = match policy {
        SlotPolicy::PerEpoch => (10_000, 1),
        SlotPolicy::PerRound => (5_000, 2),
    };
    let pop = owners(owners_needed, 0, 0);
    let mut cfg = config(xyz(0.5, 0.0), 4);
    cfg.write_mode = WriteMode::Plaintext;
    cfg.db_slots = Some(BINS as u64);
    cfg.slot_policy = policy;
    let params = FssParams::new(6, 3, cfg.message_bits()).unwrap();
    let mut hist = [0u64; BINS];
    for (i, o) in pop.iter().enumerate() {
        let sub = build_submission(&cfg, &params, i as u64, o).unwrap();
        for w in sub.rounds.iter().take(rounds_counted).flatten() {
            hist[w.plaintext[0].a as usize] += 1;
        }
    }
    let total: u64 = hist.iter().sum();
    assert_eq!(total, 10_000);
    let expected = total as f64 / BINS as f64;
    hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum()
}

#[test]
fn slot_choice_is_uniform() {
    // df = 63, alpha = 0.01
    const CRITICAL: f64 = 92.01;
    for policy in [SlotPolicy::PerEpoch, SlotPolicy::PerRound] {
        let chi2 = slot_chi_square(policy);
        assert!(chi2 < CRITICAL, "{policy:?}: chi2 = {chi2}");
    }
}

#[test]
fn per_epoch_slots_repeat_across_rounds() {
    let pop = owners(200, 50, 1);
    let cfg = config(Mechanism::XyzMulti(XyzMultiParams::new(0.4, 0.3, 6).unwrap()), 2);
    let params = cfg.fss_params(&[None; 200]).unwrap();
    let mut differ = 0;
    for (i, o) in pop.iter().enumerate() {
        let sub = build_submission(&cfg, &params, i as u64, o).unwrap();
        let slots = |r: usize| sub.rounds[r].iter().map(|w| w.plaintext[0].a).collect::<Vec<_>>();
        assert_eq!(slots(0), slots(1));
        let mut fresh = cfg.clone();
        fresh.slot_policy = SlotPolicy::PerRound;
        let sub = build_submission(&fresh, &params, i as u64, o).unwrap();
        if sub.rounds[0].first().map(|w| w.plaintext[0].a) != sub.rounds[1].first().map(|w| w.plaintext[0].a) {
            differ += 1;
        }
    }
    assert!(differ > 150, "{differ}");
}

#[test]
fn xyz_estimate_within_three_sigma() {
    let bound = 3.0 * (100.0f64 * 0.45 * 0.55).sqrt() / 0.45;
    let seeds = 100;
    let mut ok = 0;
    for seed in 0..seeds {
        let pop = owners(10_000, 100, seed);
        let res = run_direct(&pop, &config(xyz(0.45, 0.2), seed)).unwrap();
        let est = res.released.estimates.unwrap()[&1];
        if (est - 100.0).abs() <= bound {
            ok += 1;
        }
    }
    assert!(ok * 100 >= 95 * seeds, "{ok}/{seeds}");
}

#[test]
fn owner_ids_are_unique_in_generated_population() {
    let pop = owners(1000, 10, 0);
    assert_eq!(pop.iter().map(|o| &o.id).collect::<HashSet<_>>().len(), 1000);
}

#[test]
fn inverse_verification_is_refused() {
    let mut cfg = config(xyz(0.45, 0.2), 0);
    cfg.verification = Some(BlindingKind::Inverse);
    assert!(run_epoch(&owners(10, 1, 0), &cfg).is_err());
}
