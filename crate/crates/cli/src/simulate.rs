//! `simulate`: repeated epochs over a population sweep.

use std::collections::BTreeMap;
use std::path::Path;

use privcount_core::harness::{
    generate_population, run_direct, run_epoch, EpochResult, Mechanism, Owner, PopulationSpec,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{load_dataset, CryptoMode, ExperimentConfig};
use crate::error::{CliError, CliResult};

pub const TRIALS_CSV: &str = "trials.csv";
pub const SUMMARY_JSON: &str = "summary.json";

/// One line of `trials.csv`. Estimates are empty when the epoch halted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub mechanism_index: usize,
    pub mechanism: &'static str,
    pub total: u64,
    pub trial: u64,
    pub value: u32,
    pub true_count: u64,
    pub estimate: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueSummary {
    pub value: u32,
    pub mean_true_count: f64,
    pub mean_estimate: Option<f64>,
    pub mean_abs_error: Option<f64>,
    /// Sample standard deviation of the estimates.
    pub stddev: Option<f64>,
    /// Empirical 2.5th and 97.5th percentiles of the estimates.
    pub interval_95: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub mechanism_index: usize,
    pub mechanism: &'static str,
    pub total: u64,
    pub trials: u64,
    pub halted_trials: u64,
    /// Over every value and released trial.
    pub mean_abs_error: Option<f64>,
    pub values: Vec<ValueSummary>,
    pub rejected: u64,
    pub duplicates: u64,
    pub collision_drops: u64,
    pub colliding_writes: u64,
    pub negative_estimates: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub groups: Vec<GroupSummary>,
}

struct Job {
    mechanism_index: usize,
    mechanism: Mechanism,
    population_index: usize,
    trial: u64,
}

/// Derived seed for `(population, trial, purpose)`.
fn derive_seed(root: u64, population_index: usize, trial: u64, purpose: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(root);
    rng.set_stream(((population_index as u64) << 40) ^ (trial << 8) ^ purpose);
    rng.next_u64()
}

/// Runs every `(mechanism, population, trial)` epoch and returns the
/// per-trial rows and the summary.
pub fn run(cfg: &ExperimentConfig) -> CliResult<(Vec<TrialRow>, Summary)> {
    cfg.validate()?;
    let dataset = cfg.dataset_path().map(|p| load_dataset(&p, &cfg.mechanisms)).transpose()?;
    let totals: Vec<u64> = match (&cfg.population, &dataset) {
        (Some(p), _) => p.totals.clone(),
        (None, Some(owners)) => vec![owners.len() as u64],
        (None, None) => unreachable!("validated"),
    };

    let jobs: Vec<Job> = cfg
        .mechanisms
        .iter()
        .enumerate()
        .flat_map(|(mi, m)| {
            (0..totals.len()).flat_map(move |pi| {
                (0..cfg.trials).map(move |trial| Job {
                    mechanism_index: mi,
                    mechanism: *m,
                    population_index: pi,
                    trial,
                })
            })
        })
        .collect();

    let results: Vec<(Vec<TrialRow>, EpochResult)> = jobs
        .par_iter()
        .map(|job| {
            let owners = match (&cfg.population, &dataset) {
                (Some(p), _) => {
                    let spec = PopulationSpec { total: totals[job.population_index], groups: p.groups.clone() };
                    let seed = derive_seed(cfg.seed, job.population_index, job.trial, 0);
                    let truths =
                        generate_population(&spec, &mut ChaCha20Rng::seed_from_u64(seed)).map_err(CliError::config)?;
                    Owner::from_values(&truths)
                }
                (None, Some(owners)) => owners.clone(),
                (None, None) => unreachable!("validated"),
            };
            run_trial(cfg, job, &owners, totals[job.population_index])
        })
        .collect::<CliResult<_>>()?;

    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for (group, chunk) in results.chunks(cfg.trials as usize).enumerate() {
        let mi = group / totals.len();
        let total = totals[group % totals.len()];
        groups.push(summarize(mi, &cfg.mechanisms[mi], total, chunk));
        rows.extend(chunk.iter().flat_map(|(r, _)| r.iter().cloned()));
    }
    Ok((rows, Summary { config: cfg.clone(), groups }))
}

fn run_trial(
    cfg: &ExperimentConfig,
    job: &Job,
    owners: &[Owner],
    total: u64,
) -> CliResult<(Vec<TrialRow>, EpochResult)> {
    let seed = derive_seed(cfg.seed, job.population_index, job.trial, 1 + job.mechanism_index as u64);
    let epoch = cfg.epoch_config(job.mechanism, seed, job.trial);
    let result = match cfg.crypto {
        CryptoMode::None => run_direct(owners, &epoch),
        CryptoMode::Plaintext | CryptoMode::Full => run_epoch(owners, &epoch),
    }
    .map_err(CliError::runtime)?;

    let truths: Vec<Option<u32>> = owners.iter().map(|o| o.value).collect();
    let rows = job
        .mechanism
        .true_counts(&truths)
        .into_iter()
        .map(|(value, true_count)| {
            let estimate = result.released.estimates.as_ref().map(|e| e[&value]);
            TrialRow {
                mechanism_index: job.mechanism_index,
                mechanism: job.mechanism.name(),
                total,
                trial: job.trial,
                value,
                true_count,
                estimate,
                abs_error: estimate.map(|e| (e - true_count as f64).abs()),
            }
        })
        .collect();
    Ok((rows, result))
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn stddev(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Some(0.0);
    }
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

fn summarize(mi: usize, mech: &Mechanism, total: u64, trials: &[(Vec<TrialRow>, EpochResult)]) -> GroupSummary {
    let mut by_value: BTreeMap<u32, Vec<&TrialRow>> = BTreeMap::new();
    for row in trials.iter().flat_map(|(r, _)| r) {
        by_value.entry(row.value).or_default().push(row);
    }
    let values = by_value
        .into_iter()
        .map(|(value, rows)| {
            let mut est: Vec<f64> = rows.iter().filter_map(|r| r.estimate).collect();
            let errs: Vec<f64> = rows.iter().filter_map(|r| r.abs_error).collect();
            est.sort_by(f64::total_cmp);
            ValueSummary {
                value,
                mean_true_count: rows.iter().map(|r| r.true_count as f64).sum::<f64>() / rows.len() as f64,
                mean_estimate: mean(&est),
                mean_abs_error: mean(&errs),
                stddev: stddev(&est),
                interval_95: (!est.is_empty()).then(|| [percentile(&est, 0.025), percentile(&est, 0.975)]),
            }
        })
        .collect();
    let all_errs: Vec<f64> = trials.iter().flat_map(|(r, _)| r).filter_map(|r| r.abs_error).collect();
    let d = |f: &dyn Fn(&EpochResult) -> u64| trials.iter().map(|(_, res)| f(res)).sum::<u64>();
    GroupSummary {
        mechanism_index: mi,
        mechanism: mech.name(),
        total,
        trials: trials.len() as u64,
        halted_trials: d(&|r| r.released.halted as u64),
        mean_abs_error: mean(&all_errs),
        values,
        rejected: d(&|r| r.diagnostics.rejected),
        duplicates: d(&|r| r.diagnostics.duplicates),
        collision_drops: d(&|r| r.diagnostics.collision_drops.iter().sum()),
        colliding_writes: d(&|r| r.diagnostics.colliding_writes.iter().sum()),
        negative_estimates: d(&|r| r.diagnostics.negative_estimates),
    }
}

/// Writes `trials.csv` and `summary.json` into `out_dir`.
pub fn write_outputs(out_dir: &Path, rows: &[TrialRow], summary: &Summary) -> CliResult<()> {
    std::fs::create_dir_all(out_dir).map_err(CliError::abort)?;
    let mut w = csv::Writer::from_path(out_dir.join(TRIALS_CSV)).map_err(CliError::abort)?;
    for row in rows {
        w.serialize(row).map_err(CliError::abort)?;
    }
    w.flush().map_err(CliError::abort)?;
    let json = serde_json::to_string_pretty(summary).map_err(CliError::abort)?;
    std::fs::write(out_dir.join(SUMMARY_JSON), json + "\n").map_err(CliError::abort)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles() {
        let xs: Vec<f64> = (1..=40).map(f64::from).collect();
        assert_eq!(percentile(&xs, 0.025), 1.0);
        assert_eq!(percentile(&xs, 0.975), 39.0);
        assert_eq!(percentile(&[5.0], 0.975), 5.0);
    }

    #[test]
    fn stddev_oracle() {
        assert_eq!(stddev(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap(), (32.0f64 / 7.0).sqrt());
        assert_eq!(stddev(&[3.0]), Some(0.0));
        assert_eq!(stddev(&[]), None);
    }

    #[test]
    fn seeds_differ_by_coordinate() {
        let a = derive_seed(1, 0, 0, 0);
        assert_ne!(a, derive_seed(1, 1, 0, 0));
        assert_ne!(a, derive_seed(1, 0, 1, 0));
        assert_ne!(a, derive_seed(1, 0, 0, 1));
        assert_ne!(a, derive_seed(2, 0, 0, 0));
        assert_eq!(a, derive_seed(1, 0, 0, 0));
    }
}
