//! `bench-fss` and `bench-verify`: relative timings, reported as CSV.

use std::io::Write;
use std::time::Instant;

use privcount_core::field::Fe;
use privcount_core::privwrite::{
    fss_eval_naive_full, fss_evaluate_share, fss_gen, key_serialize, FssParams, PointFunction,
};
use privcount_core::verify::{additive_share, aggregate, blind, check, make_blinding, BlindingKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Timed runs per measurement, not counting one warmup run.
pub const MIN_RUNS: usize = 5;

/// Median wall time of `runs` calls after one warmup call.
pub fn median_secs<F: FnMut()>(runs: usize, mut f: F) -> f64 {
    f();
    let mut times: Vec<f64> = (0..runs.max(1))
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    if times.len() % 2 == 1 {
        times[mid]
    } else {
        (times[mid - 1] + times[mid]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FssBenchRow {
    pub n: u32,
    pub p: usize,
    pub m: u32,
    /// `default` or `override`.
    pub layout: &'static str,
    pub mu: u64,
    pub nu: u64,
    pub gen_time: f64,
    pub naive_full_eval_time: f64,
    pub optimized_full_eval_time: f64,
    pub speedup: f64,
    pub key_bytes: usize,
}

#[derive(Debug, Clone)]
pub struct FssBenchOptions {
    pub ns: Vec<u32>,
    pub ps: Vec<usize>,
    pub m: u32,
    /// Extra row widths to run next to the default layout.
    pub mu_overrides: Vec<u64>,
    /// Adds every power-of-two row width between 2 and the domain size.
    pub mu_sweep: bool,
    pub runs: usize,
    pub seed: u64,
}

/// Times one party's key: generation of all keys, the per-input naive
/// full-domain loop, and the row-at-a-time evaluation.
pub fn bench_fss_one(params: &FssParams, layout: &'static str, runs: usize, rng: &mut ChaCha20Rng) -> FssBenchRow {
    let runs = runs.max(MIN_RUNS);
    let pf = PointFunction::new(rng.gen_range(0..params.domain()), rng.gen_range(1..=max_message(params.m)));
    let mut keys = Vec::new();
    let gen_time = median_secs(runs, || keys = fss_gen(&pf, params, rng).expect("valid parameters"));
    let key = &keys[0];
    let naive = median_secs(runs, || {
        std::hint::black_box(fss_eval_naive_full(key));
    });
    let optimized = median_secs(runs, || {
        std::hint::black_box(fss_evaluate_share(key));
    });
    FssBenchRow {
        n: params.n,
        p: params.p,
        m: params.m,
        layout,
        mu: params.mu,
        nu: params.nu,
        gen_time,
        naive_full_eval_time: naive,
        optimized_full_eval_time: optimized,
        speedup: naive / optimized,
        key_bytes: key_serialize(key).len(),
    }
}

fn max_message(m: u32) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1 << m) - 1
    }
}

pub fn bench_fss(opts: &FssBenchOptions) -> CliResult<Vec<FssBenchRow>> {
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut rows = Vec::new();
    for &p in &opts.ps {
        for &n in &opts.ns {
            let base = FssParams::new(n, p, opts.m).map_err(CliError::config)?;
            rows.push(bench_fss_one(&base, "default", opts.runs, &mut rng));
            let mut mus = opts.mu_overrides.clone();
            if opts.mu_sweep {
                mus.extend((1..=n).map(|k| 1u64 << k));
            }
            mus.retain(|&mu| mu != base.mu);
            mus.sort_unstable();
            mus.dedup();
            for mu in mus {
                let params = base.with_mu(mu).map_err(CliError::config)?;
                rows.push(bench_fss_one(&params, "override", opts.runs, &mut rng));
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyBenchRow {
    pub p: usize,
    pub n: usize,
    pub kind: &'static str,
    pub median_time: f64,
    pub runs: usize,
    /// Whether the honest one-hot vector passed on every run.
    pub accepted: bool,
}

/// One full check: blinding matrix, share blinding, aggregation, check.
pub fn verify_once(kind: BlindingKind, n: usize, p: usize, rng: &mut ChaCha20Rng) -> bool {
    let mut u = vec![Fe::ZERO; n];
    u[rng.gen_range(0..n)] = Fe::ONE;
    let r = make_blinding::<{ privcount_core::field::MERSENNE_61 }, _>(kind, n, p, rng).expect("p >= 2");
    let shares = additive_share(&u, p, rng);
    let blinded: Vec<_> = shares.iter().map(|s| blind(&r, s).expect("matching length")).collect();
    check(kind, &aggregate(&blinded).expect("matching width"))
}

pub fn bench_verify(ps: &[usize], ns: &[usize], runs: usize, seed: u64) -> CliResult<Vec<VerifyBenchRow>> {
    if let Some(p) = ps.iter().find(|&&p| p < 2) {
        return Err(CliError::Config(format!("p must be at least 2, got {p}")));
    }
    if ns.contains(&0) {
        return Err(CliError::Config("n must be positive".into()));
    }
    let runs = runs.max(MIN_RUNS);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &p in ps {
        for &n in ns {
            for kind in BlindingKind::ALL {
                let mut accepted = true;
                let median_time = median_secs(runs, || accepted &= verify_once(kind, n, p, &mut rng));
                rows.push(VerifyBenchRow { p, n, kind: kind.name(), median_time, runs, accepted });
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write, T: Serialize>(rows: &[T], out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(CliError::abort)?;
    }
    w.flush().map_err(CliError::abort)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        let mut calls = 0;
        let m = median_secs(5, || calls += 1);
        assert_eq!(calls, 6);
        assert!(m >= 0.0);
    }

    #[test]
    fn fss_rows_cover_overrides() {
        let opts = FssBenchOptions {
            ns: vec![8],
            ps: vec![3],
            m: 1,
            mu_overrides: vec![4, 64],
            mu_sweep: false,
            runs: 5,
            seed: 1,
        };
        let rows = bench_fss(&opts).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].layout, "default");
        assert_eq!(rows[0].mu, 32);
        assert!(rows[1..].iter().all(|r| r.layout == "override"));
        assert_eq!(rows.iter().map(|r| r.mu).collect::<Vec<_>>(), vec![32, 4, 64]);
    }

    #[test]
    fn verify_rows_cover_kinds() {
        let rows = bench_verify(&[2, 3], &[16], 5, 0).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.accepted));
        assert!(bench_verify(&[1], &[16], 5, 0).is_err());
    }
}
