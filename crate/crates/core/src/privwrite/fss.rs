use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::prg::prg_xor_into;
use super::PointFunction;
use crate::error::{Error, Result};
use crate::field::BitString;

/// Seed length in bits.
pub const LAMBDA: u32 = 128;

pub type Seed = [u8; 16];

const ZERO_SEED: Seed = [0; 16];

/// Domain and layout of a multi-party point-function sharing.
///
/// Inputs `x < 2^n` are laid out as `x = row * mu + pos`: `nu` rows of `mu`
/// positions, each position holding an `m`-bit message. With power-of-two
/// `mu` this is the high-bits/low-bits split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FssParams {
    pub n: u32,
    pub p: usize,
    pub lambda: u32,
    pub m: u32,
    pub mu: u64,
    pub nu: u64,
}

impl FssParams {
    /// Default layout: `mu = ceil(2^(n/2) * 2^((p-1)/2))`, `nu = ceil(2^n / mu)`.
    pub fn new(n: u32, p: usize, m: u32) -> Result<Self> {
        if !(1..=40).contains(&n) {
            return Err(Error::InvalidParams(format!("n = {n} outside [1, 40]")));
        }
        if !(2..=12).contains(&p) {
            return Err(Error::InvalidParams(format!("party count {p} outside [2, 12]")));
        }
        let mu = ceil_sqrt_pow2(n + p as u32 - 1);
        let nu = (1u64 << n).div_ceil(mu);
        let params = FssParams { n, p, lambda: LAMBDA, m, mu, nu };
        params.validate()?;
        Ok(params)
    }

    /// Overrides the row layout, trading seed count against expansion length.
    pub fn with_layout(self, mu: u64, nu: u64) -> Result<Self> {
        let params = FssParams { mu, nu, ..self };
        params.validate()?;
        Ok(params)
    }

    /// Overrides `mu` and derives the smallest covering `nu`.
    pub fn with_mu(self, mu: u64) -> Result<Self> {
        if mu == 0 {
            return Err(Error::InvalidParams("mu must be positive".into()));
        }
        self.with_layout(mu, self.domain().div_ceil(mu))
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=40).contains(&self.n) {
            return Err(Error::InvalidParams(format!("n = {} outside [1, 40]", self.n)));
        }
        if !(2..=12).contains(&self.p) {
            return Err(Error::InvalidParams(format!("party count {} outside [2, 12]", self.p)));
        }
        if self.lambda != LAMBDA {
            return Err(Error::InvalidParams(format!("lambda must be {LAMBDA}, got {}", self.lambda)));
        }
        if !(1..=64).contains(&self.m) {
            return Err(Error::InvalidParams(format!("message width {} outside [1, 64]", self.m)));
        }
        if self.mu == 0 || self.nu == 0 || (self.mu as u128) * (self.nu as u128) < self.domain() as u128 {
            return Err(Error::InvalidParams(format!(
                "layout mu={} nu={} does not cover 2^{}",
                self.mu, self.nu, self.n
            )));
        }
        if self.mu > u32::MAX as u64 || self.nu > u32::MAX as u64 {
            return Err(Error::InvalidParams("mu and nu must fit 32 bits".into()));
        }
        Ok(())
    }

    pub fn domain(&self) -> u64 {
        1u64 << self.n
    }

    /// Seed slots per row, `2^(p-1)`.
    pub fn slots(&self) -> usize {
        1 << (self.p - 1)
    }

    /// Bits in one row expansion and in one correction word.
    pub fn row_bits(&self) -> usize {
        self.m as usize * self.mu as usize
    }

    /// Bits of a full-domain evaluation.
    pub fn domain_bits(&self) -> usize {
        self.m as usize * self.domain() as usize
    }

    /// `(row, position)` of input `x`.
    pub fn split(&self, x: u64) -> (u64, u64) {
        (x / self.mu, x % self.mu)
    }

    /// `nu * 2^(p-1) * lambda + 2^(p-1) * m * mu`.
    pub fn key_payload_bits(&self) -> u64 {
        let slots = self.slots() as u64;
        self.nu * slots * self.lambda as u64 + slots * self.m as u64 * self.mu
    }
}

/// Smallest integer `x` with `x^2 >= 2^e`.
fn ceil_sqrt_pow2(e: u32) -> u64 {
    let target = 1u128 << e;
    let mut x = (target as f64).sqrt() as u128;
    while x * x < target {
        x += 1;
    }
    while x > 0 && (x - 1) * (x - 1) >= target {
        x -= 1;
    }
    x as u64
}

/// One party's share: its seed slots for every row plus the shared correction words.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FssKey {
    pub params: FssParams,
    pub party: usize,
    /// `nu` rows of `2^(p-1)` slots, row-major; all-zero means "not held".
    pub sigma: Vec<Seed>,
    pub correction_words: Vec<BitString>,
}

impl std::fmt::Debug for FssKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FssKey")
            .field("params", &self.params)
            .field("party", &self.party)
            .field("held_seeds", &self.sigma.iter().filter(|s| **s != ZERO_SEED).count())
            .finish()
    }
}

impl FssKey {
    pub fn row_seeds(&self, row: u64) -> &[Seed] {
        let slots = self.params.slots();
        let start = row as usize * slots;
        &self.sigma[start..start + slots]
    }

    pub fn is_held(seed: &Seed) -> bool {
        *seed != ZERO_SEED
    }
}

/// All `2^(p-1)` length-`p` column vectors of the given parity, shuffled.
/// Odd parity marks the row holding the message; even rows cancel out.
fn selection_columns<R: Rng + ?Sized>(p: usize, odd: bool, rng: &mut R) -> Vec<u32> {
    let mut cols: Vec<u32> = (0..1u32 << p).filter(|c| (c.count_ones() % 2 == 1) == odd).collect();
    cols.shuffle(rng);
    cols
}

fn random_seed<R: RngCore + ?Sized>(rng: &mut R) -> Seed {
    loop {
        let mut s = ZERO_SEED;
        rng.fill_bytes(&mut s);
        if s != ZERO_SEED {
            return s;
        }
    }
}

/// Shares the point function `pf` among `params.p` parties.
pub fn fss_gen<R: RngCore + ?Sized>(pf: &PointFunction, params: &FssParams, rng: &mut R) -> Result<Vec<FssKey>> {
    params.validate()?;
    pf.check(params.n, params.m)?;
    let (row, pos) = params.split(pf.a);
    let mut block = BitString::zeros(params.row_bits());
    block.set_bits(pos as usize * params.m as usize, params.m as usize, pf.b);
    fss_gen_block(row, &block, params, rng)
}

/// Shares an arbitrary `m * mu`-bit block placed in row `row`, zeros elsewhere.
///
/// [`fss_gen`] is the one-position special case. Any other block is a
/// malformed write that unit-vector verification is meant to catch.
pub fn fss_gen_block<R: RngCore + ?Sized>(
    row: u64,
    block: &BitString,
    params: &FssParams,
    rng: &mut R,
) -> Result<Vec<FssKey>> {
    params.validate()?;
    if row >= params.nu {
        return Err(Error::InvalidParams(format!("row {row} outside [0, {})", params.nu)));
    }
    if block.len() != params.row_bits() {
        return Err(Error::LengthError { left: block.len(), right: params.row_bits() });
    }
    let slots = params.slots();
    let p = params.p;
    let mut sigma = vec![vec![ZERO_SEED; params.nu as usize * slots]; p];
    let mut special = Vec::with_capacity(slots);
    for r in 0..params.nu {
        let cols = selection_columns(p, r == row, rng);
        for (j, &col) in cols.iter().enumerate() {
            let seed = random_seed(rng);
            for (i, party_sigma) in sigma.iter_mut().enumerate() {
                if col >> i & 1 == 1 {
                    party_sigma[r as usize * slots + j] = seed;
                }
            }
            if r == row {
                special.push(seed);
            }
        }
    }

    // XOR over j of (cw_j ^ G(s_row,j)) must equal `block`.
    let mut correction_words: Vec<BitString> =
        (0..slots - 1).map(|_| BitString::random(params.row_bits(), rng)).collect();
    let mut last = block.clone();
    for cw in &correction_words {
        last.xor_assign(cw)?;
    }
    for seed in &special {
        prg_xor_into(seed, last.bytes_mut());
    }
    last.clear_padding();
    correction_words.push(last);

    Ok(sigma
        .into_iter()
        .enumerate()
        .map(|(party, sigma)| FssKey { params: *params, party, sigma, correction_words: correction_words.clone() })
        .collect())
}

/// XOR over held slots `j` of `cw_j ^ G(s_row,j)`.
pub fn fss_eval_row(key: &FssKey, row: u64) -> BitString {
    let mut out = BitString::zeros(key.params.row_bits());
    for (seed, cw) in key.row_seeds(row).iter().zip(&key.correction_words) {
        if FssKey::is_held(seed) {
            crate::field::xor_into(out.bytes_mut(), cw.as_bytes());
            prg_xor_into(seed, out.bytes_mut());
        }
    }
    out.clear_padding();
    out
}

/// Full-domain evaluation: one expansion per row, every position sliced out of it.
pub fn fss_evaluate_share(key: &FssKey) -> BitString {
    let mut out = BitString::zeros(key.params.domain_bits());
    fss_evaluate_share_into(key, &mut out);
    out
}

/// XORs the full-domain evaluation of `key` into `acc`, which must hold
/// `2^n * m` bits.
pub fn fss_evaluate_share_into(key: &FssKey, acc: &mut BitString) {
    let params = &key.params;
    assert_eq!(acc.len(), params.domain_bits(), "accumulator length");
    let row_bits = params.row_bits();
    for row in 0..params.nu {
        let offset = row as usize * row_bits;
        if offset >= acc.len() {
            break;
        }
        if key.row_seeds(row).iter().any(FssKey::is_held) {
            acc.xor_at(offset, &fss_eval_row(key, row));
        }
    }
}

/// Evaluates a single input by recomputing its row.
pub fn fss_eval_naive(key: &FssKey, x: u64) -> u64 {
    let (row, pos) = key.params.split(x);
    let m = key.params.m as usize;
    fss_eval_row(key, row).get_bits(pos as usize * m, m)
}

/// The unoptimized full-domain loop: one row expansion per input.
pub fn fss_eval_naive_full(key: &FssKey) -> Vec<u64> {
    (0..key.params.domain()).map(|x| fss_eval_naive(key, x)).collect()
}

/// Splits a packed evaluation into `m`-bit messages.
pub fn messages(bits: &BitString, m: u32) -> Vec<u64> {
    let m = m as usize;
    (0..bits.len() / m).map(|i| bits.get_bits(i * m, m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reconstruct(keys: &[FssKey]) -> Vec<u64> {
        let params = keys[0].params;
        let mut acc = BitString::zeros(params.domain_bits());
        for k in keys {
            fss_evaluate_share_into(k, &mut acc);
        }
        messages(&acc, params.m)
    }

    #[test]
    fn default_layout() {
        let p = FssParams::new(17, 3, 1).unwrap();
        assert_eq!((p.mu, p.nu), (725, 181));
        let p = FssParams::new(16, 3, 1).unwrap();
        assert_eq!((p.mu, p.nu), (512, 128));
        let p = FssParams::new(2, 5, 1).unwrap();
        assert_eq!((p.mu, p.nu), (8, 1));
        assert_eq!(ceil_sqrt_pow2(3), 3);
        assert_eq!(ceil_sqrt_pow2(4), 4);
    }

    #[test]
    fn layout_must_cover_domain() {
        let p = FssParams::new(10, 3, 4).unwrap();
        assert!(p.with_layout(33, 32).is_ok());
        assert!(p.with_layout(31, 33).is_err());
        assert_eq!(p.with_mu(100).unwrap().nu, 11);
    }

    #[test]
    fn two_party_small_example() {
        let params = FssParams::new(2, 2, 1).unwrap();
        let keys = fss_gen(&PointFunction::new(1, 1), &params, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(reconstruct(&keys), vec![0, 1, 0, 0]);
    }

    #[test]
    fn null_write_reconstructs_zero() {
        let params = FssParams::new(9, 3, 5).unwrap();
        let keys = fss_gen(&PointFunction::new(300, 0), &params, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(reconstruct(&keys).iter().all(|&v| v == 0));
    }

    #[test]
    fn rows_reconstruct_block_or_zero() {
        let params = FssParams::new(8, 3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pf = PointFunction::new(77, 5);
        let keys = fss_gen(&pf, &params, &mut rng).unwrap();
        let (row, pos) = params.split(pf.a);
        for r in 0..params.nu {
            let mut acc = BitString::zeros(params.row_bits());
            for k in &keys {
                acc.xor_assign(&fss_eval_row(k, r)).unwrap();
            }
            let msgs = messages(&acc, params.m);
            for (d, v) in msgs.iter().enumerate() {
                let expect = if r == row && d as u64 == pos { 5 } else { 0 };
                assert_eq!(*v, expect, "row {r} pos {d}");
            }
        }
    }

    #[test]
    fn party_without_seeds_in_row_outputs_zero() {
        let params = FssParams::new(6, 3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let keys = fss_gen(&PointFunction::new(rng.gen_range(0..64), 3), &params, &mut rng).unwrap();
            for k in &keys {
                for r in 0..params.nu {
                    if !k.row_seeds(r).iter().any(FssKey::is_held) {
                        assert!(fss_eval_row(k, r).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn selection_parity() {
        let params = FssParams::new(8, 4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pf = PointFunction::new(200, 1);
        let keys = fss_gen(&pf, &params, &mut rng).unwrap();
        let (special, _) = params.split(pf.a);
        for r in 0..params.nu {
            for j in 0..params.slots() {
                let holders = keys.iter().filter(|k| FssKey::is_held(&k.row_seeds(r)[j])).count();
                assert_eq!(holders % 2 == 1, r == special, "row {r} slot {j}");
            }
        }
    }

    #[test]
    fn naive_matches_optimized_small() {
        let params = FssParams::new(7, 3, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let keys = fss_gen(&PointFunction::new(100, 300), &params, &mut rng).unwrap();
        for k in &keys {
            assert_eq!(messages(&fss_evaluate_share(k), params.m), fss_eval_naive_full(k));
        }
    }

    #[test]
    fn rejects_oversized_point() {
        let params = FssParams::new(4, 2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(fss_gen(&PointFunction::new(16, 1), &params, &mut rng).is_err());
        assert!(fss_gen(&PointFunction::new(3, 4), &params, &mut rng).is_err());
    }
}
