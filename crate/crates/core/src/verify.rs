//! Blinded additive-share checks that a write is a 0/1 unit vector.
//!
//! The owner additively shares the write's slot indicator `u` over the prime
//! field (`sum_i V_i = u`), samples a structured blinding matrix `R` with one
//! row per aggregator, and hands aggregator `i` the blinded share `R * V_i`.
//! Aggregators publish their shares; the sum is `s = R * u`, and a relation
//! between the rows of `s` holds exactly when `u` has the right shape:
//!
//! * square: row `j` of `R` is row one raised to the `j`-th power, and the
//!   check is `s_j = s_1^j`. For a single entry `c` at column `a` this reads
//!   `(c r_a)^j = c r_a^j`, which holds for every `j` iff `c` is 0 or 1. Two
//!   nonzero entries leave cross terms such as `2 c_a c_b r_a r_b`. The zero
//!   vector passes.
//! * product: the last row is the entrywise product of the others, checked
//!   as `s_1 * ... * s_{p-1} = s_p`. The zero vector passes. With two
//!   aggregators the relation degenerates to `s_1 = s_2` and checks nothing.
//! * inverse: each column multiplies to one, checked as `s_1 * ... * s_p = 1`.
//!   The zero vector fails.
//!
//! Only 0/1 indicators are verified; multi-bit payloads travel in the FSS
//! write. Nothing binds these shares to the write itself.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Fp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlindingKind {
    Square,
    Product,
    Inverse,
}

impl BlindingKind {
    pub const ALL: [BlindingKind; 3] = [BlindingKind::Square, BlindingKind::Product, BlindingKind::Inverse];

    pub fn name(self) -> &'static str {
        match self {
            BlindingKind::Square => "square",
            BlindingKind::Product => "product",
            BlindingKind::Inverse => "inverse",
        }
    }
}

impl std::str::FromStr for BlindingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(BlindingKind::Square),
            "product" => Ok(BlindingKind::Product),
            "inverse" => Ok(BlindingKind::Inverse),
            other => Err(Error::InvalidParams(format!("unknown blinding kind {other:?}"))),
        }
    }
}

/// `p x n` blinding matrix; `rows[j][i]` multiplies entry `i` for aggregator row `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlindingMatrix<const Z: u64> {
    pub kind: BlindingKind,
    pub rows: Vec<Vec<Fp<Z>>>,
}

impl<const Z: u64> BlindingMatrix<Z> {
    /// Builds a matrix from explicit columns (each of length `p`).
    pub fn from_columns(kind: BlindingKind, columns: &[Vec<Fp<Z>>]) -> Result<Self> {
        let p = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != p) {
            return Err(Error::DimensionError { expected: p, got: 0 });
        }
        let rows = (0..p).map(|j| columns.iter().map(|c| c[j]).collect()).collect();
        Ok(BlindingMatrix { kind, rows })
    }

    pub fn parties(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn column(&self, i: usize) -> Vec<Fp<Z>> {
        self.rows.iter().map(|r| r[i]).collect()
    }

    /// Whether every column satisfies the kind's structural constraint.
    pub fn is_well_formed(&self) -> bool {
        (0..self.columns()).all(|i| column_is_well_formed(self.kind, &self.column(i)))
    }
}

fn column_is_well_formed<const Z: u64>(kind: BlindingKind, col: &[Fp<Z>]) -> bool {
    let p = col.len();
    match kind {
        BlindingKind::Square => col.iter().enumerate().all(|(j, &r)| !r.is_zero() && r == col[0].pow(j as u64 + 1)),
        BlindingKind::Product => {
            col[..p - 1].iter().all(|r| !r.is_zero()) && col[..p - 1].iter().copied().product::<Fp<Z>>() == col[p - 1]
        }
        BlindingKind::Inverse => col.iter().copied().product::<Fp<Z>>() == Fp::ONE,
    }
}

/// One column of a blinding matrix: nonzero free entries, the rest fixed by the kind.
pub fn sample_column<const Z: u64, R: Rng + ?Sized>(kind: BlindingKind, p: usize, rng: &mut R) -> Vec<Fp<Z>> {
    match kind {
        BlindingKind::Square => {
            let r = Fp::random_nonzero(rng);
            (1..=p as u64).map(|j| r.pow(j)).collect()
        }
        BlindingKind::Product => {
            let mut col: Vec<Fp<Z>> = (0..p - 1).map(|_| Fp::random_nonzero(rng)).collect();
            let last = col.iter().copied().product();
            col.push(last);
            col
        }
        BlindingKind::Inverse => {
            let mut col: Vec<Fp<Z>> = (0..p - 1).map(|_| Fp::random_nonzero(rng)).collect();
            let prod: Fp<Z> = col.iter().copied().product();
            col.push(prod.inv().expect("product of nonzero elements is nonzero"));
            col
        }
    }
}

pub fn make_blinding<const Z: u64, R: Rng + ?Sized>(
    kind: BlindingKind,
    n: usize,
    p: usize,
    rng: &mut R,
) -> Result<BlindingMatrix<Z>> {
    if p < 2 {
        return Err(Error::InvalidParams(format!("blinding needs at least two rows, got {p}")));
    }
    let columns: Vec<Vec<Fp<Z>>> = (0..n).map(|_| sample_column(kind, p, rng)).collect();
    let mut m = BlindingMatrix::from_columns(kind, &columns)?;
    if n == 0 {
        m.rows = vec![Vec::new(); p];
    }
    Ok(m)
}

/// One aggregator's additive share of the indicator vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditiveShareVector<const Z: u64> {
    pub components: Vec<Fp<Z>>,
}

/// `p - 1` uniform vectors and a last one fixing the sum to `u_hat`.
pub fn additive_share<const Z: u64, R: Rng + ?Sized>(
    u_hat: &[Fp<Z>],
    p: usize,
    rng: &mut R,
) -> Vec<AdditiveShareVector<Z>> {
    assert!(p >= 1, "need at least one share");
    let mut shares: Vec<AdditiveShareVector<Z>> = (0..p - 1)
        .map(|_| AdditiveShareVector { components: u_hat.iter().map(|_| Fp::random(rng)).collect() })
        .collect();
    let last =
        u_hat.iter().enumerate().map(|(i, &u)| u - shares.iter().map(|s| s.components[i]).sum::<Fp<Z>>()).collect();
    shares.push(AdditiveShareVector { components: last });
    shares
}

/// `R * V_i`, one field element per blinding row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlindedShare<const Z: u64> {
    pub rows: Vec<Fp<Z>>,
}

pub fn blind<const Z: u64>(r: &BlindingMatrix<Z>, v: &AdditiveShareVector<Z>) -> Result<BlindedShare<Z>> {
    if v.components.len() != r.columns() {
        return Err(Error::DimensionError { expected: r.columns(), got: v.components.len() });
    }
    let rows = r.rows.iter().map(|row| row.iter().zip(&v.components).map(|(&a, &b)| a * b).sum()).collect();
    Ok(BlindedShare { rows })
}

/// Row-wise sum of every aggregator's published share.
pub fn aggregate<const Z: u64>(shares: &[BlindedShare<Z>]) -> Result<Vec<Fp<Z>>> {
    let width = shares.first().map_or(0, |s| s.rows.len());
    let mut sum = vec![Fp::ZERO; width];
    for s in shares {
        if s.rows.len() != width {
            return Err(Error::DimensionError { expected: width, got: s.rows.len() });
        }
        for (acc, &x) in sum.iter_mut().zip(&s.rows) {
            *acc += x;
        }
    }
    Ok(sum)
}

pub fn check_square<const Z: u64>(s: &[Fp<Z>]) -> bool {
    let Some(&first) = s.first() else { return false };
    let mut power = first;
    for &sj in &s[1..] {
        power *= first;
        if sj != power {
            return false;
        }
    }
    true
}

pub fn check_product<const Z: u64>(s: &[Fp<Z>]) -> bool {
    match s.split_last() {
        Some((&last, rest)) if !rest.is_empty() => rest.iter().copied().product::<Fp<Z>>() == last,
        _ => false,
    }
}

pub fn check_inverse<const Z: u64>(s: &[Fp<Z>]) -> bool {
    !s.is_empty() && s.iter().copied().product::<Fp<Z>>() == Fp::ONE
}

pub fn check<const Z: u64>(kind: BlindingKind, s: &[Fp<Z>]) -> bool {
    match kind {
        BlindingKind::Square => check_square(s),
        BlindingKind::Product => check_product(s),
        BlindingKind::Inverse => check_inverse(s),
    }
}

/// Aggregates one owner's blinded shares and applies the kind's check.
pub fn verify_owner<const Z: u64>(blinded: &[BlindedShare<Z>], kind: BlindingKind, parties: usize) -> Result<bool> {
    if blinded.len() != parties {
        return Err(Error::IncompleteSubmission { expected: parties, got: blinded.len() });
    }
    if blinded.iter().any(|b| b.rows.len() != parties) {
        return Ok(false);
    }
    Ok(check(kind, &aggregate(blinded)?))
}

/// Owner-side blinded shares for a sparse indicator given as `(index, value)` entries.
///
/// Only the columns of `R` under nonzero entries influence `R * u`, and for
/// uniform `V_1 .. V_{p-1}` the shares `R * V_i` are themselves uniform, so
/// this samples those shares directly and sets the last one to
/// `R * u - sum`. Cost is independent of the database length.
pub fn blind_sparse<const Z: u64, R: Rng + ?Sized>(
    kind: BlindingKind,
    entries: &[(u64, Fp<Z>)],
    p: usize,
    rng: &mut R,
) -> Vec<BlindedShare<Z>> {
    let mut by_index: BTreeMap<u64, Fp<Z>> = BTreeMap::new();
    for &(i, v) in entries {
        *by_index.entry(i).or_insert(Fp::ZERO) += v;
    }
    let columns: Vec<(Vec<Fp<Z>>, Fp<Z>)> = by_index.into_values().map(|v| (sample_column(kind, p, rng), v)).collect();
    blind_sparse_with_columns(&columns, p, rng)
}

/// [`blind_sparse`] with caller-chosen columns of `R`.
pub fn blind_sparse_with_columns<const Z: u64, R: Rng + ?Sized>(
    columns: &[(Vec<Fp<Z>>, Fp<Z>)],
    p: usize,
    rng: &mut R,
) -> Vec<BlindedShare<Z>> {
    let mut target = vec![Fp::<Z>::ZERO; p];
    for (col, v) in columns {
        for (t, &r) in target.iter_mut().zip(col) {
            *t += r * *v;
        }
    }
    let mut shares: Vec<BlindedShare<Z>> =
        (0..p - 1).map(|_| BlindedShare { rows: (0..p).map(|_| Fp::random(rng)).collect() }).collect();
    let last = (0..p).map(|j| target[j] - shares.iter().map(|s| s.rows[j]).sum::<Fp<Z>>()).collect();
    shares.push(BlindedShare { rows: last });
    shares
}
