use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::PointFunction;
use crate::error::{Error, Result};
use crate::field::BitString;

/// Full-length XOR shares of one write, one bitstring per aggregator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItKeySet {
    pub shares: Vec<BitString>,
}

impl ItKeySet {
    pub fn reconstruct(&self) -> BitString {
        let len = self.shares.first().map_or(0, BitString::len);
        self.shares.iter().fold(BitString::zeros(len), |mut acc, s| {
            acc.xor_assign(s).expect("shares of one key set share a length");
            acc
        })
    }
}

/// `2^n` slots of `m` bits with `b` in slot `a`.
pub fn one_hot(pf: &PointFunction, n: u32, m: u32) -> Result<BitString> {
    pf.check(n, m)?;
    let mut out = BitString::zeros((1usize << n) * m as usize);
    out.set_bits(pf.a as usize * m as usize, m as usize, pf.b);
    Ok(out)
}

/// The share handed to the last aggregator: the message XOR every pad.
pub fn it_encrypt(message: &BitString, pads: &[BitString]) -> Result<BitString> {
    pads.iter().try_fold(message.clone(), |acc, pad| acc.xor(pad))
}

/// `p - 1` uniform pads plus the encrypted message.
pub fn it_gen<R: RngCore + ?Sized>(pf: &PointFunction, n: u32, m: u32, p: usize, rng: &mut R) -> Result<ItKeySet> {
    if p < 2 {
        return Err(Error::InvalidParams(format!("need at least two aggregators, got {p}")));
    }
    let message = one_hot(pf, n, m)?;
    let mut shares: Vec<BitString> = (0..p - 1).map(|_| BitString::random(message.len(), rng)).collect();
    let last = it_encrypt(&message, &shares)?;
    shares.push(last);
    Ok(ItKeySet { shares })
}

/// One aggregator folding a received share into its running database.
pub fn it_accumulate(db: &BitString, share: &BitString) -> Result<BitString> {
    db.xor(share)
}
