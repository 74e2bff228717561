//! Non-attributable database writes.
//!
//! Two constructions share one contract: an owner splits a point function
//! `F(a) = b, F(x != a) = 0` into one share per aggregator, and the XOR of all
//! aggregators' share evaluations reconstructs `e_a * b` over the whole
//! database. [`it_gen`] does this with full-length random pads; [`fss_gen`]
//! compresses the pads with a PRG and per-row seed selection matrices so a key
//! is roughly square-root sized in the database.

mod codec;
mod fss;
mod it;
mod prg;

use serde::{Deserialize, Serialize};

pub use codec::{key_deserialize, key_serialize, HEADER_BYTES, KEY_FORMAT_VERSION};
pub use fss::{
    fss_eval_naive, fss_eval_naive_full, fss_eval_row, fss_evaluate_share, fss_evaluate_share_into, fss_gen,
    fss_gen_block, messages, FssKey, FssParams, Seed, LAMBDA,
};
pub use it::{it_accumulate, it_encrypt, it_gen, one_hot, ItKeySet};
pub use prg::{prg_expand, prg_xor_into};

use crate::error::{Error, Result};

/// Write message `b` into row `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointFunction {
    pub a: u64,
    pub b: u64,
}

impl PointFunction {
    pub fn new(a: u64, b: u64) -> Self {
        PointFunction { a, b }
    }

    pub fn check(&self, n: u32, m: u32) -> Result<()> {
        if n < 64 && self.a >= 1u64 << n {
            return Err(Error::InvalidParams(format!("index {} does not fit {n} bits", self.a)));
        }
        if m < 64 && self.b >= 1u64 << m {
            return Err(Error::InvalidParams(format!("message {} does not fit {m} bits", self.b)));
        }
        Ok(())
    }

    pub fn eval(&self, x: u64) -> u64 {
        if x == self.a {
            self.b
        } else {
            0
        }
    }
}
