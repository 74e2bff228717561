//! Prime-field and packed-bitstring primitives.
//!
//! Field elements back the blinded unit-vector checks; bitstrings back the
//! XOR-shared databases and FSS correction words. Neither is hardened against
//! timing side channels: this is simulation-grade arithmetic.

mod bitstring;
mod prime;

pub(crate) use bitstring::xor_into;
pub use bitstring::BitString;
pub use prime::{Fe, Fp, MERSENNE_61};

use crate::error::Result;

pub fn fe_add<const Z: u64>(x: Fp<Z>, y: Fp<Z>) -> Fp<Z> {
    x + y
}

pub fn fe_mul<const Z: u64>(x: Fp<Z>, y: Fp<Z>) -> Fp<Z> {
    x * y
}

pub fn fe_inv<const Z: u64>(x: Fp<Z>) -> Result<Fp<Z>> {
    x.inv()
}

pub fn fe_pow<const Z: u64>(x: Fp<Z>, e: u64) -> Fp<Z> {
    x.pow(e)
}

pub fn xor(x: &BitString, y: &BitString) -> Result<BitString> {
    x.xor(y)
}
