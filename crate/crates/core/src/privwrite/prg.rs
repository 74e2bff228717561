use aes::cipher::generic_array::GenericArray;
use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes128;

use super::fss::Seed;
use crate::field::BitString;

const BATCH: usize = 8;

/// Expands a 128-bit seed to `out_bits` bits with AES-128 in counter mode
/// (key = seed, big-endian block counter starting at zero).
pub fn prg_expand(seed: &Seed, out_bits: usize) -> BitString {
    let mut out = BitString::zeros(out_bits);
    prg_xor_into(seed, out.bytes_mut());
    out.clear_padding();
    out
}

/// XORs the keystream into `dst`. Callers that own a padded bitstring must
/// clear its padding bits afterwards.
pub fn prg_xor_into(seed: &Seed, dst: &mut [u8]) {
    let cipher = Aes128::new(GenericArray::from_slice(seed));
    let mut counter: u128 = 0;
    let mut blocks = [GenericArray::from([0u8; 16]); BATCH];
    for chunk in dst.chunks_mut(16 * BATCH) {
        let nblocks = chunk.len().div_ceil(16);
        for b in blocks.iter_mut().take(nblocks) {
            b.copy_from_slice(&counter.to_be_bytes());
            counter += 1;
        }
        cipher.encrypt_blocks(&mut blocks[..nblocks]);
        for (d, s) in chunk.chunks_mut(16).zip(blocks.iter()) {
            for (x, y) in d.iter_mut().zip(s.iter()) {
                *x ^= y;
            }
        }
    }
}
