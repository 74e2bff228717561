//! Key wire format, all integers little-endian:
//!
//! ```text
//! offset  size  field
//! 0       1     version (= 1)
//! 1       1     n
//! 2       1     p
//! 3       2     lambda (bits, = 128)
//! 5       1     m
//! 6       4     mu
//! 10      4     nu
//! 14      1     party index (0-based)
//! 15      ..    sigma: nu * 2^(p-1) seeds of 16 bytes, row-major, zero = not held
//! ..      ..    correction words cw_1 .. cw_{2^(p-1)}, each m*mu bits, bit-packed
//!               back to back MSB-first and zero-padded to a whole byte
//! ```
//!
//! The encoded length is therefore `15 + ceil(key_payload_bits / 8)` bytes.

use super::fss::{FssKey, FssParams, Seed};
use crate::error::{Error, Result};
use crate::field::BitString;

pub const KEY_FORMAT_VERSION: u8 = 1;
pub const HEADER_BYTES: usize = 15;

pub fn key_serialize(key: &FssKey) -> Vec<u8> {
    let params = &key.params;
    let mut out = Vec::with_capacity(HEADER_BYTES + params.key_payload_bits().div_ceil(8) as usize);
    out.push(KEY_FORMAT_VERSION);
    out.push(params.n as u8);
    out.push(params.p as u8);
    out.extend_from_slice(&(params.lambda as u16).to_le_bytes());
    out.push(params.m as u8);
    out.extend_from_slice(&(params.mu as u32).to_le_bytes());
    out.extend_from_slice(&(params.nu as u32).to_le_bytes());
    out.push(key.party as u8);
    for seed in &key.sigma {
        out.extend_from_slice(seed);
    }
    let row_bits = params.row_bits();
    let mut cws = BitString::zeros(row_bits * key.correction_words.len());
    for (j, cw) in key.correction_words.iter().enumerate() {
        cws.xor_at(j * row_bits, cw);
    }
    out.extend_from_slice(cws.as_bytes());
    out
}

pub fn key_deserialize(bytes: &[u8]) -> Result<FssKey> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::ParseError(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[0] != KEY_FORMAT_VERSION {
        return Err(Error::ParseError(format!("unsupported version {}", bytes[0])));
    }
    let le32 = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as u64;
    let params = FssParams {
        n: bytes[1] as u32,
        p: bytes[2] as usize,
        lambda: u16::from_le_bytes([bytes[3], bytes[4]]) as u32,
        m: bytes[5] as u32,
        mu: le32(6),
        nu: le32(10),
    };
    params.validate().map_err(|e| Error::ParseError(format!("bad header: {e}")))?;
    let party = bytes[14] as usize;
    if party >= params.p {
        return Err(Error::ParseError(format!("party {party} out of range for {} parties", params.p)));
    }
    let expected = HEADER_BYTES as u64 + params.key_payload_bits().div_ceil(8);
    if bytes.len() as u64 != expected {
        return Err(Error::ParseError(format!("expected {expected} bytes, got {}", bytes.len())));
    }
    let slots = params.slots();
    let sigma_len = params.nu as usize * slots;
    let sigma: Vec<Seed> =
        bytes[HEADER_BYTES..HEADER_BYTES + sigma_len * 16].chunks_exact(16).map(|c| c.try_into().unwrap()).collect();
    let row_bits = params.row_bits();
    let cws = BitString::from_bytes(bytes[HEADER_BYTES + sigma_len * 16..].to_vec(), row_bits * slots)?;
    let correction_words = (0..slots).map(|j| cws.slice(j * row_bits, row_bits)).collect();
    Ok(FssKey { params, party, sigma, correction_words })
}
