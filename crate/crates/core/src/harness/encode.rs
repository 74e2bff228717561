use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::BitString;

pub const DEFAULT_CHECKSUM_BITS: u32 = 16;

/// Truncated CRC-32 of `value (LE u32) || epoch_id (LE u64)`.
pub fn checksum(value: u32, epoch_id: u64, checksum_bits: u32) -> u64 {
    let mut h = crc32fast::Hasher::new();
    h.update(&value.to_le_bytes());
    h.update(&epoch_id.to_le_bytes());
    u64::from(h.finalize()) & mask(checksum_bits)
}

fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Slot message `(value + 1) || checksum`, `id_bits + checksum_bits` wide.
pub fn encode_message(value: u32, id_bits: u32, checksum_bits: u32, epoch_id: u64) -> Result<u64> {
    let tag = u64::from(value) + 1;
    if id_bits + checksum_bits > 64 || tag > mask(id_bits) {
        return Err(Error::InvalidParams(format!("value {value} does not fit {id_bits} identifier bits")));
    }
    Ok(tag << checksum_bits | checksum(value, epoch_id, checksum_bits))
}

/// What a scan of one round's database found.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotCounts {
    pub counts: BTreeMap<u32, u64>,
    /// Nonzero slots whose checksum did not match.
    pub collision_drops: u64,
}

/// Counts valid messages in reconstructed slots.
pub fn count_values(slots: &[u64], id_bits: u32, checksum_bits: u32, epoch_id: u64) -> SlotCounts {
    let mut out = SlotCounts::default();
    let width = id_bits + checksum_bits;
    for &slot in slots {
        if slot == 0 {
            continue;
        }
        let tag = (slot & mask(width)) >> checksum_bits;
        let valid = width >= 64 || slot >> width == 0;
        match tag.checked_sub(1).and_then(|v| u32::try_from(v).ok()) {
            Some(value) if valid && slot & mask(checksum_bits) == checksum(value, epoch_id, checksum_bits) => {
                *out.counts.entry(value).or_insert(0) += 1;
            }
            _ => out.collision_drops += 1,
        }
    }
    out
}

/// XORs every party's accumulator and splits the result into `m`-bit slots.
pub fn reconstruct(accumulators: &[BitString], m: u32) -> Result<Vec<u64>> {
    let db = xor_all(accumulators)?;
    Ok(crate::privwrite::messages(&db, m))
}

/// XOR of every party's accumulator.
pub fn xor_all(accumulators: &[BitString]) -> Result<BitString> {
    let first = accumulators.first().ok_or_else(|| Error::ProtocolAbort("no accumulators to combine".into()))?;
    let mut db = first.clone();
    for acc in &accumulators[1..] {
        db.xor_assign(acc).map_err(|_| {
            Error::ProtocolAbort(format!("accumulator length {} differs from {}", acc.len(), first.len()))
        })?;
    }
    Ok(db)
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: u32 = 16;

    #[test]
    fn empty_db() {
        let out = count_values(&[0; 32], 4, C, 0);
        assert!(out.counts.is_empty());
        assert_eq!(out.collision_drops, 0);
    }

    #[test]
    fn repeated_id() {
        let msg = encode_message(8, 4, C, 3).unwrap();
        let mut slots = vec![0; 16];
        for i in [1, 5, 9] {
            slots[i] = msg;
        }
        let out = count_values(&slots, 4, C, 3);
        assert_eq!(out.counts, BTreeMap::from([(8, 3)]));
        assert_eq!(out.collision_drops, 0);
    }

    #[test]
    fn synthetic_collision() {
        let a = encode_message(2, 4, C, 0).unwrap();
        let b = encode_message(5, 4, C, 0).unwrap();
        let slots = [a, 0, a ^ b, 0];
        let out = count_values(&slots, 4, C, 0);
        assert_eq!(out.counts, BTreeMap::from([(2, 1)]));
        assert_eq!(out.collision_drops, 1);
    }

    #[test]
    fn checksum_binds_epoch() {
        let msg = encode_message(1, 2, C, 7).unwrap();
        let out = count_values(&[msg], 2, C, 8);
        assert_eq!(out.collision_drops, 1);
    }

    #[test]
    fn collisions_mostly_detected() {
        let (mut detected, mut total) = (0, 0);
        for a in 0..64u32 {
            for b in 0..64u32 {
                if a == b {
                    continue;
                }
                let x = encode_message(a, 7, C, 11).unwrap() ^ encode_message(b, 7, C, 11).unwrap();
                total += 1;
                if count_values(&[x], 7, C, 11).collision_drops == 1 {
                    detected += 1;
                }
            }
        }
        assert!(total - detected <= 2, "{detected}/{total}");
    }

    #[test]
    fn value_must_fit() {
        assert!(encode_message(3, 2, C, 0).is_err());
        assert!(encode_message(2, 2, C, 0).is_ok());
        assert!(encode_message(0, 40, 32, 0).is_err());
    }

    #[test]
    fn reconstruct_xors_and_splits() {
        let m = 8;
        let mut a = BitString::zeros(4 * m as usize);
        let mut b = BitString::zeros(4 * m as usize);
        a.set_bits(8, 8, 0xff);
        b.set_bits(8, 8, 0x0f);
        b.set_bits(24, 8, 0x42);
        assert_eq!(reconstruct(&[a.clone(), b], m).unwrap(), vec![0, 0xf0, 0, 0x42]);
        let short = BitString::zeros(8);
        assert!(matches!(reconstruct(&[a, short], m), Err(Error::ProtocolAbort(_))));
    }
}
