//! Self-delimiting numeric values: big-endian base-128 with the high bit
//! set on every byte except the last.

use super::WireError;

/// Result of decoding one SDNV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sdnv {
    pub value: u64,
    pub consumed: usize,
    /// The encoding carried leading zero groups. Accepted, but reported.
    pub non_minimal: bool,
}

/// Number of bytes the minimal encoding of `v` takes.
pub fn sdnv_len(v: u64) -> usize {
    let bits = 64 - v.leading_zeros() as usize;
    bits.div_ceil(7).max(1)
}

pub fn sdnv_encode_into(v: u64, out: &mut Vec<u8>) {
    let len = sdnv_len(v);
    for i in (0..len).rev() {
        let group = ((v >> (7 * i)) & 0x7f) as u8;
        out.push(if i == 0 { group } else { group | 0x80 });
    }
}

pub fn sdnv_encode(v: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(sdnv_len(v));
    sdnv_encode_into(v, &mut out);
    out
}

pub fn sdnv_decode(bytes: &[u8], at: usize) -> Result<Sdnv, WireError> {
    let mut value: u64 = 0;
    let mut i = at;
    loop {
        let b = *bytes.get(i).ok_or(WireError::Truncated)?;
        if value >> 57 != 0 {
            return Err(WireError::SdnvOverflow);
        }
        value = value << 7 | u64::from(b & 0x7f);
        i += 1;
        if b & 0x80 == 0 {
            let consumed = i - at;
            return Ok(Sdnv {
                value,
                consumed,
                non_minimal: consumed > 1 && bytes[at] == 0x80,
            });
        }
    }
}
