//! Wire formats: SDNV integers, a TLV encoding for CCN packets, and the
//! bundle format with the BPQ extension block.

mod bundle;
mod ccn;
mod sdnv;

pub use bundle::{
    decode_bundle, decode_bundle_with_diagnostics, encode_bundle, BpqBlock, BpqKind, Bundle, BundleId,
    CreationTimestamp, Fragment, BUNDLE_VERSION,
};
pub use ccn::{
    decode_ccn_packet, decode_ccn_packet_with_diagnostics, encode_ccn_packet, CcnPacket, Data, Interest,
    StatusResponse, STATUS_TEMPORARILY_UNAVAILABLE,
};
pub use sdnv::{sdnv_decode, sdnv_encode, sdnv_encode_into, sdnv_len, Sdnv};

use thiserror::Error;

use crate::names::{EidError, NameError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("input truncated")]
    Truncated,
    #[error("SDNV exceeds 64 bits")]
    SdnvOverflow,
    #[error("unknown packet type byte 0x{0:02x}")]
    UnknownType(u8),
    #[error("declared length {declared} overruns the {available} bytes available")]
    LengthOverrun { declared: u64, available: usize },
    #[error("{0} trailing bytes after the declared length")]
    TrailingBytes(usize),
    #[error("invalid name: {0}")]
    BadName(#[from] NameError),
    #[error("invalid endpoint identifier: {0}")]
    BadEid(#[from] EidError),
    #[error("endpoint identifier is not UTF-8")]
    EidNotUtf8,
    #[error("nonce must be 8 bytes, got {0}")]
    BadNonce(usize),
    #[error("interest lifetime must be positive")]
    ZeroLifetime,
    #[error("status code {0} is not a three-digit value")]
    BadStatusCode(u64),
    #[error("unknown BPQ kind {0}")]
    UnknownBpqKind(u8),
    #[error("invalid BPQ presence flag {0}")]
    BadPresenceFlag(u8),
    #[error("fragment count {count} does not match {listed} listed fragments")]
    FragmentMismatch { count: u64, listed: usize },
    #[error("value {0} does not fit the field")]
    ValueTooLarge(u64),
}

/// Decoding diagnostics that do not fail the decode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub non_minimal_sdnv: bool,
}

/// Bounded cursor shared by both decoders. Every read is checked against
/// the slice end.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    pub(crate) diagnostics: Diagnostics,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self {
            buf,
            pos: 0,
            diagnostics: Diagnostics::default(),
        }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub(crate) fn u8(&mut self) -> Result<u8, WireError> {
        let b = *self.buf.get(self.pos).ok_or(WireError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    pub(crate) fn sdnv(&mut self) -> Result<u64, WireError> {
        let d = sdnv_decode(self.buf, self.pos)?;
        self.pos += d.consumed;
        self.diagnostics.non_minimal_sdnv |= d.non_minimal;
        Ok(d.value)
    }

    /// Reads an SDNV length and checks it against the bytes left.
    pub(crate) fn length(&mut self) -> Result<usize, WireError> {
        let declared = self.sdnv()?;
        let available = self.remaining();
        if declared > available as u64 {
            return Err(WireError::LengthOverrun { declared, available });
        }
        Ok(declared as usize)
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if n > self.remaining() {
            return Err(WireError::Truncated);
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn bytes(&mut self) -> Result<&'a [u8], WireError> {
        let n = self.length()?;
        self.take(n)
    }

    pub(crate) fn finish(&self) -> Result<(), WireError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(WireError::TrailingBytes(n)),
        }
    }
}

pub(crate) fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    sdnv_encode_into(bytes.len() as u64, out);
    out.extend_from_slice(bytes);
}

/// Either wire format, as detected from the leading type byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Ccn(CcnPacket),
    Bundle(Bundle),
}

pub fn decode_frame(bytes: &[u8]) -> Result<Frame, WireError> {
    decode_frame_with_diagnostics(bytes).map(|(f, _)| f)
}

pub fn decode_frame_with_diagnostics(bytes: &[u8]) -> Result<(Frame, Diagnostics), WireError> {
    match bytes.first() {
        Some(&BUNDLE_VERSION) => decode_bundle_with_diagnostics(bytes).map(|(b, d)| (Frame::Bundle(b), d)),
        Some(_) => decode_ccn_packet_with_diagnostics(bytes).map(|(p, d)| (Frame::Ccn(p), d)),
        None => Err(WireError::Truncated),
    }
}

fn printable(bytes: &[u8]) -> String {
    match std::str::from_utf8(bytes) {
        Ok(s) if s.chars().all(|c| !c.is_control()) => format!("{s:?}"),
        _ => format!("0x{}", bytes.iter().map(|b| format!("{b:02x}")).collect::<String>()),
    }
}

fn short(bytes: &[u8]) -> String {
    if bytes.len() <= 32 {
        printable(bytes)
    } else {
        format!("{}… ({} bytes)", printable(&bytes[..32]), bytes.len())
    }
}

/// Human-readable rendering used by `ccndtn wire dump`.
pub fn dump_frame(frame: &Frame) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    match frame {
        Frame::Ccn(CcnPacket::Interest(i)) => {
            let _ = writeln!(s, "CCN Interest");
            let _ = writeln!(s, "  name:     {}", i.name);
            let _ = writeln!(s, "  nonce:    {}", printable(&i.nonce));
            let _ = writeln!(s, "  lifetime: {} ms", i.lifetime_ms);
        }
        Frame::Ccn(CcnPacket::Data(d)) => {
            let _ = writeln!(s, "CCN Data");
            let _ = writeln!(s, "  name:      {}", d.name);
            let _ = writeln!(s, "  payload:   {}", short(&d.payload));
            let _ = writeln!(s, "  freshness: {} ms", d.freshness_ms);
            let _ = writeln!(s, "  signature: {} bytes (not verified)", d.signature.len());
        }
        Frame::Ccn(CcnPacket::StatusResponse(r)) => {
            let _ = writeln!(s, "CCN StatusResponse");
            let _ = writeln!(s, "  name: {}", r.name);
            let _ = writeln!(s, "  code: {}", r.code);
        }
        Frame::Bundle(b) => {
            let _ = writeln!(s, "Bundle");
            let _ = writeln!(s, "  source:      {}", b.source);
            let _ = writeln!(s, "  destination: {}", b.destination);
            let _ = writeln!(s, "  created:     {}", b.creation_timestamp);
            let _ = writeln!(s, "  lifetime:    {} ms", b.lifetime_ms);
            let _ = writeln!(s, "  hop limit:   {}", b.hop_limit);
            if let Some(q) = &b.bpq {
                let _ = writeln!(s, "  BPQ {:?}", q.kind);
                let _ = writeln!(s, "    value:     {}", printable(&q.value));
                let _ = writeln!(s, "    original:  {}", q.original_creation_timestamp);
                let _ = writeln!(s, "    fragments: {}", q.fragment_count);
                for f in &q.fragments {
                    let _ = writeln!(s, "      offset {} length {}", f.offset, f.length);
                }
            }
            let _ = writeln!(s, "  payload:     {}", short(&b.payload));
            if let Ok(Frame::Ccn(inner)) = decode_frame(&b.payload) {
                for line in dump_frame(&Frame::Ccn(inner)).lines() {
                    let _ = writeln!(s, "    | {line}");
                }
            }
        }
    }
    s
}

/// Parses hex text, ignoring ASCII whitespace.
pub fn parse_hex(text: &str) -> Result<Vec<u8>, String> {
    let digits: Vec<u8> = text.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
    if !digits.len().is_multiple_of(2) {
        return Err("odd number of hex digits".into());
    }
    digits
        .chunks(2)
        .map(|pair| {
            let s = std::str::from_utf8(pair).map_err(|_| "non-ASCII input".to_string())?;
            u8::from_str_radix(s, 16).map_err(|_| format!("invalid hex pair {s:?}"))
        })
        .collect()
}

pub fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
