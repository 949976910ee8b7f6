//! Bundle encoding with an optional BPQ extension block.
//!
//! ```text
//! bundle   := version:u8(0x06)
//!             source:bytes  destination:bytes      (EID text, length-prefixed)
//!             created_ms:sdnv  created_seq:sdnv
//!             lifetime_ms:sdnv  hop_limit:sdnv
//!             bpq_flag:u8 (0 | 1)  [bpq]
//!             payload:bytes
//! bpq      := kind:u8  orig_ms:sdnv  orig_seq:sdnv  value:bytes
//!             fragment_count:sdnv  (offset:sdnv length:sdnv){fragment_count}
//! bytes    := length:sdnv  octets
//! ```

use std::fmt;

use crate::names::{parse_eid, Eid};

use super::{put_bytes, sdnv_encode_into, Diagnostics, Reader, WireError};

pub const BUNDLE_VERSION: u8 = 0x06;

/// Creation time plus a per-node sequence number disambiguating bundles
/// created in the same millisecond.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CreationTimestamp {
    pub time_ms: u64,
    pub seq: u64,
}

impl CreationTimestamp {
    pub fn new(time_ms: u64, seq: u64) -> Self {
        Self { time_ms, seq }
    }
}

impl fmt::Display for CreationTimestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.time_ms, self.seq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BpqKind {
    Query = 0,
    Response = 1,
    ResponseDoNotFragment = 2,
    Publish = 3,
}

impl BpqKind {
    pub fn from_byte(b: u8) -> Result<Self, WireError> {
        Ok(match b {
            0 => BpqKind::Query,
            1 => BpqKind::Response,
            2 => BpqKind::ResponseDoNotFragment,
            3 => BpqKind::Publish,
            other => return Err(WireError::UnknownBpqKind(other)),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BpqKind::Query => "query",
            BpqKind::Response => "response",
            BpqKind::ResponseDoNotFragment => "response_do_not_fragment",
            BpqKind::Publish => "publish",
        }
    }

    pub fn is_response(self) -> bool {
        matches!(self, BpqKind::Response | BpqKind::ResponseDoNotFragment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fragment {
    pub offset: u64,
    pub length: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpqBlock {
    pub kind: BpqKind,
    pub value: Vec<u8>,
    pub original_creation_timestamp: CreationTimestamp,
    pub fragment_count: u64,
    pub fragments: Vec<Fragment>,
}

impl BpqBlock {
    /// A block describing a complete (unfragmented) bundle.
    pub fn whole(kind: BpqKind, value: Vec<u8>, original: CreationTimestamp) -> Self {
        Self {
            kind,
            value,
            original_creation_timestamp: original,
            fragment_count: 0,
            fragments: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.fragment_count == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    pub source: Eid,
    pub destination: Eid,
    pub creation_timestamp: CreationTimestamp,
    pub lifetime_ms: u64,
    pub hop_limit: u64,
    pub payload: Vec<u8>,
    pub bpq: Option<BpqBlock>,
}

/// `(source, creation_timestamp)`: unique per bundle within a run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BundleId {
    pub source: Eid,
    pub created: CreationTimestamp,
}

impl fmt::Display for BundleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.source, self.created)
    }
}

impl Bundle {
    pub fn id(&self) -> BundleId {
        BundleId {
            source: self.source.clone(),
            created: self.creation_timestamp,
        }
    }

    /// First instant at which the bundle is expired.
    pub fn expires_at(&self) -> u64 {
        self.creation_timestamp.time_ms.saturating_add(self.lifetime_ms)
    }

    pub fn is_expired(&self, now: u64) -> bool {
        now >= self.expires_at()
    }

    pub fn bpq_kind(&self) -> Option<BpqKind> {
        self.bpq.as_ref().map(|b| b.kind)
    }
}

pub fn encode_bundle(bundle: &Bundle) -> Result<Vec<u8>, WireError> {
    let mut out = vec![BUNDLE_VERSION];
    put_bytes(&mut out, bundle.source.to_string().as_bytes());
    put_bytes(&mut out, bundle.destination.to_string().as_bytes());
    sdnv_encode_into(bundle.creation_timestamp.time_ms, &mut out);
    sdnv_encode_into(bundle.creation_timestamp.seq, &mut out);
    sdnv_encode_into(bundle.lifetime_ms, &mut out);
    sdnv_encode_into(bundle.hop_limit, &mut out);
    match &bundle.bpq {
        None => out.push(0),
        Some(bpq) => {
            if bpq.fragment_count != bpq.fragments.len() as u64 {
                return Err(WireError::FragmentMismatch {
                    count: bpq.fragment_count,
                    listed: bpq.fragments.len(),
                });
            }
            out.push(1);
            out.push(bpq.kind as u8);
            sdnv_encode_into(bpq.original_creation_timestamp.time_ms, &mut out);
            sdnv_encode_into(bpq.original_creation_timestamp.seq, &mut out);
            put_bytes(&mut out, &bpq.value);
            sdnv_encode_into(bpq.fragment_count, &mut out);
            for f in &bpq.fragments {
                sdnv_encode_into(f.offset, &mut out);
                sdnv_encode_into(f.length, &mut out);
            }
        }
    }
    put_bytes(&mut out, &bundle.payload);
    Ok(out)
}

fn read_eid(r: &mut Reader<'_>) -> Result<Eid, WireError> {
    let text = std::str::from_utf8(r.bytes()?).map_err(|_| WireError::EidNotUtf8)?;
    Ok(parse_eid(text)?)
}

pub fn decode_bundle(bytes: &[u8]) -> Result<Bundle, WireError> {
    decode_bundle_with_diagnostics(bytes).map(|(b, _)| b)
}

pub fn decode_bundle_with_diagnostics(bytes: &[u8]) -> Result<(Bundle, Diagnostics), WireError> {
    let mut r = Reader::new(bytes);
    let version = r.u8()?;
    if version != BUNDLE_VERSION {
        return Err(WireError::UnknownType(version));
    }
    let source = read_eid(&mut r)?;
    let destination = read_eid(&mut r)?;
    let creation_timestamp = CreationTimestamp::new(r.sdnv()?, r.sdnv()?);
    let lifetime_ms = r.sdnv()?;
    let hop_limit = r.sdnv()?;
    let bpq = match r.u8()? {
        0 => None,
        1 => {
            let kind = BpqKind::from_byte(r.u8()?)?;
            let original = CreationTimestamp::new(r.sdnv()?, r.sdnv()?);
            let value = r.bytes()?.to_vec();
            let fragment_count = r.sdnv()?;
            // each fragment takes at least two bytes
            if fragment_count > (r.remaining() / 2) as u64 {
                return Err(WireError::LengthOverrun {
                    declared: fragment_count,
                    available: r.remaining(),
                });
            }
            let mut fragments = Vec::with_capacity(fragment_count as usize);
            for _ in 0..fragment_count {
                fragments.push(Fragment {
                    offset: r.sdnv()?,
                    length: r.sdnv()?,
                });
            }
            Some(BpqBlock {
                kind,
                value,
                original_creation_timestamp: original,
                fragment_count,
                fragments,
            })
        }
        flag => return Err(WireError::BadPresenceFlag(flag)),
    };
    let payload = r.bytes()?.to_vec();
    r.finish()?;
    Ok((
        Bundle {
            source,
            destination,
            creation_timestamp,
            lifetime_ms,
            hop_limit,
            payload,
            bpq,
        },
        r.diagnostics,
    ))
}
