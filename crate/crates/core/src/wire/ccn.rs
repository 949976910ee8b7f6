//! TLV encoding of CCN packets.
//!
//! ```text
//! packet := type:u8  length:sdnv  field*
//! field  := length:sdnv  bytes
//! ```
//!
//! Type bytes are 1 (Interest), 2 (Data) and 3 (StatusResponse). Fields
//! appear in a fixed order per type. Integer fields hold a single SDNV; the
//! name field holds an SDNV component count followed by one
//! length-prefixed byte string per component.

use crate::names::Name;

use super::{put_bytes, sdnv_encode, sdnv_encode_into, Diagnostics, Reader, WireError};

/// "Temporarily unable to complete operation"; the only status this crate emits.
pub const STATUS_TEMPORARILY_UNAVAILABLE: u16 = 450;

const TYPE_INTEREST: u8 = 1;
const TYPE_DATA: u8 = 2;
const TYPE_STATUS: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interest {
    pub name: Name,
    pub nonce: [u8; 8],
    pub lifetime_ms: u64,
}

impl Interest {
    pub fn new(name: Name, nonce: [u8; 8], lifetime_ms: u64) -> Result<Self, WireError> {
        if lifetime_ms == 0 {
            return Err(WireError::ZeroLifetime);
        }
        Ok(Self { name, nonce, lifetime_ms })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Data {
    pub name: Name,
    pub payload: Vec<u8>,
    /// Zero means "use the caching node's default".
    pub freshness_ms: u64,
    /// Carried verbatim, never verified.
    pub signature: Vec<u8>,
}

impl Data {
    pub fn new(name: Name, payload: Vec<u8>, freshness_ms: u64) -> Self {
        Self {
            name,
            payload,
            freshness_ms,
            signature: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusResponse {
    pub name: Name,
    pub code: u16,
}

impl StatusResponse {
    pub fn new(name: Name, code: u16) -> Result<Self, WireError> {
        if !(100..=999).contains(&code) {
            return Err(WireError::BadStatusCode(code.into()));
        }
        Ok(Self { name, code })
    }

    pub fn unavailable(name: Name) -> Self {
        Self {
            name,
            code: STATUS_TEMPORARILY_UNAVAILABLE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CcnPacket {
    Interest(Interest),
    Data(Data),
    StatusResponse(StatusResponse),
}

impl CcnPacket {
    pub fn name(&self) -> &Name {
        match self {
            CcnPacket::Interest(i) => &i.name,
            CcnPacket::Data(d) => &d.name,
            CcnPacket::StatusResponse(s) => &s.name,
        }
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            CcnPacket::Interest(_) => "interest",
            CcnPacket::Data(_) => "data",
            CcnPacket::StatusResponse(_) => "status",
        }
    }
}

fn encode_name(name: &Name) -> Vec<u8> {
    let mut out = sdnv_encode(name.len() as u64);
    for c in name.components() {
        put_bytes(&mut out, c);
    }
    out
}

pub fn encode_ccn_packet(packet: &CcnPacket) -> Vec<u8> {
    let mut body = Vec::new();
    let ty = match packet {
        CcnPacket::Interest(i) => {
            put_bytes(&mut body, &encode_name(&i.name));
            put_bytes(&mut body, &i.nonce);
            put_bytes(&mut body, &sdnv_encode(i.lifetime_ms));
            TYPE_INTEREST
        }
        CcnPacket::Data(d) => {
            put_bytes(&mut body, &encode_name(&d.name));
            put_bytes(&mut body, &d.payload);
            put_bytes(&mut body, &sdnv_encode(d.freshness_ms));
            put_bytes(&mut body, &d.signature);
            TYPE_DATA
        }
        CcnPacket::StatusResponse(s) => {
            put_bytes(&mut body, &encode_name(&s.name));
            put_bytes(&mut body, &sdnv_encode(s.code.into()));
            TYPE_STATUS
        }
    };
    let mut out = Vec::with_capacity(body.len() + 4);
    out.push(ty);
    sdnv_encode_into(body.len() as u64, &mut out);
    out.extend_from_slice(&body);
    out
}

fn decode_name(field: &[u8], diag: &mut Diagnostics) -> Result<Name, WireError> {
    let mut r = Reader::new(field);
    let count = r.sdnv()?;
    // every component needs at least a length byte and one content byte
    if count > (r.remaining() / 2) as u64 {
        return Err(WireError::LengthOverrun {
            declared: count,
            available: r.remaining(),
        });
    }
    let mut components = Vec::with_capacity(count as usize);
    for _ in 0..count {
        components.push(r.bytes()?.to_vec());
    }
    let name = Name::from_components(components)?;
    r.finish()?;
    diag.non_minimal_sdnv |= r.diagnostics.non_minimal_sdnv;
    Ok(name)
}

fn decode_uint(field: &[u8], diag: &mut Diagnostics) -> Result<u64, WireError> {
    let mut r = Reader::new(field);
    let v = r.sdnv()?;
    r.finish()?;
    diag.non_minimal_sdnv |= r.diagnostics.non_minimal_sdnv;
    Ok(v)
}

pub fn decode_ccn_packet(bytes: &[u8]) -> Result<CcnPacket, WireError> {
    decode_ccn_packet_with_diagnostics(bytes).map(|(p, _)| p)
}

pub fn decode_ccn_packet_with_diagnostics(bytes: &[u8]) -> Result<(CcnPacket, Diagnostics), WireError> {
    let mut outer = Reader::new(bytes);
    let ty = outer.u8()?;
    if !matches!(ty, TYPE_INTEREST | TYPE_DATA | TYPE_STATUS) {
        return Err(WireError::UnknownType(ty));
    }
    let len = outer.length()?;
    let body = outer.take(len)?;
    outer.finish()?;
    let mut diag = outer.diagnostics;

    let mut r = Reader::new(body);
    let name = decode_name(r.bytes()?, &mut diag)?;
    let packet = match ty {
        TYPE_INTEREST => {
            let nonce_field = r.bytes()?;
            let nonce: [u8; 8] = nonce_field
                .try_into()
                .map_err(|_| WireError::BadNonce(nonce_field.len()))?;
            let lifetime = decode_uint(r.bytes()?, &mut diag)?;
            CcnPacket::Interest(Interest::new(name, nonce, lifetime)?)
        }
        TYPE_DATA => {
            let payload = r.bytes()?.to_vec();
            let freshness_ms = decode_uint(r.bytes()?, &mut diag)?;
            let signature = r.bytes()?.to_vec();
            CcnPacket::Data(Data {
                name,
                payload,
                freshness_ms,
                signature,
            })
        }
        _ => {
            let code = decode_uint(r.bytes()?, &mut diag)?;
            let code = u16::try_from(code).map_err(|_| WireError::BadStatusCode(code))?;
            CcnPacket::StatusResponse(StatusResponse::new(name, code)?)
        }
    };
    r.finish()?;
    diag.non_minimal_sdnv |= r.diagnostics.non_minimal_sdnv;
    Ok((packet, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::parse_name;

    fn n(s: &str) -> Name {
        parse_name(s).unwrap()
    }

    #[test]
    fn interest_round_trip() {
        let p = CcnPacket::Interest(Interest::new(n("/a"), [0; 8], 4000).unwrap());
        assert_eq!(decode_ccn_packet(&encode_ccn_packet(&p)).unwrap(), p);
    }

    #[test]
    fn data_round_trip() {
        let p = CcnPacket::Data(Data::new(n("/a"), b"x".to_vec(), 0));
        assert_eq!(decode_ccn_packet(&encode_ccn_packet(&p)).unwrap(), p);
    }

    #[test]
    fn exact_interest_layout() {
        let p = CcnPacket::Interest(Interest::new(n("/a"), [1, 2, 3, 4, 5, 6, 7, 8], 128).unwrap());
        let expected = [
            0x01, 0x10, // type, body length 16
            0x03, 0x01, 0x01, b'a', // name field: 1 component "a"
            0x08, 1, 2, 3, 4, 5, 6, 7, 8, // nonce
            0x02, 0x81, 0x00, // lifetime 128
        ];
        assert_eq!(encode_ccn_packet(&p), expected);
    }

    #[test]
    fn status_round_trip_and_code_check() {
        let p = CcnPacket::StatusResponse(StatusResponse::unavailable(n("/pub")));
        assert_eq!(decode_ccn_packet(&encode_ccn_packet(&p)).unwrap(), p);
        assert!(StatusResponse::new(n("/"), 42).is_err());
        let mut bad = encode_ccn_packet(&p);
        // rewrite the code field (last 3 bytes: len 2, 0x83 0x42) to 5
        let len = bad.len();
        bad[len - 3..].copy_from_slice(&[0x01, 0x05, 0x00]);
        bad.truncate(len - 1);
        bad[1] -= 1;
        assert_eq!(decode_ccn_packet(&bad), Err(WireError::BadStatusCode(5)));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(decode_ccn_packet(&[0xff]), Err(WireError::UnknownType(0xff)));
        assert_eq!(decode_ccn_packet(&[]), Err(WireError::Truncated));
        assert!(matches!(decode_ccn_packet(&[1, 50, 0]), Err(WireError::LengthOverrun { .. })));
        let p = CcnPacket::Data(Data::new(n("/a"), vec![], 0));
        let mut bytes = encode_ccn_packet(&p);
        bytes.push(0);
        assert_eq!(decode_ccn_packet(&bytes), Err(WireError::TrailingBytes(1)));
    }

    #[test]
    fn zero_lifetime_rejected() {
        assert_eq!(Interest::new(n("/a"), [0; 8], 0), Err(WireError::ZeroLifetime));
        let good = encode_ccn_packet(&CcnPacket::Interest(Interest::new(n("/a"), [0; 8], 1).unwrap()));
        let mut bad = good.clone();
        *bad.last_mut().unwrap() = 0;
        assert_eq!(decode_ccn_packet(&bad), Err(WireError::ZeroLifetime));
    }

    #[test]
    fn empty_component_rejected() {
        // name field declaring one zero-length component
        let bytes = [0x02, 0x08, 0x03, 0x01, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00];
        assert!(matches!(decode_ccn_packet(&bytes), Err(WireError::BadName(_))));
    }

    #[test]
    fn non_minimal_lifetime_is_flagged() {
        let bytes = [0x01, 0x10, 0x03, 0x01, 0x01, b'a', 0x08, 0, 0, 0, 0, 0, 0, 0, 0, 0x02, 0x80, 0x05];
        let (p, diag) = decode_ccn_packet_with_diagnostics(&bytes).unwrap();
        assert!(diag.non_minimal_sdnv);
        match p {
            CcnPacket::Interest(i) => assert_eq!(i.lifetime_ms, 5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
