//! The CCN/DTN integration layer: Interest/Data to BPQ bundle conversion,
//! the common repository, status responses, and bookkeeping for queries
//! injected into the CCN side.

use std::collections::BTreeMap;

use crate::ccn::{longest_extension, FaceId, Millis};
use crate::names::{bpq_value_to_name, name_to_bpq_value, Eid, Name};
use crate::wire::{
    decode_ccn_packet, encode_ccn_packet, BpqBlock, BpqKind, Bundle, BundleId, CcnPacket, CreationTimestamp, Data,
    Interest, StatusResponse,
};

pub const DEFAULT_LIFETIME_MULTIPLIER: u64 = 100;
pub const DEFAULT_BACKOFF_FACTOR: u64 = 4;
pub const DEFAULT_REPOSITORY_CAPACITY: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GatewayConfig {
    /// Query bundle lifetime is this multiple of the Interest lifetime.
    pub lifetime_multiplier_k: u64,
    pub default_hop_limit: u64,
    pub pseudo_destination: Eid,
    pub status_response_enabled: bool,
    /// Consumers multiply their re-expression interval by this on a 450.
    pub backoff_factor: u64,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            lifetime_multiplier_k: DEFAULT_LIFETIME_MULTIPLIER,
            default_hop_limit: crate::dtn::DEFAULT_HOP_LIMIT,
            pseudo_destination: Eid::any(),
            status_response_enabled: true,
            backoff_factor: DEFAULT_BACKOFF_FACTOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoEntry {
    pub data: Data,
    pub expires_at: Millis,
}

/// Single store backing both the CCN and the bundle view of content, so
/// each name has exactly one expiry.
#[derive(Debug, Clone)]
pub struct Repository {
    entries: BTreeMap<Name, RepoEntry>,
    capacity: usize,
}

impl Default for Repository {
    fn default() -> Self {
        Self::new(DEFAULT_REPOSITORY_CAPACITY)
    }
}

impl Repository {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: BTreeMap::new(),
            capacity: capacity.max(1),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &RepoEntry> {
        self.entries.values()
    }

    /// Inserts or replaces; a later expiry never shrinks to an earlier one.
    /// When full, the entry expiring soonest makes room.
    pub fn put(&mut self, data: Data, expires_at: Millis) {
        if let Some(existing) = self.entries.get_mut(&data.name) {
            existing.expires_at = existing.expires_at.max(expires_at);
            existing.data = data;
            return;
        }
        if self.entries.len() >= self.capacity {
            let victim = self
                .entries
                .values()
                .min_by(|a, b| a.expires_at.cmp(&b.expires_at).then_with(|| a.data.name.cmp(&b.data.name)))
                .map(|e| e.data.name.clone());
            if let Some(victim) = victim {
                self.entries.remove(&victim);
            }
        }
        self.entries.insert(data.name.clone(), RepoEntry { data, expires_at });
    }

    /// Longest live entry whose name extends `name`.
    pub fn get(&self, name: &Name, now: Millis) -> Option<&Data> {
        longest_extension(&self.entries, name, |e| now < e.expires_at).map(|(_, e)| &e.data)
    }

    pub fn sweep(&mut self, now: Millis) -> Vec<Name> {
        let stale: Vec<Name> = self
            .entries
            .values()
            .filter(|e| now >= e.expires_at)
            .map(|e| e.data.name.clone())
            .collect();
        for name in &stale {
            self.entries.remove(name);
        }
        stale
    }
}

pub fn interest_to_bpq_query(cfg: &GatewayConfig, i: &Interest, self_eid: &Eid, ts: CreationTimestamp) -> Bundle {
    Bundle {
        source: self_eid.clone(),
        destination: cfg.pseudo_destination.clone(),
        creation_timestamp: ts,
        lifetime_ms: i.lifetime_ms.saturating_mul(cfg.lifetime_multiplier_k),
        hop_limit: cfg.default_hop_limit,
        payload: encode_ccn_packet(&CcnPacket::Interest(i.clone())),
        bpq: Some(BpqBlock::whole(BpqKind::Query, name_to_bpq_value(&i.name), ts)),
    }
}

pub fn publish_prefix(
    cfg: &GatewayConfig,
    prefix: &Name,
    content: Option<&Data>,
    self_eid: &Eid,
    ts: CreationTimestamp,
    interest_lifetime_ms: Millis,
) -> Bundle {
    Bundle {
        source: self_eid.clone(),
        destination: cfg.pseudo_destination.clone(),
        creation_timestamp: ts,
        lifetime_ms: interest_lifetime_ms.saturating_mul(cfg.lifetime_multiplier_k),
        hop_limit: cfg.default_hop_limit,
        payload: content
            .map(|d| encode_ccn_packet(&CcnPacket::Data(d.clone())))
            .unwrap_or_default(),
        bpq: Some(BpqBlock::whole(BpqKind::Publish, name_to_bpq_value(prefix), ts)),
    }
}

pub fn emit_status_response(cfg: &GatewayConfig, face: FaceId, name: &Name) -> Option<(FaceId, CcnPacket)> {
    cfg.status_response_enabled
        .then(|| (face, CcnPacket::StatusResponse(StatusResponse::unavailable(name.clone()))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatewayDrop {
    MissingBlock,
    BadValue,
    PayloadDecode,
    WrongPacketType,
    NameMismatch,
}

impl GatewayDrop {
    pub fn as_str(self) -> &'static str {
        match self {
            GatewayDrop::MissingBlock => "missing_bpq_block",
            GatewayDrop::BadValue => "bad_bpq_value",
            GatewayDrop::PayloadDecode => "payload_decode",
            GatewayDrop::WrongPacketType => "wrong_packet_type",
            GatewayDrop::NameMismatch => "name_mismatch",
        }
    }
}

fn bpq_name(bundle: &Bundle) -> Result<Name, GatewayDrop> {
    let bpq = bundle.bpq.as_ref().ok_or(GatewayDrop::MissingBlock)?;
    bpq_value_to_name(&bpq.value).map_err(|_| GatewayDrop::BadValue)
}

/// Interest carried by a Query bundle; its name must equal the BPQ value.
pub fn query_interest(bundle: &Bundle) -> Result<Interest, GatewayDrop> {
    let value = bpq_name(bundle)?;
    match decode_ccn_packet(&bundle.payload) {
        Ok(CcnPacket::Interest(i)) if i.name == value => Ok(i),
        Ok(CcnPacket::Interest(_)) => Err(GatewayDrop::NameMismatch),
        Ok(_) => Err(GatewayDrop::WrongPacketType),
        Err(_) => Err(GatewayDrop::PayloadDecode),
    }
}

/// Data carried by a Response or Publish bundle; its name must extend the
/// BPQ value. `Ok(None)` for an announcement without content.
pub fn carried_data(bundle: &Bundle) -> Result<Option<Data>, GatewayDrop> {
    let value = bpq_name(bundle)?;
    if bundle.payload.is_empty() {
        return Ok(None);
    }
    match decode_ccn_packet(&bundle.payload) {
        Ok(CcnPacket::Data(d)) if value.is_prefix_of(&d.name) => Ok(Some(d)),
        Ok(CcnPacket::Data(_)) => Err(GatewayDrop::NameMismatch),
        Ok(_) => Err(GatewayDrop::WrongPacketType),
        Err(_) => Err(GatewayDrop::PayloadDecode),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingQuery {
    pub query: Bundle,
    pub name: Name,
}

/// Per-node gateway state.
#[derive(Debug, Clone)]
pub struct Gateway {
    pub config: GatewayConfig,
    pub repo: Repository,
    pub bundle_face: FaceId,
    /// DTN queries injected into CCN, awaiting Data on the bundle face.
    pending: BTreeMap<BundleId, PendingQuery>,
    /// This node's own live queries, one per name.
    outstanding: BTreeMap<Name, (BundleId, Millis)>,
}

impl Gateway {
    pub fn new(config: GatewayConfig, bundle_face: FaceId) -> Self {
        Self {
            config,
            repo: Repository::default(),
            bundle_face,
            pending: BTreeMap::new(),
            outstanding: BTreeMap::new(),
        }
    }

    pub fn add_pending(&mut self, query: Bundle, name: Name) {
        self.pending.insert(query.id(), PendingQuery { query, name });
    }

    pub fn pending(&self) -> impl Iterator<Item = &PendingQuery> {
        self.pending.values()
    }

    /// Removes and returns live pending queries answered by data named `name`.
    pub fn take_pending_for(&mut self, name: &Name, now: Millis) -> Vec<Bundle> {
        self.pending.retain(|_, p| !p.query.is_expired(now));
        let ids: Vec<BundleId> = self
            .pending
            .iter()
            .filter(|(_, p)| p.name.is_prefix_of(name))
            .map(|(id, _)| id.clone())
            .collect();
        ids.into_iter()
            .filter_map(|id| self.pending.remove(&id).map(|p| p.query))
            .collect()
    }

    /// A live query this node already sent for exactly `name`, if any.
    pub fn outstanding_query(&self, name: &Name, now: Millis) -> Option<&BundleId> {
        self.outstanding
            .get(name)
            .filter(|(_, expires)| now < *expires)
            .map(|(id, _)| id)
    }

    pub fn record_outstanding(&mut self, name: Name, query: &Bundle) {
        self.outstanding.insert(name, (query.id(), query.expires_at()));
    }

    pub fn clear_outstanding(&mut self, name: &Name) {
        self.outstanding.remove(name);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccn::FaceKind;
    use crate::names::parse_name;

    fn n(s: &str) -> Name {
        parse_name(s).unwrap()
    }

    fn data(name: &str) -> Data {
        Data::new(n(name), name.as_bytes().to_vec(), 0)
    }

    #[test]
    fn query_conversion() {
        let cfg = GatewayConfig::default();
        let i = Interest::new(n("/pub/doc"), [3; 8], 4000).unwrap();
        let me = Eid::for_node("E");
        let q = interest_to_bpq_query(&cfg, &i, &me, CreationTimestamp::new(7, 0));
        assert_eq!(q.lifetime_ms, 400_000);
        assert_eq!(q.destination, Eid::any());
        assert_eq!(q.hop_limit, 8);
        let bpq = q.bpq.as_ref().unwrap();
        assert_eq!(bpq.kind, BpqKind::Query);
        assert_eq!(bpq.value, b"/pub/doc");
        assert_eq!(bpq.fragment_count, 0);
        assert_eq!(query_interest(&q).unwrap(), i);

        let q2 = interest_to_bpq_query(&cfg, &i, &me, CreationTimestamp::new(7, 1));
        assert_ne!(q.id(), q2.id());
        assert!(q.lifetime_ms >= i.lifetime_ms);
    }

    #[test]
    fn publish_bundles() {
        let cfg = GatewayConfig::default();
        let me = Eid::for_node("P");
        let ts = CreationTimestamp::new(0, 0);
        let bare = publish_prefix(&cfg, &n("/pub"), None, &me, ts, 4000);
        assert!(bare.payload.is_empty());
        assert_eq!(bare.bpq_kind(), Some(BpqKind::Publish));
        assert_eq!(bare.lifetime_ms, 400_000);
        assert_eq!(carried_data(&bare), Ok(None));

        let d = data("/pub/doc");
        let full = publish_prefix(&cfg, &n("/pub/doc"), Some(&d), &me, ts, 4000);
        assert_eq!(carried_data(&full), Ok(Some(d)));
    }

    #[test]
    fn mismatched_payload_rejected() {
        let cfg = GatewayConfig::default();
        let me = Eid::for_node("P");
        let d = data("/other");
        let b = publish_prefix(&cfg, &n("/pub"), Some(&d), &me, CreationTimestamp::default(), 4000);
        assert_eq!(carried_data(&b), Err(GatewayDrop::NameMismatch));
        let mut garbage = b.clone();
        garbage.payload = vec![0xff, 0x00];
        assert_eq!(carried_data(&garbage), Err(GatewayDrop::PayloadDecode));
    }

    #[test]
    fn status_gate() {
        let face = FaceId { id: 2, kind: FaceKind::Link };
        let mut cfg = GatewayConfig::default();
        let (f, p) = emit_status_response(&cfg, face, &n("/pub")).unwrap();
        assert_eq!(f, face);
        assert!(matches!(p, CcnPacket::StatusResponse(s) if s.code == 450));
        cfg.status_response_enabled = false;
        assert!(emit_status_response(&cfg, face, &n("/pub")).is_none());
    }

    #[test]
    fn repository_prefix_lookup() {
        let mut r = Repository::default();
        r.put(data("/pub/doc"), 100);
        assert_eq!(r.get(&n("/pub"), 0).unwrap().name, n("/pub/doc"));
        assert!(r.get(&n("/pub"), 100).is_none());
        assert!(r.get(&n("/other"), 0).is_none());
    }

    #[test]
    fn repository_longest_match_against_scan() {
        let mut r = Repository::default();
        let names = ["/pub/a", "/pub/a/v1", "/pub/ab", "/pub/a/v1/x", "/q"];
        for (i, s) in names.iter().enumerate() {
            r.put(data(s), if i == 3 { 5 } else { 100 });
        }
        for now in [0, 10] {
            for query in ["/pub/a", "/pub", "/", "/pub/a/v1", "/zzz"] {
                let q = n(query);
                // full scan over live entries
                let oracle = names
                    .iter()
                    .enumerate()
                    .filter(|(i, s)| q.is_prefix_of(&n(s)) && now < if *i == 3 { 5 } else { 100 })
                    .map(|(_, s)| n(s))
                    .max_by_key(|m| m.len());
                assert_eq!(r.get(&q, now).map(|d| d.name.clone()), oracle, "{query} at {now}");
            }
        }
        assert_eq!(r.get(&n("/pub/a"), 0).unwrap().name, n("/pub/a/v1/x"));
    }

    #[test]
    fn repository_capacity_evicts_soonest() {
        let mut r = Repository::new(2);
        r.put(data("/a"), 50);
        r.put(data("/b"), 10);
        r.put(data("/c"), 70);
        assert_eq!(r.len(), 2);
        assert!(r.get(&n("/b"), 0).is_none());
        assert!(r.get(&n("/a"), 0).is_some());
    }

    #[test]
    fn pending_queries() {
        let cfg = GatewayConfig::default();
        let mut gw = Gateway::new(cfg.clone(), FaceId { id: 0, kind: FaceKind::BundleDaemon });
        let i = Interest::new(n("/pub"), [1; 8], 10).unwrap();
        let q = interest_to_bpq_query(&cfg, &i, &Eid::for_node("H"), CreationTimestamp::default());
        gw.add_pending(q.clone(), n("/pub"));
        assert!(gw.take_pending_for(&n("/other"), 0).is_empty());
        assert_eq!(gw.take_pending_for(&n("/pub/doc"), 0), vec![q]);
        assert!(gw.take_pending_for(&n("/pub/doc"), 0).is_empty());
    }
}
