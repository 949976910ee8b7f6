//! The bundle node: persistent cache, BPQ matching, epidemic forwarding on
//! contact, expiry, and hop-limit enforcement.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ccn::Millis;
use crate::names::Eid;
use crate::wire::{BpqBlock, BpqKind, Bundle, BundleId, CreationTimestamp};

pub const DEFAULT_HOP_LIMIT: u64 = 8;

/// Identifier of a simulated node; also the authority part of its EID.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Option<Self> {
        let id = id.into();
        let ok = !id.is_empty() && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
        ok.then_some(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn eid(&self) -> Eid {
        Eid::for_node(&self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DtnConfig {
    /// Hop limit stamped on bundles this node creates.
    pub default_hop_limit: u64,
}

impl Default for DtnConfig {
    fn default() -> Self {
        Self {
            default_hop_limit: DEFAULT_HOP_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleCacheEntry {
    pub bundle: Bundle,
    pub received_at: Millis,
    pub forwarded_to: BTreeSet<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    Duplicate,
    Expired,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::Duplicate => "duplicate",
            DropReason::Expired => "expired",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DtnAction {
    Stored(BundleId),
    Dropped { bundle: BundleId, reason: DropReason },
    DeliverToGateway(Bundle),
    /// A cached bundle answered a query; `response` is already stored
    /// unless it is addressed to this node.
    Responded { query: BundleId, matched: BundleId, response: Bundle },
    /// A response for one of this node's own queries arrived, so the query
    /// is no longer carried.
    QueryRetired(BundleId),
}

/// Finds the newest complete response-like bundle whose value equals the
/// query value. Publish bundles count only when they carry content.
pub fn bpq_match<'a>(
    cache: impl IntoIterator<Item = &'a Bundle>,
    query: &BpqBlock,
    now: Millis,
) -> Option<&'a Bundle> {
    cache
        .into_iter()
        .filter(|b| !b.is_expired(now))
        .filter(|b| match &b.bpq {
            Some(bpq) => {
                let kind_ok = match bpq.kind {
                    BpqKind::Response | BpqKind::ResponseDoNotFragment => true,
                    BpqKind::Publish => !b.payload.is_empty(),
                    BpqKind::Query => false,
                };
                kind_ok && bpq.is_complete() && bpq.value == query.value
            }
            None => false,
        })
        .max_by(|a, b| {
            a.creation_timestamp
                .cmp(&b.creation_timestamp)
                .then_with(|| b.source.cmp(&a.source))
        })
}

#[derive(Debug, Clone)]
pub struct DtnNode {
    id: NodeId,
    eid: Eid,
    config: DtnConfig,
    has_gateway: bool,
    cache: BTreeMap<BundleId, BundleCacheEntry>,
    seen: BTreeSet<BundleId>,
    answered: BTreeSet<BundleId>,
    next_seq: u64,
}

impl DtnNode {
    pub fn new(id: NodeId, config: DtnConfig, has_gateway: bool) -> Self {
        Self {
            eid: id.eid(),
            id,
            config,
            has_gateway,
            cache: BTreeMap::new(),
            seen: BTreeSet::new(),
            answered: BTreeSet::new(),
            next_seq: 0,
        }
    }

    pub fn id(&self) -> &NodeId {
        &self.id
    }

    pub fn eid(&self) -> &Eid {
        &self.eid
    }

    pub fn config(&self) -> &DtnConfig {
        &self.config
    }

    /// Per-node monotonic creation timestamp.
    pub fn next_timestamp(&mut self, now: Millis) -> CreationTimestamp {
        let ts = CreationTimestamp::new(now, self.next_seq);
        self.next_seq += 1;
        ts
    }

    pub fn cache(&self) -> impl Iterator<Item = &BundleCacheEntry> {
        self.cache.values()
    }

    pub fn cached(&self, id: &BundleId) -> Option<&BundleCacheEntry> {
        self.cache.get(id)
    }

    pub fn has_answered(&self, query: &BundleId) -> bool {
        self.answered.contains(query)
    }

    /// True if the cache holds a complete, unexpired bundle with content
    /// for the given BPQ value.
    pub fn holds_content(&self, value: &[u8], now: Millis) -> bool {
        let probe = BpqBlock::whole(BpqKind::Query, value.to_vec(), CreationTimestamp::default());
        bpq_match(self.cache.values().map(|e| &e.bundle), &probe, now).is_some()
    }

    fn store(&mut self, bundle: Bundle, from: Option<&NodeId>, now: Millis) -> BundleId {
        let id = bundle.id();
        self.seen.insert(id.clone());
        self.cache.insert(
            id.clone(),
            BundleCacheEntry {
                bundle,
                received_at: now,
                forwarded_to: from.into_iter().cloned().collect(),
            },
        );
        id
    }

    /// Builds the response this node sends when `matched` answers `query`.
    pub fn make_response(&mut self, query: &Bundle, payload: Vec<u8>, kind: BpqKind, now: Millis) -> Bundle {
        let value = query.bpq.as_ref().map(|b| b.value.clone()).unwrap_or_default();
        Bundle {
            source: self.eid.clone(),
            destination: query.source.clone(),
            creation_timestamp: self.next_timestamp(now),
            lifetime_ms: query.lifetime_ms,
            hop_limit: self.config.default_hop_limit,
            payload,
            bpq: Some(BpqBlock::whole(kind, value, query.creation_timestamp)),
        }
    }

    /// Records that this node answered `query` by some route; it is never
    /// carried or forwarded again.
    pub fn mark_answered(&mut self, query: &BundleId) {
        self.answered.insert(query.clone());
        self.seen.insert(query.clone());
        self.cache.remove(query);
    }

    /// Stores a response produced outside the cache-matching path (e.g. by
    /// the gateway) so it is carried like any other bundle.
    pub fn originate(&mut self, bundle: Bundle, now: Millis) -> Vec<DtnAction> {
        self.receive_bundle(None, bundle, now)
    }

    /// `from` is `None` for bundles created on this node.
    pub fn receive_bundle(&mut self, from: Option<&NodeId>, bundle: Bundle, now: Millis) -> Vec<DtnAction> {
        let id = bundle.id();
        if self.seen.contains(&id) {
            return vec![DtnAction::Dropped {
                bundle: id,
                reason: DropReason::Duplicate,
            }];
        }
        self.seen.insert(id.clone());
        if bundle.is_expired(now) {
            return vec![DtnAction::Dropped {
                bundle: id,
                reason: DropReason::Expired,
            }];
        }
        let remote = from.is_some();
        let mut actions = Vec::new();
        match bundle.bpq_kind() {
            Some(BpqKind::Query) => {
                let query = bundle.bpq.as_ref().expect("query kind implies block");
                let hit = bpq_match(self.cache.values().map(|e| &e.bundle), query, now)
                    .map(|m| (m.id(), m.payload.clone(), m.bpq_kind()));
                if let Some((matched, payload, matched_kind)) = hit {
                    let kind = match matched_kind {
                        Some(BpqKind::ResponseDoNotFragment) => BpqKind::ResponseDoNotFragment,
                        _ => BpqKind::Response,
                    };
                    let response = self.make_response(&bundle, payload, kind, now);
                    self.answered.insert(id.clone());
                    if response.destination != self.eid {
                        self.store(response.clone(), None, now);
                    }
                    actions.push(DtnAction::Responded {
                        query: id,
                        matched,
                        response,
                    });
                    return actions;
                }
                actions.push(DtnAction::Stored(self.store(bundle.clone(), from, now)));
                if remote && self.has_gateway {
                    actions.push(DtnAction::DeliverToGateway(bundle));
                }
            }
            Some(kind) => {
                if kind.is_response() && bundle.destination == self.eid {
                    let original = bundle.bpq.as_ref().map(|b| b.original_creation_timestamp);
                    if let Some(created) = original {
                        let own = BundleId {
                            source: self.eid.clone(),
                            created,
                        };
                        if self.cache.remove(&own).is_some() {
                            actions.push(DtnAction::QueryRetired(own));
                        }
                    }
                }
                actions.push(DtnAction::Stored(self.store(bundle.clone(), from, now)));
                if remote && self.has_gateway {
                    actions.push(DtnAction::DeliverToGateway(bundle));
                }
            }
            None => {
                let for_us = bundle.destination == self.eid;
                actions.push(DtnAction::Stored(self.store(bundle.clone(), from, now)));
                if remote && for_us && self.has_gateway {
                    actions.push(DtnAction::DeliverToGateway(bundle));
                }
            }
        }
        actions
    }

    /// Epidemic push toward a neighbor: everything live, hop-eligible and
    /// not yet sent there. Bundles addressed to the neighbor go first, then
    /// by creation time. Returned copies already carry the decremented
    /// hop limit.
    pub fn on_contact_up(&mut self, neighbor: &NodeId, now: Millis) -> Vec<Bundle> {
        let neighbor_eid = neighbor.eid();
        let mut batch: Vec<(bool, CreationTimestamp, BundleId)> = self
            .cache
            .values()
            .filter(|e| !e.bundle.is_expired(now) && e.bundle.hop_limit > 0 && !e.forwarded_to.contains(neighbor))
            .map(|e| {
                (
                    e.bundle.destination != neighbor_eid,
                    e.bundle.creation_timestamp,
                    e.bundle.id(),
                )
            })
            .collect();
        batch.sort();
        batch
            .into_iter()
            .filter_map(|(_, _, id)| {
                let entry = self.cache.get_mut(&id)?;
                entry.forwarded_to.insert(neighbor.clone());
                let mut copy = entry.bundle.clone();
                copy.hop_limit -= 1;
                Some(copy)
            })
            .collect()
    }

    pub fn sweep_expired(&mut self, now: Millis) -> Vec<BundleId> {
        let expired: Vec<BundleId> = self
            .cache
            .values()
            .filter(|e| e.bundle.is_expired(now))
            .map(|e| e.bundle.id())
            .collect();
        for id in &expired {
            self.cache.remove(id);
        }
        expired
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: &str) -> DtnNode {
        DtnNode::new(NodeId::new(id).unwrap(), DtnConfig::default(), false)
    }

    fn nid(id: &str) -> NodeId {
        NodeId::new(id).unwrap()
    }

    fn bundle(src: &str, t: u64, kind: Option<BpqKind>, value: &str, payload: &[u8]) -> Bundle {
        Bundle {
            source: Eid::for_node(src),
            destination: Eid::any(),
            creation_timestamp: CreationTimestamp::new(t, 0),
            lifetime_ms: 10_000,
            hop_limit: 3,
            payload: payload.to_vec(),
            bpq: kind.map(|k| BpqBlock::whole(k, value.as_bytes().to_vec(), CreationTimestamp::new(t, 0))),
        }
    }

    #[test]
    fn node_id_validation() {
        assert!(NodeId::new("node_1-a").is_some());
        assert!(NodeId::new("").is_none());
        assert!(NodeId::new("a/b").is_none());
    }

    #[test]
    fn query_hit_responds_and_is_not_stored() {
        let mut d = node("D");
        d.receive_bundle(Some(&nid("A")), bundle("P", 10, Some(BpqKind::Response), "/pub/doc", b"c"), 10);
        let q = bundle("E", 20, Some(BpqKind::Query), "/pub/doc", b"");
        let actions = d.receive_bundle(Some(&nid("E")), q.clone(), 20);
        assert_eq!(actions.len(), 1);
        match &actions[0] {
            DtnAction::Responded { query, response, .. } => {
                assert_eq!(query, &q.id());
                assert_eq!(response.destination, Eid::for_node("E"));
                assert_eq!(response.payload, b"c");
                let bpq = response.bpq.as_ref().unwrap();
                assert_eq!(bpq.kind, BpqKind::Response);
                assert_eq!(bpq.original_creation_timestamp, q.creation_timestamp);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(d.cached(&q.id()).is_none());
        assert!(d.has_answered(&q.id()));
    }

    #[test]
    fn duplicate_dropped() {
        let mut d = node("D");
        let b = bundle("A", 1, None, "", b"x");
        d.receive_bundle(Some(&nid("A")), b.clone(), 1);
        let second = d.receive_bundle(Some(&nid("B")), b.clone(), 2);
        assert_eq!(
            second,
            vec![DtnAction::Dropped {
                bundle: b.id(),
                reason: DropReason::Duplicate
            }]
        );
        assert_eq!(d.cache().count(), 1);
    }

    #[test]
    fn query_miss_is_stored() {
        let mut d = node("D");
        let q = bundle("E", 1, Some(BpqKind::Query), "/pub/doc", b"");
        let actions = d.receive_bundle(Some(&nid("E")), q.clone(), 1);
        assert_eq!(actions, vec![DtnAction::Stored(q.id())]);
    }

    #[test]
    fn query_miss_reaches_gateway_when_attached() {
        let mut d = DtnNode::new(nid("D"), DtnConfig::default(), true);
        let q = bundle("E", 1, Some(BpqKind::Query), "/pub/doc", b"");
        let actions = d.receive_bundle(Some(&nid("E")), q.clone(), 1);
        assert_eq!(actions, vec![DtnAction::Stored(q.id()), DtnAction::DeliverToGateway(q)]);
    }

    #[test]
    fn bpq_match_rules() {
        let complete = bundle("P", 100, Some(BpqKind::Response), "/pub/doc", b"old");
        let newer = bundle("P", 200, Some(BpqKind::Response), "/pub/doc", b"new");
        let mut fragmented = bundle("P", 300, Some(BpqKind::Response), "/pub/doc", b"frag");
        {
            let bpq = fragmented.bpq.as_mut().unwrap();
            bpq.fragment_count = 1;
            bpq.fragments = vec![crate::wire::Fragment { offset: 0, length: 4 }];
        }
        let announce = bundle("P", 400, Some(BpqKind::Publish), "/pub/doc", b"");
        let query = BpqBlock::whole(BpqKind::Query, b"/pub/doc".to_vec(), CreationTimestamp::default());

        assert_eq!(bpq_match([&complete], &query, 0), Some(&complete));
        assert_eq!(bpq_match([&fragmented], &query, 0), None);
        assert_eq!(bpq_match([&announce], &query, 0), None);

        let all = [&complete, &newer, &fragmented, &announce];
        // full-scan oracle: newest eligible by creation timestamp
        let oracle = all
            .iter()
            .filter(|b| {
                let bpq = b.bpq.as_ref().unwrap();
                bpq.fragment_count == 0 && bpq.kind != BpqKind::Query && !b.payload.is_empty()
            })
            .max_by_key(|b| b.creation_timestamp)
            .copied();
        assert_eq!(bpq_match(all, &query, 0), oracle);
        assert_eq!(bpq_match(all, &query, 0), Some(&newer));
    }

    #[test]
    fn publish_with_content_answers() {
        let publish = bundle("P", 1, Some(BpqKind::Publish), "/pub/doc", b"c");
        let query = BpqBlock::whole(BpqKind::Query, b"/pub/doc".to_vec(), CreationTimestamp::default());
        assert_eq!(bpq_match([&publish], &query, 0), Some(&publish));
        assert_eq!(bpq_match([&publish], &query, publish.expires_at()), None);
    }

    #[test]
    fn contact_push_decrements_hops() {
        let mut d = node("D");
        d.receive_bundle(Some(&nid("A")), bundle("A", 1, None, "", b"x"), 1);
        let sent = d.on_contact_up(&nid("E"), 5);
        assert_eq!(sent.len(), 1);
        assert_eq!(sent[0].hop_limit, 2);
        assert!(d.on_contact_up(&nid("E"), 6).is_empty());
        // never sent back to where it came from
        assert!(d.on_contact_up(&nid("A"), 6).is_empty());
    }

    #[test]
    fn zero_hop_bundles_never_sent() {
        let mut d = node("D");
        let mut b = bundle("A", 1, None, "", b"x");
        b.hop_limit = 0;
        d.receive_bundle(Some(&nid("A")), b, 1);
        assert!(d.on_contact_up(&nid("E"), 2).is_empty());
    }

    #[test]
    fn contact_order_destination_first_then_timestamp() {
        let mut d = node("D");
        let early = bundle("A", 1, None, "", b"1");
        let late = bundle("A", 5, None, "", b"2");
        let mut for_e = bundle("B", 9, None, "", b"3");
        for_e.destination = Eid::for_node("E");
        for b in [late.clone(), for_e.clone(), early.clone()] {
            d.receive_bundle(Some(&nid("X")), b, 10);
        }
        let sent: Vec<BundleId> = d.on_contact_up(&nid("E"), 10).iter().map(Bundle::id).collect();
        assert_eq!(sent, vec![for_e.id(), early.id(), late.id()]);
    }

    #[test]
    fn expired_bundles_not_sent() {
        let mut d = node("D");
        let b = bundle("A", 0, None, "", b"x");
        d.receive_bundle(Some(&nid("A")), b.clone(), 0);
        assert!(d.on_contact_up(&nid("E"), b.expires_at()).is_empty());
    }

    #[test]
    fn sweep_boundaries() {
        let mut d = node("D");
        let mut b = bundle("A", 0, None, "", b"x");
        b.lifetime_ms = 1000;
        d.receive_bundle(Some(&nid("A")), b.clone(), 0);
        assert!(d.sweep_expired(999).is_empty());
        assert_eq!(d.sweep_expired(1000), vec![b.id()]);
    }

    #[test]
    fn sweep_mixed_cache() {
        let mut d = node("D");
        let lifetimes = [500, 5000, 800, 9000, 7000];
        for (i, lt) in lifetimes.iter().enumerate() {
            let mut b = bundle("A", 0, None, "", b"x");
            b.creation_timestamp.seq = i as u64;
            b.lifetime_ms = *lt;
            d.receive_bundle(Some(&nid("A")), b, 0);
        }
        let now = 1000;
        let expected = lifetimes.iter().filter(|&&lt| now >= lt).count();
        assert_eq!(d.sweep_expired(now).len(), expected);
        assert_eq!(expected, 2);
    }

    #[test]
    fn own_query_retired_on_response() {
        let mut e = node("E");
        let ts = e.next_timestamp(0);
        let mut q = bundle("E", 0, Some(BpqKind::Query), "/pub/doc", b"");
        q.creation_timestamp = ts;
        e.originate(q.clone(), 0);
        let mut resp = bundle("A", 50, Some(BpqKind::Response), "/pub/doc", b"c");
        resp.destination = Eid::for_node("E");
        resp.bpq.as_mut().unwrap().original_creation_timestamp = ts;
        let actions = e.receive_bundle(Some(&nid("D")), resp, 50);
        assert!(actions.contains(&DtnAction::QueryRetired(q.id())));
        assert!(e.cached(&q.id()).is_none());
    }

    #[test]
    fn timestamps_are_monotonic() {
        let mut d = node("D");
        let a = d.next_timestamp(7);
        let b = d.next_timestamp(7);
        assert_ne!(a, b);
        assert!(a < b);
    }
}
