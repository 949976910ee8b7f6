//! CCN forwarding state: Content Store, Pending Interest Table, FIB, and
//! the interest/data pipeline that runs over them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::names::Name;
use crate::wire::{CcnPacket, Data, Interest, StatusResponse};

pub type Millis = u64;

pub const DEFAULT_CS_CAPACITY: usize = 1024;
pub const DEFAULT_TTL_MS: Millis = 60_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    Link,
    App,
    BundleDaemon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceId {
    pub id: u32,
    pub kind: FaceKind,
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FaceKind::Link => write!(f, "link{}", self.id),
            FaceKind::App => write!(f, "app{}", self.id),
            FaceKind::BundleDaemon => write!(f, "bundle{}", self.id),
        }
    }
}

/// Finds the entry with the longest name that has `prefix` as a prefix,
/// among those accepted by `keep`. Names extending a prefix are contiguous
/// in component-wise order, so this is a single range scan.
pub(crate) fn longest_extension<'a, V>(
    map: &'a BTreeMap<Name, V>,
    prefix: &Name,
    mut keep: impl FnMut(&V) -> bool,
) -> Option<(&'a Name, &'a V)> {
    let mut best: Option<(&Name, &V)> = None;
    for (name, value) in map.range(prefix.clone()..) {
        if !prefix.is_prefix_of(name) {
            break;
        }
        if keep(value) && best.is_none_or(|(b, _)| name.len() > b.len()) {
            best = Some((name, value));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsEntry {
    pub name: Name,
    pub data: Data,
    pub inserted_at: Millis,
    pub expires_at: Millis,
    last_used: u64,
}

/// LRU-evicting content cache.
#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: usize,
    default_ttl_ms: Millis,
    entries: BTreeMap<Name, CsEntry>,
    recency: BTreeMap<u64, Name>,
    tick: u64,
}

impl ContentStore {
    pub fn new(capacity: usize, default_ttl_ms: Millis) -> Self {
        Self {
            capacity,
            default_ttl_ms,
            entries: BTreeMap::new(),
            recency: BTreeMap::new(),
            tick: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, name: &Name) -> Option<&CsEntry> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.entries.keys()
    }

    /// Names from least to most recently used.
    pub fn lru_order(&self) -> Vec<Name> {
        self.recency.values().cloned().collect()
    }

    fn touch(&mut self, name: &Name) {
        if let Some(entry) = self.entries.get_mut(name) {
            self.recency.remove(&entry.last_used);
            self.tick += 1;
            entry.last_used = self.tick;
            self.recency.insert(self.tick, name.clone());
        }
    }

    pub fn insert(&mut self, data: &Data, now: Millis) {
        if self.capacity == 0 {
            return;
        }
        let ttl = if data.freshness_ms == 0 {
            self.default_ttl_ms
        } else {
            data.freshness_ms
        };
        if let Some(old) = self.entries.remove(&data.name) {
            self.recency.remove(&old.last_used);
        } else if self.entries.len() >= self.capacity {
            if let Some((_, victim)) = self.recency.pop_first() {
                self.entries.remove(&victim);
            }
        }
        self.tick += 1;
        self.entries.insert(
            data.name.clone(),
            CsEntry {
                name: data.name.clone(),
                data: data.clone(),
                inserted_at: now,
                expires_at: now.saturating_add(ttl),
                last_used: self.tick,
            },
        );
        self.recency.insert(self.tick, data.name.clone());
    }

    /// Longest fresh entry under `name`; refreshes its recency.
    pub fn lookup(&mut self, name: &Name, now: Millis) -> Option<Data> {
        let hit = longest_extension(&self.entries, name, |e| now < e.expires_at).map(|(n, e)| (n.clone(), e.data.clone()));
        let (hit_name, data) = hit?;
        self.touch(&hit_name);
        Some(data)
    }

    pub fn sweep(&mut self, now: Millis) -> Vec<Name> {
        let stale: Vec<Name> = self
            .entries
            .values()
            .filter(|e| e.expires_at <= now)
            .map(|e| e.name.clone())
            .collect();
        for name in &stale {
            if let Some(e) = self.entries.remove(name) {
                self.recency.remove(&e.last_used);
            }
        }
        stale
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub name: Name,
    pub in_faces: BTreeSet<FaceId>,
    pub out_faces: BTreeSet<FaceId>,
    pub expires_at: Millis,
    pub nonces_seen: BTreeSet<[u8; 8]>,
}

#[derive(Debug, Clone, Default)]
pub struct Pit {
    entries: BTreeMap<Name, PitEntry>,
}

impl Pit {
    pub fn get(&self, name: &Name) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &PitEntry> {
        self.entries.values()
    }

    /// Names of entries satisfied by data named `name`: every pending name
    /// that is a prefix of it.
    fn matching(&self, name: &Name) -> Vec<Name> {
        (0..=name.len())
            .map(|k| name.prefix(k))
            .filter(|p| self.entries.contains_key(p))
            .collect()
    }

    pub fn insert(&mut self, entry: PitEntry) {
        self.entries.insert(entry.name.clone(), entry);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibEntry {
    pub prefix: Name,
    pub faces: BTreeSet<FaceId>,
}

#[derive(Debug, Clone, Default)]
pub struct Fib {
    entries: BTreeMap<Name, FibEntry>,
}

impl Fib {
    /// Adds `face` to the entry for `prefix`. Returns true if the FIB changed.
    pub fn add_route(&mut self, prefix: Name, face: FaceId) -> bool {
        self.entries
            .entry(prefix.clone())
            .or_insert_with(|| FibEntry {
                prefix,
                faces: BTreeSet::new(),
            })
            .faces
            .insert(face)
    }

    pub fn longest_prefix_match(&self, name: &Name) -> Option<&FibEntry> {
        (0..=name.len()).rev().find_map(|k| self.entries.get(&name.prefix(k)))
    }

    pub fn get(&self, prefix: &Name) -> Option<&FibEntry> {
        self.entries.get(prefix)
    }

    pub fn entries(&self) -> impl Iterator<Item = &FibEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn fib_longest_prefix_match<'a>(fib: &'a Fib, name: &Name) -> Option<&'a FibEntry> {
    fib.longest_prefix_match(name)
}

/// What the pipeline did, for the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CcnNote {
    DuplicateNonce { name: Name, face: FaceId },
    CsHit { name: Name, face: FaceId },
    PitAggregated { name: Name, face: FaceId },
    PitCreated { name: Name, out_faces: Vec<FaceId> },
    NoRoute { name: Name },
    PitSatisfied { name: Name, faces: Vec<FaceId> },
    UnsolicitedData { name: Name, face: FaceId },
    StatusForwarded { name: Name, faces: Vec<FaceId> },
    StatusUnmatched { name: Name },
    PitExpired { name: Name },
    CsExpired { name: Name },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub emissions: Vec<(FaceId, CcnPacket)>,
    pub notes: Vec<CcnNote>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CcnConfig {
    pub cs_capacity: usize,
    pub default_ttl_ms: Millis,
}

impl Default for CcnConfig {
    fn default() -> Self {
        Self {
            cs_capacity: DEFAULT_CS_CAPACITY,
            default_ttl_ms: DEFAULT_TTL_MS,
        }
    }
}

/// One CCN forwarder. Single-owner state machine; every call takes the
/// current simulated time.
#[derive(Debug, Clone)]
pub struct CcnNode {
    faces: BTreeMap<FaceId, bool>,
    next_face: u32,
    pub cs: ContentStore,
    pub pit: Pit,
    pub fib: Fib,
}

impl CcnNode {
    pub fn new(config: CcnConfig) -> Self {
        Self {
            faces: BTreeMap::new(),
            next_face: 0,
            cs: ContentStore::new(config.cs_capacity, config.default_ttl_ms),
            pit: Pit::default(),
            fib: Fib::default(),
        }
    }

    pub fn add_face(&mut self, kind: FaceKind) -> FaceId {
        let face = FaceId {
            id: self.next_face,
            kind,
        };
        self.next_face += 1;
        self.faces.insert(face, true);
        face
    }

    pub fn faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        self.faces.keys().copied()
    }

    pub fn set_face_up(&mut self, face: FaceId, up: bool) {
        if let Some(state) = self.faces.get_mut(&face) {
            *state = up;
        }
    }

    pub fn face_up(&self, face: FaceId) -> bool {
        self.faces.get(&face).copied().unwrap_or(false)
    }

    pub fn add_route(&mut self, prefix: Name, face: FaceId) -> bool {
        self.fib.add_route(prefix, face)
    }

    pub fn cs_insert(&mut self, data: &Data, now: Millis) {
        self.cs.insert(data, now);
    }

    pub fn on_interest(&mut self, face: FaceId, interest: &Interest, now: Millis) -> Outcome {
        let mut out = Outcome::default();
        let name = &interest.name;

        if let Some(entry) = self.pit.entries.get(name) {
            if entry.nonces_seen.contains(&interest.nonce) {
                out.notes.push(CcnNote::DuplicateNonce { name: name.clone(), face });
                return out;
            }
        }

        if let Some(data) = self.cs.lookup(name, now) {
            out.notes.push(CcnNote::CsHit {
                name: data.name.clone(),
                face,
            });
            out.emissions.push((face, CcnPacket::Data(data)));
            return out;
        }

        if let Some(entry) = self.pit.entries.get_mut(name) {
            entry.in_faces.insert(face);
            entry.nonces_seen.insert(interest.nonce);
            out.notes.push(CcnNote::PitAggregated { name: name.clone(), face });
            return out;
        }

        let targets: Vec<FaceId> = match self.fib.longest_prefix_match(name) {
            Some(entry) => entry
                .faces
                .iter()
                .copied()
                .filter(|f| *f != face && self.face_up(*f))
                .collect(),
            None => Vec::new(),
        };
        if targets.is_empty() {
            out.notes.push(CcnNote::NoRoute { name: name.clone() });
            return out;
        }
        self.pit.insert(PitEntry {
            name: name.clone(),
            in_faces: BTreeSet::from([face]),
            out_faces: targets.iter().copied().collect(),
            expires_at: now.saturating_add(interest.lifetime_ms),
            nonces_seen: BTreeSet::from([interest.nonce]),
        });
        out.notes.push(CcnNote::PitCreated {
            name: name.clone(),
            out_faces: targets.clone(),
        });
        for target in targets {
            out.emissions.push((target, CcnPacket::Interest(interest.clone())));
        }
        out
    }

    pub fn on_data(&mut self, face: FaceId, data: &Data, now: Millis) -> Outcome {
        let mut out = Outcome::default();
        let matched = self.pit.matching(&data.name);
        if matched.is_empty() {
            out.notes.push(CcnNote::UnsolicitedData {
                name: data.name.clone(),
                face,
            });
            return out;
        }
        self.cs.insert(data, now);
        let mut downstream = BTreeSet::new();
        for name in matched {
            if let Some(entry) = self.pit.entries.remove(&name) {
                out.notes.push(CcnNote::PitSatisfied {
                    name,
                    faces: entry.in_faces.iter().copied().collect(),
                });
                downstream.extend(entry.in_faces);
            }
        }
        downstream.remove(&face);
        for target in downstream {
            out.emissions.push((target, CcnPacket::Data(data.clone())));
        }
        out
    }

    /// Relays a status response toward the requesters of the exact name,
    /// leaving the PIT entry in place.
    pub fn on_status_response(&mut self, face: FaceId, status: &StatusResponse) -> Outcome {
        let mut out = Outcome::default();
        match self.pit.entries.get(&status.name) {
            Some(entry) => {
                let faces: Vec<FaceId> = entry.in_faces.iter().copied().filter(|f| *f != face).collect();
                out.notes.push(CcnNote::StatusForwarded {
                    name: status.name.clone(),
                    faces: faces.clone(),
                });
                for target in faces {
                    out.emissions.push((target, CcnPacket::StatusResponse(status.clone())));
                }
            }
            None => out.notes.push(CcnNote::StatusUnmatched {
                name: status.name.clone(),
            }),
        }
        out
    }

    pub fn sweep_timeouts(&mut self, now: Millis) -> Vec<CcnNote> {
        let expired: Vec<Name> = self
            .pit
            .entries
            .values()
            .filter(|e| e.expires_at <= now)
            .map(|e| e.name.clone())
            .collect();
        let mut notes = Vec::new();
        for name in expired {
            self.pit.entries.remove(&name);
            notes.push(CcnNote::PitExpired { name });
        }
        notes.extend(self.cs.sweep(now).into_iter().map(|name| CcnNote::CsExpired { name }));
        notes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::parse_name;

    fn n(s: &str) -> Name {
        parse_name(s).unwrap()
    }

    fn interest(name: &str, nonce: u8) -> Interest {
        Interest::new(n(name), [nonce; 8], 4000).unwrap()
    }

    fn data(name: &str) -> Data {
        Data::new(n(name), b"content".to_vec(), 0)
    }

    struct Fixture {
        node: CcnNode,
        f1: FaceId,
        f2: FaceId,
        f3: FaceId,
        bundle: FaceId,
    }

    fn fixture() -> Fixture {
        let mut node = CcnNode::new(CcnConfig::default());
        let f1 = node.add_face(FaceKind::Link);
        let f2 = node.add_face(FaceKind::Link);
        let f3 = node.add_face(FaceKind::Link);
        let bundle = node.add_face(FaceKind::BundleDaemon);
        Fixture { node, f1, f2, f3, bundle }
    }

    #[test]
    fn cs_hit_answers_on_arrival_face_only() {
        let Fixture { mut node, f1, .. } = fixture();
        node.cs_insert(&data("/pub/doc"), 0);
        let out = node.on_interest(f1, &interest("/pub/doc", 1), 10);
        assert_eq!(out.emissions, vec![(f1, CcnPacket::Data(data("/pub/doc")))]);
        assert!(node.pit.is_empty());
    }

    #[test]
    fn cs_prefix_hit_prefers_longest() {
        let Fixture { mut node, f1, .. } = fixture();
        node.cs_insert(&data("/pub/a"), 0);
        node.cs_insert(&data("/pub/a/v1"), 0);
        let out = node.on_interest(f1, &interest("/pub/a", 1), 10);
        assert_eq!(out.emissions[0].1.name(), &n("/pub/a/v1"));
    }

    #[test]
    fn pit_aggregates_same_name() {
        let Fixture { mut node, f1, f2, f3, .. } = fixture();
        node.add_route(n("/pub"), f3);
        let first = node.on_interest(f1, &interest("/pub/doc", 1), 0);
        assert_eq!(first.emissions.len(), 1);
        let second = node.on_interest(f2, &interest("/pub/doc", 2), 5);
        assert!(second.emissions.is_empty());
        let entry = node.pit.get(&n("/pub/doc")).unwrap();
        assert_eq!(entry.in_faces, BTreeSet::from([f1, f2]));
    }

    #[test]
    fn duplicate_nonce_dropped() {
        let Fixture { mut node, f1, f2, f3, .. } = fixture();
        node.add_route(n("/pub"), f3);
        node.on_interest(f1, &interest("/pub/doc", 1), 0);
        let out = node.on_interest(f2, &interest("/pub/doc", 1), 1);
        assert!(out.emissions.is_empty());
        assert!(matches!(out.notes[0], CcnNote::DuplicateNonce { .. }));
        assert_eq!(node.pit.get(&n("/pub/doc")).unwrap().in_faces.len(), 1);
    }

    #[test]
    fn forwards_on_all_fib_faces_including_bundle() {
        let Fixture { mut node, f1, f3, bundle, .. } = fixture();
        node.add_route(n("/pub"), f3);
        node.add_route(n("/pub"), bundle);
        let out = node.on_interest(f1, &interest("/pub/doc", 1), 0);
        let faces: Vec<FaceId> = out.emissions.iter().map(|(f, _)| *f).collect();
        assert_eq!(faces, vec![f3, bundle]);
        assert!(node.pit.get(&n("/pub/doc")).is_some());
    }

    #[test]
    fn never_forwards_back_on_arrival_face() {
        let Fixture { mut node, f1, .. } = fixture();
        node.add_route(n("/pub"), f1);
        let out = node.on_interest(f1, &interest("/pub/doc", 1), 0);
        assert!(out.emissions.is_empty());
        assert_eq!(out.notes, vec![CcnNote::NoRoute { name: n("/pub/doc") }]);
    }

    #[test]
    fn down_faces_are_skipped() {
        let Fixture { mut node, f1, f2, f3, .. } = fixture();
        node.add_route(n("/pub"), f2);
        node.add_route(n("/pub"), f3);
        node.set_face_up(f2, false);
        let out = node.on_interest(f1, &interest("/pub/doc", 1), 0);
        assert_eq!(out.emissions.len(), 1);
        assert_eq!(out.emissions[0].0, f3);
    }

    #[test]
    fn no_fib_match_drops() {
        let Fixture { mut node, f1, .. } = fixture();
        let out = node.on_interest(f1, &interest("/audio", 1), 0);
        assert!(out.emissions.is_empty());
        assert!(node.pit.is_empty());
    }

    #[test]
    fn data_follows_reverse_path() {
        let Fixture { mut node, f1, f2, f3, .. } = fixture();
        node.add_route(n("/pub"), f3);
        node.on_interest(f1, &interest("/pub/doc", 1), 0);
        node.on_interest(f2, &interest("/pub/doc", 2), 0);
        let out = node.on_data(f3, &data("/pub/doc"), 50);
        let faces: Vec<FaceId> = out.emissions.iter().map(|(f, _)| *f).collect();
        assert_eq!(faces, vec![f1, f2]);
        assert!(node.pit.is_empty());
        assert!(node.cs.get(&n("/pub/doc")).is_some());
    }

    #[test]
    fn unsolicited_data_not_cached() {
        let Fixture { mut node, f3, .. } = fixture();
        let out = node.on_data(f3, &data("/pub/doc"), 0);
        assert!(out.emissions.is_empty());
        assert!(node.cs.is_empty());
    }

    #[test]
    fn prefix_pit_entry_satisfied_by_longer_data() {
        let Fixture { mut node, f1, f3, .. } = fixture();
        node.add_route(n("/pub"), f3);
        node.on_interest(f1, &interest("/pub", 1), 0);
        let out = node.on_data(f3, &data("/pub/doc"), 10);
        // brute force: every PIT name that is a prefix of the data name
        let expected: Vec<FaceId> = vec![f1];
        assert_eq!(out.emissions.iter().map(|(f, _)| *f).collect::<Vec<_>>(), expected);
        assert!(node.pit.is_empty());
    }

    #[test]
    fn fib_longest_prefix_examples() {
        let Fixture { mut node, f1, f2, .. } = fixture();
        node.add_route(n("/video"), f1);
        node.add_route(n("/video/movies"), f2);
        // linear-scan oracle keeping the longest matching prefix
        let oracle = |name: &Name| {
            node.fib
                .entries()
                .filter(|e| e.prefix.is_prefix_of(name))
                .max_by_key(|e| e.prefix.len())
                .map(|e| e.prefix.clone())
        };
        for probe in ["/video/movies/m1", "/video", "/audio", "/video/mov"] {
            let probe = n(probe);
            assert_eq!(
                fib_longest_prefix_match(&node.fib, &probe).map(|e| e.prefix.clone()),
                oracle(&probe)
            );
        }
        assert_eq!(node.fib.longest_prefix_match(&n("/video/movies/m1")).unwrap().prefix, n("/video/movies"));
        assert!(node.fib.longest_prefix_match(&n("/audio")).is_none());
    }

    #[test]
    fn fib_add_route_is_idempotent_union() {
        let Fixture { mut node, f1, bundle, .. } = fixture();
        assert!(node.add_route(n("/pub"), bundle));
        assert!(node.add_route(n("/pub"), f1));
        assert!(!node.add_route(n("/pub"), bundle));
        assert_eq!(node.fib.len(), 1);
        assert_eq!(node.fib.get(&n("/pub")).unwrap().faces, BTreeSet::from([f1, bundle]));
    }

    #[test]
    fn sweep_boundaries() {
        let Fixture { mut node, f1, f3, .. } = fixture();
        node.add_route(n("/"), f3);
        node.on_interest(f1, &Interest::new(n("/x"), [1; 8], 1000).unwrap(), 0);
        assert!(node.sweep_timeouts(999).is_empty());
        assert_eq!(node.sweep_timeouts(1000), vec![CcnNote::PitExpired { name: n("/x") }]);
    }

    #[test]
    fn sweep_counts_only_expired() {
        let Fixture { mut node, f1, f3, .. } = fixture();
        node.add_route(n("/"), f3);
        let lifetimes = [100, 200, 300, 5000, 6000];
        for (i, lt) in lifetimes.iter().enumerate() {
            let name = format!("/n{i}");
            node.on_interest(f1, &Interest::new(n(&name), [i as u8; 8], *lt).unwrap(), 0);
        }
        let now = 1000;
        let expected = lifetimes.iter().filter(|&&lt| lt <= now).count();
        assert_eq!(node.sweep_timeouts(now).len(), expected);
        assert_eq!(node.pit.len(), lifetimes.len() - expected);
    }

    #[test]
    fn status_response_relayed_without_clearing_pit() {
        let Fixture { mut node, f1, f3, .. } = fixture();
        node.add_route(n("/pub"), f3);
        node.on_interest(f1, &interest("/pub/doc", 1), 0);
        let out = node.on_status_response(f3, &StatusResponse::unavailable(n("/pub/doc")));
        assert_eq!(out.emissions.len(), 1);
        assert_eq!(out.emissions[0].0, f1);
        assert_eq!(node.pit.len(), 1);
    }

    #[test]
    fn cs_lru_eviction() {
        let mut cs = ContentStore::new(2, DEFAULT_TTL_MS);
        cs.insert(&data("/a"), 0);
        cs.insert(&data("/b"), 1);
        // explicit LRU list: [a, b]; inserting c evicts the front
        let mut lru: Vec<&str> = vec!["/a", "/b"];
        cs.insert(&data("/c"), 2);
        lru.remove(0);
        lru.push("/c");
        let got: Vec<String> = cs.lru_order().iter().map(|n| n.to_string()).collect();
        assert_eq!(got, lru);
    }

    #[test]
    fn cs_lookup_refreshes_recency() {
        let mut cs = ContentStore::new(2, DEFAULT_TTL_MS);
        cs.insert(&data("/a"), 0);
        cs.insert(&data("/b"), 1);
        assert!(cs.lookup(&n("/a"), 2).is_some());
        cs.insert(&data("/c"), 3);
        assert!(cs.get(&n("/a")).is_some());
        assert!(cs.get(&n("/b")).is_none());
    }

    #[test]
    fn cs_reinsert_refreshes_expiry_and_recency() {
        let mut cs = ContentStore::new(2, 100);
        cs.insert(&data("/a"), 0);
        cs.insert(&data("/b"), 1);
        cs.insert(&data("/a"), 50);
        assert_eq!(cs.get(&n("/a")).unwrap().expires_at, 150);
        assert_eq!(cs.lru_order(), vec![n("/b"), n("/a")]);
        assert_eq!(cs.len(), 2);
    }

    #[test]
    fn cs_zero_capacity_is_noop() {
        let mut cs = ContentStore::new(0, 100);
        cs.insert(&data("/a"), 0);
        assert!(cs.is_empty());
    }

    #[test]
    fn cs_freshness_rules() {
        let mut cs = ContentStore::new(4, 100);
        cs.insert(&Data::new(n("/a"), vec![], 10), 0);
        cs.insert(&data("/b"), 0);
        assert_eq!(cs.get(&n("/a")).unwrap().expires_at, 10);
        assert_eq!(cs.get(&n("/b")).unwrap().expires_at, 100);
        assert!(cs.lookup(&n("/a"), 9).is_some());
        assert!(cs.lookup(&n("/a"), 10).is_none());
    }
}
