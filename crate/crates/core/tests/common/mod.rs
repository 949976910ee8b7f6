//! Helpers shared by the integration tests: trace analysis over the
//! serialized JSONL form, reference oracles and random generators.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ccndtn::scenario::{load_builtin, run_scenario, RunOutput, Scenario};
use ccndtn::trace::Trace;
use serde_json::Value;

pub fn builtin(name: &str) -> Scenario {
    load_builtin(name).unwrap_or_else(|e| panic!("builtin {name}: {e}"))
}

pub fn run(name: &str) -> RunOutput {
    run_scenario(&builtin(name))
}

/// A trace record reread from its JSON line.
#[derive(Debug, Clone)]
pub struct Rec {
    pub idx: usize,
    pub t: u64,
    pub node: String,
    pub event: String,
    pub v: Value,
}

impl Rec {
    pub fn str(&self, key: &str) -> Option<&str> {
        self.v.get(key).and_then(Value::as_str)
    }

    pub fn u64(&self, key: &str) -> Option<u64> {
        self.v.get(key).and_then(Value::as_u64)
    }
}

pub fn records(trace: &Trace) -> Vec<Rec> {
    trace
        .to_jsonl()
        .lines()
        .enumerate()
        .map(|(idx, line)| {
            let v: Value = serde_json::from_str(line).expect("trace lines are JSON");
            Rec {
                idx,
                t: v["t"].as_u64().expect("t"),
                node: v["node"].as_str().expect("node").to_string(),
                event: v["event"].as_str().expect("event").to_string(),
                v,
            }
        })
        .collect()
}

pub fn of<'a>(recs: &'a [Rec], event: &'a str) -> impl Iterator<Item = &'a Rec> + 'a {
    recs.iter().filter(move |r| r.event == event)
}

pub fn tx_count(recs: &[Rec], packet: &str) -> usize {
    of(recs, "tx").filter(|r| r.str("packet") == Some(packet)).count()
}

/// Number of store-and-forward hops each bundle took to reach each node,
/// reconstructed from the `from` field of `bundle_stored`. The creator is
/// at depth 0.
pub fn chain_depths(recs: &[Rec]) -> BTreeMap<(String, String), u64> {
    let mut depth: BTreeMap<(String, String), u64> = BTreeMap::new();
    for r in of(recs, "bundle_stored") {
        let bundle = r.str("bundle").expect("bundle").to_string();
        let d = match r.str("from") {
            None => 0,
            Some(prev) => {
                let key = (bundle.clone(), prev.to_string());
                depth
                    .get(&key)
                    .unwrap_or_else(|| panic!("{bundle} stored at {} from {prev}, which never held it", r.node))
                    + 1
            }
        };
        depth.entry((bundle, r.node.clone())).or_insert(d);
    }
    depth
}

/// Nodes a bundle passed through to reach `node`, creator first.
pub fn bundle_route(recs: &[Rec], bundle: &str, node: &str) -> Vec<String> {
    let mut route = vec![node.to_string()];
    let mut here = node.to_string();
    loop {
        let stored = of(recs, "bundle_stored")
            .find(|r| r.node == here && r.str("bundle") == Some(bundle))
            .unwrap_or_else(|| panic!("{bundle} never stored at {here}"));
        match stored.str("from") {
            Some(prev) => {
                route.push(prev.to_string());
                here = prev.to_string();
            }
            None => break,
        }
    }
    route.reverse();
    route
}

/// Full delivery path of content carried by `bundle` to `node`: the bundle's
/// own route, prefixed by the path of whatever content its creator answered
/// from (a matched cached bundle, or a bundle whose content it had stored).
pub fn content_path(recs: &[Rec], bundle: &str, node: &str) -> Vec<String> {
    let route = bundle_route(recs, bundle, node);
    let origin = route[0].clone();
    let Some(created) = of(recs, "response_created").find(|r| r.node == origin && r.str("bundle") == Some(bundle))
    else {
        return route;
    };
    let query = created.str("query");
    let matched = of(recs, "bpq_hit")
        .filter(|r| r.node == origin && r.idx < created.idx && r.str("query") == query)
        .last()
        .and_then(|r| r.str("matched"));
    let source = matched.or_else(|| {
        of(recs, "gw_store")
            .find(|r| r.node == origin && r.idx < created.idx)
            .and_then(|r| r.str("bundle"))
    });
    match source {
        Some(src) => {
            let mut path = content_path(recs, src, &origin);
            path.extend(route.into_iter().skip(1));
            path
        }
        None => route,
    }
}

/// True if `a` and `b` are connected through links that are up at `t`.
pub fn connected_at(s: &Scenario, a: &str, b: &str, t: u64) -> bool {
    let up: Vec<(&str, &str)> = s
        .links
        .iter()
        .filter(|l| l.schedule.is_empty() || l.schedule.iter().any(|w| w[0] <= t && t < w[1]))
        .map(|l| (l.a.as_str(), l.b.as_str()))
        .collect();
    let mut seen = BTreeSet::from([a]);
    let mut frontier = vec![a];
    while let Some(n) = frontier.pop() {
        for &(x, y) in &up {
            let next = if x == n {
                y
            } else if y == n {
                x
            } else {
                continue;
            };
            if seen.insert(next) {
                frontier.push(next);
            }
        }
    }
    seen.contains(b)
}

/// Every instant at which the set of up links can change.
pub fn schedule_breakpoints(s: &Scenario) -> Vec<u64> {
    let mut ts: BTreeSet<u64> = BTreeSet::from([0]);
    for l in &s.links {
        for w in &l.schedule {
            ts.insert(w[0]);
            ts.insert(w[1]);
        }
    }
    ts.into_iter().collect()
}

/// Reference SDNV encoder: split into 7-bit groups least significant
/// first, reverse, flag every group but the last.
pub fn sdnv_oracle_encode(mut v: u64) -> Vec<u8> {
    let mut groups = vec![(v & 0x7f) as u8];
    v >>= 7;
    while v > 0 {
        groups.push((v & 0x7f) as u8 | 0x80);
        v >>= 7;
    }
    groups.reverse();
    groups
}

pub fn sdnv_oracle_decode(bytes: &[u8]) -> Option<(u128, usize)> {
    let mut acc: u128 = 0;
    for (i, b) in bytes.iter().enumerate() {
        acc = acc * 128 + u128::from(b & 0x7f);
        if b & 0x80 == 0 {
            return Some((acc, i + 1));
        }
    }
    None
}

pub mod gen {
    use ccndtn::names::{Eid, Name};
    use ccndtn::wire::{
        BpqBlock, BpqKind, Bundle, CcnPacket, CreationTimestamp, Data, Fragment, Interest, StatusResponse,
    };
    use rand::Rng;

    /// Values skewed toward SDNV length boundaries.
    pub fn num<R: Rng>(rng: &mut R) -> u64 {
        match rng.random_range(0..4) {
            0 => rng.random_range(0..200),
            1 => {
                let bits = rng.random_range(1..=64u32);
                let base = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
                base.wrapping_add(rng.random_range(0..3))
            }
            2 => rng.random(),
            _ => rng.random_range(0..1 << 28),
        }
    }

    pub fn bytes<R: Rng>(rng: &mut R, max: usize) -> Vec<u8> {
        let len = rng.random_range(0..=max);
        (0..len).map(|_| rng.random()).collect()
    }

    pub fn name<R: Rng>(rng: &mut R) -> Name {
        let n = rng.random_range(0..5);
        let comps: Vec<Vec<u8>> = (0..n)
            .map(|_| {
                let len = rng.random_range(1..12);
                (0..len).map(|_| rng.random()).collect()
            })
            .collect();
        Name::from_components(comps).expect("components are non-empty")
    }

    pub fn eid<R: Rng>(rng: &mut R) -> Eid {
        match rng.random_range(0..3) {
            0 => Eid::any(),
            1 => Eid::for_node(&format!("n{}", rng.random_range(0..1000))),
            _ => {
                let ssp: String = (0..rng.random_range(0..16))
                    .map(|_| char::from(rng.random_range(0x21u8..0x7f)))
                    .collect();
                Eid::new("ipn", ssp).expect("alnum scheme")
            }
        }
    }

    pub fn ccn_packet<R: Rng>(rng: &mut R) -> CcnPacket {
        match rng.random_range(0..3) {
            0 => CcnPacket::Interest(
                Interest::new(name(rng), rng.random(), rng.random_range(1..=u64::MAX)).expect("positive lifetime"),
            ),
            1 => {
                let mut d = Data::new(name(rng), bytes(rng, 300), num(rng));
                d.signature = bytes(rng, 40);
                CcnPacket::Data(d)
            }
            _ => CcnPacket::StatusResponse(StatusResponse::new(name(rng), rng.random_range(100..=999)).expect("3-digit")),
        }
    }

    pub fn bundle<R: Rng>(rng: &mut R) -> Bundle {
        let bpq = rng.random_bool(0.7).then(|| {
            let kind = [
                BpqKind::Query,
                BpqKind::Response,
                BpqKind::ResponseDoNotFragment,
                BpqKind::Publish,
            ][rng.random_range(0..4)];
            let mut block = BpqBlock::whole(kind, bytes(rng, 60), CreationTimestamp::new(num(rng), num(rng)));
            let frags = rng.random_range(0..3);
            block.fragment_count = frags;
            block.fragments = (0..frags)
                .map(|_| Fragment {
                    offset: num(rng),
                    length: num(rng),
                })
                .collect();
            block
        });
        Bundle {
            source: eid(rng),
            destination: eid(rng),
            creation_timestamp: CreationTimestamp::new(num(rng), num(rng)),
            lifetime_ms: num(rng),
            hop_limit: num(rng),
            payload: bytes(rng, 300),
            bpq,
        }
    }

    /// Random bytes, or a valid encoding with a few bytes flipped,
    /// truncated or appended.
    pub fn fuzz_input<R: Rng>(rng: &mut R, valid: Vec<u8>) -> Vec<u8> {
        match rng.random_range(0..4) {
            0 => bytes(rng, 64),
            1 => {
                let mut v = valid;
                for _ in 0..rng.random_range(1..4) {
                    if !v.is_empty() {
                        let i = rng.random_range(0..v.len());
                        v[i] = rng.random();
                    }
                }
                v
            }
            2 => {
                let mut v = valid;
                let keep = rng.random_range(0..=v.len());
                v.truncate(keep);
                v
            }
            _ => {
                let mut v = valid;
                v.extend(bytes(rng, 8));
                v
            }
        }
    }
}
