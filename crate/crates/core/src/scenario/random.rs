use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GatewaySection, LinkSpec, NodeSpec, Role, RouteSpec, Scenario, WorkloadSpec};
use crate::dtn::NodeId;
use crate::names::{parse_name, Name};
use crate::sim::LinkKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomParams {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub hop_limit: u64,
    pub t_end: u64,
}

impl Default for RandomParams {
    fn default() -> Self {
        Self {
            min_nodes: 3,
            max_nodes: 8,
            hop_limit: 8,
            t_end: 30_000,
        }
    }
}

fn name(text: &str) -> Name {
    parse_name(text).expect("generator names are valid")
}

fn nid(i: usize) -> NodeId {
    NodeId::new(format!("N{i}")).expect("generator ids are valid")
}

/// Disjoint random contact windows inside `[0, t_end)`.
fn windows(rng: &mut ChaCha8Rng, t_end: u64) -> Vec<[u64; 2]> {
    let mut out: Vec<[u64; 2]> = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let up = rng.random_range(0..t_end * 3 / 4) / 100 * 100;
        let down = up + rng.random_range(5..=30) * 100;
        out.push([up, down]);
    }
    out.sort();
    let mut merged: Vec<[u64; 2]> = Vec::new();
    for w in out {
        match merged.last() {
            Some(last) if w[0] <= last[1] => {}
            _ => merged.push(w),
        }
    }
    merged
}

/// A small random scenario: bundle-connected gateways and relays, an
/// optional CCN-only consumer behind a gateway, one or two publishers and
/// a few requests. Fully determined by `seed`.
pub fn random_scenario(seed: u64, params: RandomParams) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(params.min_nodes..=params.max_nodes.max(params.min_nodes));
    let t_end = params.t_end;

    let mut nodes = Vec::new();
    let mut gateways = Vec::new();
    for i in 0..n {
        let gateway = i == 0 || rng.random_bool(0.5);
        let roles = if gateway {
            gateways.push(i);
            vec![Role::Ccn, Role::Dtn, Role::Gateway]
        } else {
            vec![Role::Dtn]
        };
        nodes.push(NodeSpec { id: nid(i), roles });
    }

    let mut links = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.45) {
                links.push(LinkSpec {
                    a: nid(a),
                    b: nid(b),
                    latency_ms: rng.random_range(1..=20),
                    kind: LinkKind::Dtn,
                    schedule: windows(&mut rng, t_end),
                });
            }
        }
    }

    let mut routes = Vec::new();
    let mut requesters = gateways.clone();
    if n < params.max_nodes && rng.random_bool(0.5) {
        // CCN-only consumer hanging off the first gateway
        let c = NodeId::new("C0").expect("valid");
        nodes.push(NodeSpec {
            id: c.clone(),
            roles: vec![Role::Ccn],
        });
        links.push(LinkSpec {
            a: c.clone(),
            b: nid(0),
            latency_ms: 5,
            kind: LinkKind::Ccn,
            schedule: Vec::new(),
        });
        routes.push(RouteSpec {
            node: c,
            prefix: Name::root(),
            via: nid(0).to_string(),
        });
        requesters.push(usize::MAX);
    }
    for &g in &gateways {
        routes.push(RouteSpec {
            node: nid(g),
            prefix: Name::root(),
            via: "bundle".into(),
        });
    }

    let mut workload = Vec::new();
    let mut published = Vec::new();
    for k in 0..rng.random_range(1..=2) {
        let p = rng.random_range(0..n);
        let content = name(&format!("/r{k}/doc"));
        let prefix = if rng.random_bool(0.5) { content.clone() } else { name(&format!("/r{k}")) };
        workload.push(WorkloadSpec::Publish {
            node: nid(p),
            prefix,
            content_name: Some(content.clone()),
            content_size: rng.random_range(16..=512),
            at: rng.random_range(0..3000),
            carry_content: rng.random_bool(0.6),
        });
        published.push(content);
    }
    for _ in 0..rng.random_range(1..=3) {
        let who = requesters[rng.random_range(0..requesters.len())];
        let node = if who == usize::MAX {
            NodeId::new("C0").expect("valid")
        } else {
            nid(who)
        };
        let target = if rng.random_bool(0.85) {
            published[rng.random_range(0..published.len())].clone()
        } else {
            name("/missing/doc")
        };
        let lifetime = rng.random_range(5..=30) * 100;
        workload.push(WorkloadSpec::Request {
            node,
            name: target,
            at: rng.random_range(500..12_000),
            lifetime_ms: Some(lifetime),
            reexpress_interval_ms: Some(lifetime),
            max_reexpressions: rng.random_range(0..=15),
        });
    }

    let k = [1, 5, 100][rng.random_range(0..3)];
    Scenario {
        name: format!("random-{seed}"),
        description: String::new(),
        seed,
        t_end,
        cs_capacity: 64,
        default_ttl_ms: 60_000,
        interest_lifetime_ms: 2000,
        gateway: GatewaySection {
            k,
            hop_limit: params.hop_limit,
            status_response: rng.random_bool(0.5),
            backoff: 2,
            jitter: rng.random_bool(0.3),
        },
        nodes,
        links,
        routes,
        workload,
    }
}
