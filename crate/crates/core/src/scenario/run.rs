use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Role, Scenario, WorkloadSpec};
use crate::ccn::{CcnConfig, Millis};
use crate::dtn::NodeId;
use crate::gateway::GatewayConfig;
use crate::metrics::{collect_metrics, Metrics};
use crate::names::{Eid, Name};
use crate::node::{Ctx, Node, NodeConfig, Roles, RouteVia};
use crate::sim::{Engine, Event, EventKind, RunSummary};
use crate::trace::{Trace, TraceEvent};
use crate::wire::Data;

/// Deterministic pseudo-random payload for `name` under `seed`.
pub fn content_bytes(seed: u64, name: &Name, size: usize) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.to_string().as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(digest);
    let mut out = vec![0; size];
    rng.fill_bytes(&mut out);
    out
}

fn node_seed(seed: u64, id: &NodeId) -> u64 {
    let mut h = Sha256::new();
    h.update(b"node");
    h.update(seed.to_le_bytes());
    h.update(id.as_str().as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

pub struct RunOutput {
    pub trace: Trace,
    pub metrics: Metrics,
    pub summary: RunSummary,
    /// Final node state, for post-run inspection.
    pub nodes: BTreeMap<NodeId, Node>,
}

impl RunOutput {
    pub fn node(&self, id: &str) -> Option<&Node> {
        NodeId::new(id).and_then(|id| self.nodes.get(&id))
    }
}

pub fn run_scenario(s: &Scenario) -> RunOutput {
    run_scenario_with_seed(s, s.seed)
}

/// Builds the world for a validated scenario and runs it to `t_end`.
pub fn run_scenario_with_seed(s: &Scenario, seed: u64) -> RunOutput {
    let gateway = GatewayConfig {
        lifetime_multiplier_k: s.gateway.k,
        default_hop_limit: s.gateway.hop_limit,
        pseudo_destination: Eid::any(),
        status_response_enabled: s.gateway.status_response,
        backoff_factor: s.gateway.backoff,
    };
    let ccn = CcnConfig {
        cs_capacity: s.cs_capacity,
        default_ttl_ms: s.default_ttl_ms,
    };
    let mut nodes: BTreeMap<NodeId, Node> = s
        .nodes
        .iter()
        .map(|spec| {
            let config = NodeConfig {
                roles: Roles {
                    ccn: spec.has(Role::Ccn),
                    dtn: spec.has(Role::Dtn),
                    gateway: spec.has(Role::Gateway),
                },
                ccn,
                gateway: gateway.clone(),
                interest_lifetime_ms: s.interest_lifetime_ms,
                jitter: s.gateway.jitter,
                rng_seed: node_seed(seed, &spec.id),
            };
            (spec.id.clone(), Node::new(spec.id.clone(), config))
        })
        .collect();

    let links = s.sim_links();
    for (id, link) in links.iter().enumerate() {
        for end in [&link.a, &link.b] {
            if let Some(node) = nodes.get_mut(end) {
                node.attach_link(id, link);
            }
        }
    }
    for r in &s.routes {
        let via = match r.via.as_str() {
            "bundle" => RouteVia::Bundle,
            other => RouteVia::Neighbor(NodeId::new(other).expect("validated")),
        };
        if let Some(node) = nodes.get_mut(&r.node) {
            node.add_route(r.prefix.clone(), &via);
        }
    }

    let mut engine = Engine::new(links);
    for (i, w) in s.workload.iter().enumerate() {
        engine
            .schedule(w.at(), EventKind::Workload(i))
            .expect("clock starts at zero");
    }

    let mut trace = Trace::new();
    let summary = engine.run_until(s.t_end, |engine, event| {
        dispatch(s, seed, &mut nodes, &mut trace, engine, event);
    });
    let metrics = collect_metrics(&trace);
    RunOutput {
        trace,
        metrics,
        summary,
        nodes,
    }
}

fn dispatch(
    s: &Scenario,
    seed: u64,
    nodes: &mut BTreeMap<NodeId, Node>,
    trace: &mut Trace,
    engine: &mut Engine,
    event: Event,
) {
    let now: Millis = engine.clock();
    match event.kind {
        EventKind::Deliver { link, to, frame } => {
            if let Some(node) = nodes.get_mut(&to) {
                let mut ctx = Ctx { engine, trace };
                node.sweep(&mut ctx);
                node.on_frame(link, &frame, &mut ctx);
            }
        }
        EventKind::LinkUp(id) | EventKind::LinkDown(id) => {
            let up = matches!(event.kind, EventKind::LinkUp(_));
            let link = engine.link(id).expect("engine owns its links").clone();
            for end in link.endpoints() {
                let peer = link.peer_of(end).expect("endpoint").to_string();
                let record = if up {
                    TraceEvent::LinkUp { link: id, peer }
                } else {
                    TraceEvent::LinkDown { link: id, peer }
                };
                trace.emit(now, end.as_str(), record);
                if let Some(node) = nodes.get_mut(end) {
                    let mut ctx = Ctx {
                        engine: &mut *engine,
                        trace: &mut *trace,
                    };
                    node.sweep(&mut ctx);
                    if up {
                        node.on_link_up(id, &mut ctx);
                    } else {
                        node.on_link_down(id);
                    }
                }
            }
        }
        EventKind::Timer { node, tag } => {
            if let Some(n) = nodes.get_mut(&node) {
                let mut ctx = Ctx { engine, trace };
                n.sweep(&mut ctx);
                n.on_timer(tag, &mut ctx);
            }
        }
        EventKind::Workload(i) => {
            let Some(w) = s.workload.get(i) else {
                return;
            };
            let Some(node) = nodes.get_mut(w.node()) else {
                return;
            };
            let mut ctx = Ctx { engine, trace };
            node.sweep(&mut ctx);
            match w {
                WorkloadSpec::Publish {
                    prefix,
                    content_name,
                    content_size,
                    carry_content,
                    ..
                } => {
                    let name = content_name.clone().unwrap_or_else(|| prefix.clone());
                    let payload = content_bytes(seed, &name, *content_size);
                    node.publish(prefix.clone(), Data::new(name, payload, 0), *carry_content, &mut ctx);
                }
                WorkloadSpec::Request {
                    name,
                    lifetime_ms,
                    reexpress_interval_ms,
                    max_reexpressions,
                    ..
                } => {
                    let lifetime = lifetime_ms.unwrap_or(s.interest_lifetime_ms);
                    node.start_request(
                        i as u32,
                        name.clone(),
                        lifetime,
                        reexpress_interval_ms.unwrap_or(lifetime),
                        *max_reexpressions,
                        &mut ctx,
                    );
                }
            }
        }
    }
}
