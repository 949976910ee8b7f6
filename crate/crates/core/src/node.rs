//! A simulated host: optional CCN forwarder, bundle node and gateway glued
//! together, plus the local consumer and producer applications.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ccn::{CcnConfig, CcnNode, CcnNote, FaceId, FaceKind, Millis, Outcome};
use crate::dtn::{DropReason, DtnAction, DtnConfig, DtnNode, NodeId};
use crate::gateway::{
    carried_data, emit_status_response, interest_to_bpq_query, publish_prefix, query_interest, Gateway,
    GatewayConfig, GatewayDrop, Repository,
};
use crate::names::{bpq_value_to_name, Name};
use crate::sim::{Engine, EventKind, Link, LinkId, LinkKind, TxResult};
use crate::trace::{Trace, TraceEvent};
use crate::wire::{
    decode_frame_with_diagnostics, encode_bundle, encode_ccn_packet, BpqKind, Bundle, CcnPacket, Data, Frame,
    Interest,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Roles {
    pub ccn: bool,
    pub dtn: bool,
    pub gateway: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeConfig {
    pub roles: Roles,
    pub ccn: CcnConfig,
    pub gateway: GatewayConfig,
    pub interest_lifetime_ms: Millis,
    /// Re-expression timers get ±10% jitter.
    pub jitter: bool,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RouteVia {
    Neighbor(NodeId),
    Bundle,
}

/// Mutable simulator state a node needs while handling one event.
pub struct Ctx<'a> {
    pub engine: &'a mut Engine,
    pub trace: &'a mut Trace,
}

impl Ctx<'_> {
    fn now(&self) -> Millis {
        self.engine.clock()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumerRequest {
    pub id: u32,
    pub name: Name,
    pub lifetime_ms: Millis,
    pub interval_ms: Millis,
    pub max_reexpressions: u32,
    pub attempts: u32,
    pub satisfied: bool,
    generation: u32,
}

struct TxDesc {
    packet: &'static str,
    name: Option<String>,
    bundle: Option<String>,
    bpq: Option<String>,
    hop_limit: Option<u64>,
}

fn face_list(faces: &[FaceId]) -> Vec<String> {
    faces.iter().map(FaceId::to_string).collect()
}

fn value_text(b: &Bundle) -> Option<String> {
    b.bpq.as_ref().map(|q| String::from_utf8_lossy(&q.value).into_owned())
}

#[derive(Debug, Clone)]
pub struct Node {
    id: NodeId,
    config: NodeConfig,
    ccn: Option<CcnNode>,
    dtn: Option<DtnNode>,
    gateway: Option<Gateway>,
    producer_repo: Repository,
    consumer_face: Option<FaceId>,
    producer_face: Option<FaceId>,
    link_faces: BTreeMap<FaceId, (LinkId, NodeId)>,
    face_by_link: BTreeMap<LinkId, FaceId>,
    dtn_links: BTreeMap<LinkId, NodeId>,
    dtn_up: BTreeSet<LinkId>,
    requests: Vec<ConsumerRequest>,
    rng: ChaCha8Rng,
}

impl Node {
    pub fn new(id: NodeId, config: NodeConfig) -> Self {
        let mut ccn = config.roles.ccn.then(|| CcnNode::new(config.ccn));
        let consumer_face = ccn.as_mut().map(|c| c.add_face(FaceKind::App));
        let producer_face = ccn.as_mut().map(|c| c.add_face(FaceKind::App));
        let gateway = match (&mut ccn, config.roles.gateway && config.roles.dtn) {
            (Some(c), true) => Some(Gateway::new(config.gateway.clone(), c.add_face(FaceKind::BundleDaemon))),
            _ => None,
        };
        let dtn = config.roles.dtn.then(|| {
            DtnNode::new(
                id.clone(),
                DtnConfig {
                    default_hop_limit: config.gateway.default_hop_limit,
                },
                gateway.is_some(),
            )
        });
        Self {
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            id,
            config,
            ccn,
            dtn,
            gateway,
            producer_repo: Repository::default(),
            consumer_face,
            producer_face,
            link_faces: BTreeMap::new(),
            face_by_link: BTreeMap::new(),
            dtn_links: BTreeMap::new(),
            dtn_up: BTreeSet::new(),
            requests: Vec::new(),
        }
    }

    pub fn id(&self) -> &NodeId {
        &self.id
    }

    pub fn config(&self) -> &NodeConfig {
        &self.config
    }

    pub fn ccn(&self) -> Option<&CcnNode> {
        self.ccn.as_ref()
    }

    pub fn dtn(&self) -> Option<&DtnNode> {
        self.dtn.as_ref()
    }

    pub fn gateway(&self) -> Option<&Gateway> {
        self.gateway.as_ref()
    }

    pub fn requests(&self) -> &[ConsumerRequest] {
        &self.requests
    }

    pub fn consumer_face(&self) -> Option<FaceId> {
        self.consumer_face
    }

    fn repo(&self) -> &Repository {
        self.gateway.as_ref().map_or(&self.producer_repo, |g| &g.repo)
    }

    fn repo_mut(&mut self) -> &mut Repository {
        match &mut self.gateway {
            Some(g) => &mut g.repo,
            None => &mut self.producer_repo,
        }
    }

    /// True if any of this node's stores can serve `name` at `now`.
    pub fn holds_content(&self, name: &Name, now: Millis) -> bool {
        let in_cs = self
            .ccn
            .as_ref()
            .is_some_and(|c| c.cs.names().any(|n| name.is_prefix_of(n) && c.cs.get(n).is_some_and(|e| now < e.expires_at)));
        let in_repo = self.repo().get(name, now).is_some();
        let in_cache = self
            .dtn
            .as_ref()
            .is_some_and(|d| d.holds_content(crate::names::name_to_bpq_value(name).as_slice(), now));
        in_cs || in_repo || in_cache
    }

    pub fn attach_link(&mut self, id: LinkId, link: &Link) {
        let Some(peer) = link.peer_of(&self.id).cloned() else {
            return;
        };
        match link.kind {
            LinkKind::Ccn => {
                if let Some(ccn) = &mut self.ccn {
                    let face = ccn.add_face(FaceKind::Link);
                    ccn.set_face_up(face, false);
                    self.link_faces.insert(face, (id, peer));
                    self.face_by_link.insert(id, face);
                }
            }
            LinkKind::Dtn => {
                self.dtn_links.insert(id, peer);
            }
        }
    }

    /// Installs a static FIB entry. Returns false if the next hop is not
    /// reachable from this node.
    pub fn add_route(&mut self, prefix: Name, via: &RouteVia) -> bool {
        let face = match via {
            RouteVia::Bundle => self.gateway.as_ref().map(|g| g.bundle_face),
            RouteVia::Neighbor(peer) => self
                .link_faces
                .iter()
                .find(|(_, (_, p))| p == peer)
                .map(|(f, _)| *f),
        };
        match (face, &mut self.ccn) {
            (Some(face), Some(ccn)) => {
                ccn.add_route(prefix, face);
                true
            }
            _ => false,
        }
    }

    fn trace(&self, ctx: &mut Ctx<'_>, event: TraceEvent) {
        let now = ctx.now();
        ctx.trace.emit(now, self.id.as_str(), event);
    }

    /// Drops expired PIT, CS, repository and bundle-cache state.
    pub fn sweep(&mut self, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        if let Some(ccn) = &mut self.ccn {
            let notes = ccn.sweep_timeouts(now);
            self.trace_notes(None, notes, ctx);
        }
        if let Some(dtn) = &mut self.dtn {
            for id in dtn.sweep_expired(now) {
                self.trace(
                    ctx,
                    TraceEvent::BundleExpired {
                        bundle: id.to_string(),
                        stage: "sweep".into(),
                    },
                );
            }
        }
        self.repo_mut().sweep(now);
    }

    fn trace_notes(&self, arrival: Option<FaceId>, notes: Vec<CcnNote>, ctx: &mut Ctx<'_>) {
        for note in notes {
            let event = match note {
                CcnNote::DuplicateNonce { name, face } => TraceEvent::DupNonce {
                    name: name.to_string(),
                    face: face.to_string(),
                },
                CcnNote::CsHit { name, face } => TraceEvent::CsHit {
                    name: name.to_string(),
                    face: face.to_string(),
                },
                CcnNote::PitAggregated { name, face } => TraceEvent::PitAggregate {
                    name: name.to_string(),
                    face: face.to_string(),
                },
                CcnNote::PitCreated { name, out_faces } => TraceEvent::PitCreate {
                    name: name.to_string(),
                    face: arrival.map(|f| f.to_string()).unwrap_or_default(),
                    out_faces: face_list(&out_faces),
                },
                CcnNote::NoRoute { name } => TraceEvent::NoRoute { name: name.to_string() },
                CcnNote::PitSatisfied { name, faces } => TraceEvent::PitSatisfied {
                    name: name.to_string(),
                    faces: face_list(&faces),
                },
                CcnNote::UnsolicitedData { name, face } => TraceEvent::UnsolicitedData {
                    name: name.to_string(),
                    face: face.to_string(),
                },
                CcnNote::StatusForwarded { name, faces } => TraceEvent::StatusRelayed {
                    name: name.to_string(),
                    faces: face_list(&faces),
                },
                CcnNote::StatusUnmatched { name } => TraceEvent::StatusRelayed {
                    name: name.to_string(),
                    faces: Vec::new(),
                },
                CcnNote::PitExpired { name } => TraceEvent::PitExpired { name: name.to_string() },
                CcnNote::CsExpired { name } => TraceEvent::CsExpired { name: name.to_string() },
            };
            self.trace(ctx, event);
        }
    }

    fn send(&mut self, link: LinkId, bytes: Vec<u8>, desc: TxDesc, ctx: &mut Ctx<'_>) {
        let to = ctx
            .engine
            .link(link)
            .and_then(|l| l.peer_of(&self.id))
            .map(|p| p.to_string())
            .unwrap_or_default();
        let result = ctx
            .engine
            .transmit(link, &self.id, bytes)
            .expect("nodes only send on their own links");
        let TxDesc {
            packet,
            name,
            bundle,
            bpq,
            hop_limit,
        } = desc;
        let event = match result {
            TxResult::Scheduled { .. } => TraceEvent::Tx {
                link,
                to,
                packet: packet.into(),
                name,
                bundle,
                bpq,
                hop_limit,
            },
            TxResult::LinkDown => TraceEvent::TxDrop {
                link,
                to,
                packet: packet.into(),
                name,
                bundle,
                bpq,
                hop_limit,
            },
        };
        self.trace(ctx, event);
    }

    /// Runs a packet through the local forwarder as if it arrived on `face`.
    fn ccn_input(&mut self, face: FaceId, packet: CcnPacket, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        let Some(ccn) = &mut self.ccn else {
            return;
        };
        let Outcome { emissions, notes } = match &packet {
            CcnPacket::Interest(i) => ccn.on_interest(face, i, now),
            CcnPacket::Data(d) => ccn.on_data(face, d, now),
            CcnPacket::StatusResponse(s) => ccn.on_status_response(face, s),
        };
        self.trace_notes(Some(face), notes, ctx);
        for (out, p) in emissions {
            self.emit(out, p, ctx);
        }
    }

    /// Handles a packet the forwarder sent out on `face`.
    fn emit(&mut self, face: FaceId, packet: CcnPacket, ctx: &mut Ctx<'_>) {
        if let Some(&(link, _)) = self.link_faces.get(&face) {
            let desc = TxDesc {
                packet: packet.kind_str(),
                name: Some(packet.name().to_string()),
                bundle: None,
                bpq: None,
                hop_limit: None,
            };
            self.send(link, encode_ccn_packet(&packet), desc, ctx);
        } else if Some(face) == self.consumer_face {
            self.consumer_receive(packet, ctx);
        } else if Some(face) == self.producer_face {
            if let CcnPacket::Interest(i) = packet {
                self.producer_answer(&i, ctx);
            }
        } else if self.gateway.as_ref().is_some_and(|g| g.bundle_face == face) {
            match packet {
                CcnPacket::Interest(i) => self.gateway_interest(&i, ctx),
                CcnPacket::Data(d) => self.gateway_data(d, ctx),
                CcnPacket::StatusResponse(_) => {}
            }
        }
    }

    fn producer_answer(&mut self, interest: &Interest, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        let Some(data) = self.repo().get(&interest.name, now).cloned() else {
            return;
        };
        self.trace(
            ctx,
            TraceEvent::ProducerReply {
                name: data.name.to_string(),
            },
        );
        let face = self.producer_face.expect("producer face exists with ccn");
        self.ccn_input(face, CcnPacket::Data(data), ctx);
    }

    fn consumer_receive(&mut self, packet: CcnPacket, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        match packet {
            CcnPacket::Data(d) => {
                let hits: Vec<usize> = (0..self.requests.len())
                    .filter(|&k| !self.requests[k].satisfied && self.requests[k].name.is_prefix_of(&d.name))
                    .collect();
                for k in hits {
                    self.requests[k].satisfied = true;
                    let id = self.requests[k].id;
                    self.trace(
                        ctx,
                        TraceEvent::AppData {
                            request: id,
                            name: d.name.to_string(),
                        },
                    );
                }
            }
            CcnPacket::StatusResponse(s) => {
                let backoff = self.config.gateway.backoff_factor.max(1);
                let hits: Vec<usize> = (0..self.requests.len())
                    .filter(|&k| !self.requests[k].satisfied && self.requests[k].name == s.name)
                    .collect();
                for k in hits {
                    let req = &mut self.requests[k];
                    req.interval_ms = req.interval_ms.saturating_mul(backoff);
                    let (id, interval) = (req.id, req.interval_ms);
                    self.trace(
                        ctx,
                        TraceEvent::AppStatus {
                            request: id,
                            name: s.name.to_string(),
                            code: s.code,
                            next_interval_ms: interval,
                        },
                    );
                    if self.requests[k].attempts <= self.requests[k].max_reexpressions {
                        self.schedule_reexpression(k, now, ctx);
                    }
                }
            }
            CcnPacket::Interest(_) => {}
        }
    }

    fn jittered(&mut self, interval: Millis) -> Millis {
        let delta = interval / 10;
        if !self.config.jitter || delta == 0 {
            return interval;
        }
        interval - delta + self.rng.random_range(0..=2 * delta)
    }

    fn schedule_reexpression(&mut self, k: usize, now: Millis, ctx: &mut Ctx<'_>) {
        let interval = self.requests[k].interval_ms;
        let delay = self.jittered(interval);
        let req = &mut self.requests[k];
        req.generation = req.generation.wrapping_add(1);
        let tag = ((k as u64) << 32) | u64::from(req.generation);
        ctx.engine
            .schedule(
                now.saturating_add(delay),
                EventKind::Timer {
                    node: self.id.clone(),
                    tag,
                },
            )
            .expect("timers are scheduled forward");
    }

    pub fn start_request(
        &mut self,
        id: u32,
        name: Name,
        lifetime_ms: Millis,
        interval_ms: Millis,
        max_reexpressions: u32,
        ctx: &mut Ctx<'_>,
    ) {
        if self.ccn.is_none() {
            return;
        }
        self.trace(
            ctx,
            TraceEvent::Request {
                request: id,
                name: name.to_string(),
            },
        );
        self.requests.push(ConsumerRequest {
            id,
            name,
            lifetime_ms,
            interval_ms,
            max_reexpressions,
            attempts: 0,
            satisfied: false,
            generation: 0,
        });
        self.express(self.requests.len() - 1, ctx);
    }

    fn express(&mut self, k: usize, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        let nonce: [u8; 8] = self.rng.random();
        self.requests[k].attempts += 1;
        let req = &self.requests[k];
        let interest = Interest::new(req.name.clone(), nonce, req.lifetime_ms.max(1)).expect("lifetime is positive");
        let (id, attempt, more) = (req.id, req.attempts, req.attempts <= req.max_reexpressions);
        if more {
            self.schedule_reexpression(k, now, ctx);
        }
        self.trace(
            ctx,
            TraceEvent::AppInterest {
                request: id,
                name: interest.name.to_string(),
                attempt,
            },
        );
        let face = self.consumer_face.expect("requests need a ccn role");
        self.ccn_input(face, CcnPacket::Interest(interest), ctx);
    }

    pub fn on_timer(&mut self, tag: u64, ctx: &mut Ctx<'_>) {
        let k = (tag >> 32) as usize;
        let generation = tag as u32;
        let live = self
            .requests
            .get(k)
            .is_some_and(|r| r.generation == generation && !r.satisfied);
        if live {
            self.express(k, ctx);
        }
    }

    pub fn publish(&mut self, prefix: Name, data: Data, carry_content: bool, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        self.trace(
            ctx,
            TraceEvent::Publish {
                prefix: prefix.to_string(),
                content: Some(data.name.to_string()),
            },
        );
        if let (Some(ccn), Some(face)) = (&mut self.ccn, self.producer_face) {
            ccn.add_route(prefix.clone(), face);
            self.repo_mut().put(data.clone(), Millis::MAX);
        }
        if self.dtn.is_some() {
            let content = (carry_content || self.ccn.is_none()).then_some(&data);
            let dtn = self.dtn.as_mut().expect("checked");
            let ts = dtn.next_timestamp(now);
            let bundle = publish_prefix(
                &self.config.gateway,
                &prefix,
                content,
                dtn.eid(),
                ts,
                self.config.interest_lifetime_ms,
            );
            self.trace(
                ctx,
                TraceEvent::PublishCreated {
                    bundle: bundle.id().to_string(),
                    prefix: prefix.to_string(),
                    with_content: content.is_some(),
                },
            );
            self.dtn_receive(None, bundle, ctx);
        }
    }

    /// An Interest left the forwarder on the bundle face.
    fn gateway_interest(&mut self, interest: &Interest, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        let Some(bundle_face) = self.gateway.as_ref().map(|g| g.bundle_face) else {
            return;
        };
        let hit = self.repo().get(&interest.name, now).cloned();
        if let Some(data) = hit {
            self.trace(
                ctx,
                TraceEvent::RepoHit {
                    name: data.name.to_string(),
                    query: None,
                },
            );
            self.ccn_input(bundle_face, CcnPacket::Data(data), ctx);
            return;
        }
        let outstanding = self
            .gateway
            .as_ref()
            .and_then(|g| g.outstanding_query(&interest.name, now))
            .map(|id| id.to_string());
        if let Some(outstanding) = outstanding {
            self.trace(
                ctx,
                TraceEvent::QuerySuppressed {
                    name: interest.name.to_string(),
                    outstanding,
                },
            );
        } else if let (Some(gw), Some(dtn)) = (&mut self.gateway, &mut self.dtn) {
            let ts = dtn.next_timestamp(now);
            let query = interest_to_bpq_query(&gw.config, interest, dtn.eid(), ts);
            gw.record_outstanding(interest.name.clone(), &query);
            self.trace(
                ctx,
                TraceEvent::QueryCreated {
                    bundle: query.id().to_string(),
                    name: interest.name.to_string(),
                },
            );
            self.dtn_receive(None, query, ctx);
        }

        let Some(gw) = &self.gateway else {
            return;
        };
        let cfg = gw.config.clone();
        let in_faces: Vec<FaceId> = self
            .ccn
            .as_ref()
            .and_then(|c| c.pit.get(&interest.name))
            .map(|e| e.in_faces.iter().copied().filter(|f| *f != bundle_face).collect())
            .unwrap_or_default();
        for face in in_faces {
            if let Some((out, packet)) = emit_status_response(&cfg, face, &interest.name) {
                self.trace(
                    ctx,
                    TraceEvent::StatusSent {
                        name: interest.name.to_string(),
                        face: out.to_string(),
                    },
                );
                self.emit(out, packet, ctx);
            }
        }
    }

    /// Data left the forwarder on the bundle face: keep it and answer any
    /// DTN queries that were injected for it.
    fn gateway_data(&mut self, data: Data, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        let ttl = if data.freshness_ms == 0 {
            self.config.ccn.default_ttl_ms
        } else {
            data.freshness_ms
        };
        self.repo_mut().put(data.clone(), now.saturating_add(ttl));
        self.answer_pending(&data, ctx);
    }

    fn answer_pending(&mut self, data: &Data, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        if self.dtn.is_none() {
            return;
        }
        let Some(gw) = &mut self.gateway else {
            return;
        };
        let queries = gw.take_pending_for(&data.name, now);
        let payload = encode_ccn_packet(&CcnPacket::Data(data.clone()));
        for query in queries {
            let dtn = self.dtn.as_mut().expect("checked");
            let response = dtn.make_response(&query, payload.clone(), BpqKind::Response, now);
            dtn.mark_answered(&query.id());
            self.trace(
                ctx,
                TraceEvent::ResponseCreated {
                    bundle: response.id().to_string(),
                    query: query.id().to_string(),
                    name: data.name.to_string(),
                },
            );
            self.dtn_receive(None, response, ctx);
        }
    }

    fn gw_drop(&self, bundle: &Bundle, reason: GatewayDrop, ctx: &mut Ctx<'_>) {
        self.trace(
            ctx,
            TraceEvent::GwDrop {
                bundle: bundle.id().to_string(),
                reason: reason.as_str().into(),
            },
        );
    }

    /// Keeps content that arrived in a bundle and hands it to the forwarder.
    fn store_from_bundle(&mut self, bundle: &Bundle, data: Data, ctx: &mut Ctx<'_>) {
        self.repo_mut().put(data.clone(), bundle.expires_at());
        self.trace(
            ctx,
            TraceEvent::GwStore {
                bundle: bundle.id().to_string(),
                name: data.name.to_string(),
            },
        );
        if let Some(face) = self.gateway.as_ref().map(|g| g.bundle_face) {
            self.ccn_input(face, CcnPacket::Data(data.clone()), ctx);
        }
        self.answer_pending(&data, ctx);
    }

    fn handle_bpq_bundle(&mut self, bundle: Bundle, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        let Some(bundle_face) = self.gateway.as_ref().map(|g| g.bundle_face) else {
            return;
        };
        match bundle.bpq_kind() {
            Some(BpqKind::Publish) => {
                let value = &bundle.bpq.as_ref().expect("kind implies block").value;
                let Ok(prefix) = bpq_value_to_name(value) else {
                    return self.gw_drop(&bundle, GatewayDrop::BadValue, ctx);
                };
                let learned = self
                    .ccn
                    .as_mut()
                    .is_some_and(|c| c.add_route(prefix.clone(), bundle_face));
                if learned {
                    self.trace(
                        ctx,
                        TraceEvent::FibLearned {
                            prefix: prefix.to_string(),
                        },
                    );
                }
                match carried_data(&bundle) {
                    Ok(Some(data)) => self.store_from_bundle(&bundle, data, ctx),
                    Ok(None) => {}
                    Err(reason) => self.gw_drop(&bundle, reason, ctx),
                }
            }
            Some(BpqKind::Query) => {
                let interest = match query_interest(&bundle) {
                    Ok(i) => i,
                    Err(reason) => return self.gw_drop(&bundle, reason, ctx),
                };
                let hit = self.repo().get(&interest.name, now).cloned();
                if let Some(data) = hit {
                    self.trace(
                        ctx,
                        TraceEvent::RepoHit {
                            name: data.name.to_string(),
                            query: Some(bundle.id().to_string()),
                        },
                    );
                    let dtn = self.dtn.as_mut().expect("gateways have a bundle node");
                    let payload = encode_ccn_packet(&CcnPacket::Data(data.clone()));
                    let response = dtn.make_response(&bundle, payload, BpqKind::Response, now);
                    dtn.mark_answered(&bundle.id());
                    self.trace(
                        ctx,
                        TraceEvent::ResponseCreated {
                            bundle: response.id().to_string(),
                            query: bundle.id().to_string(),
                            name: data.name.to_string(),
                        },
                    );
                    self.dtn_receive(None, response, ctx);
                } else {
                    let gw = self.gateway.as_mut().expect("checked");
                    gw.add_pending(bundle.clone(), interest.name.clone());
                    self.trace(
                        ctx,
                        TraceEvent::QueryInjected {
                            query: bundle.id().to_string(),
                            name: interest.name.to_string(),
                        },
                    );
                    self.ccn_input(bundle_face, CcnPacket::Interest(interest), ctx);
                }
            }
            Some(BpqKind::Response | BpqKind::ResponseDoNotFragment) => match carried_data(&bundle) {
                Ok(Some(data)) => {
                    let own = self.dtn.as_ref().is_some_and(|d| *d.eid() == bundle.destination);
                    if own {
                        if let (Some(gw), Ok(name)) = (
                            &mut self.gateway,
                            bpq_value_to_name(&bundle.bpq.as_ref().expect("kind implies block").value),
                        ) {
                            gw.clear_outstanding(&name);
                        }
                    }
                    self.store_from_bundle(&bundle, data, ctx);
                }
                Ok(None) => self.gw_drop(&bundle, GatewayDrop::PayloadDecode, ctx),
                Err(reason) => self.gw_drop(&bundle, reason, ctx),
            },
            None => {}
        }
    }

    fn dtn_receive(&mut self, from: Option<&NodeId>, bundle: Bundle, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        let Some(dtn) = &mut self.dtn else {
            return;
        };
        let actions = dtn.receive_bundle(from, bundle, now);
        let from_text = from.map(NodeId::to_string);
        for action in actions {
            match action {
                DtnAction::Stored(id) => {
                    let kind = self
                        .dtn
                        .as_ref()
                        .and_then(|d| d.cached(&id))
                        .and_then(|e| e.bundle.bpq_kind())
                        .map(|k| k.as_str().to_string());
                    self.trace(
                        ctx,
                        TraceEvent::BundleStored {
                            bundle: id.to_string(),
                            kind,
                            from: from_text.clone(),
                        },
                    );
                }
                DtnAction::Dropped { bundle, reason } => {
                    let event = match reason {
                        DropReason::Duplicate => TraceEvent::BundleDup {
                            bundle: bundle.to_string(),
                            from: from_text.clone(),
                        },
                        DropReason::Expired => TraceEvent::BundleExpired {
                            bundle: bundle.to_string(),
                            stage: "receive".into(),
                        },
                    };
                    self.trace(ctx, event);
                }
                DtnAction::Responded {
                    query,
                    matched,
                    response,
                } => {
                    let name = value_text(&response).unwrap_or_default();
                    self.trace(
                        ctx,
                        TraceEvent::BpqHit {
                            query: query.to_string(),
                            matched: matched.to_string(),
                            name: name.clone(),
                        },
                    );
                    self.trace(
                        ctx,
                        TraceEvent::ResponseCreated {
                            bundle: response.id().to_string(),
                            query: query.to_string(),
                            name,
                        },
                    );
                    let own = self.dtn.as_ref().is_some_and(|d| *d.eid() == response.destination);
                    if !own {
                        self.trace(
                            ctx,
                            TraceEvent::BundleStored {
                                bundle: response.id().to_string(),
                                kind: response.bpq_kind().map(|k| k.as_str().to_string()),
                                from: None,
                            },
                        );
                    }
                    if own && self.gateway.is_some() {
                        self.trace(
                            ctx,
                            TraceEvent::GwDeliver {
                                bundle: response.id().to_string(),
                                kind: response.bpq_kind().map(|k| k.as_str().to_string()),
                            },
                        );
                        self.handle_bpq_bundle(response, ctx);
                    }
                }
                DtnAction::QueryRetired(id) => self.trace(ctx, TraceEvent::QueryRetired { bundle: id.to_string() }),
                DtnAction::DeliverToGateway(b) => {
                    self.trace(
                        ctx,
                        TraceEvent::GwDeliver {
                            bundle: b.id().to_string(),
                            kind: b.bpq_kind().map(|k| k.as_str().to_string()),
                        },
                    );
                    self.handle_bpq_bundle(b, ctx);
                }
            }
        }
        self.push_to_neighbors(ctx);
    }

    /// Offers the cache to every neighbor currently in contact.
    fn push_to_neighbors(&mut self, ctx: &mut Ctx<'_>) {
        let now = ctx.now();
        let up: Vec<(LinkId, NodeId)> = self
            .dtn_up
            .iter()
            .filter_map(|l| self.dtn_links.get(l).map(|p| (*l, p.clone())))
            .collect();
        for (link, peer) in up {
            let Some(dtn) = &mut self.dtn else {
                return;
            };
            for bundle in dtn.on_contact_up(&peer, now) {
                let desc = TxDesc {
                    packet: "bundle",
                    name: value_text(&bundle),
                    bundle: Some(bundle.id().to_string()),
                    bpq: bundle.bpq_kind().map(|k| k.as_str().to_string()),
                    hop_limit: Some(bundle.hop_limit),
                };
                let bytes = encode_bundle(&bundle).expect("cached bundles are well formed");
                self.send(link, bytes, desc, ctx);
            }
        }
    }

    pub fn on_link_up(&mut self, link: LinkId, ctx: &mut Ctx<'_>) {
        if let Some(&face) = self.face_by_link.get(&link) {
            if let Some(ccn) = &mut self.ccn {
                ccn.set_face_up(face, true);
            }
        }
        if self.dtn_links.contains_key(&link) && self.dtn.is_some() {
            self.dtn_up.insert(link);
            self.push_to_neighbors(ctx);
        }
    }

    pub fn on_link_down(&mut self, link: LinkId) {
        if let Some(&face) = self.face_by_link.get(&link) {
            if let Some(ccn) = &mut self.ccn {
                ccn.set_face_up(face, false);
            }
        }
        self.dtn_up.remove(&link);
    }

    pub fn on_frame(&mut self, link: LinkId, frame: &[u8], ctx: &mut Ctx<'_>) {
        let (frame, diag) = match decode_frame_with_diagnostics(frame) {
            Ok(ok) => ok,
            Err(e) => {
                return self.trace(
                    ctx,
                    TraceEvent::DecodeError {
                        link,
                        error: e.to_string(),
                    },
                )
            }
        };
        if diag.non_minimal_sdnv {
            self.trace(ctx, TraceEvent::NonMinimalSdnv { link });
        }
        match frame {
            Frame::Ccn(packet) => {
                if let Some(&face) = self.face_by_link.get(&link) {
                    self.ccn_input(face, packet, ctx);
                }
            }
            Frame::Bundle(bundle) => {
                let from = self.dtn_links.get(&link).cloned();
                if from.is_some() {
                    self.dtn_receive(from.as_ref(), bundle, ctx);
                }
            }
        }
    }
}
