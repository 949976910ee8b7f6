//! Scenario files: TOML description of nodes, links, static routes, gateway
//! settings and workload, plus validation and the built-in set.

mod builtin;
mod random;
mod run;

pub use builtin::{builtin, builtin_names, load_builtin};
pub use random::{random_scenario, RandomParams};
pub use run::{content_bytes, run_scenario, run_scenario_with_seed, RunOutput};

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccn::{Millis, DEFAULT_CS_CAPACITY, DEFAULT_TTL_MS};
use crate::dtn::NodeId;
use crate::gateway::{DEFAULT_BACKOFF_FACTOR, DEFAULT_LIFETIME_MULTIPLIER};
use crate::names::Name;
use crate::sim::{ContactSchedule, Link, LinkKind};

pub const DEFAULT_INTEREST_LIFETIME_MS: Millis = 4000;
pub const DEFAULT_LINK_LATENCY_MS: Millis = 10;
pub const DEFAULT_CONTENT_SIZE: usize = 1024;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown built-in scenario {0:?}")]
    UnknownBuiltin(String),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Ccn,
    Dtn,
    Gateway,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewaySection {
    pub k: u64,
    pub hop_limit: u64,
    pub status_response: bool,
    pub backoff: u64,
    pub jitter: bool,
}

impl Default for GatewaySection {
    fn default() -> Self {
        Self {
            k: DEFAULT_LIFETIME_MULTIPLIER,
            hop_limit: crate::dtn::DEFAULT_HOP_LIMIT,
            status_response: true,
            backoff: DEFAULT_BACKOFF_FACTOR,
            jitter: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: NodeId,
    pub roles: Vec<Role>,
}

impl NodeSpec {
    pub fn has(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }
}

fn default_latency() -> Millis {
    DEFAULT_LINK_LATENCY_MS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub a: NodeId,
    pub b: NodeId,
    #[serde(default = "default_latency")]
    pub latency_ms: Millis,
    pub kind: LinkKind,
    /// `[up, down)` pairs; empty means always up.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<[Millis; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSpec {
    pub node: NodeId,
    pub prefix: Name,
    /// A neighbor id, or `bundle` for the gateway's bundle face.
    pub via: String,
}

fn default_content_size() -> usize {
    DEFAULT_CONTENT_SIZE
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkloadSpec {
    Publish {
        node: NodeId,
        prefix: Name,
        /// Name of the published Data; defaults to the prefix.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        content_name: Option<Name>,
        #[serde(default = "default_content_size")]
        content_size: usize,
        #[serde(default)]
        at: Millis,
        /// Whether the Publish bundle carries the Data or only announces
        /// the prefix.
        #[serde(default = "yes")]
        carry_content: bool,
    },
    Request {
        node: NodeId,
        name: Name,
        #[serde(default)]
        at: Millis,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lifetime_ms: Option<Millis>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reexpress_interval_ms: Option<Millis>,
        #[serde(default)]
        max_reexpressions: u32,
    },
}

impl WorkloadSpec {
    pub fn node(&self) -> &NodeId {
        match self {
            WorkloadSpec::Publish { node, .. } | WorkloadSpec::Request { node, .. } => node,
        }
    }

    pub fn at(&self) -> Millis {
        match self {
            WorkloadSpec::Publish { at, .. } | WorkloadSpec::Request { at, .. } => *at,
        }
    }
}

fn default_cs_capacity() -> usize {
    DEFAULT_CS_CAPACITY
}

fn default_ttl() -> Millis {
    DEFAULT_TTL_MS
}

fn default_lifetime() -> Millis {
    DEFAULT_INTEREST_LIFETIME_MS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    pub t_end: Millis,
    #[serde(default = "default_cs_capacity")]
    pub cs_capacity: usize,
    #[serde(default = "default_ttl")]
    pub default_ttl_ms: Millis,
    #[serde(default = "default_lifetime")]
    pub interest_lifetime_ms: Millis,
    #[serde(default)]
    pub gateway: GatewaySection,
    #[serde(default)]
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub links: Vec<LinkSpec>,
    #[serde(default)]
    pub routes: Vec<RouteSpec>,
    #[serde(default)]
    pub workload: Vec<WorkloadSpec>,
}

impl Scenario {
    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }

    pub fn node(&self, id: &NodeId) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == *id)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        if self.cs_capacity == 0 {
            return Err(invalid("cs_capacity", "must be at least 1"));
        }
        if self.default_ttl_ms == 0 {
            return Err(invalid("default_ttl_ms", "must be positive"));
        }
        if self.interest_lifetime_ms == 0 {
            return Err(invalid("interest_lifetime_ms", "must be positive"));
        }
        if self.gateway.k == 0 {
            return Err(invalid("gateway.k", "must be at least 1"));
        }
        if self.gateway.backoff == 0 {
            return Err(invalid("gateway.backoff", "must be at least 1"));
        }

        let mut nodes: BTreeMap<&NodeId, &NodeSpec> = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if NodeId::new(n.id.as_str()).is_none() {
                return Err(invalid(
                    format!("nodes[{i}].id"),
                    "must be non-empty ASCII letters, digits, '_' or '-'",
                ));
            }
            if nodes.insert(&n.id, n).is_some() {
                return Err(invalid(format!("nodes[{i}].id"), format!("duplicate node {}", n.id)));
            }
            if n.roles.is_empty() {
                return Err(invalid(format!("nodes[{i}].roles"), "at least one role is required"));
            }
            if n.has(Role::Gateway) && !(n.has(Role::Ccn) && n.has(Role::Dtn)) {
                return Err(invalid(format!("nodes[{i}].roles"), "a gateway also needs the ccn and dtn roles"));
            }
        }
        let lookup = |field: String, id: &NodeId| {
            nodes
                .get(id)
                .copied()
                .ok_or_else(|| invalid(field, format!("undeclared node {id}")))
        };

        let mut ccn_neighbors: BTreeSet<(&NodeId, &NodeId)> = BTreeSet::new();
        for (i, l) in self.links.iter().enumerate() {
            let a = lookup(format!("links[{i}].a"), &l.a)?;
            let b = lookup(format!("links[{i}].b"), &l.b)?;
            if l.a == l.b {
                return Err(invalid(format!("links[{i}].b"), "a link needs two distinct endpoints"));
            }
            let need = match l.kind {
                LinkKind::Ccn => Role::Ccn,
                LinkKind::Dtn => Role::Dtn,
            };
            for (end, spec) in [("a", a), ("b", b)] {
                if !spec.has(need) {
                    return Err(invalid(
                        format!("links[{i}].{end}"),
                        format!("node {} lacks the {need:?} role this link needs", spec.id).to_lowercase(),
                    ));
                }
            }
            self.schedule_of(i)?;
            if l.kind == LinkKind::Ccn {
                ccn_neighbors.insert((&l.a, &l.b));
                ccn_neighbors.insert((&l.b, &l.a));
            }
        }

        for (i, r) in self.routes.iter().enumerate() {
            let n = lookup(format!("routes[{i}].node"), &r.node)?;
            if !n.has(Role::Ccn) {
                return Err(invalid(format!("routes[{i}].node"), "routes need a ccn node"));
            }
            if r.via == "bundle" {
                if !n.has(Role::Gateway) {
                    return Err(invalid(format!("routes[{i}].via"), "only gateways have a bundle face"));
                }
            } else {
                let via = NodeId::new(r.via.as_str())
                    .ok_or_else(|| invalid(format!("routes[{i}].via"), "not a node id or \"bundle\""))?;
                if !ccn_neighbors.contains(&(&r.node, &via)) {
                    return Err(invalid(
                        format!("routes[{i}].via"),
                        format!("{via} is not a ccn neighbor of {}", r.node),
                    ));
                }
            }
        }

        for (i, w) in self.workload.iter().enumerate() {
            let n = lookup(format!("workload[{i}].node"), w.node())?;
            if w.at() > self.t_end {
                return Err(invalid(format!("workload[{i}].at"), "scheduled after t_end"));
            }
            match w {
                WorkloadSpec::Publish {
                    prefix, content_name, ..
                } => {
                    if !(n.has(Role::Ccn) || n.has(Role::Dtn)) {
                        return Err(invalid(format!("workload[{i}].node"), "publisher needs ccn or dtn"));
                    }
                    if let Some(c) = content_name {
                        if !prefix.is_prefix_of(c) {
                            return Err(invalid(
                                format!("workload[{i}].content_name"),
                                format!("{c} is not under prefix {prefix}"),
                            ));
                        }
                    }
                }
                WorkloadSpec::Request {
                    lifetime_ms,
                    reexpress_interval_ms,
                    ..
                } => {
                    if !n.has(Role::Ccn) {
                        return Err(invalid(format!("workload[{i}].node"), "requests need a ccn node"));
                    }
                    if *lifetime_ms == Some(0) {
                        return Err(invalid(format!("workload[{i}].lifetime_ms"), "must be positive"));
                    }
                    if *reexpress_interval_ms == Some(0) {
                        return Err(invalid(format!("workload[{i}].reexpress_interval_ms"), "must be positive"));
                    }
                }
            }
        }
        Ok(())
    }

    fn schedule_of(&self, i: usize) -> Result<ContactSchedule, ScenarioError> {
        let pairs = self.links[i].schedule.iter().map(|[u, d]| (*u, *d)).collect();
        ContactSchedule::new(pairs).map_err(|e| {
            let j = match e {
                crate::sim::ScheduleError::EmptyInterval(j) | crate::sim::ScheduleError::Overlap(j) => j,
            };
            invalid(format!("links[{i}].schedule[{j}]"), e.to_string())
        })
    }

    /// Simulator links; call on a validated scenario.
    pub fn sim_links(&self) -> Vec<Link> {
        (0..self.links.len())
            .map(|i| {
                let l = &self.links[i];
                Link {
                    a: l.a.clone(),
                    b: l.b.clone(),
                    latency_ms: l.latency_ms,
                    kind: l.kind,
                    schedule: self.schedule_of(i).expect("validated"),
                }
            })
            .collect()
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_toml(&text)
}

/// A built-in name, or else a file path. A bare word that is neither is
/// reported as an unknown built-in.
pub fn resolve_scenario(arg: &str) -> Result<Scenario, ScenarioError> {
    if builtin(arg).is_some() {
        return load_builtin(arg);
    }
    let path = Path::new(arg);
    let bare = path.components().count() == 1 && path.extension().is_none();
    if bare && !path.exists() {
        return Err(ScenarioError::UnknownBuiltin(arg.to_string()));
    }
    load_scenario(path)
}
