//! Structured run trace: one JSON object per line with `t`, `node`,
//! `event` and event-specific fields.

use serde::{Deserialize, Serialize};

use crate::ccn::Millis;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: Millis,
    pub node: String,
    #[serde(flatten)]
    pub event: TraceEvent,
}

/// Names are canonical URI text, bundle ids are `source#time.seq`, faces
/// are `link<n>`, `app<n>` or `bundle<n>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Publish {
        prefix: String,
        content: Option<String>,
    },
    Request {
        request: u32,
        name: String,
    },
    AppInterest {
        request: u32,
        name: String,
        attempt: u32,
    },
    AppData {
        request: u32,
        name: String,
    },
    AppStatus {
        request: u32,
        name: String,
        code: u16,
        next_interval_ms: u64,
    },
    ProducerReply {
        name: String,
    },
    CsHit {
        name: String,
        face: String,
    },
    PitAggregate {
        name: String,
        face: String,
    },
    PitCreate {
        name: String,
        face: String,
        out_faces: Vec<String>,
    },
    DupNonce {
        name: String,
        face: String,
    },
    NoRoute {
        name: String,
    },
    UnsolicitedData {
        name: String,
        face: String,
    },
    PitSatisfied {
        name: String,
        faces: Vec<String>,
    },
    PitExpired {
        name: String,
    },
    CsExpired {
        name: String,
    },
    StatusSent {
        name: String,
        face: String,
    },
    StatusRelayed {
        name: String,
        faces: Vec<String>,
    },
    BundleStored {
        bundle: String,
        kind: Option<String>,
        from: Option<String>,
    },
    BundleDup {
        bundle: String,
        from: Option<String>,
    },
    BundleExpired {
        bundle: String,
        stage: String,
    },
    BpqHit {
        query: String,
        matched: String,
        name: String,
    },
    ResponseCreated {
        bundle: String,
        query: String,
        name: String,
    },
    QueryCreated {
        bundle: String,
        name: String,
    },
    QuerySuppressed {
        name: String,
        outstanding: String,
    },
    QueryRetired {
        bundle: String,
    },
    PublishCreated {
        bundle: String,
        prefix: String,
        with_content: bool,
    },
    GwDeliver {
        bundle: String,
        kind: Option<String>,
    },
    QueryInjected {
        query: String,
        name: String,
    },
    FibLearned {
        prefix: String,
    },
    GwStore {
        bundle: String,
        name: String,
    },
    RepoHit {
        name: String,
        query: Option<String>,
    },
    GwDrop {
        bundle: String,
        reason: String,
    },
    Tx {
        link: usize,
        to: String,
        packet: String,
        name: Option<String>,
        bundle: Option<String>,
        bpq: Option<String>,
        hop_limit: Option<u64>,
    },
    TxDrop {
        link: usize,
        to: String,
        packet: String,
        name: Option<String>,
        bundle: Option<String>,
        bpq: Option<String>,
        hop_limit: Option<u64>,
    },
    LinkUp {
        link: usize,
        peer: String,
    },
    LinkDown {
        link: usize,
        peer: String,
    },
    DecodeError {
        link: usize,
        error: String,
    },
    NonMinimalSdnv {
        link: usize,
    },
}

impl TraceEvent {
    pub fn name(&self) -> &'static str {
        match self {
            TraceEvent::Publish { .. } => "publish",
            TraceEvent::Request { .. } => "request",
            TraceEvent::AppInterest { .. } => "app_interest",
            TraceEvent::AppData { .. } => "app_data",
            TraceEvent::AppStatus { .. } => "app_status",
            TraceEvent::ProducerReply { .. } => "producer_reply",
            TraceEvent::CsHit { .. } => "cs_hit",
            TraceEvent::PitAggregate { .. } => "pit_aggregate",
            TraceEvent::PitCreate { .. } => "pit_create",
            TraceEvent::DupNonce { .. } => "dup_nonce",
            TraceEvent::NoRoute { .. } => "no_route",
            TraceEvent::UnsolicitedData { .. } => "unsolicited_data",
            TraceEvent::PitSatisfied { .. } => "pit_satisfied",
            TraceEvent::PitExpired { .. } => "pit_expired",
            TraceEvent::CsExpired { .. } => "cs_expired",
            TraceEvent::StatusSent { .. } => "status_sent",
            TraceEvent::StatusRelayed { .. } => "status_relayed",
            TraceEvent::BundleStored { .. } => "bundle_stored",
            TraceEvent::BundleDup { .. } => "bundle_dup",
            TraceEvent::BundleExpired { .. } => "bundle_expired",
            TraceEvent::BpqHit { .. } => "bpq_hit",
            TraceEvent::ResponseCreated { .. } => "response_created",
            TraceEvent::QueryCreated { .. } => "query_created",
            TraceEvent::QuerySuppressed { .. } => "query_suppressed",
            TraceEvent::QueryRetired { .. } => "query_retired",
            TraceEvent::PublishCreated { .. } => "publish_created",
            TraceEvent::GwDeliver { .. } => "gw_deliver",
            TraceEvent::QueryInjected { .. } => "query_injected",
            TraceEvent::FibLearned { .. } => "fib_learned",
            TraceEvent::GwStore { .. } => "gw_store",
            TraceEvent::RepoHit { .. } => "repo_hit",
            TraceEvent::GwDrop { .. } => "gw_drop",
            TraceEvent::Tx { .. } => "tx",
            TraceEvent::TxDrop { .. } => "tx_drop",
            TraceEvent::LinkUp { .. } => "link_up",
            TraceEvent::LinkDown { .. } => "link_down",
            TraceEvent::DecodeError { .. } => "decode_error",
            TraceEvent::NonMinimalSdnv { .. } => "non_minimal_sdnv",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn emit(&mut self, t: Millis, node: &str, event: TraceEvent) {
        self.records.push(TraceRecord {
            t,
            node: node.to_string(),
            event,
        });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records always serialize"));
            out.push('\n');
        }
        out
    }

    /// Parses JSONL text; the error names the 1-based line.
    pub fn from_jsonl(text: &str) -> Result<Self, String> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
            .collect::<Result<_, _>>()?;
        Ok(Self { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_record_layout() {
        let mut t = Trace::new();
        t.emit(
            5,
            "E",
            TraceEvent::QueryCreated {
                bundle: "dtn://E#5.0".into(),
                name: "/pub/doc".into(),
            },
        );
        let line = t.to_jsonl();
        assert_eq!(
            line,
            "{\"t\":5,\"node\":\"E\",\"event\":\"query_created\",\"bundle\":\"dtn://E#5.0\",\"name\":\"/pub/doc\"}\n"
        );
        assert_eq!(Trace::from_jsonl(&line).unwrap(), t);
    }

    #[test]
    fn round_trip_with_optionals() {
        let mut t = Trace::new();
        t.emit(
            1,
            "A",
            TraceEvent::Tx {
                link: 3,
                to: "B".into(),
                packet: "bundle".into(),
                name: None,
                bundle: Some("dtn://A#0.0".into()),
                bpq: Some("query".into()),
                hop_limit: Some(7),
            },
        );
        t.emit(2, "B", TraceEvent::NoRoute { name: "/x".into() });
        let back = Trace::from_jsonl(&t.to_jsonl()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.records[1].event.name(), "no_route");
    }

    #[test]
    fn malformed_line_reports_position() {
        let err = Trace::from_jsonl("{\"t\":1,\"node\":\"A\",\"event\":\"no_route\",\"name\":\"/\"}\nnot json\n").unwrap_err();
        assert!(err.starts_with("line 2"));
    }
}
