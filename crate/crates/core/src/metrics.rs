//! Run metrics, computed purely from a trace.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::trace::{Trace, TraceEvent};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub requests: u64,
    pub delivered: u64,
    /// 1.0 when there were no requests.
    pub delivery_ratio: f64,
    /// First consumer Interest to first Data at the consumer, averaged over
    /// delivered requests.
    pub mean_delivery_delay_ms: Option<f64>,
    pub interest_transmissions: u64,
    pub data_transmissions: u64,
    pub status_transmissions: u64,
    pub bundle_transmissions: u64,
    pub consumer_interests: u64,
    pub retransmissions: u64,
    pub status_responses: u64,
    pub dropped_frames: u64,
    /// Content-store, repository and bundle-cache hits per node.
    pub cache_hits: BTreeMap<String, u64>,
}

impl Metrics {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics always serialize");
        s.push('\n');
        s
    }
}

pub fn collect_metrics(trace: &Trace) -> Metrics {
    let mut requests = 0;
    let mut first_interest: BTreeMap<(&str, u32), u64> = BTreeMap::new();
    let mut first_data: BTreeMap<(&str, u32), u64> = BTreeMap::new();
    let mut m = Metrics {
        requests: 0,
        delivered: 0,
        delivery_ratio: 1.0,
        mean_delivery_delay_ms: None,
        interest_transmissions: 0,
        data_transmissions: 0,
        status_transmissions: 0,
        bundle_transmissions: 0,
        consumer_interests: 0,
        retransmissions: 0,
        status_responses: 0,
        dropped_frames: 0,
        cache_hits: BTreeMap::new(),
    };
    for r in trace.iter() {
        match &r.event {
            TraceEvent::Request { .. } => requests += 1,
            TraceEvent::AppInterest { request, attempt, .. } => {
                m.consumer_interests += 1;
                if *attempt > 1 {
                    m.retransmissions += 1;
                }
                first_interest.entry((r.node.as_str(), *request)).or_insert(r.t);
            }
            TraceEvent::AppData { request, .. } => {
                first_data.entry((r.node.as_str(), *request)).or_insert(r.t);
            }
            TraceEvent::Tx { packet, .. } => match packet.as_str() {
                "interest" => m.interest_transmissions += 1,
                "data" => m.data_transmissions += 1,
                "status" => m.status_transmissions += 1,
                _ => m.bundle_transmissions += 1,
            },
            TraceEvent::TxDrop { .. } => m.dropped_frames += 1,
            TraceEvent::StatusSent { .. } => m.status_responses += 1,
            TraceEvent::CsHit { .. } | TraceEvent::RepoHit { .. } | TraceEvent::BpqHit { .. } => {
                *m.cache_hits.entry(r.node.clone()).or_default() += 1;
            }
            _ => {}
        }
    }
    m.requests = requests;
    m.delivered = first_data.len() as u64;
    if requests > 0 {
        m.delivery_ratio = m.delivered as f64 / requests as f64;
    }
    let delays: Vec<u64> = first_data
        .iter()
        .filter_map(|(k, t)| first_interest.get(k).map(|s| t - s))
        .collect();
    if !delays.is_empty() {
        m.mean_delivery_delay_ms = Some(delays.iter().sum::<u64>() as f64 / delays.len() as f64);
    }
    m
}
