//! Discrete-event engine: a clock, an `(at, seq)`-ordered queue, and links
//! with latency and contact schedules. The engine carries frames as opaque
//! bytes; node behavior lives in the handler passed to [`Engine::run_until`].

mod link;

pub use link::{ContactSchedule, Link, LinkKind, ScheduleError};

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::ccn::Millis;
use crate::dtn::NodeId;

pub type LinkId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    Deliver { link: LinkId, to: NodeId, frame: Vec<u8> },
    LinkUp(LinkId),
    LinkDown(LinkId),
    Timer { node: NodeId, tag: u64 },
    Workload(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub at: Millis,
    pub seq: u64,
    pub kind: EventKind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("event at {at} scheduled while the clock is at {now}")]
    ScheduleInPast { at: Millis, now: Millis },
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("node {node} is not an endpoint of link {link}")]
    NotAnEndpoint { link: LinkId, node: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxResult {
    Scheduled { deliver_at: Millis },
    LinkDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    pub executed: u64,
    pub remaining: usize,
    pub clock: Millis,
}

#[derive(Debug, Clone)]
pub struct Engine {
    clock: Millis,
    next_seq: u64,
    queue: BinaryHeap<Reverse<Event>>,
    links: Vec<Link>,
    up: Vec<bool>,
}

impl Engine {
    /// Creates the engine and schedules every link's up/down transitions.
    /// Always-up links come up at time 0.
    pub fn new(links: Vec<Link>) -> Self {
        let mut engine = Self {
            clock: 0,
            next_seq: 0,
            queue: BinaryHeap::new(),
            up: vec![false; links.len()],
            links: Vec::new(),
        };
        for (id, link) in links.iter().enumerate() {
            if link.schedule.is_always_up() {
                engine.push(0, EventKind::LinkUp(id));
            }
            for &(up, down) in link.schedule.intervals() {
                engine.push(up, EventKind::LinkUp(id));
                engine.push(down, EventKind::LinkDown(id));
            }
        }
        engine.links = links;
        engine
    }

    fn push(&mut self, at: Millis, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(Event { at, seq, kind }));
    }

    pub fn clock(&self) -> Millis {
        self.clock
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.links.get(id)
    }

    pub fn is_up(&self, id: LinkId) -> bool {
        self.up.get(id).copied().unwrap_or(false)
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn schedule(&mut self, at: Millis, kind: EventKind) -> Result<(), SimError> {
        if at < self.clock {
            return Err(SimError::ScheduleInPast { at, now: self.clock });
        }
        self.push(at, kind);
        Ok(())
    }

    /// Sends `frame` from `from` to the other endpoint. The up/down check
    /// happens now; a frame in flight is delivered even if the link drops.
    pub fn transmit(&mut self, link: LinkId, from: &NodeId, frame: Vec<u8>) -> Result<TxResult, SimError> {
        let l = self.links.get(link).ok_or(SimError::UnknownLink(link))?;
        let to = l
            .peer_of(from)
            .ok_or_else(|| SimError::NotAnEndpoint {
                link,
                node: from.clone(),
            })?
            .clone();
        if !self.up[link] {
            return Ok(TxResult::LinkDown);
        }
        let deliver_at = self.clock.saturating_add(l.latency_ms);
        self.push(deliver_at, EventKind::Deliver { link, to, frame });
        Ok(TxResult::Scheduled { deliver_at })
    }

    /// Dispatches events in `(at, seq)` order until the queue is empty or
    /// the next event lies beyond `t_end`. Link state is updated before the
    /// handler sees a LinkUp/LinkDown.
    pub fn run_until(&mut self, t_end: Millis, mut handler: impl FnMut(&mut Engine, Event)) -> RunSummary {
        let mut executed = 0;
        while let Some(Reverse(next)) = self.queue.peek() {
            if next.at > t_end {
                break;
            }
            let Reverse(event) = self.queue.pop().expect("peeked");
            self.clock = event.at;
            match event.kind {
                EventKind::LinkUp(id) => self.up[id] = true,
                EventKind::LinkDown(id) => self.up[id] = false,
                _ => {}
            }
            handler(self, event);
            executed += 1;
        }
        RunSummary {
            executed,
            remaining: self.queue.len(),
            clock: self.clock,
        }
    }
}
