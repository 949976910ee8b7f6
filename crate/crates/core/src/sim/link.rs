use serde::{Deserialize, Serialize};

use crate::ccn::Millis;
use crate::dtn::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// A CCN face pair.
    Ccn,
    /// An opportunistic bundle contact.
    Dtn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleError {
    EmptyInterval(usize),
    Overlap(usize),
}

impl std::fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScheduleError::EmptyInterval(i) => write!(f, "interval {i} must have up < down"),
            ScheduleError::Overlap(i) => write!(f, "interval {i} starts before the previous one ends"),
        }
    }
}

impl std::error::Error for ScheduleError {}

/// Ordered, disjoint `[up, down)` intervals. Empty means always up.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContactSchedule {
    intervals: Vec<(Millis, Millis)>,
}

impl ContactSchedule {
    pub fn always_up() -> Self {
        Self::default()
    }

    pub fn new(intervals: Vec<(Millis, Millis)>) -> Result<Self, ScheduleError> {
        for (i, &(up, down)) in intervals.iter().enumerate() {
            if up >= down {
                return Err(ScheduleError::EmptyInterval(i));
            }
            if i > 0 && up <= intervals[i - 1].1 {
                return Err(ScheduleError::Overlap(i));
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[(Millis, Millis)] {
        &self.intervals
    }

    pub fn is_always_up(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_up_at(&self, t: Millis) -> bool {
        self.is_always_up() || self.intervals.iter().any(|&(up, down)| up <= t && t < down)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub latency_ms: Millis,
    pub kind: LinkKind,
    pub schedule: ContactSchedule,
}

impl Link {
    pub fn peer_of(&self, node: &NodeId) -> Option<&NodeId> {
        if *node == self.a {
            Some(&self.b)
        } else if *node == self.b {
            Some(&self.a)
        } else {
            None
        }
    }

    /// Endpoints in NodeId order.
    pub fn endpoints(&self) -> [&NodeId; 2] {
        if self.a <= self.b {
            [&self.a, &self.b]
        } else {
            [&self.b, &self.a]
        }
    }
}
