//! Discrete-event kernel: integer-microsecond virtual clock, a cancellable
//! time-ordered event queue and seeded per-node random streams.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::SimError;

/// Microseconds since the start of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn as_us(self) -> u64 {
        self.0
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Node index. The AP is always node 0, stations are 1..=n.
pub type NodeId = usize;

/// A scheduled event as returned by [`EventQueue::pop_next`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimEvent<K> {
    pub fire_at: SimTime,
    pub seq: u64,
    pub kind: K,
    pub target: NodeId,
}

/// Opaque handle used to cancel a pending event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle {
    fire_at: SimTime,
    seq: u64,
}

impl EventHandle {
    pub fn fire_at(&self) -> SimTime {
        self.fire_at
    }
}

/// Pending events keyed by `(fire_at, seq)`, so equal times pop in scheduling order.
#[derive(Debug)]
pub struct EventQueue<K> {
    now: SimTime,
    next_seq: u64,
    pending: BTreeMap<(SimTime, u64), (NodeId, K)>,
}

impl<K> Default for EventQueue<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K> EventQueue<K> {
    pub fn new() -> Self {
        EventQueue {
            now: SimTime::ZERO,
            next_seq: 0,
            pending: BTreeMap::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn schedule(&mut self, fire_at: SimTime, target: NodeId, kind: K) -> Result<EventHandle, SimError> {
        if fire_at < self.now {
            return Err(SimError::Logic(format!(
                "event for node {target} scheduled at {fire_at} but clock is at {}",
                self.now
            )));
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.pending.insert((fire_at, seq), (target, kind));
        Ok(EventHandle { fire_at, seq })
    }

    /// Removes a pending event. Returns false if it already fired or was cancelled.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.pending.remove(&(handle.fire_at, handle.seq)).is_some()
    }

    pub fn is_pending(&self, handle: EventHandle) -> bool {
        self.pending.contains_key(&(handle.fire_at, handle.seq))
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.pending.keys().next().map(|(t, _)| *t)
    }

    pub fn pop_next(&mut self) -> Option<SimEvent<K>> {
        let ((fire_at, seq), (target, kind)) = self.pending.pop_first()?;
        self.now = fire_at;
        Some(SimEvent {
            fire_at,
            seq,
            kind,
            target,
        })
    }
}

/// Stream id reserved for node placement.
pub const TOPOLOGY_STREAM: u64 = 0;

/// Stream id for a node; the AP (node 0) gets stream 1.
pub fn node_stream(node: NodeId) -> u64 {
    node as u64 + 1
}

/// Independent reproducible random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn draw_uniform_int(&mut self, lo: u32, hi: u32) -> Result<u32, SimError> {
        if lo > hi {
            return Err(SimError::Logic(format!("empty integer range [{lo}, {hi}]")));
        }
        Ok(self.rng.gen_range(lo..=hi))
    }

    /// Uniform real in [0, 1).
    pub fn draw_unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn draw_normal(&mut self, mean: f64, sigma: f64) -> Result<f64, SimError> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(SimError::Logic(format!("invalid standard deviation {sigma}")));
        }
        if sigma == 0.0 {
            return Ok(mean);
        }
        let normal = Normal::new(mean, sigma).map_err(|e| SimError::Logic(e.to_string()))?;
        Ok(normal.sample(&mut self.rng))
    }
}
