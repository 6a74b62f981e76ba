//! EDCA transmit state machine for a single pending frame.
//!
//! The machine is clock-driven but event-free: every method takes the current
//! instant and returns the instant at which the owner must call
//! [`Edca::on_access`], if any. The owner schedules (and cancels) that event.
//!
//! Countdown model: after the channel has been idle for AIFS the counter is
//! decremented at each further slot boundary, and the frame is sent at the
//! boundary where it reaches zero. A counter of zero at the end of AIFS sends
//! immediately. The access instant is therefore `idle_ref + AIFS + counter * slot`.

use crate::error::SimError;
use crate::kernel::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdcaParams {
    pub cw_min: u32,
    pub cw_max: u32,
    pub retry_limit: u32,
    pub slot: SimTime,
    pub sifs: SimTime,
    pub aifs: SimTime,
    pub ack_timeout: SimTime,
    pub ack_duration: SimTime,
}

impl Default for EdcaParams {
    fn default() -> Self {
        let slot = SimTime(9);
        let sifs = SimTime(16);
        let ack_duration = SimTime(44);
        EdcaParams {
            cw_min: 15,
            cw_max: 1023,
            retry_limit: 7,
            slot,
            sifs,
            aifs: SimTime(sifs.0 + 2 * slot.0),
            ack_timeout: SimTime(sifs.0 + ack_duration.0 + slot.0),
            ack_duration,
        }
    }
}

fn is_window(cw: u32) -> bool {
    (cw as u64 + 1).is_power_of_two()
}

impl EdcaParams {
    pub fn validate(&self) -> Result<(), String> {
        if !is_window(self.cw_min) || !is_window(self.cw_max) {
            return Err(format!(
                "contention windows must be of the form 2^k - 1 (cw_min={}, cw_max={})",
                self.cw_min, self.cw_max
            ));
        }
        if self.cw_min > self.cw_max {
            return Err(format!("cw_min {} exceeds cw_max {}", self.cw_min, self.cw_max));
        }
        if self.retry_limit < 1 {
            return Err("retry_limit must be at least 1".into());
        }
        if self.slot.0 == 0 {
            return Err("slot must be positive".into());
        }
        if self.aifs.0 < self.sifs.0 + self.slot.0 {
            return Err(format!("aifs {} is shorter than sifs + slot", self.aifs));
        }
        if self.ack_duration.0 == 0 {
            return Err("ack_duration must be positive".into());
        }
        Ok(())
    }
}

/// Contention window for retry stage `r` given the window of stage `r - 1`.
pub fn next_cw(prev_cw: u32, r: u32, params: &EdcaParams) -> u32 {
    if r == 0 {
        params.cw_min
    } else {
        (2 * (prev_cw as u64 + 1) - 1).min(params.cw_max as u64) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdcaPhase {
    Idle,
    /// Channel idle: waiting out AIFS and the remaining backoff slots.
    DeferAifs,
    /// Countdown suspended while the channel is busy.
    Backoff,
    Transmitting,
    AwaitAck,
    Done,
    Dropped,
}

/// Reaction to the channel turning busy while the countdown runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusyReaction {
    /// Countdown frozen; the pending access event must be cancelled.
    Suspended,
    /// The counter reaches zero at this very boundary; keep the access event.
    TransmitNow,
    /// Nothing was counting.
    Unaffected,
}

/// What follows an ACK timeout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetryDecision {
    /// Retry scheduled; `Some(t)` is the access instant when the channel is idle.
    Retry(Option<SimTime>),
    Dropped,
}

#[derive(Debug, Clone)]
pub struct Edca {
    params: EdcaParams,
    phase: EdcaPhase,
    retry: u32,
    cw: u32,
    counter: u32,
    /// Instant at which AIFS completes while in `DeferAifs`.
    countdown_start: SimTime,
    attempts: u32,
}

impl Edca {
    pub fn new(params: EdcaParams) -> Self {
        Edca {
            params,
            phase: EdcaPhase::Idle,
            retry: 0,
            cw: params.cw_min,
            counter: 0,
            countdown_start: SimTime::ZERO,
            attempts: 0,
        }
    }

    pub fn params(&self) -> &EdcaParams {
        &self.params
    }

    pub fn phase(&self) -> EdcaPhase {
        self.phase
    }

    pub fn retry(&self) -> u32 {
        self.retry
    }

    pub fn cw(&self) -> u32 {
        self.cw
    }

    pub fn backoff_counter(&self) -> u32 {
        self.counter
    }

    /// Transmission attempts made for the current frame.
    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    /// Back to `Idle` for a new frame.
    pub fn reset(&mut self) {
        *self = Edca::new(self.params);
    }

    /// Access instant while deferring.
    pub fn access_at(&self) -> Option<SimTime> {
        match self.phase {
            EdcaPhase::DeferAifs => Some(SimTime(
                self.countdown_start.0 + self.counter as u64 * self.params.slot.0,
            )),
            _ => None,
        }
    }

    fn start_countdown(&mut self, idle_ref: SimTime) -> SimTime {
        self.phase = EdcaPhase::DeferAifs;
        self.countdown_start = idle_ref + self.params.aifs;
        self.access_at().expect("deferring")
    }

    /// A new frame enters the empty queue. The backoff counter is drawn from
    /// `[0, cw_min]` by `draw`; a just-woken station has no idle history so the
    /// AIFS wait is measured from `now`.
    pub fn enqueue_frame(
        &mut self,
        now: SimTime,
        channel_idle: bool,
        draw: &mut dyn FnMut(u32) -> Result<u32, SimError>,
    ) -> Result<Option<SimTime>, SimError> {
        if self.phase != EdcaPhase::Idle {
            return Err(SimError::Logic(format!("enqueue into busy EDCA ({:?})", self.phase)));
        }
        self.retry = 0;
        self.attempts = 0;
        self.cw = next_cw(self.cw, 0, &self.params);
        self.counter = draw(self.cw)?;
        Ok(self.resume_or_suspend(now, channel_idle))
    }

    fn resume_or_suspend(&mut self, now: SimTime, channel_idle: bool) -> Option<SimTime> {
        if channel_idle {
            Some(self.start_countdown(now))
        } else {
            self.phase = EdcaPhase::Backoff;
            None
        }
    }

    pub fn on_channel_busy(&mut self, now: SimTime) -> BusyReaction {
        if self.phase != EdcaPhase::DeferAifs {
            return BusyReaction::Unaffected;
        }
        let access = self.access_at().expect("deferring");
        if access == now {
            return BusyReaction::TransmitNow;
        }
        let elapsed_slots = if now >= self.countdown_start {
            ((now.0 - self.countdown_start.0) / self.params.slot.0) as u32
        } else {
            0
        };
        self.counter -= elapsed_slots.min(self.counter);
        self.phase = EdcaPhase::Backoff;
        BusyReaction::Suspended
    }

    /// Channel became idle at `now`; returns the new access instant if counting resumes.
    pub fn on_channel_idle(&mut self, now: SimTime) -> Option<SimTime> {
        if self.phase != EdcaPhase::Backoff {
            return None;
        }
        Some(self.start_countdown(now))
    }

    /// The access event fired: the frame goes on air.
    pub fn on_access(&mut self, now: SimTime) -> Result<(), SimError> {
        match self.access_at() {
            Some(t) if t == now => {
                self.counter = 0;
                self.phase = EdcaPhase::Transmitting;
                self.attempts += 1;
                Ok(())
            }
            other => Err(SimError::Logic(format!(
                "access at {now} but countdown expects {other:?} in {:?}",
                self.phase
            ))),
        }
    }

    /// Our frame left the air. Returns the ACK deadline when one is expected.
    pub fn on_tx_end(&mut self, now: SimTime, expects_ack: bool) -> Result<Option<SimTime>, SimError> {
        if self.phase != EdcaPhase::Transmitting {
            return Err(SimError::Logic(format!("tx end in {:?}", self.phase)));
        }
        if expects_ack {
            self.phase = EdcaPhase::AwaitAck;
            Ok(Some(now + self.params.ack_timeout))
        } else {
            self.phase = EdcaPhase::Done;
            Ok(None)
        }
    }

    pub fn on_ack(&mut self) -> Result<(), SimError> {
        if self.phase != EdcaPhase::AwaitAck {
            return Err(SimError::Logic(format!("ACK in {:?}", self.phase)));
        }
        self.phase = EdcaPhase::Done;
        Ok(())
    }

    /// The ACK did not arrive. Below the retry limit the window grows and a new
    /// counter is drawn; the AIFS wait restarts at the timeout instant.
    pub fn on_ack_timeout(
        &mut self,
        now: SimTime,
        channel_idle: bool,
        draw: &mut dyn FnMut(u32) -> Result<u32, SimError>,
    ) -> Result<RetryDecision, SimError> {
        if self.phase != EdcaPhase::AwaitAck {
            return Err(SimError::Logic(format!("ACK timeout in {:?}", self.phase)));
        }
        if self.retry >= self.params.retry_limit {
            self.phase = EdcaPhase::Dropped;
            return Ok(RetryDecision::Dropped);
        }
        self.retry += 1;
        self.cw = next_cw(self.cw, self.retry, &self.params);
        self.counter = draw(self.cw)?;
        Ok(RetryDecision::Retry(self.resume_or_suspend(now, channel_idle)))
    }
}

/// Start of the ACK answering a data frame that ended at `data_end`.
pub fn receiver_ack_rule(data_end: SimTime, params: &EdcaParams) -> SimTime {
    data_end + params.sifs
}
