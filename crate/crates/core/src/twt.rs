//! TWT agreements, schedule construction, clock-drift wake sampling and the
//! per-station / AP polling state used by the replication engine.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::edca::EdcaParams;
use crate::error::SimError;
use crate::kernel::{NodeId, RngStream, SimTime};

/// Trigger flag of the agreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwtMode {
    /// Trigger flag set: the AP polls each station with a trigger frame.
    Polling,
    /// Trigger flag clear: stations contend with EDCA on waking.
    NonPolling,
}

impl TwtMode {
    pub fn trigger_flag(&self) -> bool {
        matches!(self, TwtMode::Polling)
    }
}

impl fmt::Display for TwtMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TwtMode::Polling => "PM",
            TwtMode::NonPolling => "NPM",
        })
    }
}

impl FromStr for TwtMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "PM" => Ok(TwtMode::Polling),
            "NPM" => Ok(TwtMode::NonPolling),
            _ => Err("expected PM or NPM".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwtAgreement {
    pub sta: NodeId,
    pub twt: SimTime,
    pub sp_duration: SimTime,
    pub trigger_flag: bool,
    /// How long before `twt` a polled station aims to wake. Zero without the trigger flag.
    pub awake_offset: SimTime,
}

impl TwtAgreement {
    pub fn target_wake(&self) -> SimTime {
        self.twt.saturating_sub(self.awake_offset)
    }

    pub fn sp_end(&self) -> SimTime {
        self.twt + self.sp_duration
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub t_target: SimTime,
    pub mu: SimTime,
    pub agreements: Vec<TwtAgreement>,
}

/// TWTs at `t_target + i * mu` for stations `1..=n`.
pub fn build_schedule(
    n: usize,
    t_target: SimTime,
    mu: SimTime,
    sp_duration: SimTime,
    mode: TwtMode,
    awake_offset: SimTime,
) -> Schedule {
    let offset = if mode.trigger_flag() { awake_offset } else { SimTime::ZERO };
    let agreements = (0..n)
        .map(|i| TwtAgreement {
            sta: i + 1,
            twt: SimTime(t_target.0 + i as u64 * mu.0),
            sp_duration,
            trigger_flag: mode.trigger_flag(),
            awake_offset: offset,
        })
        .collect();
    Schedule {
        t_target,
        mu,
        agreements,
    }
}

/// Gaussian wake-time deviation with standard deviation `sigma_us`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftModel {
    pub sigma_us: f64,
}

/// Actual wake instant: target wake plus a drift draw rounded to the microsecond, clamped at zero.
pub fn sample_wake(agreement: &TwtAgreement, drift: &DriftModel, stream: &mut RngStream) -> Result<SimTime, SimError> {
    let deviation = stream.draw_normal(0.0, drift.sigma_us)?.round();
    let wake = agreement.target_wake().0 as f64 + deviation;
    Ok(SimTime(wake.max(0.0) as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaPhase {
    Doze,
    AwaitingTrigger,
    Contending,
    Exchanging,
    Done,
    Failed,
}

impl StaPhase {
    pub fn is_final(&self) -> bool {
        matches!(self, StaPhase::Done | StaPhase::Failed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaSession {
    pub agreement: TwtAgreement,
    pub phase: StaPhase,
    pub actual_wake: SimTime,
    pub doze_at: Option<SimTime>,
    /// End of the ACK that confirmed delivery.
    pub delivered_at: Option<SimTime>,
}

impl StaSession {
    pub fn new(agreement: TwtAgreement, actual_wake: SimTime) -> Self {
        StaSession {
            agreement,
            phase: StaPhase::Doze,
            actual_wake,
            doze_at: None,
            delivered_at: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriggerDescriptor {
    pub sta: NodeId,
    pub due_at: SimTime,
}

/// AP side of polling: FIFO of due triggers and at most one exchange in service.
#[derive(Debug, Clone, Default)]
pub struct ApPollState {
    queue: VecDeque<TriggerDescriptor>,
    in_service: Option<TriggerDescriptor>,
}

impl ApPollState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, trigger: TriggerDescriptor) {
        self.queue.push_back(trigger);
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    pub fn in_service(&self) -> Option<TriggerDescriptor> {
        self.in_service
    }

    /// Moves the next trigger into service when nothing is being served.
    pub fn start_next(&mut self) -> Option<TriggerDescriptor> {
        if self.in_service.is_some() {
            return None;
        }
        self.in_service = self.queue.pop_front();
        self.in_service
    }

    pub fn complete(&mut self) -> Option<TriggerDescriptor> {
        self.in_service.take()
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Large-step delivery ratio of a polled station: the station must be awake when
/// its trigger begins, which happens AIFS plus a uniform backoff after the TWT
/// when the AP queue is empty. Averages `Phi((offset + AIFS + b*slot) / sigma)`
/// over the backoff draw `b`.
pub fn pm_pdr_limit(awake_offset_us: f64, sigma_us: f64, edca: &EdcaParams) -> f64 {
    let draws = edca.cw_min as u64 + 1;
    (0..draws)
        .map(|b| {
            let margin = awake_offset_us + edca.aifs.0 as f64 + (b * edca.slot.0) as f64;
            if sigma_us > 0.0 {
                std_normal_cdf(margin / sigma_us)
            } else if margin > 0.0 {
                1.0
            } else {
                0.5
            }
        })
        .sum::<f64>()
        / draws as f64
}
