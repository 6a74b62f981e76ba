//! One replication: an AP and `n` stations exchanging a single uplink frame each
//! around their TWTs, driven by the event kernel until quiescence.
//!
//! Every instant is processed as "frames ending now complete first, then the
//! popped event runs, then radio states are sampled for the energy ledger".

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::config::ScenarioConfig;
use crate::edca::{receiver_ack_rule, BusyReaction, Edca, EdcaPhase, RetryDecision};
use crate::energy::{EnergyLedger, RadioState};
use crate::error::SimError;
use crate::kernel::{node_stream, EventHandle, EventQueue, NodeId, RngStream, SimTime, TOPOLOGY_STREAM};
use crate::medium::{Frame, FrameKind, Listening, ReceptionOutcome, Receiver, Topology, TransmissionRecord, TxId};
use crate::trace::Trace;
use crate::twt::{build_schedule, sample_wake, ApPollState, DriftModel, Schedule, StaPhase, StaSession, TriggerDescriptor, TwtMode};

pub const AP: NodeId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ev {
    Wake,
    Access,
    TxEnd,
    AckTimeout,
    SendAck { to: NodeId },
    SendData,
    TriggerDue,
    ResponseTimeout,
    SpEnd,
}

/// Where backoff counters come from. A script lists, per node (AP first), the
/// counters to hand out before falling back to the node's random stream.
#[derive(Debug, Clone, Default)]
pub enum BackoffSource {
    #[default]
    Random,
    Scripted(Vec<Vec<u32>>),
}

#[derive(Debug)]
struct Draws {
    stream: RngStream,
    script: VecDeque<u32>,
}

impl Draws {
    fn backoff(&mut self, cw: u32) -> Result<u32, SimError> {
        match self.script.pop_front() {
            Some(v) if v <= cw => Ok(v),
            Some(v) => Err(SimError::Logic(format!("scripted backoff {v} exceeds window {cw}"))),
            None => self.stream.draw_uniform_int(0, cw),
        }
    }
}

#[derive(Debug)]
struct Node {
    awake: bool,
    transmitting: Option<TxId>,
    rx: Receiver,
    edca: Edca,
    draws: Draws,
    access: Option<EventHandle>,
    ack_timer: Option<EventHandle>,
    sp_timer: Option<EventHandle>,
    radio: RadioState,
    radio_since: SimTime,
}

impl Node {
    fn busy(&self) -> bool {
        self.transmitting.is_some() || self.rx.is_busy()
    }

    fn listening(&self) -> Listening {
        if !self.awake {
            Listening::Asleep
        } else if self.transmitting.is_some() {
            Listening::Transmitting
        } else {
            Listening::Awake
        }
    }

    fn radio_state(&self) -> RadioState {
        if !self.awake {
            RadioState::Doze
        } else if self.transmitting.is_some() {
            RadioState::Tx
        } else if self.rx.locked().is_some() {
            RadioState::Rx
        } else {
            RadioState::Idle
        }
    }
}

#[derive(Debug)]
struct OnAir {
    record: TransmissionRecord,
    listeners: Vec<NodeId>,
}

#[derive(Debug)]
struct Exchange {
    sta: NodeId,
    response_timer: Option<EventHandle>,
}

/// Per-replication outcome.
#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub n: usize,
    pub delivered: usize,
    pub twt0: SimTime,
    /// Last confirmed delivery minus the first TWT, in microseconds.
    pub txn_time_us: Option<u64>,
    pub mean_energy_mj: f64,
    pub station_energy_mj: Vec<f64>,
    /// Frames lost at the AP because of overlapping transmissions.
    pub collisions: u64,
    pub hidden_pairs: usize,
    pub run_end: SimTime,
    pub sessions: Vec<StaSession>,
    pub attempts: Vec<u32>,
    pub ledger: EnergyLedger,
    pub trace: Option<Trace>,
}

impl ReplicationResult {
    pub fn pdr(&self) -> f64 {
        self.delivered as f64 / self.n as f64
    }
}

/// End of the last confirmed delivery relative to `twt0`; `None` without deliveries.
pub fn avg_transmission_time(sessions: &[StaSession], twt0: SimTime) -> Option<u64> {
    sessions
        .iter()
        .filter_map(|s| s.delivered_at)
        .max()
        .map(|t| t.saturating_sub(twt0).0)
}

pub struct Replication<'c> {
    cfg: &'c ScenarioConfig,
    queue: EventQueue<Ev>,
    topo: Topology,
    schedule: Schedule,
    nodes: Vec<Node>,
    sessions: Vec<StaSession>,
    poll: ApPollState,
    exchange: Option<Exchange>,
    on_air: BTreeMap<TxId, OnAir>,
    ends: BTreeSet<(SimTime, TxId)>,
    next_tx: TxId,
    ledger: EnergyLedger,
    trace: Option<Trace>,
    collisions: u64,
}

impl<'c> Replication<'c> {
    pub fn new(cfg: &'c ScenarioConfig, seed: u64, backoffs: BackoffSource, trace: bool) -> Result<Self, SimError> {
        let mut topo_stream = RngStream::new(seed, TOPOLOGY_STREAM);
        let topo = Topology::random(cfg.n, cfg.radius_m, cfg.sense_range_m, &cfg.propagation, &mut topo_stream)?;
        let schedule = build_schedule(
            cfg.n,
            SimTime(cfg.t_target_us),
            SimTime(cfg.mu_us),
            SimTime(cfg.sp_duration_us),
            cfg.mode,
            SimTime(cfg.awake_offset_us),
        );
        let mut scripts = match backoffs {
            BackoffSource::Random => Vec::new(),
            BackoffSource::Scripted(s) => s,
        };
        scripts.resize(cfg.n + 1, Vec::new());
        let nodes = scripts
            .into_iter()
            .enumerate()
            .map(|(id, script)| Node {
                awake: id == AP,
                transmitting: None,
                rx: Receiver::new(),
                edca: Edca::new(cfg.edca),
                draws: Draws {
                    stream: RngStream::new(seed, node_stream(id)),
                    script: script.into(),
                },
                access: None,
                ack_timer: None,
                sp_timer: None,
                radio: if id == AP { RadioState::Idle } else { RadioState::Doze },
                radio_since: SimTime::ZERO,
            })
            .collect();
        let mut rep = Replication {
            cfg,
            queue: EventQueue::new(),
            topo,
            schedule,
            nodes,
            sessions: Vec::with_capacity(cfg.n),
            poll: ApPollState::new(),
            exchange: None,
            on_air: BTreeMap::new(),
            ends: BTreeSet::new(),
            next_tx: 0,
            ledger: EnergyLedger::new(cfg.n),
            trace: trace.then(Trace::new),
            collisions: 0,
        };
        rep.seed_events()?;
        Ok(rep)
    }

    fn seed_events(&mut self) -> Result<(), SimError> {
        let drift = DriftModel { sigma_us: self.cfg.sigma_us };
        for sta in 1..=self.cfg.n {
            self.log(sta, "radio", RadioState::Doze);
        }
        let agreements = self.schedule.agreements.clone();
        for a in agreements {
            let wake = sample_wake(&a, &drift, &mut self.nodes[a.sta].draws.stream)?;
            self.sessions.push(StaSession::new(a, wake));
            self.queue.schedule(wake, a.sta, Ev::Wake)?;
            if a.trigger_flag {
                self.queue.schedule(a.twt, a.sta, Ev::TriggerDue)?;
            }
        }
        Ok(())
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    fn now(&self) -> SimTime {
        self.queue.now()
    }

    fn log(&mut self, node: NodeId, event: &str, detail: impl std::fmt::Display) {
        let now = self.queue.now();
        if let Some(t) = self.trace.as_mut() {
            t.push(now, node, event, detail);
        }
    }

    fn session(&mut self, sta: NodeId) -> &mut StaSession {
        &mut self.sessions[sta - 1]
    }

    pub fn run(mut self) -> Result<ReplicationResult, SimError> {
        let limit = self.cfg.quiescence_limit_us();
        while let Some(ev) = self.queue.pop_next() {
            if ev.fire_at.0 > limit {
                return Err(SimError::Liveness {
                    limit_us: limit,
                    pending: self.queue.len() + 1,
                });
            }
            self.settle_ends()?;
            self.dispatch(ev.target, ev.kind)?;
            self.sample_radios()?;
        }
        if !self.on_air.is_empty() {
            return Err(SimError::Logic("queue drained with frames on air".into()));
        }
        if let Some(s) = self.sessions.iter().find(|s| !s.phase.is_final()) {
            return Err(SimError::Logic(format!(
                "station {} ended in {:?}",
                s.agreement.sta, s.phase
            )));
        }
        self.finish()
    }

    fn finish(mut self) -> Result<ReplicationResult, SimError> {
        let run_end = self.now();
        for sta in 1..=self.cfg.n {
            let node = &self.nodes[sta];
            self.ledger.record_state(sta - 1, node.radio, node.radio_since, run_end)?;
        }
        self.log(AP, "end", "");
        let station_energy_mj: Vec<f64> = (0..self.cfg.n).map(|i| self.ledger.station_energy(i, &self.cfg.power)).collect();
        let twt0 = self.schedule.agreements[0].twt;
        Ok(ReplicationResult {
            n: self.cfg.n,
            delivered: self.sessions.iter().filter(|s| s.phase == StaPhase::Done).count(),
            twt0,
            txn_time_us: avg_transmission_time(&self.sessions, twt0),
            mean_energy_mj: station_energy_mj.iter().sum::<f64>() / self.cfg.n as f64,
            station_energy_mj,
            collisions: self.collisions,
            hidden_pairs: self.topo.hidden_pairs(),
            run_end,
            attempts: self.nodes[1..].iter().map(|n| n.edca.attempts()).collect(),
            sessions: self.sessions,
            ledger: self.ledger,
            trace: self.trace,
        })
    }

    fn sample_radios(&mut self) -> Result<(), SimError> {
        let now = self.now();
        for sta in 1..=self.cfg.n {
            let state = self.nodes[sta].radio_state();
            let node = &mut self.nodes[sta];
            if state != node.radio {
                let (prev, since) = (node.radio, node.radio_since);
                node.radio = state;
                node.radio_since = now;
                self.ledger.record_state(sta - 1, prev, since, now)?;
                self.log(sta, "radio", state);
            }
        }
        Ok(())
    }

    fn dispatch(&mut self, node: NodeId, ev: Ev) -> Result<(), SimError> {
        match ev {
            Ev::Wake => self.on_wake(node),
            Ev::Access => self.on_access(node),
            // Completion is handled by `settle_ends` before dispatch.
            Ev::TxEnd => Ok(()),
            Ev::AckTimeout => self.on_ack_timeout(node),
            Ev::SendAck { to } => self.send_ack(to),
            Ev::SendData => self.send_polled_data(node),
            Ev::TriggerDue => self.on_trigger_due(node),
            Ev::ResponseTimeout => {
                self.log(AP, "response_timeout", node);
                if let Some(x) = self.exchange.as_mut() {
                    x.response_timer = None;
                }
                self.close_exchange()
            }
            Ev::SpEnd => self.on_sp_end(node),
        }
    }

    // ---- medium ----------------------------------------------------------

    fn begin_transmission(&mut self, sender: NodeId, frame: Frame, duration: SimTime) -> Result<TxId, SimError> {
        if self.nodes[sender].transmitting.is_some() {
            return Err(SimError::Logic(format!("node {sender} already transmitting")));
        }
        let now = self.now();
        let id = self.next_tx;
        self.next_tx += 1;
        let record = TransmissionRecord {
            id,
            sender,
            frame,
            start: now,
            duration,
        };

        let sender_was_busy = self.nodes[sender].busy();
        self.nodes[sender].rx.on_own_transmit();
        self.nodes[sender].transmitting = Some(id);
        let mut newly_busy = Vec::new();
        if !sender_was_busy {
            newly_busy.push(sender);
        }

        let threshold = self.cfg.capture_threshold();
        let listeners: Vec<NodeId> = (0..self.nodes.len())
            .filter(|&l| l != sender && self.topo.can_sense(sender, l))
            .collect();
        for &l in &listeners {
            let power = self.topo.rx_power(sender, l);
            let node = &mut self.nodes[l];
            let was_busy = node.busy();
            let listening = node.listening();
            node.rx.on_start(id, power, listening, threshold);
            if !was_busy && node.awake {
                newly_busy.push(l);
            }
        }
        for l in newly_busy {
            self.notify_busy(l);
        }

        self.log(sender, "tx_start", format_args!("{} {} {}", frame.kind.as_str(), frame.addressee, duration));
        self.ends.insert((record.end(), id));
        self.queue.schedule(record.end(), sender, Ev::TxEnd)?;
        self.on_air.insert(id, OnAir { record, listeners });
        Ok(id)
    }

    fn notify_busy(&mut self, node: NodeId) {
        let now = self.now();
        let n = &mut self.nodes[node];
        if n.edca.on_channel_busy(now) == BusyReaction::Suspended {
            if let Some(h) = n.access.take() {
                self.queue.cancel(h);
            }
        }
    }

    fn notify_idle(&mut self, node: NodeId) -> Result<(), SimError> {
        let now = self.now();
        if let Some(at) = self.nodes[node].edca.on_channel_idle(now) {
            let h = self.queue.schedule(at, node, Ev::Access)?;
            self.nodes[node].access = Some(h);
        }
        Ok(())
    }

    /// Completes every frame whose end is at or before now.
    fn settle_ends(&mut self) -> Result<(), SimError> {
        let now = self.now();
        while let Some(&(end, id)) = self.ends.first() {
            if end > now {
                break;
            }
            self.ends.pop_first();
            self.finish_transmission(id)?;
        }
        Ok(())
    }

    fn finish_transmission(&mut self, id: TxId) -> Result<(), SimError> {
        let OnAir { record, listeners } = self
            .on_air
            .remove(&id)
            .ok_or_else(|| SimError::Logic(format!("unknown transmission {id}")))?;
        let sender = record.sender;
        self.nodes[sender].transmitting = None;
        self.log(sender, "tx_end", record.frame.kind.as_str());

        let mut deliveries = Vec::new();
        let mut ap_outcome = None;
        for &l in &listeners {
            let outcome = self.nodes[l].rx.on_end(id)?;
            if l == AP {
                ap_outcome = Some(outcome);
                if outcome.is_overlap_loss() {
                    self.collisions += 1;
                }
            }
            if l == AP || l == record.frame.addressee {
                self.log(l, "rx", format_args!("{} {} {}", record.frame.kind.as_str(), sender, outcome.as_str()));
            }
            if outcome == ReceptionOutcome::Delivered && l == record.frame.addressee {
                deliveries.push(l);
            }
        }

        self.after_own_transmission(&record, ap_outcome)?;
        for l in deliveries {
            self.on_delivered(l, &record)?;
        }
        for l in std::iter::once(sender).chain(listeners) {
            if !self.nodes[l].busy() && self.nodes[l].awake {
                self.notify_idle(l)?;
            }
        }
        Ok(())
    }

    // ---- protocol ----------------------------------------------------------

    fn after_own_transmission(&mut self, record: &TransmissionRecord, ap_outcome: Option<ReceptionOutcome>) -> Result<(), SimError> {
        let now = self.now();
        let sender = record.sender;
        match (record.frame.kind, self.cfg.mode) {
            (FrameKind::Data, TwtMode::NonPolling) => {
                if let Some(deadline) = self.nodes[sender].edca.on_tx_end(now, true)? {
                    let h = self.queue.schedule(deadline, sender, Ev::AckTimeout)?;
                    self.nodes[sender].ack_timer = Some(h);
                }
            }
            (FrameKind::Data, TwtMode::Polling) => {
                let h = self.queue.schedule(now + self.cfg.edca.ack_timeout, sender, Ev::AckTimeout)?;
                self.nodes[sender].ack_timer = Some(h);
                let in_exchange = self.exchange.as_ref().is_some_and(|x| x.sta == sender);
                if in_exchange && ap_outcome != Some(ReceptionOutcome::Delivered) {
                    self.close_exchange()?;
                }
            }
            (FrameKind::Trigger, _) => {
                self.nodes[AP].edca.on_tx_end(now, false)?;
                let wait = self.cfg.edca.sifs + self.cfg.edca.slot;
                let h = self.queue.schedule(now + wait, record.frame.addressee, Ev::ResponseTimeout)?;
                if let Some(x) = self.exchange.as_mut() {
                    x.response_timer = Some(h);
                }
            }
            (FrameKind::Ack, TwtMode::Polling) => {
                if self.exchange.as_ref().is_some_and(|x| x.sta == record.frame.addressee) {
                    self.close_exchange()?;
                }
            }
            (FrameKind::Ack, TwtMode::NonPolling) => {}
        }
        Ok(())
    }

    fn on_delivered(&mut self, listener: NodeId, record: &TransmissionRecord) -> Result<(), SimError> {
        let now = self.now();
        match record.frame.kind {
            FrameKind::Data => {
                let at = receiver_ack_rule(now, &self.cfg.edca);
                self.queue.schedule(at, AP, Ev::SendAck { to: record.sender })?;
            }
            FrameKind::Ack => {
                let phase = self.sessions[listener - 1].phase;
                let awaiting = match phase {
                    StaPhase::Contending => self.nodes[listener].edca.phase() == EdcaPhase::AwaitAck,
                    StaPhase::Exchanging => self.nodes[listener].ack_timer.is_some(),
                    _ => false,
                };
                if awaiting {
                    if let Some(h) = self.nodes[listener].ack_timer.take() {
                        self.queue.cancel(h);
                    }
                    if phase == StaPhase::Contending {
                        self.nodes[listener].edca.on_ack()?;
                    }
                    let s = self.session(listener);
                    s.phase = StaPhase::Done;
                    s.delivered_at = Some(now);
                    self.log(listener, "delivered", "");
                    self.doze(listener);
                }
            }
            FrameKind::Trigger => {
                if self.sessions[listener - 1].phase == StaPhase::AwaitingTrigger {
                    self.session(listener).phase = StaPhase::Exchanging;
                    if let Some(h) = self.nodes[listener].sp_timer.take() {
                        self.queue.cancel(h);
                    }
                    self.queue.schedule(now + self.cfg.edca.sifs, listener, Ev::SendData)?;
                }
            }
        }
        Ok(())
    }

    fn doze(&mut self, sta: NodeId) {
        let now = self.now();
        let node = &mut self.nodes[sta];
        node.awake = false;
        node.rx.on_sleep();
        for h in [node.access.take(), node.ack_timer.take(), node.sp_timer.take()].into_iter().flatten() {
            self.queue.cancel(h);
        }
        self.session(sta).doze_at = Some(now);
        self.log(sta, "doze", "");
    }

    fn fail(&mut self, sta: NodeId, why: &str) {
        self.session(sta).phase = StaPhase::Failed;
        self.log(sta, "failed", why);
        self.doze(sta);
    }

    fn on_wake(&mut self, sta: NodeId) -> Result<(), SimError> {
        let now = self.now();
        if self.sessions[sta - 1].phase != StaPhase::Doze {
            return Err(SimError::Logic(format!("station {sta} woke twice")));
        }
        self.nodes[sta].awake = true;
        self.log(sta, "wake", "");
        match self.cfg.mode {
            TwtMode::NonPolling => {
                self.session(sta).phase = StaPhase::Contending;
                let idle = !self.nodes[sta].busy();
                let Node { edca, draws, .. } = &mut self.nodes[sta];
                let access = edca.enqueue_frame(now, idle, &mut |cw| draws.backoff(cw))?;
                let counter = edca.backoff_counter();
                self.log(sta, "backoff", format_args!("{} {}", self.cfg.edca.cw_min, counter));
                if let Some(at) = access {
                    let h = self.queue.schedule(at, sta, Ev::Access)?;
                    self.nodes[sta].access = Some(h);
                }
            }
            TwtMode::Polling => {
                let sp_end = self.sessions[sta - 1].agreement.sp_end();
                if now >= sp_end {
                    self.fail(sta, "woke_after_sp");
                } else {
                    self.session(sta).phase = StaPhase::AwaitingTrigger;
                    let h = self.queue.schedule(sp_end, sta, Ev::SpEnd)?;
                    self.nodes[sta].sp_timer = Some(h);
                }
            }
        }
        Ok(())
    }

    fn on_access(&mut self, node: NodeId) -> Result<(), SimError> {
        let now = self.now();
        self.nodes[node].access = None;
        self.nodes[node].edca.on_access(now)?;
        let frame = if node == AP {
            let sta = self
                .exchange
                .as_ref()
                .map(|x| x.sta)
                .ok_or_else(|| SimError::Logic("AP access without a poll in service".into()))?;
            Frame {
                kind: FrameKind::Trigger,
                addressee: sta,
                payload: sta,
            }
        } else {
            Frame {
                kind: FrameKind::Data,
                addressee: AP,
                payload: node,
            }
        };
        let duration = match frame.kind {
            FrameKind::Trigger => self.cfg.trigger_duration_us,
            _ => self.cfg.data_duration_us,
        };
        self.begin_transmission(node, frame, SimTime(duration))?;
        Ok(())
    }

    fn on_ack_timeout(&mut self, sta: NodeId) -> Result<(), SimError> {
        let now = self.now();
        self.nodes[sta].ack_timer = None;
        self.log(sta, "ack_timeout", "");
        match self.cfg.mode {
            TwtMode::Polling => {
                self.fail(sta, "no_ack");
            }
            TwtMode::NonPolling => {
                let idle = !self.nodes[sta].busy();
                let Node { edca, draws, .. } = &mut self.nodes[sta];
                match edca.on_ack_timeout(now, idle, &mut |cw| draws.backoff(cw))? {
                    RetryDecision::Dropped => {
                        self.log(sta, "drop", "");
                        self.fail(sta, "retry_limit");
                    }
                    RetryDecision::Retry(access) => {
                        let (cw, counter) = (edca.cw(), edca.backoff_counter());
                        self.log(sta, "backoff", format_args!("{cw} {counter}"));
                        if let Some(at) = access {
                            let h = self.queue.schedule(at, sta, Ev::Access)?;
                            self.nodes[sta].access = Some(h);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn send_ack(&mut self, to: NodeId) -> Result<(), SimError> {
        if self.nodes[AP].transmitting.is_some() {
            self.log(AP, "ack_skipped", to);
            return Ok(());
        }
        let frame = Frame {
            kind: FrameKind::Ack,
            addressee: to,
            payload: to,
        };
        self.begin_transmission(AP, frame, self.cfg.edca.ack_duration)?;
        Ok(())
    }

    fn send_polled_data(&mut self, sta: NodeId) -> Result<(), SimError> {
        if self.sessions[sta - 1].phase != StaPhase::Exchanging {
            return Ok(());
        }
        let frame = Frame {
            kind: FrameKind::Data,
            addressee: AP,
            payload: sta,
        };
        self.begin_transmission(sta, frame, SimTime(self.cfg.data_duration_us))?;
        let heard_by_ap = self.topo.can_sense(sta, AP);
        if let Some(x) = self.exchange.as_mut() {
            if x.sta == sta && heard_by_ap {
                if let Some(h) = x.response_timer.take() {
                    self.queue.cancel(h);
                }
            }
        }
        Ok(())
    }

    fn on_trigger_due(&mut self, sta: NodeId) -> Result<(), SimError> {
        let now = self.now();
        self.log(AP, "trigger_due", sta);
        self.poll.push(TriggerDescriptor { sta, due_at: now });
        self.start_next_poll()
    }

    fn start_next_poll(&mut self) -> Result<(), SimError> {
        let Some(next) = self.poll.start_next() else {
            return Ok(());
        };
        let now = self.now();
        self.exchange = Some(Exchange {
            sta: next.sta,
            response_timer: None,
        });
        let idle = !self.nodes[AP].busy();
        let Node { edca, draws, .. } = &mut self.nodes[AP];
        edca.reset();
        let access = edca.enqueue_frame(now, idle, &mut |cw| draws.backoff(cw))?;
        let counter = edca.backoff_counter();
        self.log(AP, "backoff", format_args!("{} {}", self.cfg.edca.cw_min, counter));
        if let Some(at) = access {
            let h = self.queue.schedule(at, AP, Ev::Access)?;
            self.nodes[AP].access = Some(h);
        }
        Ok(())
    }

    fn close_exchange(&mut self) -> Result<(), SimError> {
        if let Some(x) = self.exchange.take() {
            if let Some(h) = x.response_timer {
                self.queue.cancel(h);
            }
            self.log(AP, "exchange_close", x.sta);
        }
        self.poll.complete();
        self.start_next_poll()
    }

    fn on_sp_end(&mut self, sta: NodeId) -> Result<(), SimError> {
        self.nodes[sta].sp_timer = None;
        if self.sessions[sta - 1].phase == StaPhase::AwaitingTrigger {
            self.fail(sta, "sp_end");
        }
        Ok(())
    }
}

/// Runs one replication with random backoffs.
pub fn run_replication(cfg: &ScenarioConfig, seed: u64) -> Result<ReplicationResult, SimError> {
    Replication::new(cfg, seed, BackoffSource::Random, false)?.run()
}

pub fn run_replication_traced(cfg: &ScenarioConfig, seed: u64) -> Result<ReplicationResult, SimError> {
    Replication::new(cfg, seed, BackoffSource::Random, true)?.run()
}
