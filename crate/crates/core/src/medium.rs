//! Radio medium: node placement, binary carrier-sense visibility, log-distance
//! receive power and per-listener reception with an optional capture effect.

use std::f64::consts::PI;

use crate::error::SimError;
use crate::kernel::{NodeId, RngStream, SimTime};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// `n` positions drawn i.i.d. uniformly over a disk of `radius` centred on the AP.
pub fn place_nodes(n: usize, radius: f64, stream: &mut RngStream) -> Vec<Position> {
    (0..n)
        .map(|_| {
            let r = radius * stream.draw_unit().sqrt();
            let theta = 2.0 * PI * stream.draw_unit();
            Position {
                x: r * theta.cos(),
                y: r * theta.sin(),
            }
        })
        .collect()
}

/// Deterministic log-distance path loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagation {
    pub tx_power_dbm: f64,
    pub reference_loss_db: f64,
    pub exponent: f64,
}

impl Default for Propagation {
    fn default() -> Self {
        Propagation {
            tx_power_dbm: 0.0,
            reference_loss_db: 46.7,
            exponent: 3.0,
        }
    }
}

impl Propagation {
    pub fn rx_power_dbm(&self, distance_m: f64) -> Result<f64, SimError> {
        if !(distance_m > 0.0) {
            return Err(SimError::Logic(format!("receive power undefined at distance {distance_m} m")));
        }
        Ok(self.tx_power_dbm - self.reference_loss_db - 10.0 * self.exponent * distance_m.log10())
    }
}

/// Node geometry with precomputed sensing and power tables. Node 0 is the AP.
#[derive(Debug, Clone)]
pub struct Topology {
    positions: Vec<Position>,
    sense_range: f64,
    sense: Vec<Vec<bool>>,
    power: Vec<Vec<f64>>,
}

impl Topology {
    pub fn new(positions: Vec<Position>, sense_range: f64, propagation: &Propagation) -> Result<Self, SimError> {
        let n = positions.len();
        let mut sense = vec![vec![false; n]; n];
        let mut power = vec![vec![f64::NEG_INFINITY; n]; n];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let d = positions[a].distance(&positions[b]);
                sense[a][b] = d <= sense_range;
                power[a][b] = propagation.rx_power_dbm(d)?;
            }
        }
        Ok(Topology {
            positions,
            sense_range,
            sense,
            power,
        })
    }

    /// AP at the origin followed by `n` stations placed uniformly in the disk.
    pub fn random(
        n: usize,
        radius: f64,
        sense_range: f64,
        propagation: &Propagation,
        stream: &mut RngStream,
    ) -> Result<Self, SimError> {
        let mut positions = vec![Position::ORIGIN];
        positions.extend(place_nodes(n, radius, stream));
        Topology::new(positions, sense_range, propagation)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, node: NodeId) -> Position {
        self.positions[node]
    }

    pub fn sense_range(&self) -> f64 {
        self.sense_range
    }

    pub fn can_sense(&self, a: NodeId, b: NodeId) -> bool {
        self.sense[a][b]
    }

    /// Power at `listener` of a frame sent by `sender`, in dBm.
    pub fn rx_power(&self, sender: NodeId, listener: NodeId) -> f64 {
        self.power[sender][listener]
    }

    /// Unordered station pairs (AP excluded) that cannot sense each other.
    pub fn hidden_pairs(&self) -> usize {
        let n = self.len();
        (1..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| !self.can_sense(a, b))
            .count()
    }
}

pub type TxId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    Data,
    Trigger,
    Ack,
}

impl FrameKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrameKind::Data => "data",
            FrameKind::Trigger => "trigger",
            FrameKind::Ack => "ack",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub addressee: NodeId,
    /// Station whose uplink frame this exchange belongs to.
    pub payload: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionRecord {
    pub id: TxId,
    pub sender: NodeId,
    pub frame: Frame,
    pub start: SimTime,
    pub duration: SimTime,
}

impl TransmissionRecord {
    pub fn end(&self) -> SimTime {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReceptionOutcome {
    Delivered,
    LostCollision,
    LostCapturedAway,
    NotSensed,
}

impl ReceptionOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReceptionOutcome::Delivered => "delivered",
            ReceptionOutcome::LostCollision => "collision",
            ReceptionOutcome::LostCapturedAway => "captured_away",
            ReceptionOutcome::NotSensed => "not_sensed",
        }
    }

    pub fn is_overlap_loss(&self) -> bool {
        matches!(self, ReceptionOutcome::LostCollision | ReceptionOutcome::LostCapturedAway)
    }
}

/// What the listener's radio is doing when a frame begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Listening {
    Awake,
    Asleep,
    Transmitting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RxStatus {
    Locked { corrupted: bool },
    CapturedAway,
    Missed(ReceptionOutcome),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Heard {
    tx: TxId,
    power: f64,
    status: RxStatus,
}

/// Per-listener reception state over the frames currently on air within sensing range.
///
/// At most one frame is locked (being decoded) at a time, and only a frame that
/// starts on an idle channel can be locked fresh. A new frame corrupts the locked
/// one unless capture is enabled and the newcomer beats every frame on air by the
/// capture threshold, in which case the receiver switches to it.
#[derive(Debug, Clone, Default)]
pub struct Receiver {
    heard: Vec<Heard>,
}

impl Receiver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Carrier sense: any sensed frame on air.
    pub fn is_busy(&self) -> bool {
        !self.heard.is_empty()
    }

    pub fn locked(&self) -> Option<TxId> {
        self.heard
            .iter()
            .find(|h| matches!(h.status, RxStatus::Locked { .. }))
            .map(|h| h.tx)
    }

    /// Registers the start of a sensed frame. Returns the frame that was captured away, if any.
    pub fn on_start(
        &mut self,
        tx: TxId,
        power: f64,
        listening: Listening,
        capture_threshold_db: Option<f64>,
    ) -> Option<TxId> {
        let mut captured = None;
        let status = match listening {
            Listening::Asleep => RxStatus::Missed(ReceptionOutcome::NotSensed),
            Listening::Transmitting => RxStatus::Missed(ReceptionOutcome::LostCollision),
            Listening::Awake => {
                let strongest = self.heard.iter().map(|h| h.power).fold(f64::NEG_INFINITY, f64::max);
                let captures = capture_threshold_db.is_some_and(|thr| power >= strongest + thr);
                let idle = self.heard.is_empty();
                let locked = self.heard.iter_mut().find(|h| matches!(h.status, RxStatus::Locked { .. }));
                match locked {
                    _ if idle => RxStatus::Locked { corrupted: false },
                    Some(h) if captures => {
                        h.status = RxStatus::CapturedAway;
                        captured = Some(h.tx);
                        RxStatus::Locked { corrupted: false }
                    }
                    Some(h) => {
                        h.status = RxStatus::Locked { corrupted: true };
                        RxStatus::Missed(ReceptionOutcome::LostCollision)
                    }
                    // Busy without a locked frame: nothing to switch away from.
                    None => RxStatus::Missed(ReceptionOutcome::LostCollision),
                }
            }
        };
        self.heard.push(Heard { tx, power, status });
        captured
    }

    /// Registers the end of a sensed frame and returns its outcome at this listener.
    pub fn on_end(&mut self, tx: TxId) -> Result<ReceptionOutcome, SimError> {
        let idx = self
            .heard
            .iter()
            .position(|h| h.tx == tx)
            .ok_or_else(|| SimError::Logic(format!("end of unknown transmission {tx}")))?;
        let h = self.heard.remove(idx);
        Ok(match h.status {
            RxStatus::Locked { corrupted: false } => ReceptionOutcome::Delivered,
            RxStatus::Locked { corrupted: true } => ReceptionOutcome::LostCollision,
            RxStatus::CapturedAway => ReceptionOutcome::LostCapturedAway,
            RxStatus::Missed(o) => o,
        })
    }

    /// The listener started transmitting: anything it was decoding is lost.
    pub fn on_own_transmit(&mut self) {
        for h in &mut self.heard {
            if let RxStatus::Locked { .. } = h.status {
                h.status = RxStatus::Missed(ReceptionOutcome::LostCollision);
            }
        }
    }

    /// The listener went to doze: anything it was decoding is abandoned.
    pub fn on_sleep(&mut self) {
        for h in &mut self.heard {
            if let RxStatus::Locked { .. } = h.status {
                h.status = RxStatus::Missed(ReceptionOutcome::NotSensed);
            }
        }
    }
}

/// Outcome of every frame in `overlapping` at an always-awake listener.
///
/// `powers[i]` is the receive power of `overlapping[i]`. Frames ending at the same
/// instant another starts do not overlap.
pub fn resolve_reception(
    overlapping: &[TransmissionRecord],
    powers: &[f64],
    capture_threshold_db: Option<f64>,
) -> Result<Vec<ReceptionOutcome>, SimError> {
    if overlapping.len() != powers.len() {
        return Err(SimError::Logic("one receive power per record required".into()));
    }
    // (time, is_start, index); ends sort before starts at equal time.
    let mut edges: Vec<(SimTime, bool, usize)> = overlapping
        .iter()
        .enumerate()
        .flat_map(|(i, r)| [(r.start, true, i), (r.end(), false, i)])
        .collect();
    edges.sort_by_key(|&(t, is_start, i)| (t, is_start, i));

    let mut rx = Receiver::new();
    let mut out = vec![ReceptionOutcome::NotSensed; overlapping.len()];
    for (_, is_start, i) in edges {
        if is_start {
            rx.on_start(i as TxId, powers[i], Listening::Awake, capture_threshold_db);
        } else {
            out[i] = rx.on_end(i as TxId)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(id: u64, start: u64, dur: u64) -> TransmissionRecord {
        TransmissionRecord {
            id,
            sender: id as usize + 1,
            frame: Frame {
                kind: FrameKind::Data,
                addressee: 0,
                payload: id as usize + 1,
            },
            start: SimTime(start),
            duration: SimTime(dur),
        }
    }

    #[test]
    fn placement_stays_in_disk() {
        let mut s = RngStream::new(5, 0);
        let pts = place_nodes(1000, 5.0, &mut s);
        assert!(pts.iter().all(|p| p.distance(&Position::ORIGIN) <= 5.0));
        assert_eq!(place_nodes(1, 5.0, &mut s).len(), 1);
    }

    #[test]
    fn placement_mean_distance() {
        let mut s = RngStream::new(8, 0);
        let n = 100_000;
        let mean = place_nodes(n, 50.0, &mut s)
            .iter()
            .map(|p| p.distance(&Position::ORIGIN))
            .sum::<f64>()
            / n as f64;
        let expected = 2.0 * 50.0 / 3.0;
        assert!((mean / expected - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn sensing_range_boundary() {
        let p = Propagation::default();
        let topo = Topology::new(
            vec![
                Position::ORIGIN,
                Position { x: 10.0, y: 0.0 },
                Position { x: -60.0, y: 0.0 },
                Position { x: 0.0, y: 65.0 },
            ],
            65.0,
            &p,
        )
        .unwrap();
        assert!(topo.can_sense(0, 1));
        assert!(!topo.can_sense(1, 2));
        assert!(topo.can_sense(0, 3));
        assert_eq!(topo.hidden_pairs(), 3);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(topo.can_sense(a, b), topo.can_sense(b, a));
            }
        }
    }

    #[test]
    fn path_loss_properties() {
        let p = Propagation::default();
        assert_eq!(p.rx_power_dbm(7.0).unwrap(), p.rx_power_dbm(7.0).unwrap());
        assert!(p.rx_power_dbm(8.0).unwrap() < p.rx_power_dbm(7.0).unwrap());
        let diff = p.rx_power_dbm(3.0).unwrap() - p.rx_power_dbm(6.0).unwrap();
        assert!((diff - 9.030_899_869_919_435).abs() < 1e-9);
        assert!(p.rx_power_dbm(0.0).is_err());
    }

    #[test]
    fn single_frame_is_delivered() {
        let out = resolve_reception(&[rec(0, 0, 100)], &[-70.0], None).unwrap();
        assert_eq!(out, vec![ReceptionOutcome::Delivered]);
    }

    #[test]
    fn overlap_without_capture_loses_both() {
        let out = resolve_reception(&[rec(0, 0, 100), rec(1, 50, 100)], &[-70.0, -50.0], None).unwrap();
        assert_eq!(out, vec![ReceptionOutcome::LostCollision; 2]);
    }

    #[test]
    fn touching_frames_do_not_overlap() {
        let out = resolve_reception(&[rec(0, 0, 100), rec(1, 100, 100)], &[-70.0, -70.0], None).unwrap();
        assert_eq!(out, vec![ReceptionOutcome::Delivered; 2]);
    }

    #[test]
    fn stronger_late_frame_captures() {
        let out = resolve_reception(&[rec(0, 0, 100), rec(1, 30, 100)], &[-75.0, -60.0], Some(10.0)).unwrap();
        assert_eq!(out, vec![ReceptionOutcome::LostCapturedAway, ReceptionOutcome::Delivered]);
    }

    #[test]
    fn insufficiently_stronger_frame_corrupts() {
        let out = resolve_reception(&[rec(0, 0, 100), rec(1, 30, 100)], &[-75.0, -68.0], Some(10.0)).unwrap();
        assert_eq!(out, vec![ReceptionOutcome::LostCollision; 2]);
    }

    #[test]
    fn weaker_late_frame_corrupts_locked_frame() {
        let out = resolve_reception(&[rec(0, 0, 100), rec(1, 30, 100)], &[-50.0, -80.0], Some(10.0)).unwrap();
        assert_eq!(out, vec![ReceptionOutcome::LostCollision; 2]);
    }

    #[test]
    fn captured_frame_disrupted_again() {
        let recs = [rec(0, 0, 100), rec(1, 20, 100), rec(2, 40, 100)];
        let out = resolve_reception(&recs, &[-80.0, -65.0, -70.0], Some(10.0)).unwrap();
        assert_eq!(
            out,
            vec![
                ReceptionOutcome::LostCapturedAway,
                ReceptionOutcome::LostCollision,
                ReceptionOutcome::LostCollision
            ]
        );
    }

    #[test]
    fn receiver_tracks_sleep_and_transmit() {
        let mut rx = Receiver::new();
        rx.on_start(1, -60.0, Listening::Asleep, None);
        assert!(rx.is_busy());
        assert_eq!(rx.locked(), None);
        assert_eq!(rx.on_end(1).unwrap(), ReceptionOutcome::NotSensed);
        rx.on_start(2, -60.0, Listening::Awake, None);
        assert_eq!(rx.locked(), Some(2));
        rx.on_own_transmit();
        assert_eq!(rx.on_end(2).unwrap(), ReceptionOutcome::LostCollision);
        rx.on_start(3, -60.0, Listening::Transmitting, None);
        assert_eq!(rx.on_end(3).unwrap(), ReceptionOutcome::LostCollision);
        assert!(!rx.is_busy());
        assert!(rx.on_end(3).is_err());
    }

    fn arb_records() -> impl Strategy<Value = Vec<(u64, u64, f64)>> {
        prop::collection::vec((0u64..400, 1u64..200, -90.0f64..-40.0), 1..8)
    }

    fn build(v: &[(u64, u64, f64)]) -> (Vec<TransmissionRecord>, Vec<f64>) {
        let recs = v.iter().enumerate().map(|(i, &(s, d, _))| rec(i as u64, s, d)).collect();
        let pw = v.iter().map(|&(_, _, p)| p).collect();
        (recs, pw)
    }

    /// Maximal busy periods of the union of frame intervals, as index sets.
    fn busy_periods(recs: &[TransmissionRecord]) -> Vec<Vec<usize>> {
        let mut idx: Vec<usize> = (0..recs.len()).collect();
        idx.sort_by_key(|&i| (recs[i].start, i));
        let mut periods: Vec<(SimTime, Vec<usize>)> = Vec::new();
        for i in idx {
            match periods.last_mut() {
                Some((end, members)) if recs[i].start < *end => {
                    *end = (*end).max(recs[i].end());
                    members.push(i);
                }
                _ => periods.push((recs[i].end(), vec![i])),
            }
        }
        periods.into_iter().map(|(_, m)| m).collect()
    }

    proptest! {
        #[test]
        fn at_most_one_delivery_per_busy_period(v in arb_records(), capture in any::<bool>()) {
            let (recs, pw) = build(&v);
            let thr = capture.then_some(10.0);
            let out = resolve_reception(&recs, &pw, thr).unwrap();
            for period in busy_periods(&recs) {
                let delivered = period.iter().filter(|&&i| out[i] == ReceptionOutcome::Delivered).count();
                prop_assert!(delivered <= 1);
                if !capture && period.len() > 1 {
                    prop_assert_eq!(delivered, 0);
                }
            }
        }

        #[test]
        fn capture_never_reduces_deliveries(v in arb_records()) {
            let (recs, pw) = build(&v);
            let off = resolve_reception(&recs, &pw, None).unwrap();
            let on = resolve_reception(&recs, &pw, Some(10.0)).unwrap();
            for period in busy_periods(&recs) {
                let count = |o: &[ReceptionOutcome]| period.iter().filter(|&&i| o[i] == ReceptionOutcome::Delivered).count();
                prop_assert!(count(&off) <= count(&on));
            }
        }
    }
}
