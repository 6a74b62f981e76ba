//! Radio-state accounting and energy integration.

use std::fmt;

use crate::error::SimError;
use crate::kernel::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadioState {
    Tx,
    Rx,
    Idle,
    Doze,
}

impl RadioState {
    pub fn as_str(&self) -> &'static str {
        match self {
            RadioState::Tx => "tx",
            RadioState::Rx => "rx",
            RadioState::Idle => "idle",
            RadioState::Doze => "doze",
        }
    }

    pub fn parse(s: &str) -> Option<RadioState> {
        match s {
            "tx" => Some(RadioState::Tx),
            "rx" => Some(RadioState::Rx),
            "idle" => Some(RadioState::Idle),
            "doze" => Some(RadioState::Doze),
            _ => None,
        }
    }
}

impl fmt::Display for RadioState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Power draw per radio state, in milliwatts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    pub p_tx: f64,
    pub p_rx: f64,
    pub p_idle: f64,
    pub p_doze: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        PowerProfile {
            p_tx: 280.0,
            p_rx: 180.0,
            p_idle: 120.0,
            p_doze: 0.012,
        }
    }
}

impl PowerProfile {
    pub fn validate(&self) -> Result<(), String> {
        let ordered = self.p_tx >= self.p_rx && self.p_rx >= self.p_idle && self.p_idle > self.p_doze && self.p_doze >= 0.0;
        if ordered {
            Ok(())
        } else {
            Err("power profile must satisfy p_tx >= p_rx >= p_idle > p_doze >= 0".into())
        }
    }

    pub fn power_mw(&self, state: RadioState) -> f64 {
        match state {
            RadioState::Tx => self.p_tx,
            RadioState::Rx => self.p_rx,
            RadioState::Idle => self.p_idle,
            RadioState::Doze => self.p_doze,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub state: RadioState,
    pub start: SimTime,
    pub end: SimTime,
}

impl Interval {
    pub fn duration(&self) -> SimTime {
        self.end - self.start
    }
}

/// Contiguous per-station radio-state intervals starting at time zero.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    stations: Vec<Vec<Interval>>,
}

impl EnergyLedger {
    pub fn new(stations: usize) -> Self {
        EnergyLedger {
            stations: vec![Vec::new(); stations],
        }
    }

    pub fn stations(&self) -> usize {
        self.stations.len()
    }

    pub fn intervals(&self, sta: usize) -> &[Interval] {
        &self.stations[sta]
    }

    /// End of the last recorded interval for `sta`.
    pub fn covered_until(&self, sta: usize) -> SimTime {
        self.stations[sta].last().map_or(SimTime::ZERO, |i| i.end)
    }

    pub fn record_state(&mut self, sta: usize, state: RadioState, from: SimTime, to: SimTime) -> Result<(), SimError> {
        let list = self
            .stations
            .get_mut(sta)
            .ok_or_else(|| SimError::Logic(format!("no ledger for station index {sta}")))?;
        let expected = list.last().map_or(SimTime::ZERO, |i| i.end);
        if from != expected || to < from {
            return Err(SimError::Logic(format!(
                "ledger for station index {sta}: interval [{from}, {to}] does not continue from {expected}"
            )));
        }
        list.push(Interval { state, start: from, end: to });
        Ok(())
    }

    /// Energy of one station in millijoules.
    pub fn station_energy(&self, sta: usize, profile: &PowerProfile) -> f64 {
        self.stations[sta]
            .iter()
            .map(|i| i.duration().0 as f64 * 1e-6 * profile.power_mw(i.state))
            .sum()
    }

    pub fn mean_station_energy(&self, profile: &PowerProfile) -> f64 {
        mean_station_energy(std::slice::from_ref(self), profile)
    }
}

/// Mean energy over every station of every ledger, in millijoules.
pub fn mean_station_energy(ledgers: &[EnergyLedger], profile: &PowerProfile) -> f64 {
    let (sum, count) = ledgers.iter().fold((0.0, 0usize), |(s, c), l| {
        let e: f64 = (0..l.stations()).map(|i| l.station_energy(i, profile)).sum();
        (s + e, c + l.stations())
    });
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}
