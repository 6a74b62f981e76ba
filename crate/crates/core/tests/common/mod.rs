//! Hand-enumerated EDCA timelines with default timings, shared by test targets.
#![allow(dead_code)]

use twtsim::sim::{BackoffSource, Replication, ReplicationResult};
use twtsim::{ScenarioConfig, TwtMode};

pub const AIFS: u64 = 34;
pub const SLOT: u64 = 9;
pub const DATA: u64 = 1480;
pub const SIFS: u64 = 16;
pub const ACK: u64 = 44;
pub const ACK_TIMEOUT: u64 = 69;
pub const T0: u64 = 1_000_000;

/// NPM stations all waking exactly at `T0`.
pub fn simultaneous(n: usize) -> ScenarioConfig {
    ScenarioConfig {
        mode: TwtMode::NonPolling,
        n,
        mu_us: 0,
        sigma_us: 0.0,
        t_target_us: T0,
        replications: 1,
        ..ScenarioConfig::default()
    }
}

pub fn scripted(cfg: &ScenarioConfig, scripts: Vec<Vec<u32>>) -> ReplicationResult {
    Replication::new(cfg, 11, BackoffSource::Scripted(scripts), true)
        .unwrap()
        .run()
        .unwrap()
}

pub fn lone_completion(b: u64) -> u64 {
    AIFS + b * SLOT + DATA + SIFS + ACK
}

/// Outcome for two stations enqueueing together at `T0` with first draws `b1`, `b2`.
/// After a collision they redraw 0 and 1 respectively.
/// Returns (collided, station 1 delivery instant, station 2 delivery instant).
pub fn two_station_expectation(b1: u64, b2: u64) -> (bool, u64, u64) {
    let start = T0 + AIFS;
    if b1 == b2 {
        let data_end = start + b1 * SLOT + DATA;
        let retry_start = data_end + ACK_TIMEOUT + AIFS;
        // Station 1 draws 0 and goes first; station 2 freezes with 1 slot left.
        let s1_done = retry_start + DATA + SIFS + ACK;
        let s2_done = s1_done + AIFS + SLOT + DATA + SIFS + ACK;
        (true, s1_done, s2_done)
    } else {
        let (lo, hi) = (b1.min(b2), b1.max(b2));
        let first_done = start + lo * SLOT + DATA + SIFS + ACK;
        // The loser froze with hi - lo slots left, waits out data, SIFS and ACK, then AIFS.
        let second_done = first_done + AIFS + (hi - lo) * SLOT + DATA + SIFS + ACK;
        if b1 < b2 {
            (false, first_done, second_done)
        } else {
            (false, second_done, first_done)
        }
    }
}

/// Contention windows logged by `sta` in a traced run, in order.
pub fn logged_windows(r: &ReplicationResult, sta: usize) -> Vec<u32> {
    r.trace
        .as_ref()
        .unwrap()
        .lines()
        .iter()
        .filter_map(|l| {
            let f: Vec<&str> = l.split(' ').collect();
            (f[1] == sta.to_string() && f[2] == "backoff").then(|| f[3].parse().unwrap())
        })
        .collect()
}
