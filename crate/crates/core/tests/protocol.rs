use twtsim::energy::RadioState;
use twtsim::sim::{run_replication, run_replication_traced, ReplicationResult};
use twtsim::twt::{pm_pdr_limit, StaPhase};
use twtsim::{run, ScenarioConfig, TwtMode};

fn npm(n: usize, mu: u64, sigma: f64) -> ScenarioConfig {
    ScenarioConfig {
        mode: TwtMode::NonPolling,
        n,
        mu_us: mu,
        sigma_us: sigma,
        ..ScenarioConfig::default()
    }
}

fn pm(n: usize, mu: u64, sigma: f64, offset: u64) -> ScenarioConfig {
    ScenarioConfig {
        mode: TwtMode::Polling,
        awake_offset_us: offset,
        ..npm(n, mu, sigma)
    }
}

/// Energy per station rebuilt from the `radio` lines of a trace.
fn energy_from_trace(r: &ReplicationResult, cfg: &ScenarioConfig) -> Vec<f64> {
    let trace = r.trace.as_ref().expect("traced run");
    let mut last: Vec<(u64, RadioState)> = vec![(0, RadioState::Doze); r.n];
    let mut energy = vec![0.0; r.n];
    for line in trace.lines() {
        let f: Vec<&str> = line.split(' ').collect();
        if f[2] != "radio" {
            continue;
        }
        let (t, sta): (u64, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let state = RadioState::parse(f[3]).unwrap();
        let (since, prev) = last[sta - 1];
        energy[sta - 1] += (t - since) as f64 * 1e-6 * cfg.power.power_mw(prev);
        last[sta - 1] = (t, state);
    }
    for (i, (since, prev)) in last.iter().enumerate() {
        energy[i] += (r.run_end.0 - since) as f64 * 1e-6 * cfg.power.power_mw(*prev);
    }
    energy
}

#[test]
fn small_npm_run_delivers_everything() {
    let r = run_replication(&npm(3, 10_000, 1000.0), 1).unwrap();
    assert_eq!(r.pdr(), 1.0);
    assert_eq!(r.collisions, 0);
}

#[test]
fn polled_mode_never_collides() {
    for (radius, capture) in [(5.0, false), (50.0, false), (50.0, true)] {
        for mu in [0, 1709, 20_000] {
            let mut c = pm(20, mu, 10_000.0, 30_000);
            c.radius_m = radius;
            c.capture = capture;
            for seed in 0..10 {
                let r = run_replication(&c, seed).unwrap();
                assert_eq!(r.collisions, 0, "radius {radius} capture {capture} mu {mu} seed {seed}");
            }
        }
    }
}

#[test]
fn npm_station_dozes_when_its_frame_resolves() {
    for seed in 0..20 {
        let r = run_replication_traced(&npm(20, 740, 10_000.0), seed).unwrap();
        let trace = r.trace.unwrap();
        for s in &r.sessions {
            let doze = s.doze_at.unwrap();
            match s.phase {
                StaPhase::Done => assert_eq!(Some(doze), s.delivered_at),
                StaPhase::Failed => {
                    let dropped = format!("{} {} drop", doze.0, s.agreement.sta);
                    assert!(trace.lines().iter().any(|l| l.starts_with(&dropped)));
                }
                other => panic!("non-final phase {other:?}"),
            }
        }
    }
}

#[test]
fn pm_miss_keeps_the_station_awake_until_sp_end() {
    let c = pm(10, 20_000, 20_000.0, 0);
    let mut misses = 0;
    for seed in 0..20 {
        let r = run_replication(&c, seed).unwrap();
        for s in &r.sessions {
            if s.phase == StaPhase::Failed {
                misses += 1;
                assert!(s.actual_wake > s.agreement.twt);
                assert_eq!(s.doze_at, Some(s.agreement.sp_end()));
            } else {
                assert_eq!(s.phase, StaPhase::Done);
                assert!(s.doze_at.unwrap() <= s.agreement.sp_end());
            }
        }
    }
    assert!(misses > 20);
}

#[test]
fn schedule_spacing_and_pdr_bounds() {
    let c = pm(8, 3000, 1000.0, 500);
    let r = run_replication(&c, 4).unwrap();
    for (i, s) in r.sessions.iter().enumerate() {
        assert_eq!(s.agreement.sta, i + 1);
        assert_eq!(s.agreement.twt.0, c.t_target_us + i as u64 * c.mu_us);
    }
    assert!((0.0..=1.0).contains(&r.pdr()));
    assert_eq!(r.delivered + r.sessions.iter().filter(|s| s.phase == StaPhase::Failed).count(), r.n);
}

#[test]
fn punctual_pm_never_misses() {
    for mu in [0, 500, 1709, 10_000] {
        let c = pm(20, mu, 0.0, 1);
        for seed in 0..5 {
            assert_eq!(run_replication(&c, seed).unwrap().pdr(), 1.0, "mu {mu}");
        }
    }
}

#[test]
fn spread_out_pm_matches_the_drift_limit() {
    let mut c = pm(20, 100_000, 10_000.0, 5000);
    c.replications = 200;
    let m = run(&c).unwrap();
    let limit = pm_pdr_limit(5000.0, 10_000.0, &c.edca);
    let pdr = m.pdr.mean.unwrap();
    // Binomial standard error over 4000 stations is about 0.007.
    assert!((pdr - limit).abs() < 0.025, "pdr {pdr} limit {limit}");
}

#[test]
fn npm_energy_does_not_grow_with_spacing() {
    let span = ScenarioConfig::default().exchange_span_us();
    let mut prev: Option<(f64, u64)> = None;
    for k in [2, 4, 8, 16] {
        let mut c = npm(20, k * span, 1000.0);
        c.replications = 100;
        let m = run(&c).unwrap();
        let e = m.energy_mj.mean.unwrap();
        // The run window (and thus doze time) grows with mu.
        let run_len = c.t_target_us + c.n as u64 * c.mu_us;
        if let Some((pe, plen)) = prev {
            let allowance = (run_len - plen) as f64 * 1e-6 * c.power.p_doze;
            assert!(e <= pe + allowance + 1e-9, "k {k}: {e} > {pe}");
        }
        prev = Some((e, run_len));
    }
}

#[test]
fn pm_miss_costs_more_than_service() {
    let c = pm(10, 20_000, 20_000.0, 0);
    for seed in 0..10 {
        let r = run_replication(&c, seed).unwrap();
        let done: Vec<f64> = (0..r.n).filter(|&i| r.sessions[i].phase == StaPhase::Done).map(|i| r.station_energy_mj[i]).collect();
        let failed: Vec<f64> = (0..r.n).filter(|&i| r.sessions[i].phase == StaPhase::Failed).map(|i| r.station_energy_mj[i]).collect();
        if let (Some(max_done), Some(min_failed)) = (
            done.iter().cloned().reduce(f64::max),
            failed.iter().cloned().reduce(f64::min),
        ) {
            assert!(min_failed > max_done, "seed {seed}");
        }
    }
}

#[test]
fn ledger_matches_trace() {
    for c in [npm(20, 740, 10_000.0), pm(20, 1709, 10_000.0, 30_000)] {
        let r = run_replication_traced(&c, 9).unwrap();
        for (i, e) in energy_from_trace(&r, &c).iter().enumerate() {
            assert!((e - r.station_energy_mj[i]).abs() < 1e-9);
            let iv = r.ledger.intervals(i);
            assert_eq!(iv.first().unwrap().start.0, 0);
            assert_eq!(iv.last().unwrap().end, r.run_end);
            assert!(iv.windows(2).all(|w| w[0].end == w[1].start));
        }
    }
}

#[test]
fn attempts_stay_within_the_retry_limit() {
    let c = npm(20, 0, 0.0);
    for seed in 0..20 {
        let r = run_replication(&c, seed).unwrap();
        assert!(r.attempts.iter().all(|&a| (1..=8).contains(&a)));
    }
}

#[test]
fn same_seed_same_result() {
    let c = npm(20, 740, 10_000.0);
    let a = run_replication_traced(&c, 77).unwrap();
    let b = run_replication_traced(&c, 77).unwrap();
    assert_eq!(a.trace.unwrap().render(), b.trace.unwrap().render());
    assert_eq!(a.station_energy_mj, b.station_energy_mj);
}
