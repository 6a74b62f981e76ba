//! Replication control, aggregate statistics, parameter sweeps and CSV output.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::{ConfigError, Error, SimError};
use crate::sim::{run_replication, run_replication_traced, ReplicationResult};
use crate::trace::Trace;

pub const CSV_HEADER: &str = "mode,n,mu_us,sigma_us,cw_min,awake_offset_us,radius_m,capture,replications,pdr_mean,pdr_std,txn_time_us_mean,txn_time_us_std,txn_time_exclusions,energy_mj_mean,energy_mj_std,collisions_mean,hidden_pairs_mean,seed";

/// Sample statistics over replications; absent values are excluded and counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: Option<f64>,
    /// Unbiased sample standard deviation; needs two values.
    pub std: Option<f64>,
    pub count: usize,
    pub exclusions: usize,
}

pub fn summarize(values: &[Option<f64>]) -> Summary {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let count = present.len();
    let exclusions = values.len() - count;
    if count == 0 {
        return Summary {
            mean: None,
            std: None,
            count,
            exclusions,
        };
    }
    let mean = present.iter().sum::<f64>() / count as f64;
    let std = (count > 1).then(|| {
        let ss: f64 = present.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (count as f64 - 1.0)).sqrt()
    });
    Summary {
        mean: Some(mean),
        std,
        count,
        exclusions,
    }
}

/// Scalar metrics of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationMetrics {
    pub seed: u64,
    pub pdr: f64,
    pub txn_time_us: Option<u64>,
    pub energy_mj: f64,
    pub collisions: u64,
    pub hidden_pairs: usize,
}

impl From<(&ReplicationResult, u64)> for ReplicationMetrics {
    fn from((r, seed): (&ReplicationResult, u64)) -> Self {
        ReplicationMetrics {
            seed,
            pdr: r.pdr(),
            txn_time_us: r.txn_time_us,
            energy_mj: r.mean_energy_mj,
            collisions: r.collisions,
            hidden_pairs: r.hidden_pairs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub config: ScenarioConfig,
    pub replications: Vec<ReplicationMetrics>,
    pub pdr: Summary,
    pub txn_time_us: Summary,
    pub energy_mj: Summary,
    pub collisions: Summary,
    pub hidden_pairs: Summary,
}

impl RunMetrics {
    pub fn from_replications(config: ScenarioConfig, replications: Vec<ReplicationMetrics>) -> Self {
        let col = |f: &dyn Fn(&ReplicationMetrics) -> Option<f64>| summarize(&replications.iter().map(f).collect::<Vec<_>>());
        RunMetrics {
            pdr: col(&|r| Some(r.pdr)),
            txn_time_us: col(&|r| r.txn_time_us.map(|t| t as f64)),
            energy_mj: col(&|r| Some(r.energy_mj)),
            collisions: col(&|r| Some(r.collisions as f64)),
            hidden_pairs: col(&|r| Some(r.hidden_pairs as f64)),
            config,
            replications,
        }
    }

    pub fn total_collisions(&self) -> u64 {
        self.replications.iter().map(|r| r.collisions).sum()
    }

    pub fn csv_row(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let c = &self.config;
        [
            c.mode.to_string(),
            c.n.to_string(),
            c.mu_us.to_string(),
            c.sigma_us.to_string(),
            c.edca.cw_min.to_string(),
            c.awake_offset_us.to_string(),
            c.radius_m.to_string(),
            c.capture.to_string(),
            c.replications.to_string(),
            opt(self.pdr.mean),
            opt(self.pdr.std),
            opt(self.txn_time_us.mean),
            opt(self.txn_time_us.std),
            self.txn_time_us.exclusions.to_string(),
            opt(self.energy_mj.mean),
            opt(self.energy_mj.std),
            opt(self.collisions.mean),
            opt(self.hidden_pairs.mean),
            c.seed.to_string(),
        ]
        .join(",")
    }
}

/// Seed of replication `index`.
pub fn replication_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add(index as u64)
}

/// Runs every replication of `cfg` in parallel and aggregates in index order.
pub fn run(cfg: &ScenarioConfig) -> Result<RunMetrics, Error> {
    cfg.validate()?;
    let reps = (0..cfg.replications)
        .into_par_iter()
        .map(|i| {
            let seed = replication_seed(cfg.seed, i);
            run_replication(cfg, seed).map(|r| ReplicationMetrics::from((&r, seed)))
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(RunMetrics::from_replications(cfg.clone(), reps))
}

/// Event log of the first replication of `cfg`.
pub fn trace_first_replication(cfg: &ScenarioConfig) -> Result<Trace, Error> {
    cfg.validate()?;
    let r = run_replication_traced(cfg, replication_seed(cfg.seed, 0))?;
    Ok(r.trace.unwrap_or_default())
}

pub fn csv_document(rows: &[RunMetrics]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// One CSV row per value of `axis`, in the given order.
pub fn sweep(base: &ScenarioConfig, axis: &str, values: &[String]) -> Result<String, Error> {
    if base.get(axis).is_none() {
        return Err(ConfigError::UnknownKey(axis.to_string()).into());
    }
    let configs = values
        .iter()
        .map(|v| {
            let mut cfg = base.clone();
            cfg.set(axis, v)?;
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let rows = configs.iter().map(run).collect::<Result<Vec<_>, Error>>()?;
    Ok(csv_document(&rows))
}
