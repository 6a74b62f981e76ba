//! Scenario configuration and its `key = value` text format.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::edca::EdcaParams;
use crate::energy::PowerProfile;
use crate::error::ConfigError;
use crate::kernel::SimTime;
use crate::medium::Propagation;
use crate::twt::TwtMode;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: TwtMode,
    pub n: usize,
    pub mu_us: u64,
    pub sigma_us: f64,
    pub awake_offset_us: u64,
    pub sp_duration_us: u64,
    pub t_target_us: u64,
    pub data_duration_us: u64,
    pub trigger_duration_us: u64,
    pub edca: EdcaParams,
    pub radius_m: f64,
    pub sense_range_m: f64,
    pub propagation: Propagation,
    pub capture: bool,
    pub capture_threshold_db: f64,
    pub power: PowerProfile,
    pub replications: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            mode: TwtMode::NonPolling,
            n: 20,
            mu_us: 5000,
            sigma_us: 1000.0,
            awake_offset_us: 0,
            sp_duration_us: 1_000_000,
            t_target_us: 1_000_000,
            data_duration_us: 1480,
            trigger_duration_us: 140,
            edca: EdcaParams::default(),
            radius_m: 5.0,
            sense_range_m: 65.0,
            propagation: Propagation::default(),
            capture: false,
            capture_threshold_db: 10.0,
            power: PowerProfile::default(),
            replications: 1000,
            seed: 1,
        }
    }
}

/// Every accepted key, in normalized output order.
pub const KEYS: &[&str] = &[
    "mode",
    "n",
    "mu_us",
    "sigma_us",
    "awake_offset_us",
    "sp_duration_us",
    "t_target_us",
    "data_duration_us",
    "trigger_duration_us",
    "cw_min",
    "cw_max",
    "retry_limit",
    "slot_us",
    "sifs_us",
    "aifs_us",
    "ack_duration_us",
    "ack_timeout_us",
    "radius_m",
    "sense_range_m",
    "tx_power_dbm",
    "reference_loss_db",
    "path_loss_exponent",
    "capture",
    "capture_threshold_db",
    "p_tx_mw",
    "p_rx_mw",
    "p_idle_mw",
    "p_doze_mw",
    "replications",
    "seed",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        msg: e.to_string(),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            msg: "expected true or false".into(),
        }),
    }
}

impl ScenarioConfig {
    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                msg: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            if seen.contains(&key) {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            seen.push(key);
            cfg.set(key, value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "mode" => {
                self.mode = value.parse().map_err(|msg| ConfigError::BadValue {
                    key: key.into(),
                    value: value.into(),
                    msg,
                })?
            }
            "n" => self.n = parse(key, value)?,
            "mu_us" => self.mu_us = parse(key, value)?,
            "sigma_us" => self.sigma_us = parse(key, value)?,
            "awake_offset_us" => self.awake_offset_us = parse(key, value)?,
            "sp_duration_us" => self.sp_duration_us = parse(key, value)?,
            "t_target_us" => self.t_target_us = parse(key, value)?,
            "data_duration_us" => self.data_duration_us = parse(key, value)?,
            "trigger_duration_us" => self.trigger_duration_us = parse(key, value)?,
            "cw_min" => self.edca.cw_min = parse(key, value)?,
            "cw_max" => self.edca.cw_max = parse(key, value)?,
            "retry_limit" => self.edca.retry_limit = parse(key, value)?,
            "slot_us" => self.edca.slot = SimTime(parse(key, value)?),
            "sifs_us" => self.edca.sifs = SimTime(parse(key, value)?),
            "aifs_us" => self.edca.aifs = SimTime(parse(key, value)?),
            "ack_duration_us" => self.edca.ack_duration = SimTime(parse(key, value)?),
            "ack_timeout_us" => self.edca.ack_timeout = SimTime(parse(key, value)?),
            "radius_m" => self.radius_m = parse(key, value)?,
            "sense_range_m" => self.sense_range_m = parse(key, value)?,
            "tx_power_dbm" => self.propagation.tx_power_dbm = parse(key, value)?,
            "reference_loss_db" => self.propagation.reference_loss_db = parse(key, value)?,
            "path_loss_exponent" => self.propagation.exponent = parse(key, value)?,
            "capture" => self.capture = parse_bool(key, value)?,
            "capture_threshold_db" => self.capture_threshold_db = parse(key, value)?,
            "p_tx_mw" => self.power.p_tx = parse(key, value)?,
            "p_rx_mw" => self.power.p_rx = parse(key, value)?,
            "p_idle_mw" => self.power.p_idle = parse(key, value)?,
            "p_doze_mw" => self.power.p_doze = parse(key, value)?,
            "replications" => self.replications = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "mode" => self.mode.to_string(),
            "n" => self.n.to_string(),
            "mu_us" => self.mu_us.to_string(),
            "sigma_us" => self.sigma_us.to_string(),
            "awake_offset_us" => self.awake_offset_us.to_string(),
            "sp_duration_us" => self.sp_duration_us.to_string(),
            "t_target_us" => self.t_target_us.to_string(),
            "data_duration_us" => self.data_duration_us.to_string(),
            "trigger_duration_us" => self.trigger_duration_us.to_string(),
            "cw_min" => self.edca.cw_min.to_string(),
            "cw_max" => self.edca.cw_max.to_string(),
            "retry_limit" => self.edca.retry_limit.to_string(),
            "slot_us" => self.edca.slot.to_string(),
            "sifs_us" => self.edca.sifs.to_string(),
            "aifs_us" => self.edca.aifs.to_string(),
            "ack_duration_us" => self.edca.ack_duration.to_string(),
            "ack_timeout_us" => self.edca.ack_timeout.to_string(),
            "radius_m" => self.radius_m.to_string(),
            "sense_range_m" => self.sense_range_m.to_string(),
            "tx_power_dbm" => self.propagation.tx_power_dbm.to_string(),
            "reference_loss_db" => self.propagation.reference_loss_db.to_string(),
            "path_loss_exponent" => self.propagation.exponent.to_string(),
            "capture" => self.capture.to_string(),
            "capture_threshold_db" => self.capture_threshold_db.to_string(),
            "p_tx_mw" => self.power.p_tx.to_string(),
            "p_rx_mw" => self.power.p_rx.to_string(),
            "p_idle_mw" => self.power.p_idle.to_string(),
            "p_doze_mw" => self.power.p_doze.to_string(),
            "replications" => self.replications.to_string(),
            "seed" => self.seed.to_string(),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Invariant(m));
        if self.n < 1 {
            return fail("n must be at least 1".into());
        }
        if self.replications < 1 {
            return fail("replications must be at least 1".into());
        }
        if !(self.sigma_us >= 0.0) || !self.sigma_us.is_finite() {
            return fail("sigma_us must be a finite non-negative number".into());
        }
        if !(self.radius_m > 0.0) || !self.radius_m.is_finite() {
            return fail("radius_m must be positive".into());
        }
        if !(self.sense_range_m >= 0.0) {
            return fail("sense_range_m must be non-negative".into());
        }
        if self.sp_duration_us == 0 {
            return fail("sp_duration_us must be positive".into());
        }
        if self.data_duration_us == 0 || self.trigger_duration_us == 0 {
            return fail("frame durations must be positive".into());
        }
        if !self.capture_threshold_db.is_finite() || !self.propagation.exponent.is_finite() || self.propagation.exponent <= 0.0 {
            return fail("capture threshold and path-loss exponent must be finite, exponent positive".into());
        }
        self.edca.validate().or_else(fail)?;
        self.power.validate().or_else(fail)?;
        Ok(())
    }

    /// `key = value` for every key, in [`KEYS`] order.
    pub fn to_normalized_string(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).expect("known key"));
        }
        out
    }

    /// Airtime of one contention-free NPM exchange at the worst initial backoff.
    pub fn exchange_span_us(&self) -> u64 {
        let e = &self.edca;
        e.aifs.0 + e.cw_min as u64 * e.slot.0 + self.data_duration_us + e.sifs.0 + e.ack_duration.0
    }

    /// Instant after which a replication is considered stuck.
    pub fn quiescence_limit_us(&self) -> u64 {
        self.t_target_us + self.n as u64 * self.mu_us + 10 * self.sp_duration_us
    }

    pub fn capture_threshold(&self) -> Option<f64> {
        self.capture.then_some(self.capture_threshold_db)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_over_defaults() {
        let cfg = ScenarioConfig::parse("# comment\nmode = PM\n n=3 \nsigma_us = 10000 # trailing\ncapture = true\n\n").unwrap();
        assert_eq!(cfg.mode, TwtMode::Polling);
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.sigma_us, 10000.0);
        assert!(cfg.capture);
        assert_eq!(cfg.edca.cw_min, 15);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert_eq!(ScenarioConfig::parse("bogus = 1"), Err(ConfigError::UnknownKey("bogus".into())));
        assert!(matches!(ScenarioConfig::parse("n 3"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(ScenarioConfig::parse("n = x"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(ScenarioConfig::parse("n = 1\nn = 2"), Err(ConfigError::Syntax { line: 2, .. })));
    }

    #[test]
    fn rejects_invariant_violations() {
        for text in ["n = 0", "replications = 0", "radius_m = 0", "cw_min = 20", "sigma_us = -1", "p_doze_mw = 500"] {
            assert!(matches!(ScenarioConfig::parse(text), Err(ConfigError::Invariant(_))), "{text}");
        }
    }

    #[test]
    fn normalized_round_trip() {
        let cfg = ScenarioConfig::parse("mode = PM\nmu_us = 740\ncapture = on\nradius_m = 50").unwrap();
        let again = ScenarioConfig::parse(&cfg.to_normalized_string()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_normalized_string().lines().count(), KEYS.len());
    }

    #[test]
    fn exchange_span_and_quiescence_limit() {
        let cfg = ScenarioConfig::default();
        assert_eq!(cfg.exchange_span_us(), 34 + 135 + 1480 + 16 + 44);
    }
}
