//! Discrete-event simulator of uplink delivery with Wi-Fi Target Wake Time under
//! clock drift, in trigger-polled (PM) and contention-based (NPM) modes.

pub mod config;
pub mod edca;
pub mod energy;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod medium;
pub mod sim;
pub mod trace;
pub mod twt;

pub use config::ScenarioConfig;
pub use error::{ConfigError, Error, SimError};
pub use harness::{run, sweep, RunMetrics, Summary};
pub use kernel::SimTime;
pub use sim::{run_replication, BackoffSource, Replication, ReplicationResult};
pub use twt::TwtMode;
