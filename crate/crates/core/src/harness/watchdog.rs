//! External watchdog with auto-bypass.
//!
//! The controller pulses a heartbeat every completed scan. If the pulses
//! stop for longer than the timeout the watchdog holds the controller in
//! reset and forces the genset on through a hardware path.

use serde::{Deserialize, Serialize};

pub const DEFAULT_TIMEOUT_MS: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatchdogState {
    pub since_last_heartbeat_ms: u64,
    pub timeout_ms: u64,
    pub bypass_active: bool,
}

impl Default for WatchdogState {
    fn default() -> Self {
        Self::new(DEFAULT_TIMEOUT_MS)
    }
}

impl WatchdogState {
    pub fn new(timeout_ms: u64) -> Self {
        Self {
            since_last_heartbeat_ms: 0,
            timeout_ms,
            bypass_active: false,
        }
    }

    pub fn step(&mut self, heartbeat_seen: bool, dt_ms: u32) {
        if heartbeat_seen {
            self.since_last_heartbeat_ms = 0;
        } else {
            self.since_last_heartbeat_ms =
                self.since_last_heartbeat_ms.saturating_add(dt_ms.into());
        }
        self.bypass_active = self.since_last_heartbeat_ms > self.timeout_ms;
    }
}

pub fn watchdog_step(mut wd: WatchdogState, heartbeat_seen: bool, dt_ms: u32) -> WatchdogState {
    wd.step(heartbeat_seen, dt_ms);
    wd
}
