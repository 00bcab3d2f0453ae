//! Counters that survive a restart: engine hours and committed presets.
//!
//! Plays the part of the controller's EEPROM. A missing, torn or invalid
//! file restores defaults with a warning rather than failing.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controller::Settings;

pub const DEFAULT_STATE_FILE: &str = "vtms-state";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistedCounters {
    pub service_runtime_s: f64,
    pub settings: Settings,
}

impl Default for PersistedCounters {
    fn default() -> Self {
        Self {
            service_runtime_s: 0.0,
            settings: Settings::default(),
        }
    }
}

impl PersistedCounters {
    pub fn from_runtime_ms(runtime_ms: u64, settings: Settings) -> Self {
        Self {
            service_runtime_s: runtime_ms as f64 / 1000.0,
            settings,
        }
    }

    pub fn runtime_ms(&self) -> u64 {
        (self.service_runtime_s * 1000.0).round() as u64
    }
}

#[derive(Debug)]
pub struct StateFile {
    path: PathBuf,
    last_written: Option<PersistedCounters>,
}

impl StateFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            last_written: None,
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn restore(&mut self) -> PersistedCounters {
        let restored = match fs::read_to_string(&self.path) {
            Ok(text) => match parse(&text) {
                Ok(counters) => counters,
                Err(reason) => {
                    log::warn!(
                        "state file {} unusable ({reason}); starting from defaults",
                        self.path.display()
                    );
                    PersistedCounters::default()
                }
            },
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                log::warn!(
                    "no state file at {}; starting from defaults",
                    self.path.display()
                );
                PersistedCounters::default()
            }
            Err(e) => {
                log::warn!(
                    "cannot read state file {} ({e}); starting from defaults",
                    self.path.display()
                );
                PersistedCounters::default()
            }
        };
        self.last_written = Some(restored.clone());
        restored
    }

    /// Writes `counters` if they differ from what was last written or read.
    /// The write goes to a sibling temp file first, so a crash mid-write
    /// leaves the previous contents intact.
    pub fn persist(&mut self, counters: &PersistedCounters) -> io::Result<bool> {
        if self.last_written.as_ref() == Some(counters) {
            return Ok(false);
        }
        let text = toml::to_string(counters).map_err(io::Error::other)?;
        let mut tmp = self.path.clone().into_os_string();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &self.path)?;
        self.last_written = Some(counters.clone());
        Ok(true)
    }
}

fn parse(text: &str) -> Result<PersistedCounters, String> {
    let counters: PersistedCounters = toml::from_str(text).map_err(|e| e.message().to_string())?;
    if !(counters.service_runtime_s.is_finite() && counters.service_runtime_s >= 0.0) {
        return Err("service_runtime_s must be a non-negative number".into());
    }
    counters.settings.validate().map_err(|e| e.to_string())?;
    Ok(counters)
}

pub fn restore_counters(path: &Path) -> PersistedCounters {
    StateFile::new(path).restore()
}

pub fn persist_counters(path: &Path, counters: &PersistedCounters) -> io::Result<()> {
    StateFile::new(path).persist(counters).map(|_| ())
}
