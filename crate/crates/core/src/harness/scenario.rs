//! Scenario files: a name, a duration, setting and plant overrides, and a
//! timed event script, written as TOML.
//!
//! ```toml
//! name = "mains-out"
//! duration_s = 600
//! tick_ms = 100
//!
//! [settings]
//! battery_phase_s = 120
//!
//! [plant]
//! initial_soc = 0.9
//!
//! [[events]]
//! t_s = 0
//! kind = "MainsOff"
//!
//! [[events]]
//! t_s = 30
//! kind = "SetFuel"
//! value = 35.5
//! ```

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use super::events::{EventError, EventKind, EventValue};
use crate::controller::{Settings, SettingsError, SettingsOverrides};
use crate::plant::{PlantError, PlantOverrides, PlantParams};

pub const DEFAULT_TICK_MS: u32 = 100;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{}{message}", line_prefix(*line))]
    Parse {
        line: Option<usize>,
        message: String,
    },
    #[error("line {line}: {source}")]
    Event {
        line: usize,
        #[source]
        source: EventError,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Settings(#[from] SettingsError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEvent {
    pub t_ms: u64,
    pub kind: EventKind,
}

impl ScenarioEvent {
    pub fn t_s(&self) -> f64 {
        self.t_ms as f64 / 1000.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub duration_ms: u64,
    pub tick_ms: u32,
    pub settings_overrides: SettingsOverrides,
    pub plant_overrides: PlantOverrides,
    pub events: Vec<ScenarioEvent>,
}

impl Scenario {
    /// A scenario with nothing scheduled.
    pub fn quiet(name: &str, duration_s: u64) -> Self {
        Self {
            name: name.to_string(),
            duration_ms: duration_s * 1000,
            tick_ms: DEFAULT_TICK_MS,
            settings_overrides: SettingsOverrides::default(),
            plant_overrides: PlantOverrides::default(),
            events: Vec::new(),
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_ms as f64 / 1000.0
    }

    pub fn tick_count(&self) -> u64 {
        self.duration_ms / u64::from(self.tick_ms)
    }

    pub fn settings(&self, base: &Settings) -> Settings {
        self.settings_overrides.apply_to(base)
    }

    pub fn plant_params(&self) -> PlantParams {
        self.plant_overrides.apply_to(&PlantParams::default())
    }

    /// Checks the scenario against `base` settings (defaults, or what a
    /// state file restored).
    pub fn validate(&self, base: &Settings) -> Result<(), ScenarioError> {
        if self.duration_ms == 0 {
            return Err(ScenarioError::Invalid("duration_s must be > 0".into()));
        }
        if self.tick_ms == 0 {
            return Err(ScenarioError::Invalid("tick_ms must be > 0".into()));
        }
        let settings = self.settings(base);
        settings.validate()?;
        if settings.scan_period_ms != self.tick_ms {
            return Err(ScenarioError::Invalid(format!(
                "tick_ms ({}) must equal the controller scan period ({} ms)",
                self.tick_ms, settings.scan_period_ms
            )));
        }
        self.plant_params().validate()?;
        let mut last = 0;
        for ev in &self.events {
            if ev.t_ms > self.duration_ms {
                return Err(ScenarioError::Invalid(format!(
                    "event {} at t_s={} is after duration_s={}",
                    ev.kind,
                    ev.t_s(),
                    self.duration_s()
                )));
            }
            if ev.t_ms < last {
                return Err(ScenarioError::Invalid(format!(
                    "events must be sorted by time; {} at t_s={} comes after t_s={}",
                    ev.kind,
                    ev.t_s(),
                    last as f64 / 1000.0
                )));
            }
            last = ev.t_ms;
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    duration_s: f64,
    #[serde(default = "default_tick")]
    tick_ms: u32,
    #[serde(default)]
    settings: SettingsOverrides,
    #[serde(default)]
    plant: PlantOverrides,
    #[serde(default)]
    events: Vec<Spanned<RawEvent>>,
}

fn default_tick() -> u32 {
    DEFAULT_TICK_MS
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    t_s: f64,
    kind: String,
    value: Option<toml::Value>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn seconds_to_ms(field: &str, seconds: f64) -> Result<u64, String> {
    if !seconds.is_finite() || seconds < 0.0 {
        return Err(format!(
            "{field} must be a finite, non-negative number of seconds"
        ));
    }
    Ok((seconds * 1000.0).round() as u64)
}

/// Parses scenario text. Range checks that depend on the starting
/// settings are left to [`Scenario::validate`].
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;

    let duration_ms =
        seconds_to_ms("duration_s", raw.duration_s).map_err(|message| ScenarioError::Parse {
            line: None,
            message,
        })?;

    let mut events = Vec::with_capacity(raw.events.len());
    for spanned in raw.events {
        let line = line_of(text, spanned.span().start);
        let ev = spanned.into_inner();
        let value = match ev.value {
            None => None,
            Some(toml::Value::Integer(i)) => Some(EventValue::Number(i as f64)),
            Some(toml::Value::Float(f)) => Some(EventValue::Number(f)),
            Some(toml::Value::String(s)) => Some(EventValue::Text(s)),
            Some(other) => {
                return Err(ScenarioError::Parse {
                    line: Some(line),
                    message: format!("event value must be a number or a string, got {other}"),
                })
            }
        };
        let kind = EventKind::parse(&ev.kind, value)
            .map_err(|source| ScenarioError::Event { line, source })?;
        let t_ms = seconds_to_ms("t_s", ev.t_s).map_err(|message| ScenarioError::Parse {
            line: Some(line),
            message,
        })?;
        events.push(ScenarioEvent { t_ms, kind });
    }

    Ok(Scenario {
        name: raw.name,
        duration_ms,
        tick_ms: raw.tick_ms,
        settings_overrides: raw.settings,
        plant_overrides: raw.plant,
        events,
    })
}

/// Parses and validates against default settings.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario = parse_scenario(text)?;
    scenario.validate(&Settings::default())?;
    Ok(scenario)
}

pub fn read_scenario_file(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}
