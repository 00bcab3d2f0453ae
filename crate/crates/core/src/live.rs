//! The simulation as an operator-facing service: commands in, immutable
//! snapshots out, a rolling trace, and real-time pacing.
//!
//! Nothing here knows about the network. The HTTP layer owns one
//! [`LiveSim`] on a single loop and talks to it only through commands and
//! snapshots.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::controller::{Leds, Settings};
use crate::harness::{
    EventError, EventKind, EventValue, HarnessError, Scenario, ScenarioEvent, Simulation, TraceRow,
    EVENT_KINDS,
};
use crate::lcd::LCD_ROWS;

pub const DEFAULT_TIME_SCALE: f64 = 60.0;
/// Rolling trace length, in simulated time.
pub const DEFAULT_TRACE_WINDOW_MS: u64 = 24 * 3600 * 1000;

/// What the service runs when no scenario is given: default parameters and
/// nothing scripted.
pub fn default_scenario() -> Scenario {
    Scenario::quiet("live", DEFAULT_TRACE_WINDOW_MS / 1000)
}

const SERVICE_ONLY_KINDS: [&str; 3] = ["SetTimeScale", "Pause", "Resume"];

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Event(EventKind),
    SetTimeScale(f64),
    Pause,
    Resume,
}

/// A number or a button name, as sent on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireValue {
    Number(f64),
    Text(String),
}

/// `{"kind": "...", "value": ...}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandMessage {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<WireValue>,
}

impl Command {
    pub fn parse(message: &CommandMessage) -> Result<Self, EventError> {
        let value = message.value.clone().map(|v| match v {
            WireValue::Number(n) => EventValue::Number(n),
            WireValue::Text(s) => EventValue::Text(s),
        });
        match message.kind.as_str() {
            "SetTimeScale" => match value {
                Some(EventValue::Number(n)) if n.is_finite() && n > 0.0 => {
                    Ok(Command::SetTimeScale(n))
                }
                Some(EventValue::Number(_)) => {
                    Err(EventError::BadValue("time scale must be > 0".into()))
                }
                _ => Err(EventError::MissingValue {
                    kind: message.kind.clone(),
                    expected: "numeric",
                }),
            },
            "Pause" | "Resume" if value.is_some() => Err(EventError::UnexpectedValue {
                kind: message.kind.clone(),
            }),
            "Pause" => Ok(Command::Pause),
            "Resume" => Ok(Command::Resume),
            kind => EventKind::parse(kind, value)
                .map(Command::Event)
                .map_err(|e| match e {
                    EventError::UnknownKind { kind, .. } => {
                        let valid: Vec<&str> = EVENT_KINDS
                            .iter()
                            .chain(SERVICE_ONLY_KINDS.iter())
                            .copied()
                            .collect();
                        EventError::unknown(&kind, &valid)
                    }
                    other => other,
                }),
        }
    }

    pub fn message(&self) -> CommandMessage {
        let (kind, value) = match self {
            Command::Event(e) => (
                e.name(),
                e.value().map(|v| match v {
                    EventValue::Number(n) => WireValue::Number(n),
                    EventValue::Text(s) => WireValue::Text(s),
                }),
            ),
            Command::SetTimeScale(s) => ("SetTimeScale", Some(WireValue::Number(*s))),
            Command::Pause => ("Pause", None),
            Command::Resume => ("Resume", None),
        };
        CommandMessage {
            kind: kind.to_string(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub accepted: bool,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub applied_at_t_s: Option<f64>,
}

impl Ack {
    pub fn rejected(reason: impl Into<String>) -> Self {
        Self {
            accepted: false,
            detail: reason.into(),
            applied_at_t_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relays {
    pub genset_start: bool,
    pub bypass_active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantView {
    pub mains_on: bool,
    pub soc: f64,
    pub fuel_l: f64,
    pub room_temp_c: f64,
    pub genset_state: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerView {
    pub mode: String,
    pub battery_text: String,
    pub temperature_c: u8,
    pub service_runtime_s: f64,
}

/// Everything the console shows, all taken from the same tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t_s: f64,
    pub time_scale: f64,
    pub lcd: [String; LCD_ROWS],
    pub leds: Leds,
    pub relays: Relays,
    pub plant: PlantView,
    pub controller: ControllerView,
    pub settings: Settings,
}

/// A [`Simulation`] plus the service-level state around it.
#[derive(Debug)]
pub struct LiveSim {
    sim: Simulation,
    scheduled: VecDeque<ScenarioEvent>,
    time_scale: f64,
    paused: bool,
    trace: VecDeque<TraceRow>,
    trace_capacity: usize,
}

impl LiveSim {
    /// Starts from `scenario` (parameters, overrides and its event script).
    pub fn new(
        scenario: &Scenario,
        state_file: Option<PathBuf>,
        time_scale: f64,
    ) -> Result<Self, HarnessError> {
        let sim = Simulation::from_scenario(scenario, state_file)?;
        let trace_capacity = (DEFAULT_TRACE_WINDOW_MS / u64::from(scenario.tick_ms)) as usize;
        Ok(Self {
            sim,
            scheduled: scenario.events.iter().cloned().collect(),
            time_scale,
            paused: false,
            trace: VecDeque::new(),
            trace_capacity,
        })
    }

    pub fn with_trace_window_ms(mut self, window_ms: u64) -> Self {
        self.trace_capacity = (window_ms / u64::from(self.sim.tick_ms())).max(1) as usize;
        while self.trace.len() > self.trace_capacity {
            self.trace.pop_front();
        }
        self
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn t_ms(&self) -> u64 {
        self.sim.t_ms()
    }

    pub fn tick_ms(&self) -> u32 {
        self.sim.tick_ms()
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    /// Applies `command` at the current tick boundary.
    pub fn apply_command(&mut self, command: &Command) -> Ack {
        let t_s = self.sim.t_ms() as f64 / 1000.0;
        let detail = match command {
            Command::Pause => {
                self.paused = true;
                "paused".to_string()
            }
            Command::Resume => {
                self.paused = false;
                "running".to_string()
            }
            Command::SetTimeScale(scale) => {
                self.time_scale = *scale;
                format!("time scale {scale}")
            }
            Command::Event(event) => {
                if self.sim.apply_event(event) {
                    format!("{event} applied")
                } else {
                    format!("{event} applied (no change)")
                }
            }
        };
        Ack {
            accepted: true,
            detail,
            applied_at_t_s: Some(t_s),
        }
    }

    /// Runs one tick, first applying any scripted events that are due.
    pub fn tick(&mut self) -> Result<&TraceRow, HarnessError> {
        let start = self.sim.t_ms();
        while self.scheduled.front().is_some_and(|ev| ev.t_ms <= start) {
            let ev = self.scheduled.pop_front().expect("front checked");
            self.sim.apply_event(&ev.kind);
        }
        let row = self.sim.step()?;
        if self.trace.len() == self.trace_capacity {
            self.trace.pop_front();
        }
        self.trace.push_back(row);
        Ok(self.trace.back().expect("just pushed"))
    }

    pub fn snapshot(&self) -> Snapshot {
        let sim = &self.sim;
        let controller = sim.controller();
        let plant = &sim.plant().state;
        let outputs = sim.outputs();
        Snapshot {
            t_s: sim.t_ms() as f64 / 1000.0,
            time_scale: self.time_scale,
            lcd: sim.lcd().lines().clone(),
            leds: outputs.leds,
            relays: Relays {
                genset_start: outputs.genset_start,
                bypass_active: sim.watchdog().bypass_active,
            },
            plant: PlantView {
                mains_on: plant.mains_on,
                soc: plant.soc,
                fuel_l: plant.fuel_l,
                room_temp_c: plant.room_temp_c,
                genset_state: plant.genset.name().to_string(),
            },
            controller: ControllerView {
                mode: controller.mode.name().to_string(),
                battery_text: controller.last_battery.text(),
                temperature_c: controller.last_temperature.celsius(),
                service_runtime_s: controller.genset_runtime_total_ms as f64 / 1000.0,
            },
            settings: controller.settings.clone(),
        }
    }

    /// Rows with `from_s <= t_s <= to_s` from the rolling buffer.
    pub fn trace_slice(&self, from_s: Option<f64>, to_s: Option<f64>) -> Vec<TraceRow> {
        let from = from_s
            .map(|s| (s * 1000.0).round() as i64)
            .unwrap_or(i64::MIN);
        let to = to_s
            .map(|s| (s * 1000.0).round() as i64)
            .unwrap_or(i64::MAX);
        self.trace
            .iter()
            .filter(|r| (from..=to).contains(&(r.t_ms as i64)))
            .copied()
            .collect()
    }

    pub fn flush(&mut self) {
        self.sim.flush();
    }
}

/// Maps wall-clock time onto simulated time at a given scale.
///
/// The anchor moves whenever the scale changes or the simulation resumes,
/// so neither produces a jump in simulated time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pacer {
    anchor_wall: Duration,
    anchor_sim_ms: u64,
    scale: f64,
}

impl Pacer {
    pub fn new(wall_now: Duration, sim_ms: u64, scale: f64) -> Self {
        Self {
            anchor_wall: wall_now,
            anchor_sim_ms: sim_ms,
            scale,
        }
    }

    pub fn rebase(&mut self, wall_now: Duration, sim_ms: u64, scale: f64) {
        *self = Self::new(wall_now, sim_ms, scale);
    }

    /// Simulated time that should have been reached by `wall_now`.
    pub fn target_ms(&self, wall_now: Duration) -> u64 {
        let wall = wall_now.saturating_sub(self.anchor_wall).as_secs_f64();
        self.anchor_sim_ms + (wall * self.scale * 1000.0) as u64
    }

    /// Wall-clock time at which simulated time `sim_ms` falls due.
    pub fn wall_deadline(&self, sim_ms: u64) -> Duration {
        let ahead_ms = sim_ms.saturating_sub(self.anchor_sim_ms) as f64;
        self.anchor_wall + Duration::from_secs_f64(ahead_ms / 1000.0 / self.scale)
    }

    /// Whole ticks behind schedule. The caller runs every one of them; a
    /// slow host falls behind rather than skipping.
    pub fn ticks_due(&self, wall_now: Duration, sim_ms: u64, tick_ms: u32) -> u64 {
        self.target_ms(wall_now).saturating_sub(sim_ms) / u64::from(tick_ms)
    }
}
