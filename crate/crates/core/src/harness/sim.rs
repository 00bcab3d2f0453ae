use std::io;
use std::path::PathBuf;

use thiserror::Error;

use super::events::EventKind;
use super::persist::{PersistedCounters, StateFile};
use super::scenario::{Scenario, ScenarioError};
use super::trace::TraceRow;
use super::watchdog::WatchdogState;
use crate::controller::{ControllerError, ControllerOutputs, ControllerState, Settings};
use crate::lcd::{render_frame, LcdFrame};
use crate::plant::{GensetState, Plant, PlantEvent};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("controller: {0}")]
    Controller(#[from] ControllerError),
    #[error("invariant violated at t={t_ms} ms: {what}")]
    Invariant { t_ms: u64, what: String },
    #[error("trace output: {0}")]
    Io(#[from] io::Error),
}

// Engine hours are written back at most once per minute of runtime, plus
// on every settings change, reset, and at the end of a run.
const PERSIST_RUNTIME_GRANULARITY_MS: u64 = 60_000;

/// Controller, plant and watchdog stepping in lockstep.
///
/// Each tick: plant step (genset command = controller relay OR bypass),
/// controller scan unless hung, watchdog step, trace row.
#[derive(Debug)]
pub struct Simulation {
    plant: Plant,
    controller: ControllerState,
    watchdog: WatchdogState,
    /// Last outputs the controller drove; pins hold them while it is hung.
    outputs: ControllerOutputs,
    /// Set once the watchdog has held the controller in reset.
    reboot_pending: bool,
    tick_ms: u32,
    tick: u64,
    state_file: Option<StateFile>,
    persisted_key: Option<(u64, Settings)>,
}

impl Simulation {
    pub fn new(
        settings: Settings,
        plant: Plant,
        persisted_runtime_ms: u64,
    ) -> Result<Self, HarnessError> {
        let tick_ms = settings.scan_period_ms;
        let controller = ControllerState::init(settings, persisted_runtime_ms)?;
        Ok(Self {
            plant,
            controller,
            watchdog: WatchdogState::default(),
            outputs: ControllerOutputs::default(),
            reboot_pending: false,
            tick_ms,
            tick: 0,
            state_file: None,
            persisted_key: None,
        })
    }

    /// Builds the starting state for `scenario`. With a state file, the
    /// persisted presets form the base that scenario overrides apply to and
    /// the persisted engine hours seed the service counter.
    pub fn from_scenario(
        scenario: &Scenario,
        state_path: Option<PathBuf>,
    ) -> Result<Self, HarnessError> {
        let (base, runtime_ms, state_file) = match state_path {
            Some(path) => {
                let mut file = StateFile::new(path);
                let restored = file.restore();
                let runtime = restored.runtime_ms();
                (restored.settings, runtime, Some(file))
            }
            None => (Settings::default(), 0, None),
        };
        scenario.validate(&base)?;
        let settings = scenario.settings(&base);
        let plant = Plant::new(scenario.plant_params()).map_err(ScenarioError::from)?;
        let mut sim = Self::new(settings, plant, runtime_ms)?;
        if let Some(file) = state_file {
            sim.state_file = Some(file);
            sim.persisted_key = Some(sim.persist_key());
        }
        Ok(sim)
    }

    pub fn with_watchdog_timeout_ms(mut self, timeout_ms: u64) -> Self {
        self.watchdog = WatchdogState::new(timeout_ms);
        self
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn controller(&self) -> &ControllerState {
        &self.controller
    }

    pub fn watchdog(&self) -> &WatchdogState {
        &self.watchdog
    }

    /// Outputs currently on the controller's pins.
    pub fn outputs(&self) -> &ControllerOutputs {
        &self.outputs
    }

    pub fn tick_ms(&self) -> u32 {
        self.tick_ms
    }

    pub fn ticks(&self) -> u64 {
        self.tick
    }

    pub fn t_ms(&self) -> u64 {
        self.tick * u64::from(self.tick_ms)
    }

    /// What the display shows: blank while the controller is held in
    /// reset, frozen while it is hung.
    pub fn lcd(&self) -> LcdFrame {
        if self.reboot_pending {
            LcdFrame::blank()
        } else {
            render_frame(&self.controller)
        }
    }

    /// True while the watchdog holds the controller in reset.
    pub fn controller_in_reset(&self) -> bool {
        self.reboot_pending
    }

    fn controller_down(&self) -> bool {
        self.plant.state.controller_hung || self.reboot_pending
    }

    /// Applies an event at the current tick boundary. Returns false when it
    /// had no effect.
    pub fn apply_event(&mut self, event: &EventKind) -> bool {
        let applied = match *event {
            EventKind::Plant(p) => self.plant.apply_event(p),
            EventKind::PressButton(button) => {
                if self.controller_down() {
                    log::info!(
                        "{event} ignored at t={} ms: controller is down",
                        self.t_ms()
                    );
                    false
                } else {
                    let before = (self.controller.ui, self.controller.settings.clone());
                    self.controller.apply_button(button);
                    before != (self.controller.ui, self.controller.settings.clone())
                }
            }
            EventKind::ResetServiceHours => {
                if self.controller_down() {
                    log::info!(
                        "{event} ignored at t={} ms: controller is down",
                        self.t_ms()
                    );
                    false
                } else {
                    let changed = self.controller.genset_runtime_total_ms != 0;
                    self.controller.reset_service_hours();
                    self.persist(true);
                    changed
                }
            }
        };
        if matches!(event, EventKind::Plant(PlantEvent::ResumeController)) && applied {
            log::info!("controller resumed at t={} ms", self.t_ms());
        }
        applied
    }

    pub fn step(&mut self) -> Result<TraceRow, HarnessError> {
        let dt = self.tick_ms;
        let genset_cmd = self.outputs.genset_start || self.watchdog.bypass_active;
        let inputs = self.plant.step(genset_cmd, dt);
        self.tick += 1;

        let heartbeat = if self.plant.state.controller_hung {
            self.outputs.heartbeat = false;
            false
        } else {
            if self.reboot_pending {
                // Released from watchdog reset: cold boot with the
                // non-volatile counters and presets.
                self.controller = ControllerState::init(
                    self.controller.settings.clone(),
                    self.controller.genset_runtime_total_ms,
                )?;
                self.reboot_pending = false;
            }
            self.outputs = self.controller.scan(&inputs, dt)?;
            self.outputs.heartbeat
        };

        self.watchdog.step(heartbeat, dt);
        if self.watchdog.bypass_active {
            // Held in reset: every controller output drops.
            self.outputs = ControllerOutputs::default();
            self.reboot_pending = true;
        }
        self.plant.state.bypass_active = self.watchdog.bypass_active;

        let row = TraceRow {
            t_ms: self.t_ms(),
            mode: self.controller.mode,
            mains_fail: inputs.mains_fail,
            low_fuel: inputs.low_fuel,
            genset_cmd,
            genset_supply: inputs.genset_supply_present,
            bypass_active: self.watchdog.bypass_active,
            battery_display: self.controller.last_battery,
            temperature_c: self.controller.last_temperature,
            soc: self.plant.state.soc,
            fuel_l: self.plant.state.fuel_l,
            room_temp_c: self.plant.state.room_temp_c,
            alarms: self.outputs.alarms,
        };
        self.check_invariants(heartbeat)?;
        self.persist(false);
        Ok(row)
    }

    fn check_invariants(&self, scanned: bool) -> Result<(), HarnessError> {
        let fail = |what: &str| {
            Err(HarnessError::Invariant {
                t_ms: self.t_ms(),
                what: what.to_string(),
            })
        };
        let o = &self.outputs;
        if scanned && !o.heartbeat {
            return fail("completed scan without heartbeat");
        }
        if o.leds.alarms != o.alarms {
            return fail("LED alarm bits differ from alarm relays");
        }
        let p = &self.plant.state;
        if !(0.0..=1.0).contains(&p.soc) {
            return fail("state of charge outside 0..=1");
        }
        if p.fuel_l < 0.0 {
            return fail("negative fuel");
        }
        if p.genset == GensetState::Running && p.fuel_l <= 0.0 {
            return fail("genset running on an empty tank");
        }
        let c = &self.controller;
        if c.crank_attempt > c.settings.crank_attempts_max {
            return fail("crank attempts above maximum");
        }
        let phase_cap = u64::from(c.settings.battery_phase_s.max(c.settings.genset_phase_s)) * 1000
            + u64::from(self.tick_ms);
        if c.phase_elapsed_ms > phase_cap {
            return fail("phase timer overran");
        }
        if self.watchdog.bypass_active
            != (self.watchdog.since_last_heartbeat_ms > self.watchdog.timeout_ms)
        {
            return fail("watchdog bypass disagrees with its timer");
        }
        Ok(())
    }

    fn persist_key(&self) -> (u64, Settings) {
        (
            self.controller.genset_runtime_total_ms / PERSIST_RUNTIME_GRANULARITY_MS,
            self.controller.settings.clone(),
        )
    }

    fn persist(&mut self, force: bool) {
        if self.state_file.is_none() {
            return;
        }
        let key = self.persist_key();
        if !force && self.persisted_key.as_ref() == Some(&key) {
            return;
        }
        self.persisted_key = Some(key);
        self.flush();
    }

    /// Writes the exact counters to the state file, if there is one.
    pub fn flush(&mut self) {
        let counters = PersistedCounters::from_runtime_ms(
            self.controller.genset_runtime_total_ms,
            self.controller.settings.clone(),
        );
        if let Some(file) = self.state_file.as_mut() {
            if let Err(e) = file.persist(&counters) {
                log::warn!("could not write state file {}: {e}", file.path().display());
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Stop after this much simulated time instead of the full duration.
    pub until_ms: Option<u64>,
    pub state_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub ticks: u64,
    pub events_applied: usize,
}

/// Runs `scenario` to completion, handing each row to `sink` as it is
/// produced.
pub fn run_scenario_with<F>(
    scenario: &Scenario,
    options: &RunOptions,
    mut sink: F,
) -> Result<RunSummary, HarnessError>
where
    F: FnMut(&TraceRow) -> io::Result<()>,
{
    let mut sim = Simulation::from_scenario(scenario, options.state_file.clone())?;
    let tick = u64::from(scenario.tick_ms);
    let mut ticks = scenario.tick_count();
    if let Some(until) = options.until_ms {
        ticks = ticks.min(until / tick);
    }

    let mut pending = scenario.events.iter().peekable();
    let mut applied = 0;
    for k in 0..ticks {
        let start = k * tick;
        while let Some(ev) = pending.next_if(|ev| ev.t_ms <= start) {
            if !sim.apply_event(&ev.kind) {
                log::info!("{} at t={} s was a no-op", ev.kind, ev.t_s());
            }
            applied += 1;
        }
        let row = sim.step()?;
        sink(&row)?;
    }
    for ev in pending {
        if ev.t_ms <= ticks * tick {
            log::info!("{} at t={} s falls after the final tick", ev.kind, ev.t_s());
            sim.apply_event(&ev.kind);
            applied += 1;
        }
    }
    sim.flush();
    Ok(RunSummary {
        ticks,
        events_applied: applied,
    })
}

pub fn run_scenario(scenario: &Scenario) -> Result<Vec<TraceRow>, HarnessError> {
    run_scenario_opts(scenario, &RunOptions::default())
}

pub fn run_scenario_opts(
    scenario: &Scenario,
    options: &RunOptions,
) -> Result<Vec<TraceRow>, HarnessError> {
    let mut rows = Vec::with_capacity(scenario.tick_count() as usize);
    run_scenario_with(scenario, options, |row| {
        rows.push(*row);
        Ok(())
    })?;
    Ok(rows)
}
