//! Firmware scan loop: source selection, the six alarm relays, service-hour
//! and phase timers, indicator LEDs and the watchdog heartbeat.
//!
//! The controller is integer-only. Timers count whole milliseconds and
//! voltage thresholds are tenths of a volt, so a scan is a pure function of
//! `(state, inputs, dt)` on every platform. See `docs/statechart.md` for the
//! transition table.

mod settings;
mod ui;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conversions::{AdcChannel, AdcSample, ConversionError, DisplayVoltage, TemperatureC};

pub use settings::{PresetField, Settings, SettingsError, SettingsOverrides};
pub use ui::{apply_button, Button, Screen, ScreenCursor, SETTINGS_WINDOW};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControllerError {
    #[error("invalid settings: {0}")]
    Settings(#[from] SettingsError),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error("scan dt of {got} ms does not match the {expected} ms scan period")]
    ScanPeriod { expected: u32, got: u32 },
    #[error("ADC sample on {got:?} where {expected:?} was expected")]
    WrongChannel {
        expected: AdcChannel,
        got: AdcChannel,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControllerMode {
    MainsPowered,
    BatteryPhase,
    GensetCranking,
    GensetPhase,
    GensetCooldown,
}

impl ControllerMode {
    pub fn name(self) -> &'static str {
        match self {
            ControllerMode::MainsPowered => "MainsPowered",
            ControllerMode::BatteryPhase => "BatteryPhase",
            ControllerMode::GensetCranking => "GensetCranking",
            ControllerMode::GensetPhase => "GensetPhase",
            ControllerMode::GensetCooldown => "GensetCooldown",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            ControllerMode::MainsPowered,
            ControllerMode::BatteryPhase,
            ControllerMode::GensetCranking,
            ControllerMode::GensetPhase,
            ControllerMode::GensetCooldown,
        ]
        .into_iter()
        .find(|m| m.name() == name)
    }

    /// Modes in which the genset start relay is energised.
    pub fn drives_genset(self) -> bool {
        matches!(
            self,
            ControllerMode::GensetCranking
                | ControllerMode::GensetPhase
                | ControllerMode::GensetCooldown
        )
    }
}

impl fmt::Display for ControllerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What the plant wiring presents to the controller each scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControllerInputs {
    /// ATS auxiliary relay: true when the grid (PDB) is absent.
    pub mains_fail: bool,
    /// Fuel tank float switch relay.
    pub low_fuel: bool,
    /// ATS feedback that the genset is producing.
    pub genset_supply_present: bool,
    pub adc_temp: AdcSample,
    pub adc_batt: AdcSample,
}

/// The six alarm relay contacts, in alarm-box numbering order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AlarmSet {
    pub mains_fail: bool,
    pub low_fuel: bool,
    pub genset_on_load: bool,
    pub high_temperature: bool,
    pub genset_fault: bool,
    pub service_hour: bool,
}

impl AlarmSet {
    pub const NAMES: [&'static str; 6] = [
        "mains_fail",
        "low_fuel",
        "genset_on_load",
        "high_temperature",
        "genset_fault",
        "service_hour",
    ];

    pub fn as_array(&self) -> [bool; 6] {
        [
            self.mains_fail,
            self.low_fuel,
            self.genset_on_load,
            self.high_temperature,
            self.genset_fault,
            self.service_hour,
        ]
    }

    pub fn from_array(bits: [bool; 6]) -> Self {
        Self {
            mains_fail: bits[0],
            low_fuel: bits[1],
            genset_on_load: bits[2],
            high_temperature: bits[3],
            genset_fault: bits[4],
            service_hour: bits[5],
        }
    }

    pub fn active_count(&self) -> usize {
        self.as_array().iter().filter(|b| **b).count()
    }

    pub fn any(&self) -> bool {
        self.active_count() > 0
    }
}

/// Front-panel indicator lamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Leds {
    #[serde(flatten)]
    pub alarms: AlarmSet,
    pub on_battery: bool,
    pub on_genset: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ControllerOutputs {
    pub genset_start: bool,
    pub alarms: AlarmSet,
    pub leds: Leds,
    pub heartbeat: bool,
    pub display_dirty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerState {
    pub mode: ControllerMode,
    pub phase_elapsed_ms: u64,
    pub crank_attempt: u32,
    pub crank_elapsed_ms: u64,
    pub cooldown_elapsed_ms: u64,
    /// Engine hours, persisted across restarts.
    pub genset_runtime_total_ms: u64,
    pub temp_alarm_latched: bool,
    pub genset_fault_latched: bool,
    pub last_temperature: TemperatureC,
    pub last_battery: DisplayVoltage,
    pub last_alarms: AlarmSet,
    pub settings: Settings,
    pub ui: ScreenCursor,
    /// Set by button handling, consumed by the next scan.
    pub redraw_pending: bool,
}

impl ControllerState {
    pub fn init(settings: Settings, persisted_runtime_ms: u64) -> Result<Self, ControllerError> {
        settings.validate()?;
        Ok(Self {
            mode: ControllerMode::MainsPowered,
            phase_elapsed_ms: 0,
            crank_attempt: 0,
            crank_elapsed_ms: 0,
            cooldown_elapsed_ms: 0,
            genset_runtime_total_ms: persisted_runtime_ms,
            temp_alarm_latched: false,
            genset_fault_latched: false,
            last_temperature: TemperatureC::default(),
            last_battery: DisplayVoltage::default(),
            last_alarms: AlarmSet::default(),
            settings,
            ui: ScreenCursor::default(),
            redraw_pending: true,
        })
    }

    /// One pass of the scan loop.
    pub fn scan(
        &mut self,
        inputs: &ControllerInputs,
        dt_ms: u32,
    ) -> Result<ControllerOutputs, ControllerError> {
        if dt_ms != self.settings.scan_period_ms {
            return Err(ControllerError::ScanPeriod {
                expected: self.settings.scan_period_ms,
                got: dt_ms,
            });
        }
        expect_channel(&inputs.adc_temp, AdcChannel::Temp0)?;
        expect_channel(&inputs.adc_batt, AdcChannel::Batt1)?;

        let temperature = inputs.adc_temp.temperature()?;
        let battery = inputs.adc_batt.battery_voltage()?;
        let previous = (
            self.mode,
            self.last_temperature,
            self.last_battery,
            self.last_alarms,
        );

        select_source(
            self,
            inputs.mains_fail,
            i32::from(battery.total_tenths()),
            inputs.genset_supply_present,
            dt_ms,
        );
        // Runtime is counted before the alarms are evaluated so the service
        // alarm reflects the scan that reached the interval.
        if inputs.genset_supply_present {
            self.genset_runtime_total_ms = self
                .genset_runtime_total_ms
                .saturating_add(u64::from(dt_ms));
        }
        let alarms = evaluate_alarms(self, inputs, temperature);

        self.last_temperature = temperature;
        self.last_battery = battery;
        self.last_alarms = alarms;
        let display_dirty = std::mem::take(&mut self.redraw_pending)
            || previous != (self.mode, temperature, battery, alarms);

        Ok(ControllerOutputs {
            genset_start: self.mode.drives_genset(),
            alarms,
            leds: Leds {
                alarms,
                on_battery: inputs.mains_fail && !inputs.genset_supply_present,
                on_genset: inputs.mains_fail && inputs.genset_supply_present,
            },
            heartbeat: true,
            display_dirty,
        })
    }

    pub fn reset_service_hours(&mut self) {
        self.genset_runtime_total_ms = 0;
    }

    pub fn apply_button(&mut self, button: Button) {
        apply_button(self, button);
    }

    fn enter(&mut self, mode: ControllerMode) {
        let from = self.mode;
        self.mode = mode;
        match mode {
            ControllerMode::MainsPowered => {
                self.phase_elapsed_ms = 0;
                self.crank_attempt = 0;
                self.crank_elapsed_ms = 0;
                self.cooldown_elapsed_ms = 0;
                self.genset_fault_latched = false;
            }
            ControllerMode::BatteryPhase => {
                self.phase_elapsed_ms = 0;
                self.crank_attempt = 0;
                self.crank_elapsed_ms = 0;
            }
            ControllerMode::GensetCranking => {
                // Cranking opens the genset phase; its clock starts here.
                self.phase_elapsed_ms = 0;
                self.crank_attempt = 0;
                self.crank_elapsed_ms = 0;
            }
            ControllerMode::GensetPhase => {
                self.crank_attempt = 0;
                self.crank_elapsed_ms = 0;
                if from != ControllerMode::GensetCranking {
                    self.phase_elapsed_ms = 0;
                }
            }
            ControllerMode::GensetCooldown => {
                self.phase_elapsed_ms = 0;
                self.cooldown_elapsed_ms = 0;
            }
        }
    }
}

pub fn controller_init(
    settings: Settings,
    persisted_runtime_ms: u64,
) -> Result<ControllerState, ControllerError> {
    ControllerState::init(settings, persisted_runtime_ms)
}

fn expect_channel(sample: &AdcSample, expected: AdcChannel) -> Result<(), ControllerError> {
    if sample.channel() == expected {
        Ok(())
    } else {
        Err(ControllerError::WrongChannel {
            expected,
            got: sample.channel(),
        })
    }
}

/// Advances the current mode's timers by `dt_ms`, then applies at most one
/// transition.
pub fn select_source(
    state: &mut ControllerState,
    mains_fail: bool,
    battery_tenths: i32,
    genset_supply_present: bool,
    dt_ms: u32,
) {
    use ControllerMode::*;

    let dt = u64::from(dt_ms);
    let s = &state.settings;
    let (battery_phase, genset_phase) = (s.battery_phase_ms(), s.genset_phase_ms());
    let (crank_duration, cooldown) = (s.crank_duration_ms(), s.cooldown_ms());
    let (low, cutoff) = (s.batt_low_tenths, s.batt_cutoff_tenths);
    let attempts_max = s.crank_attempts_max;

    match state.mode {
        MainsPowered => {}
        BatteryPhase => state.phase_elapsed_ms = (state.phase_elapsed_ms + dt).min(battery_phase),
        GensetCranking => {
            state.phase_elapsed_ms = (state.phase_elapsed_ms + dt).min(genset_phase);
            state.crank_elapsed_ms += dt;
        }
        GensetPhase => state.phase_elapsed_ms = (state.phase_elapsed_ms + dt).min(genset_phase),
        GensetCooldown => {
            state.cooldown_elapsed_ms = (state.cooldown_elapsed_ms + dt).min(cooldown)
        }
    }

    if !mains_fail {
        match state.mode {
            MainsPowered => {}
            GensetPhase => state.enter(GensetCooldown),
            GensetCooldown => {
                if state.cooldown_elapsed_ms >= cooldown {
                    state.enter(MainsPowered);
                }
            }
            BatteryPhase | GensetCranking => state.enter(MainsPowered),
        }
        return;
    }

    match state.mode {
        MainsPowered => {
            if battery_tenths > low {
                state.enter(BatteryPhase);
            } else {
                state.enter(GensetCranking);
            }
        }
        GensetCooldown => {
            // Grid dropped again while the engine was cooling down.
            if genset_supply_present {
                state.enter(GensetPhase);
            } else if battery_tenths > low {
                state.enter(BatteryPhase);
            } else {
                state.enter(GensetCranking);
            }
        }
        BatteryPhase => {
            // A faulted genset is not retried until mains returns.
            if !state.genset_fault_latched
                && (state.phase_elapsed_ms >= battery_phase || battery_tenths <= low)
            {
                state.enter(GensetCranking);
            }
        }
        GensetCranking => {
            if genset_supply_present {
                state.enter(GensetPhase);
            } else if state.crank_elapsed_ms >= crank_duration {
                state.crank_attempt += 1;
                state.crank_elapsed_ms = 0;
                if state.crank_attempt >= attempts_max {
                    state.genset_fault_latched = true;
                    state.enter(BatteryPhase);
                }
            }
        }
        GensetPhase => {
            if !genset_supply_present {
                state.genset_fault_latched = true;
                state.enter(BatteryPhase);
            } else if state.phase_elapsed_ms >= genset_phase && battery_tenths > cutoff {
                state.enter(BatteryPhase);
            }
        }
    }
}

pub fn evaluate_alarms(
    state: &mut ControllerState,
    inputs: &ControllerInputs,
    temperature: TemperatureC,
) -> AlarmSet {
    let s = &state.settings;
    let celsius = i32::from(temperature.celsius());
    if celsius >= s.temp_alarm_on_c {
        state.temp_alarm_latched = true;
    } else if celsius <= s.temp_alarm_off_c {
        state.temp_alarm_latched = false;
    }
    AlarmSet {
        mains_fail: inputs.mains_fail,
        low_fuel: inputs.low_fuel,
        genset_on_load: inputs.genset_supply_present && inputs.mains_fail,
        high_temperature: state.temp_alarm_latched,
        genset_fault: state.genset_fault_latched,
        service_hour: state.genset_runtime_total_ms >= s.service_interval_ms(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversions::{AdcChannel, AdcSample};

    fn inputs(mains_fail: bool, supply: bool, temp_code: u32, batt_code: u32) -> ControllerInputs {
        ControllerInputs {
            mains_fail,
            low_fuel: false,
            genset_supply_present: supply,
            adc_temp: AdcSample::new(AdcChannel::Temp0, temp_code).unwrap(),
            adc_batt: AdcSample::new(AdcChannel::Batt1, batt_code).unwrap(),
        }
    }

    fn fresh() -> ControllerState {
        ControllerState::init(Settings::default(), 0).unwrap()
    }

    #[test]
    fn init_defaults() {
        let s = fresh();
        assert_eq!(s.mode, ControllerMode::MainsPowered);
        assert_eq!(s.genset_runtime_total_ms, 0);
        assert!(!s.temp_alarm_latched && !s.genset_fault_latched);
        assert_eq!(
            (
                s.phase_elapsed_ms,
                s.crank_elapsed_ms,
                s.cooldown_elapsed_ms
            ),
            (0, 0, 0)
        );
    }

    #[test]
    fn init_rejects_inverted_band() {
        let settings = Settings {
            temp_alarm_off_c: 45,
            ..Settings::default()
        };
        assert!(matches!(
            ControllerState::init(settings, 0),
            Err(ControllerError::Settings(
                SettingsError::TemperatureBand { .. }
            ))
        ));
    }

    #[test]
    fn persisted_runtime_at_interval_alarms_on_first_scan() {
        let mut s = ControllerState::init(Settings::default(), 900_000 * 1000).unwrap();
        let out = s.scan(&inputs(false, false, 72, 775), 100).unwrap();
        assert!(out.alarms.service_hour);
    }

    #[test]
    fn healthy_mains_scan() {
        let mut s = fresh();
        let out = s.scan(&inputs(false, false, 72, 775), 100).unwrap();
        assert_eq!(s.mode, ControllerMode::MainsPowered);
        assert!(!out.genset_start);
        assert_eq!(out.alarms, AlarmSet::default());
        assert!(out.heartbeat);
        assert_eq!(s.last_battery.text(), "48.4");
        assert_eq!(s.last_temperature.celsius(), 35);
    }

    #[test]
    fn mains_failure_starts_on_battery() {
        let mut s = fresh();
        let out = s.scan(&inputs(true, false, 72, 775), 100).unwrap();
        assert_eq!(s.mode, ControllerMode::BatteryPhase);
        assert!(!out.genset_start);
        assert_eq!(
            out.alarms,
            AlarmSet {
                mains_fail: true,
                ..AlarmSet::default()
            }
        );
        assert!(out.leds.on_battery && !out.leds.on_genset);
    }

    #[test]
    fn mains_failure_with_low_battery_cranks_immediately() {
        let mut s = fresh();
        // 752 counts = 47.0 V, not above the 47.0 V threshold
        s.scan(&inputs(true, false, 72, 752), 100).unwrap();
        assert_eq!(s.mode, ControllerMode::GensetCranking);
    }

    #[test]
    fn battery_phase_expiry_cranks() {
        let mut s = fresh();
        s.mode = ControllerMode::BatteryPhase;
        s.phase_elapsed_ms = 21_600_000;
        let out = s.scan(&inputs(true, false, 72, 775), 100).unwrap();
        assert_eq!(s.mode, ControllerMode::GensetCranking);
        assert!(out.genset_start);
    }

    #[test]
    fn battery_phase_one_tick_early_holds() {
        let mut s = fresh();
        s.mode = ControllerMode::BatteryPhase;
        s.phase_elapsed_ms = 21_600_000 - 200;
        s.scan(&inputs(true, false, 72, 775), 100).unwrap();
        assert_eq!(s.mode, ControllerMode::BatteryPhase);
        s.scan(&inputs(true, false, 72, 775), 100).unwrap();
        assert_eq!(s.mode, ControllerMode::GensetCranking);
    }

    #[test]
    fn mains_powered_no_op() {
        let mut s = fresh();
        let before = s.clone();
        select_source(&mut s, false, 480, false, 100);
        assert_eq!(s, before);
    }

    #[test]
    fn low_battery_ends_battery_phase_early() {
        let mut s = fresh();
        s.mode = ControllerMode::BatteryPhase;
        s.phase_elapsed_ms = 1000;
        select_source(&mut s, true, 465, false, 100);
        assert_eq!(s.mode, ControllerMode::GensetCranking);
        assert_eq!(s.phase_elapsed_ms, 0);
    }

    #[test]
    fn exhausted_cranks_fall_back_to_battery_with_fault() {
        let mut s = fresh();
        s.mode = ControllerMode::GensetCranking;
        s.crank_attempt = 2;
        s.crank_elapsed_ms = 9_900;
        select_source(&mut s, true, 480, false, 100);
        assert_eq!(s.mode, ControllerMode::BatteryPhase);
        assert!(s.genset_fault_latched);
        assert_eq!(s.crank_attempt, 0);
    }

    #[test]
    fn faulted_genset_is_not_retried_on_battery() {
        let mut s = fresh();
        s.mode = ControllerMode::BatteryPhase;
        s.genset_fault_latched = true;
        s.phase_elapsed_ms = 21_600_000;
        select_source(&mut s, true, 420, false, 100);
        assert_eq!(s.mode, ControllerMode::BatteryPhase);
    }

    #[test]
    fn fault_clears_only_on_mains_return() {
        let mut s = fresh();
        s.mode = ControllerMode::BatteryPhase;
        s.genset_fault_latched = true;
        select_source(&mut s, true, 480, false, 100);
        assert!(s.genset_fault_latched);
        select_source(&mut s, false, 480, false, 100);
        assert_eq!(s.mode, ControllerMode::MainsPowered);
        assert!(!s.genset_fault_latched);
    }

    #[test]
    fn crank_success_keeps_phase_clock() {
        let mut s = fresh();
        s.mode = ControllerMode::GensetCranking;
        s.phase_elapsed_ms = 4_900;
        s.crank_elapsed_ms = 4_900;
        select_source(&mut s, true, 480, true, 100);
        assert_eq!(s.mode, ControllerMode::GensetPhase);
        assert_eq!(s.phase_elapsed_ms, 5_000);
        assert_eq!((s.crank_attempt, s.crank_elapsed_ms), (0, 0));
    }

    #[test]
    fn genset_phase_expiry_requires_battery_above_cutoff() {
        let mut s = fresh();
        s.mode = ControllerMode::GensetPhase;
        s.phase_elapsed_ms = 21_600_000;
        select_source(&mut s, true, 430, true, 100);
        assert_eq!(s.mode, ControllerMode::GensetPhase);
        assert!(s.phase_elapsed_ms <= 21_600_000);
        select_source(&mut s, true, 431, true, 100);
        assert_eq!(s.mode, ControllerMode::BatteryPhase);
    }

    #[test]
    fn supply_loss_during_genset_phase_latches_fault() {
        let mut s = fresh();
        s.mode = ControllerMode::GensetPhase;
        select_source(&mut s, true, 480, false, 100);
        assert_eq!(s.mode, ControllerMode::BatteryPhase);
        assert!(s.genset_fault_latched);
    }

    #[test]
    fn mains_return_cools_the_genset_down() {
        let mut s = fresh();
        s.mode = ControllerMode::GensetPhase;
        let out = s.scan(&inputs(false, true, 72, 800), 100).unwrap();
        assert_eq!(s.mode, ControllerMode::GensetCooldown);
        assert!(out.genset_start);
        let mut scans = 1;
        while s.mode == ControllerMode::GensetCooldown {
            s.scan(&inputs(false, true, 72, 800), 100).unwrap();
            scans += 1;
        }
        assert_eq!(s.mode, ControllerMode::MainsPowered);
        // 30 s of cooldown at 100 ms
        assert_eq!(scans, 301);
    }

    #[test]
    fn mains_return_while_cranking_goes_straight_to_mains() {
        let mut s = fresh();
        s.mode = ControllerMode::GensetCranking;
        select_source(&mut s, false, 480, false, 100);
        assert_eq!(s.mode, ControllerMode::MainsPowered);
    }

    #[test]
    fn hysteresis_holds_between_thresholds() {
        let mut s = fresh();
        // 82 counts = 40 C, 80 = 39 C, 78 = 38 C
        let a = s.scan(&inputs(false, false, 82, 775), 100).unwrap();
        let b = s.scan(&inputs(false, false, 80, 775), 100).unwrap();
        let c = s.scan(&inputs(false, false, 78, 775), 100).unwrap();
        assert!(a.alarms.high_temperature);
        assert!(b.alarms.high_temperature);
        assert!(!c.alarms.high_temperature);
    }

    #[test]
    fn service_alarm_boundary_is_inclusive() {
        let mut s = ControllerState::init(Settings::default(), 900_000 * 1000 - 100).unwrap();
        let out = s.scan(&inputs(false, true, 72, 775), 100).unwrap();
        assert_eq!(s.genset_runtime_total_ms, 900_000 * 1000);
        assert!(out.alarms.service_hour);
    }

    #[test]
    fn reset_service_hours_clears_alarm_next_scan() {
        let mut s = ControllerState::init(Settings::default(), 900_001 * 1000).unwrap();
        assert!(
            s.scan(&inputs(false, false, 72, 775), 100)
                .unwrap()
                .alarms
                .service_hour
        );
        s.reset_service_hours();
        assert_eq!(s.genset_runtime_total_ms, 0);
        assert!(
            !s.scan(&inputs(false, false, 72, 775), 100)
                .unwrap()
                .alarms
                .service_hour
        );
        s.reset_service_hours();
        assert_eq!(s.genset_runtime_total_ms, 0);
    }

    #[test]
    fn reset_mid_genset_phase_restarts_accumulation() {
        let mut s = fresh();
        s.mode = ControllerMode::GensetPhase;
        s.genset_runtime_total_ms = 50_000;
        s.reset_service_hours();
        s.scan(&inputs(true, true, 72, 800), 100).unwrap();
        assert_eq!(s.genset_runtime_total_ms, 100);
    }

    #[test]
    fn genset_on_load_needs_mains_absent() {
        let mut s = fresh();
        s.mode = ControllerMode::GensetCooldown;
        let out = s.scan(&inputs(false, true, 72, 800), 100).unwrap();
        assert!(!out.alarms.genset_on_load);
        let mut s = fresh();
        s.mode = ControllerMode::GensetPhase;
        let out = s.scan(&inputs(true, true, 72, 800), 100).unwrap();
        assert!(out.alarms.genset_on_load && out.leds.on_genset);
    }

    #[test]
    fn contract_violations() {
        let mut s = fresh();
        assert_eq!(
            s.scan(&inputs(false, false, 72, 775), 50),
            Err(ControllerError::ScanPeriod {
                expected: 100,
                got: 50
            })
        );
        let mut bad = inputs(false, false, 72, 775);
        bad.adc_batt = AdcSample::new(AdcChannel::Temp0, 775).unwrap();
        assert!(matches!(
            s.scan(&bad, 100),
            Err(ControllerError::WrongChannel { .. })
        ));
    }

    #[test]
    fn display_dirty_tracks_changes() {
        let mut s = fresh();
        let i = inputs(false, false, 72, 775);
        assert!(s.scan(&i, 100).unwrap().display_dirty);
        assert!(!s.scan(&i, 100).unwrap().display_dirty);
        s.apply_button(Button::Set);
        assert!(s.scan(&i, 100).unwrap().display_dirty);
        assert!(
            s.scan(&inputs(false, false, 72, 776), 100)
                .unwrap()
                .display_dirty
        );
    }
}
