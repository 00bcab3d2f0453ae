use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Operator presets. Voltages are tenths of a volt, durations whole seconds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub temp_alarm_on_c: i32,
    pub temp_alarm_off_c: i32,
    pub batt_low_tenths: i32,
    pub batt_cutoff_tenths: i32,
    pub battery_phase_s: u32,
    pub genset_phase_s: u32,
    pub crank_duration_s: u32,
    pub crank_attempts_max: u32,
    pub genset_cooldown_s: u32,
    pub service_interval_s: u32,
    pub scan_period_ms: u32,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            temp_alarm_on_c: 40,
            temp_alarm_off_c: 38,
            batt_low_tenths: 470,
            batt_cutoff_tenths: 430,
            battery_phase_s: 6 * 3600,
            genset_phase_s: 6 * 3600,
            crank_duration_s: 10,
            crank_attempts_max: 3,
            genset_cooldown_s: 30,
            service_interval_s: 250 * 3600,
            scan_period_ms: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SettingsError {
    #[error("temp_alarm_off_c ({off}) must be below temp_alarm_on_c ({on})")]
    TemperatureBand { on: i32, off: i32 },
    #[error("batt_cutoff_tenths ({cutoff}) must be below batt_low_tenths ({low})")]
    BatteryBand { low: i32, cutoff: i32 },
    #[error("{0} must be greater than zero")]
    ZeroDuration(&'static str),
    #[error("crank_attempts_max must be at least 1")]
    NoCrankAttempts,
    #[error("{field} = {value} is outside {min}..={max}")]
    OutOfRange {
        field: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },
}

impl Settings {
    pub fn validate(&self) -> Result<(), SettingsError> {
        if self.temp_alarm_off_c >= self.temp_alarm_on_c {
            return Err(SettingsError::TemperatureBand {
                on: self.temp_alarm_on_c,
                off: self.temp_alarm_off_c,
            });
        }
        if self.batt_cutoff_tenths >= self.batt_low_tenths {
            return Err(SettingsError::BatteryBand {
                low: self.batt_low_tenths,
                cutoff: self.batt_cutoff_tenths,
            });
        }
        for (name, value) in [
            ("battery_phase_s", self.battery_phase_s),
            ("genset_phase_s", self.genset_phase_s),
            ("crank_duration_s", self.crank_duration_s),
            ("genset_cooldown_s", self.genset_cooldown_s),
            ("service_interval_s", self.service_interval_s),
            ("scan_period_ms", self.scan_period_ms),
        ] {
            if value == 0 {
                return Err(SettingsError::ZeroDuration(name));
            }
        }
        if self.crank_attempts_max == 0 {
            return Err(SettingsError::NoCrankAttempts);
        }
        range_check("temp_alarm_off_c", self.temp_alarm_off_c.into(), 0, 149)?;
        range_check("temp_alarm_on_c", self.temp_alarm_on_c.into(), 1, 150)?;
        range_check("batt_cutoff_tenths", self.batt_cutoff_tenths.into(), 0, 638)?;
        range_check("batt_low_tenths", self.batt_low_tenths.into(), 1, 639)?;
        Ok(())
    }

    pub(crate) fn battery_phase_ms(&self) -> u64 {
        u64::from(self.battery_phase_s) * 1000
    }

    pub(crate) fn genset_phase_ms(&self) -> u64 {
        u64::from(self.genset_phase_s) * 1000
    }

    pub(crate) fn crank_duration_ms(&self) -> u64 {
        u64::from(self.crank_duration_s) * 1000
    }

    pub(crate) fn cooldown_ms(&self) -> u64 {
        u64::from(self.genset_cooldown_s) * 1000
    }

    pub(crate) fn service_interval_ms(&self) -> u64 {
        u64::from(self.service_interval_s) * 1000
    }
}

fn range_check(field: &'static str, value: i64, min: i64, max: i64) -> Result<(), SettingsError> {
    if value < min || value > max {
        Err(SettingsError::OutOfRange {
            field,
            value,
            min,
            max,
        })
    } else {
        Ok(())
    }
}

/// Partial settings, as they appear in scenario files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsOverrides {
    pub temp_alarm_on_c: Option<i32>,
    pub temp_alarm_off_c: Option<i32>,
    pub batt_low_tenths: Option<i32>,
    pub batt_cutoff_tenths: Option<i32>,
    pub battery_phase_s: Option<u32>,
    pub genset_phase_s: Option<u32>,
    pub crank_duration_s: Option<u32>,
    pub crank_attempts_max: Option<u32>,
    pub genset_cooldown_s: Option<u32>,
    pub service_interval_s: Option<u32>,
    pub scan_period_ms: Option<u32>,
}

impl SettingsOverrides {
    pub fn apply_to(&self, base: &Settings) -> Settings {
        Settings {
            temp_alarm_on_c: self.temp_alarm_on_c.unwrap_or(base.temp_alarm_on_c),
            temp_alarm_off_c: self.temp_alarm_off_c.unwrap_or(base.temp_alarm_off_c),
            batt_low_tenths: self.batt_low_tenths.unwrap_or(base.batt_low_tenths),
            batt_cutoff_tenths: self.batt_cutoff_tenths.unwrap_or(base.batt_cutoff_tenths),
            battery_phase_s: self.battery_phase_s.unwrap_or(base.battery_phase_s),
            genset_phase_s: self.genset_phase_s.unwrap_or(base.genset_phase_s),
            crank_duration_s: self.crank_duration_s.unwrap_or(base.crank_duration_s),
            crank_attempts_max: self.crank_attempts_max.unwrap_or(base.crank_attempts_max),
            genset_cooldown_s: self.genset_cooldown_s.unwrap_or(base.genset_cooldown_s),
            service_interval_s: self.service_interval_s.unwrap_or(base.service_interval_s),
            scan_period_ms: self.scan_period_ms.unwrap_or(base.scan_period_ms),
        }
    }
}

/// The presets reachable from the settings screen, in menu order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetField {
    TempAlarmOn,
    TempAlarmOff,
    BattLow,
    BattCutoff,
    BatteryPhase,
    GensetPhase,
    CrankDuration,
    CrankAttempts,
    Cooldown,
    ServiceInterval,
}

impl PresetField {
    pub const ALL: [PresetField; 10] = [
        PresetField::TempAlarmOn,
        PresetField::TempAlarmOff,
        PresetField::BattLow,
        PresetField::BattCutoff,
        PresetField::BatteryPhase,
        PresetField::GensetPhase,
        PresetField::CrankDuration,
        PresetField::CrankAttempts,
        PresetField::Cooldown,
        PresetField::ServiceInterval,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PresetField::TempAlarmOn => "TEMP ALARM",
            PresetField::TempAlarmOff => "TEMP CLEAR",
            PresetField::BattLow => "BATT LOW",
            PresetField::BattCutoff => "BATT CUTOFF",
            PresetField::BatteryPhase => "BATT PHASE",
            PresetField::GensetPhase => "GEN PHASE",
            PresetField::CrankDuration => "CRANK TIME",
            PresetField::CrankAttempts => "CRANK TRIES",
            PresetField::Cooldown => "COOLDOWN",
            PresetField::ServiceInterval => "SERVICE INT",
        }
    }

    /// One press of Up or Down, in the field's stored unit.
    pub fn step(self) -> i64 {
        match self {
            PresetField::BatteryPhase | PresetField::GensetPhase | PresetField::ServiceInterval => {
                3600
            }
            PresetField::Cooldown => 10,
            _ => 1,
        }
    }

    pub fn get(self, s: &Settings) -> i64 {
        match self {
            PresetField::TempAlarmOn => s.temp_alarm_on_c.into(),
            PresetField::TempAlarmOff => s.temp_alarm_off_c.into(),
            PresetField::BattLow => s.batt_low_tenths.into(),
            PresetField::BattCutoff => s.batt_cutoff_tenths.into(),
            PresetField::BatteryPhase => s.battery_phase_s.into(),
            PresetField::GensetPhase => s.genset_phase_s.into(),
            PresetField::CrankDuration => s.crank_duration_s.into(),
            PresetField::CrankAttempts => s.crank_attempts_max.into(),
            PresetField::Cooldown => s.genset_cooldown_s.into(),
            PresetField::ServiceInterval => s.service_interval_s.into(),
        }
    }

    /// Writes `value` without checking it; callers pin through [`legal_range`](Self::legal_range).
    pub(crate) fn set(self, s: &mut Settings, value: i64) {
        match self {
            PresetField::TempAlarmOn => s.temp_alarm_on_c = value as i32,
            PresetField::TempAlarmOff => s.temp_alarm_off_c = value as i32,
            PresetField::BattLow => s.batt_low_tenths = value as i32,
            PresetField::BattCutoff => s.batt_cutoff_tenths = value as i32,
            PresetField::BatteryPhase => s.battery_phase_s = value as u32,
            PresetField::GensetPhase => s.genset_phase_s = value as u32,
            PresetField::CrankDuration => s.crank_duration_s = value as u32,
            PresetField::CrankAttempts => s.crank_attempts_max = value as u32,
            PresetField::Cooldown => s.genset_cooldown_s = value as u32,
            PresetField::ServiceInterval => s.service_interval_s = value as u32,
        }
    }

    /// Inclusive bounds for this field given the rest of `s`, so that
    /// committing any value inside them keeps `s` valid.
    pub fn legal_range(self, s: &Settings) -> (i64, i64) {
        let on = i64::from(s.temp_alarm_on_c);
        let off = i64::from(s.temp_alarm_off_c);
        let low = i64::from(s.batt_low_tenths);
        let cutoff = i64::from(s.batt_cutoff_tenths);
        match self {
            PresetField::TempAlarmOn => ((off + 1).max(1), 150),
            PresetField::TempAlarmOff => (0, (on - 1).min(149)),
            PresetField::BattLow => ((cutoff + 1).max(1), 639),
            PresetField::BattCutoff => (0, (low - 1).min(638)),
            PresetField::BatteryPhase | PresetField::GensetPhase => (3600, 24 * 3600),
            PresetField::CrankDuration => (1, 60),
            PresetField::CrankAttempts => (1, 9),
            PresetField::Cooldown => (10, 600),
            PresetField::ServiceInterval => (3600, 9999 * 3600),
        }
    }

    pub fn format_value(self, value: i64) -> String {
        match self {
            PresetField::TempAlarmOn | PresetField::TempAlarmOff => format!("{value}C"),
            PresetField::BattLow | PresetField::BattCutoff => {
                format!("{}.{}V", value / 10, value % 10)
            }
            PresetField::BatteryPhase | PresetField::GensetPhase | PresetField::ServiceInterval => {
                format_duration(value)
            }
            PresetField::CrankDuration | PresetField::Cooldown => format!("{value}S"),
            PresetField::CrankAttempts => value.to_string(),
        }
    }
}

// Hours when the value is a whole number of hours, otherwise the coarsest
// unit that represents it exactly.
fn format_duration(seconds: i64) -> String {
    if seconds % 3600 == 0 {
        format!("{}H", seconds / 3600)
    } else if seconds % 60 == 0 {
        format!("{}M", seconds / 60)
    } else {
        format!("{seconds}S")
    }
}

impl fmt::Display for PresetField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
