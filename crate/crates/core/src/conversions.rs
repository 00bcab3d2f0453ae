//! Integer ADC conversions, computed the way the 8-bit firmware does them.
//!
//! The battery channel is calibrated by the multiturn trimmer to 16 counts
//! per volt, so the whole volts are `code / 16` and the tenths digit is
//! `((code % 16) * 10) / 16`. The temperature channel reads an LM35
//! (10 mV/°C) against a 5.00 V reference.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest code a 10-bit converter produces.
pub const ADC_MAX: u16 = 1023;

/// Counts per volt on the battery channel (nominal trimmer setting).
pub const BATTERY_COUNTS_PER_VOLT: u16 = 16;

/// Upper end of the LM35DZ sensing range.
pub const TEMPERATURE_MAX_C: u8 = 150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ConversionError {
    #[error("ADC code {0} outside 0..=1023")]
    CodeOutOfRange(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdcChannel {
    /// AN0, room temperature sensor.
    Temp0,
    /// AN1, battery voltage through the trimmer.
    Batt1,
}

/// A raw 10-bit conversion result tagged with the channel it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdcSample {
    channel: AdcChannel,
    code: u16,
}

impl AdcSample {
    pub fn new(channel: AdcChannel, code: u32) -> Result<Self, ConversionError> {
        if code > u32::from(ADC_MAX) {
            return Err(ConversionError::CodeOutOfRange(code));
        }
        Ok(Self {
            channel,
            code: code as u16,
        })
    }

    pub fn channel(&self) -> AdcChannel {
        self.channel
    }

    pub fn code(&self) -> u16 {
        self.code
    }
}

/// Battery voltage as shown on the LCD: whole volts, a period, one tenths digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DisplayVoltage {
    whole: u8,
    tenths: u8,
}

impl DisplayVoltage {
    pub fn whole(&self) -> u8 {
        self.whole
    }

    pub fn tenths(&self) -> u8 {
        self.tenths
    }

    /// `whole * 10 + tenths`, the unit the controller thresholds use.
    pub fn total_tenths(&self) -> u16 {
        u16::from(self.whole) * 10 + u16::from(self.tenths)
    }

    pub fn text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DisplayVoltage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{}.{}", self.whole, self.tenths);
        f.pad(&s)
    }
}

impl PartialOrd for DisplayVoltage {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DisplayVoltage {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_tenths().cmp(&other.total_tenths())
    }
}

/// Room temperature in whole degrees, clamped to the sensor range.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct TemperatureC(u8);

impl TemperatureC {
    pub fn new(celsius: u8) -> Self {
        Self(celsius.min(TEMPERATURE_MAX_C))
    }

    pub fn celsius(&self) -> u8 {
        self.0
    }
}

impl fmt::Display for TemperatureC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

fn check_code(code: u16) -> Result<u16, ConversionError> {
    if code > ADC_MAX {
        Err(ConversionError::CodeOutOfRange(u32::from(code)))
    } else {
        Ok(code)
    }
}

pub fn battery_voltage_from_adc(code: u16) -> Result<DisplayVoltage, ConversionError> {
    let code = check_code(code)?;
    let whole = code / BATTERY_COUNTS_PER_VOLT;
    let tenths = ((code % BATTERY_COUNTS_PER_VOLT) * 10) / BATTERY_COUNTS_PER_VOLT;
    Ok(DisplayVoltage {
        whole: whole as u8,
        tenths: tenths as u8,
    })
}

/// Unclamped LM35 reading, `floor(code * 500 / 1024)`.
pub fn temperature_raw_from_adc(code: u16) -> Result<u16, ConversionError> {
    let code = check_code(code)?;
    // 1023 * 500 fits comfortably in u32
    Ok((u32::from(code) * 500 / 1024) as u16)
}

pub fn temperature_from_adc(code: u16) -> Result<TemperatureC, ConversionError> {
    let raw = temperature_raw_from_adc(code)?;
    Ok(TemperatureC(raw.min(u16::from(TEMPERATURE_MAX_C)) as u8))
}

impl AdcSample {
    pub fn battery_voltage(&self) -> Result<DisplayVoltage, ConversionError> {
        battery_voltage_from_adc(self.code)
    }

    pub fn temperature(&self) -> Result<TemperatureC, ConversionError> {
        temperature_from_adc(self.code)
    }
}
