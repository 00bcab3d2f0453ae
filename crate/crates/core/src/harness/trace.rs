//! One CSV row per tick, columns in a fixed order.
//!
//! Reals are printed with a fixed number of decimals. `core::fmt` rounds
//! the exact binary value half-to-even, so the text is identical on every
//! platform.

use std::io::{self, Write};

use crate::controller::{AlarmSet, ControllerMode};
use crate::conversions::{DisplayVoltage, TemperatureC};

pub const TRACE_HEADER: &str = "t_s,mode,mains_fail,low_fuel,genset_cmd,genset_supply,\
bypass_active,battery_display,temperature_c,soc,fuel_l,room_temp_c,\
alarm_mains_fail,alarm_low_fuel,alarm_genset_on_load,alarm_high_temperature,\
alarm_genset_fault,alarm_service_hour";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// End of the tick this row describes.
    pub t_ms: u64,
    pub mode: ControllerMode,
    pub mains_fail: bool,
    pub low_fuel: bool,
    pub genset_cmd: bool,
    pub genset_supply: bool,
    pub bypass_active: bool,
    pub battery_display: DisplayVoltage,
    pub temperature_c: TemperatureC,
    pub soc: f64,
    pub fuel_l: f64,
    pub room_temp_c: f64,
    pub alarms: AlarmSet,
}

fn bit(b: bool) -> char {
    if b {
        '1'
    } else {
        '0'
    }
}

impl TraceRow {
    pub fn t_s(&self) -> f64 {
        self.t_ms as f64 / 1000.0
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let a = self.alarms.as_array();
        writeln!(
            w,
            "{}.{:03},{},{},{},{},{},{},{},{},{:.4},{:.3},{:.3},{},{},{},{},{},{}",
            self.t_ms / 1000,
            self.t_ms % 1000,
            self.mode,
            bit(self.mains_fail),
            bit(self.low_fuel),
            bit(self.genset_cmd),
            bit(self.genset_supply),
            bit(self.bypass_active),
            self.battery_display,
            self.temperature_c,
            self.soc,
            self.fuel_l,
            self.room_temp_c,
            bit(a[0]),
            bit(a[1]),
            bit(a[2]),
            bit(a[3]),
            bit(a[4]),
            bit(a[5]),
        )
    }
}

pub fn write_header<W: Write>(w: &mut W) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")
}

pub fn write_trace<'a, W, I>(rows: I, mut w: W) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a TraceRow>,
{
    write_header(&mut w)?;
    for row in rows {
        row.write_csv(&mut w)?;
    }
    w.flush()
}

pub fn trace_to_string<'a, I>(rows: I) -> String
where
    I: IntoIterator<Item = &'a TraceRow>,
{
    let mut buf = Vec::new();
    write_trace(rows, &mut buf).expect("writing to a Vec");
    String::from_utf8(buf).expect("trace is ASCII")
}
