//! `vtms selftest`: the exhaustive conversion oracle plus a short invariant
//! suite over built-in scenarios.

use std::fmt;
use std::time::Instant;

use num_rational::Ratio;
use vtms_core::conversions::{battery_voltage_from_adc, temperature_from_adc, ADC_MAX};
use vtms_core::harness::{parse_scenario, run_scenario, TraceRow};
use vtms_core::lcd::{render_main, LCD_COLS};
use vtms_core::ControllerMode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub failure: Option<String>,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "ok    {}", self.name),
            Some(why) => write!(f, "FAIL  {}: {why}", self.name),
        }
    }
}

fn check(name: &'static str, result: Result<(), String>) -> Check {
    Check {
        name,
        failure: result.err(),
    }
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("battery conversion, 1024 codes", battery_oracle()),
        check("temperature conversion, 1024 codes", temperature_oracle()),
        check("lcd frames are 4x20", lcd_geometry()),
        check("crank bound under genset fault", crank_bound()),
        check("source leds exclusive, watchdog bypass", hang_scenario()),
        check("temperature alarm does not chatter", no_chatter()),
    ]
}

fn battery_oracle() -> Result<(), String> {
    let started = Instant::now();
    for code in 0..=u32::from(ADC_MAX) {
        let volts = Ratio::new(code, 16);
        let whole = volts.to_integer();
        let tenths = ((volts - volts.trunc()) * 10).to_integer();
        let got = battery_voltage_from_adc(code as u16).map_err(|e| e.to_string())?;
        if (u32::from(got.whole()), u32::from(got.tenths())) != (whole, tenths) {
            return Err(format!("code {code}: got {got}, expected {whole}.{tenths}"));
        }
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() >= 1.0 {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(())
}

fn temperature_oracle() -> Result<(), String> {
    for code in 0..=u32::from(ADC_MAX) {
        let expected = (Ratio::new(code * 500, 1024).to_integer()).min(150);
        let got = temperature_from_adc(code as u16).map_err(|e| e.to_string())?;
        if u32::from(got.celsius()) != expected {
            return Err(format!("code {code}: got {got}, expected {expected}"));
        }
    }
    Ok(())
}

fn lcd_geometry() -> Result<(), String> {
    for code in (0..=ADC_MAX).step_by(37) {
        let frame = render_main(
            battery_voltage_from_adc(code).map_err(|e| e.to_string())?,
            temperature_from_adc(code).map_err(|e| e.to_string())?,
            ControllerMode::GensetCooldown,
            vtms_core::AlarmSet::from_array([true; 6]),
        );
        if frame.lines().iter().any(|l| l.len() != LCD_COLS) {
            return Err(format!("code {code}: {frame:?}"));
        }
    }
    Ok(())
}

fn scenario_rows(text: &str) -> Result<Vec<TraceRow>, String> {
    let scenario = parse_scenario(text).map_err(|e| e.to_string())?;
    run_scenario(&scenario).map_err(|e| e.to_string())
}

fn crank_bound() -> Result<(), String> {
    let rows = scenario_rows(
        r#"
name = "selftest-fault"
duration_s = 120
[settings]
battery_phase_s = 60
[[events]]
t_s = 0
kind = "MainsOff"
[[events]]
t_s = 30
kind = "InjectGensetFault"
"#,
    )?;
    let cranking = rows
        .iter()
        .filter(|r| r.genset_cmd && !r.genset_supply)
        .count();
    if cranking != 300 {
        return Err(format!("{cranking} ticks of cranking, expected 300"));
    }
    match rows.last() {
        Some(r) if r.alarms.genset_fault && r.mode == ControllerMode::BatteryPhase => Ok(()),
        other => Err(format!("ended in {other:?}")),
    }
}

fn hang_scenario() -> Result<(), String> {
    let rows = scenario_rows(
        r#"
name = "selftest-hang"
duration_s = 60
[[events]]
t_s = 0
kind = "MainsOff"
[[events]]
t_s = 10
kind = "HangController"
[[events]]
t_s = 40
kind = "ResumeController"
"#,
    )?;
    let first_bypass = rows.iter().find(|r| r.bypass_active).map(|r| r.t_ms);
    if first_bypass != Some(12_100) {
        return Err(format!(
            "bypass first at {first_bypass:?} ms, expected 12100"
        ));
    }
    if rows
        .iter()
        .any(|r| r.genset_cmd && r.mode == ControllerMode::MainsPowered && !r.bypass_active)
    {
        return Err("genset commanded on mains".into());
    }
    Ok(())
}

fn no_chatter() -> Result<(), String> {
    let rows = scenario_rows(
        r#"
name = "selftest-hysteresis"
duration_s = 3600
[plant]
room_thermal_capacity_j_per_c = 20000.0
temp_adc_dither_counts = 1
[[events]]
t_s = 0
kind = "SetAmbient"
value = 45.0
[[events]]
t_s = 1800
kind = "SetAmbient"
value = 15.0
"#,
    )?;
    let transitions = rows
        .windows(2)
        .filter(|w| w[0].alarms.high_temperature != w[1].alarms.high_temperature)
        .count();
    if transitions != 2 {
        return Err(format!("{transitions} alarm transitions, expected 2"));
    }
    Ok(())
}
