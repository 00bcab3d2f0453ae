//! Simulated BTS room: grid, ATS, diesel genset with fuel tank and float
//! switch, 48 V battery bank, room thermal mass, and the sensor chain that
//! turns all of it into relay contacts and ADC codes for the controller.
//!
//! The plant integrates with explicit Euler at the simulation tick. It
//! uses `f64` internally, but only `+ - * /` and `round`, so results are
//! reproducible bit for bit across platforms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::ControllerInputs;
use crate::conversions::{AdcChannel, AdcSample, ADC_MAX, BATTERY_COUNTS_PER_VOLT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("invalid plant parameter {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> PlantError {
    PlantError::InvalidParam {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantParams {
    pub battery_capacity_wh: f64,
    pub site_load_w: f64,
    pub charge_power_w: f64,
    /// `(soc, open-circuit volts)` breakpoints covering soc 0..=1.
    pub ocv_table: Vec<(f64, f64)>,
    pub internal_resistance_ohm: f64,
    pub fuel_capacity_l: f64,
    pub fuel_burn_lph: f64,
    pub low_fuel_fraction: f64,
    pub genset_start_delay_s: f64,
    pub ambient_c: f64,
    pub room_thermal_capacity_j_per_c: f64,
    pub heat_load_w: f64,
    pub cooling_coeff_w_per_c: f64,
    /// Multiturn trimmer setting; 1.0 is the 16 counts/V calibration.
    pub trimmer_gain: f64,
    pub initial_soc: f64,
    /// Defaults to a full tank.
    pub initial_fuel_l: Option<f64>,
    /// Defaults to ambient.
    pub initial_room_temp_c: Option<f64>,
    /// Peak of a deterministic 0, +n, 0, -n pattern added to the
    /// temperature ADC code, tick by tick.
    pub temp_adc_dither_counts: u16,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            battery_capacity_wh: 9600.0,
            site_load_w: 1500.0,
            charge_power_w: 3000.0,
            ocv_table: vec![
                (0.0, 42.0),
                (0.1, 45.0),
                (0.5, 48.5),
                (0.9, 51.0),
                (1.0, 54.0),
            ],
            internal_resistance_ohm: 0.05,
            fuel_capacity_l: 100.0,
            fuel_burn_lph: 4.0,
            low_fuel_fraction: 0.20,
            genset_start_delay_s: 5.0,
            ambient_c: 32.0,
            room_thermal_capacity_j_per_c: 2.0e6,
            heat_load_w: 800.0,
            cooling_coeff_w_per_c: 60.0,
            trimmer_gain: 1.0,
            initial_soc: 0.9,
            initial_fuel_l: None,
            initial_room_temp_c: None,
            temp_adc_dither_counts: 0,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let positive = [
            ("battery_capacity_wh", self.battery_capacity_wh),
            ("site_load_w", self.site_load_w),
            ("charge_power_w", self.charge_power_w),
            ("internal_resistance_ohm", self.internal_resistance_ohm),
            ("fuel_capacity_l", self.fuel_capacity_l),
            ("fuel_burn_lph", self.fuel_burn_lph),
            ("genset_start_delay_s", self.genset_start_delay_s),
            (
                "room_thermal_capacity_j_per_c",
                self.room_thermal_capacity_j_per_c,
            ),
            ("heat_load_w", self.heat_load_w),
            ("cooling_coeff_w_per_c", self.cooling_coeff_w_per_c),
            ("trimmer_gain", self.trimmer_gain),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(
                    field,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        if !(self.low_fuel_fraction > 0.0 && self.low_fuel_fraction < 1.0) {
            return Err(invalid(
                "low_fuel_fraction",
                "must lie strictly between 0 and 1",
            ));
        }
        if !self.ambient_c.is_finite() {
            return Err(invalid("ambient_c", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.initial_soc) {
            return Err(invalid("initial_soc", "must lie in 0..=1"));
        }
        if let Some(fuel) = self.initial_fuel_l {
            if !(0.0..=self.fuel_capacity_l).contains(&fuel) {
                return Err(invalid("initial_fuel_l", "must lie in 0..=fuel_capacity_l"));
            }
        }
        if let Some(t) = self.initial_room_temp_c {
            if !t.is_finite() {
                return Err(invalid("initial_room_temp_c", "must be finite"));
            }
        }
        let table = &self.ocv_table;
        if table.len() < 2 {
            return Err(invalid("ocv_table", "needs at least two breakpoints"));
        }
        if table[0].0 != 0.0 || table[table.len() - 1].0 != 1.0 {
            return Err(invalid(
                "ocv_table",
                "must start at soc 0.0 and end at soc 1.0",
            ));
        }
        for pair in table.windows(2) {
            let ((s0, v0), (s1, v1)) = (pair[0], pair[1]);
            if !(s1 > s0 && v1 > v0) {
                return Err(invalid(
                    "ocv_table",
                    "must be strictly increasing in soc and volts",
                ));
            }
        }
        if table.iter().any(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("ocv_table", "voltages must be positive"));
        }
        Ok(())
    }

    pub fn low_fuel_threshold_l(&self) -> f64 {
        self.low_fuel_fraction * self.fuel_capacity_l
    }

    /// Temperature the room settles at for the current ambient and load.
    pub fn thermal_equilibrium_c(&self, ambient_c: f64) -> f64 {
        ambient_c + self.heat_load_w / self.cooling_coeff_w_per_c
    }

    fn start_delay_ms(&self) -> u64 {
        (self.genset_start_delay_s * 1000.0).round() as u64
    }
}

/// Partial plant parameters, as they appear in scenario files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantOverrides {
    pub battery_capacity_wh: Option<f64>,
    pub site_load_w: Option<f64>,
    pub charge_power_w: Option<f64>,
    pub ocv_table: Option<Vec<(f64, f64)>>,
    pub internal_resistance_ohm: Option<f64>,
    pub fuel_capacity_l: Option<f64>,
    pub fuel_burn_lph: Option<f64>,
    pub low_fuel_fraction: Option<f64>,
    pub genset_start_delay_s: Option<f64>,
    pub ambient_c: Option<f64>,
    pub room_thermal_capacity_j_per_c: Option<f64>,
    pub heat_load_w: Option<f64>,
    pub cooling_coeff_w_per_c: Option<f64>,
    pub trimmer_gain: Option<f64>,
    pub initial_soc: Option<f64>,
    pub initial_fuel_l: Option<f64>,
    pub initial_room_temp_c: Option<f64>,
    pub temp_adc_dither_counts: Option<u16>,
}

impl PlantOverrides {
    pub fn apply_to(&self, base: &PlantParams) -> PlantParams {
        let b = base.clone();
        PlantParams {
            battery_capacity_wh: self.battery_capacity_wh.unwrap_or(b.battery_capacity_wh),
            site_load_w: self.site_load_w.unwrap_or(b.site_load_w),
            charge_power_w: self.charge_power_w.unwrap_or(b.charge_power_w),
            ocv_table: self.ocv_table.clone().unwrap_or(b.ocv_table),
            internal_resistance_ohm: self
                .internal_resistance_ohm
                .unwrap_or(b.internal_resistance_ohm),
            fuel_capacity_l: self.fuel_capacity_l.unwrap_or(b.fuel_capacity_l),
            fuel_burn_lph: self.fuel_burn_lph.unwrap_or(b.fuel_burn_lph),
            low_fuel_fraction: self.low_fuel_fraction.unwrap_or(b.low_fuel_fraction),
            genset_start_delay_s: self.genset_start_delay_s.unwrap_or(b.genset_start_delay_s),
            ambient_c: self.ambient_c.unwrap_or(b.ambient_c),
            room_thermal_capacity_j_per_c: self
                .room_thermal_capacity_j_per_c
                .unwrap_or(b.room_thermal_capacity_j_per_c),
            heat_load_w: self.heat_load_w.unwrap_or(b.heat_load_w),
            cooling_coeff_w_per_c: self
                .cooling_coeff_w_per_c
                .unwrap_or(b.cooling_coeff_w_per_c),
            trimmer_gain: self.trimmer_gain.unwrap_or(b.trimmer_gain),
            initial_soc: self.initial_soc.unwrap_or(b.initial_soc),
            initial_fuel_l: self.initial_fuel_l.or(b.initial_fuel_l),
            initial_room_temp_c: self.initial_room_temp_c.or(b.initial_room_temp_c),
            temp_adc_dither_counts: self
                .temp_adc_dither_counts
                .unwrap_or(b.temp_adc_dither_counts),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GensetState {
    Off,
    Starting { elapsed_ms: u64 },
    Running,
    FaultInjected,
}

impl GensetState {
    pub fn name(&self) -> &'static str {
        match self {
            GensetState::Off => "Off",
            GensetState::Starting { .. } => "Starting",
            GensetState::Running => "Running",
            GensetState::FaultInjected => "FaultInjected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Supply {
    Mains,
    Genset,
    Battery,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub t_ms: u64,
    pub mains_on: bool,
    pub genset: GensetState,
    pub soc: f64,
    pub fuel_l: f64,
    pub room_temp_c: f64,
    pub controller_hung: bool,
    pub bypass_active: bool,
    /// Current outside temperature; starts at `PlantParams::ambient_c`.
    pub ambient_c: f64,
    /// Current trimmer position; starts at `PlantParams::trimmer_gain`.
    pub trimmer_gain: f64,
}

impl PlantState {
    pub fn t_s(&self) -> f64 {
        self.t_ms as f64 / 1000.0
    }

    pub fn supply(&self) -> Supply {
        if self.mains_on {
            Supply::Mains
        } else if self.genset == GensetState::Running {
            Supply::Genset
        } else {
            Supply::Battery
        }
    }
}

/// Fault-injection and environment changes applied between ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantEvent {
    MainsOn,
    MainsOff,
    SetFuel(f64),
    InjectGensetFault,
    ClearGensetFault,
    SetAmbient(f64),
    HangController,
    ResumeController,
    SetTrimmerGain(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub params: PlantParams,
    pub state: PlantState,
}

impl Plant {
    pub fn new(params: PlantParams) -> Result<Self, PlantError> {
        params.validate()?;
        let state = PlantState {
            t_ms: 0,
            mains_on: true,
            genset: GensetState::Off,
            soc: params.initial_soc,
            fuel_l: params.initial_fuel_l.unwrap_or(params.fuel_capacity_l),
            room_temp_c: params.initial_room_temp_c.unwrap_or(params.ambient_c),
            controller_hung: false,
            bypass_active: false,
            ambient_c: params.ambient_c,
            trimmer_gain: params.trimmer_gain,
        };
        Ok(Self { params, state })
    }

    /// Applies `event` immediately. Returns false when it changed nothing.
    pub fn apply_event(&mut self, event: PlantEvent) -> bool {
        let before = self.state.clone();
        let st = &mut self.state;
        match event {
            PlantEvent::MainsOn => st.mains_on = true,
            PlantEvent::MainsOff => st.mains_on = false,
            PlantEvent::SetFuel(liters) => {
                let cap = self.params.fuel_capacity_l;
                let clamped = liters.clamp(0.0, cap);
                if clamped != liters {
                    log::warn!("SetFuel({liters}) clamped to {clamped} L (tank holds {cap} L)");
                }
                st.fuel_l = clamped;
                if clamped == 0.0 && st.genset == GensetState::Running {
                    st.genset = GensetState::Off;
                }
            }
            PlantEvent::InjectGensetFault => st.genset = GensetState::FaultInjected,
            PlantEvent::ClearGensetFault => {
                if st.genset == GensetState::FaultInjected {
                    st.genset = GensetState::Off;
                }
            }
            PlantEvent::SetAmbient(c) => st.ambient_c = c,
            PlantEvent::HangController => st.controller_hung = true,
            PlantEvent::ResumeController => st.controller_hung = false,
            PlantEvent::SetTrimmerGain(g) => st.trimmer_gain = g,
        }
        let changed = self.state != before;
        if !changed {
            log::debug!("{event:?} at t={} ms changed nothing", self.state.t_ms);
        }
        changed
    }

    /// Advances the plant by one tick and samples the controller's inputs.
    pub fn step(&mut self, genset_cmd: bool, dt_ms: u32) -> ControllerInputs {
        debug_assert!(dt_ms > 0);
        let p = &self.params;
        let st = &mut self.state;
        let dt_s = f64::from(dt_ms) / 1000.0;
        let dt_h = dt_s / 3600.0;
        let dt = u64::from(dt_ms);

        st.genset = match (st.genset, genset_cmd) {
            (GensetState::FaultInjected, _) => GensetState::FaultInjected,
            (GensetState::Off, true) if st.fuel_l > 0.0 => starting(dt, p.start_delay_ms()),
            (GensetState::Off, _) => GensetState::Off,
            (GensetState::Starting { elapsed_ms }, true) => {
                starting(elapsed_ms + dt, p.start_delay_ms())
            }
            (GensetState::Starting { .. }, false) => GensetState::Off,
            (GensetState::Running, true) => GensetState::Running,
            (GensetState::Running, false) => GensetState::Off,
        };
        if st.genset == GensetState::Running {
            st.fuel_l -= p.fuel_burn_lph * dt_h;
            if st.fuel_l <= 0.0 {
                st.fuel_l = 0.0;
                st.genset = GensetState::Off;
            }
        }

        let supply = st.supply();
        let discharging = supply == Supply::Battery;
        if discharging {
            st.soc -= p.site_load_w * dt_h / p.battery_capacity_wh;
        } else {
            st.soc += p.charge_power_w * dt_h / p.battery_capacity_wh;
        }
        st.soc = st.soc.clamp(0.0, 1.0);

        let net_w = p.heat_load_w - p.cooling_coeff_w_per_c * (st.room_temp_c - st.ambient_c);
        st.room_temp_c += net_w * dt_s / p.room_thermal_capacity_j_per_c;

        st.t_ms += dt;

        let volts = battery_terminal_voltage(st.soc, discharging, p);
        let adc_batt = adc_from_battery_voltage(volts, st.trimmer_gain);
        let temp_code = i32::from(adc_from_temperature(st.room_temp_c.max(0.0)).code())
            + dither_offset(st.t_ms / dt, p.temp_adc_dither_counts);
        let adc_temp = AdcSample::new(AdcChannel::Temp0, temp_code.clamp(0, ADC_MAX.into()) as u32)
            .expect("clamped to range");

        ControllerInputs {
            mains_fail: !st.mains_on,
            low_fuel: st.fuel_l <= p.low_fuel_threshold_l(),
            genset_supply_present: st.genset == GensetState::Running,
            adc_temp,
            adc_batt,
        }
    }
}

fn starting(elapsed_ms: u64, delay_ms: u64) -> GensetState {
    if elapsed_ms >= delay_ms {
        GensetState::Running
    } else {
        GensetState::Starting { elapsed_ms }
    }
}

fn dither_offset(tick: u64, peak: u16) -> i32 {
    let peak = i32::from(peak);
    match tick % 4 {
        1 => peak,
        3 => -peak,
        _ => 0,
    }
}

/// Piecewise-linear open-circuit voltage at `soc`.
pub fn open_circuit_voltage(soc: f64, table: &[(f64, f64)]) -> f64 {
    let soc = soc.clamp(0.0, 1.0);
    let upper = table
        .iter()
        .position(|(s, _)| *s >= soc)
        .unwrap_or(table.len() - 1);
    if upper == 0 {
        return table[0].1;
    }
    let (s0, v0) = table[upper - 1];
    let (s1, v1) = table[upper];
    v0 + (v1 - v0) * (soc - s0) / (s1 - s0)
}

/// Terminal voltage: OCV, less the I·R drop while the bank carries the site.
pub fn battery_terminal_voltage(soc: f64, discharging: bool, params: &PlantParams) -> f64 {
    let ocv = open_circuit_voltage(soc, &params.ocv_table);
    if discharging {
        let current = params.site_load_w / ocv;
        ocv - current * params.internal_resistance_ohm
    } else {
        ocv
    }
}

/// The trimmer and battery channel: `round(volts * 16 * gain)`, clamped.
pub fn adc_from_battery_voltage(volts: f64, trimmer_gain: f64) -> AdcSample {
    let counts = (volts * f64::from(BATTERY_COUNTS_PER_VOLT) * trimmer_gain).round();
    let code = counts.clamp(0.0, f64::from(ADC_MAX)) as u32;
    AdcSample::new(AdcChannel::Batt1, code).expect("clamped to range")
}

/// LM35 into a 10-bit, 5 V converter: `round(celsius * 1024 / 500)`, clamped.
pub fn adc_from_temperature(celsius: f64) -> AdcSample {
    let counts = (celsius * 1024.0 / 500.0).round();
    let code = counts.clamp(0.0, f64::from(ADC_MAX)) as u32;
    AdcSample::new(AdcChannel::Temp0, code).expect("clamped to range")
}
