//! Inputs shared by the benchmarks.

use vtms_core::harness::{parse_scenario, Scenario};
use vtms_core::{AdcChannel, AdcSample, ControllerInputs};

/// Mains out for a whole day: four alternating six-hour phases.
pub fn mains_out_day() -> Scenario {
    parse_scenario(include_str!("../../../scenarios/mains-out-24h.toml"))
        .expect("bundled scenario parses")
}

/// Scan inputs for a steady mains-powered room.
pub fn steady_inputs() -> ControllerInputs {
    ControllerInputs {
        mains_fail: false,
        low_fuel: false,
        genset_supply_present: false,
        adc_temp: AdcSample::new(AdcChannel::Temp0, 72).expect("in range"),
        adc_batt: AdcSample::new(AdcChannel::Batt1, 820).expect("in range"),
    }
}
