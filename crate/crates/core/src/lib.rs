//! Simulator of a BTS-room voltage/temperature monitoring controller.
//!
//! The controller firmware logic ([`controller`]) runs in lockstep with a
//! simulated site ([`plant`]) inside a deterministic harness ([`harness`]).
//! Everything the controller sees passes through integer ADC codes
//! ([`conversions`]) and boolean relay contacts, as on the real board.
//! [`lcd`] renders the 4x20 display and [`live`] drives the same engine in
//! scaled real time for the operator service.

pub mod controller;
pub mod conversions;
pub mod harness;
pub mod lcd;
pub mod live;
pub mod plant;

pub use controller::{
    AlarmSet, Button, ControllerInputs, ControllerMode, ControllerOutputs, ControllerState,
    Settings,
};
pub use conversions::{
    battery_voltage_from_adc, temperature_from_adc, AdcChannel, AdcSample, DisplayVoltage,
    TemperatureC,
};
pub use harness::{run_scenario, Scenario, Simulation, TraceRow};
pub use lcd::LcdFrame;
pub use plant::{Plant, PlantParams, PlantState};
