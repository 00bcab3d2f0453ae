//! Closes the loop around the controller: scenario files, the external
//! watchdog, lockstep execution, trace output and persisted counters.

mod events;
mod persist;
mod scenario;
mod sim;
mod trace;
mod watchdog;

pub use events::{EventError, EventKind, EventValue, EVENT_KINDS};
pub use persist::{
    persist_counters, restore_counters, PersistedCounters, StateFile, DEFAULT_STATE_FILE,
};
pub use scenario::{
    load_scenario, parse_scenario, read_scenario_file, Scenario, ScenarioError, ScenarioEvent,
    DEFAULT_TICK_MS,
};
pub use sim::{
    run_scenario, run_scenario_opts, run_scenario_with, HarnessError, RunOptions, RunSummary,
    Simulation,
};
pub use trace::{trace_to_string, write_header, write_trace, TraceRow, TRACE_HEADER};
pub use watchdog::{watchdog_step, WatchdogState, DEFAULT_TIMEOUT_MS};
