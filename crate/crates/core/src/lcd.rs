//! 4x20 character LCD frames for the main monitoring screen and the
//! preset editor.
//!
//! Main screen layout:
//!
//! ```text
//! VTMS  BATT: 48.4V
//! TEMP:  35C  SRC:MAIN
//! STATUS: NORMAL
//!
//! ```
//!
//! With alarms, line 3 names the first active one in alarm-box order and
//! line 4 counts the rest.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::controller::{
    AlarmSet, ControllerMode, ControllerState, PresetField, Screen, ScreenCursor, Settings,
    SETTINGS_WINDOW,
};
use crate::conversions::{DisplayVoltage, TemperatureC};

pub const LCD_ROWS: usize = 4;
pub const LCD_COLS: usize = 20;

const ALARM_LABELS: [&str; 6] = [
    "MAINS FAIL",
    "LOW FUEL",
    "GEN ON LOAD",
    "HIGH TEMP",
    "GEN FAULT",
    "SERVICE HOURS",
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LcdFrame {
    lines: [String; LCD_ROWS],
}

impl LcdFrame {
    /// Pads each line with spaces to 20 columns and cuts anything longer.
    /// Characters outside printable ASCII are shown as `?`.
    pub fn from_lines(lines: [&str; LCD_ROWS]) -> Self {
        Self {
            lines: lines.map(fit_line),
        }
    }

    pub fn blank() -> Self {
        Self::from_lines(["", "", "", ""])
    }

    pub fn lines(&self) -> &[String; LCD_ROWS] {
        &self.lines
    }

    pub fn line(&self, row: usize) -> &str {
        &self.lines[row]
    }
}

fn fit_line(line: &str) -> String {
    let mut out: String = line
        .chars()
        .map(|c| if (' '..='~').contains(&c) { c } else { '?' })
        .take(LCD_COLS)
        .collect();
    while out.len() < LCD_COLS {
        out.push(' ');
    }
    out
}

impl fmt::Display for LcdFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, line) in self.lines.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            f.write_str(line)?;
        }
        Ok(())
    }
}

impl Serialize for LcdFrame {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.lines.serialize(serializer)
    }
}

pub fn source_tag(mode: ControllerMode) -> &'static str {
    match mode {
        ControllerMode::MainsPowered => "MAIN",
        ControllerMode::BatteryPhase => "BATT",
        ControllerMode::GensetPhase => "GEN",
        ControllerMode::GensetCranking => "CRNK",
        ControllerMode::GensetCooldown => "COOL",
    }
}

pub fn render_main(
    battery: DisplayVoltage,
    temperature: TemperatureC,
    mode: ControllerMode,
    alarms: AlarmSet,
) -> LcdFrame {
    let line1 = format!("VTMS  BATT: {:>4}V", battery);
    let line2 = format!("TEMP: {:>3}C  SRC:{:<4}", temperature, source_tag(mode));

    let active: Vec<&str> = alarms
        .as_array()
        .iter()
        .zip(ALARM_LABELS)
        .filter_map(|(on, label)| on.then_some(label))
        .collect();
    let (line3, line4) = match active.split_first() {
        None => ("STATUS: NORMAL".to_string(), String::new()),
        Some((first, rest)) => {
            let more = match rest.len() {
                0 => String::new(),
                1 => "+1 MORE ALARM".to_string(),
                n => format!("+{n} MORE ALARMS"),
            };
            (format!("ALM: {first}"), more)
        }
    };
    LcdFrame::from_lines([&line1, &line2, &line3, &line4])
}

pub fn render_settings(settings: &Settings, cursor: &ScreenCursor) -> LcdFrame {
    let count = PresetField::ALL.len();
    let position = format!("{}/{}", cursor.field + 1, count);
    let status = if cursor.pending.is_some() {
        format!("EDIT {position}")
    } else {
        position
    };
    let header = format!("SETTINGS{status:>12}");

    let rows: Vec<String> = (cursor.window_top..cursor.window_top + SETTINGS_WINDOW)
        .map(|index| match PresetField::ALL.get(index) {
            None => String::new(),
            Some(field) => {
                let selected = index == cursor.field;
                let editing = selected && cursor.pending.is_some();
                let value = match cursor.pending {
                    Some(v) if editing => v,
                    _ => field.get(settings),
                };
                format!(
                    "{}{:<11}{:>6}{}",
                    if selected { '>' } else { ' ' },
                    field.label(),
                    field.format_value(value),
                    if editing { '*' } else { ' ' },
                )
            }
        })
        .collect();
    LcdFrame::from_lines([&header, &rows[0], &rows[1], &rows[2]])
}

/// Whatever the controller is currently showing.
pub fn render_frame(state: &ControllerState) -> LcdFrame {
    match state.ui.screen {
        Screen::Main => render_main(
            state.last_battery,
            state.last_temperature,
            state.mode,
            state.last_alarms,
        ),
        Screen::Settings => render_settings(&state.settings, &state.ui),
    }
}
