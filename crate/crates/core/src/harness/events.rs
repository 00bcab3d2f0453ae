use std::fmt;

use thiserror::Error;

use crate::controller::Button;
use crate::plant::PlantEvent;

/// Every event kind a scenario file may name.
pub const EVENT_KINDS: [&str; 11] = [
    "MainsOn",
    "MainsOff",
    "SetFuel",
    "InjectGensetFault",
    "ClearGensetFault",
    "SetAmbient",
    "HangController",
    "ResumeController",
    "SetTrimmerGain",
    "PressButton",
    "ResetServiceHours",
];

/// Untyped payload as it arrives from a file or the network.
#[derive(Debug, Clone, PartialEq)]
pub enum EventValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for EventValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventValue::Number(n) => write!(f, "{n}"),
            EventValue::Text(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("unknown kind {kind:?}; valid kinds: {valid}")]
    UnknownKind { kind: String, valid: String },
    #[error("{kind} requires a {expected} value")]
    MissingValue {
        kind: String,
        expected: &'static str,
    },
    #[error("{kind} takes no value")]
    UnexpectedValue { kind: String },
    #[error("{0}")]
    BadValue(String),
}

impl EventError {
    pub(crate) fn unknown(kind: &str, valid: &[&str]) -> Self {
        EventError::UnknownKind {
            kind: kind.to_string(),
            valid: valid.join(", "),
        }
    }
}

/// Something applied to the simulation at a tick boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Plant(PlantEvent),
    PressButton(Button),
    ResetServiceHours,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Plant(p) => match p {
                PlantEvent::MainsOn => "MainsOn",
                PlantEvent::MainsOff => "MainsOff",
                PlantEvent::SetFuel(_) => "SetFuel",
                PlantEvent::InjectGensetFault => "InjectGensetFault",
                PlantEvent::ClearGensetFault => "ClearGensetFault",
                PlantEvent::SetAmbient(_) => "SetAmbient",
                PlantEvent::HangController => "HangController",
                PlantEvent::ResumeController => "ResumeController",
                PlantEvent::SetTrimmerGain(_) => "SetTrimmerGain",
            },
            EventKind::PressButton(_) => "PressButton",
            EventKind::ResetServiceHours => "ResetServiceHours",
        }
    }

    pub fn value(&self) -> Option<EventValue> {
        match self {
            EventKind::Plant(PlantEvent::SetFuel(v))
            | EventKind::Plant(PlantEvent::SetAmbient(v))
            | EventKind::Plant(PlantEvent::SetTrimmerGain(v)) => Some(EventValue::Number(*v)),
            EventKind::PressButton(b) => Some(EventValue::Text(b.name().to_string())),
            _ => None,
        }
    }

    /// Builds and validates an event from its wire form.
    pub fn parse(kind: &str, value: Option<EventValue>) -> Result<Self, EventError> {
        let number = |expected_positive: bool, what: &str| -> Result<f64, EventError> {
            match &value {
                Some(EventValue::Number(n)) if n.is_finite() => {
                    if expected_positive && *n <= 0.0 {
                        Err(EventError::BadValue(format!("{what} must be > 0")))
                    } else {
                        Ok(*n)
                    }
                }
                Some(EventValue::Number(_)) => {
                    Err(EventError::BadValue(format!("{what} must be finite")))
                }
                _ => Err(EventError::MissingValue {
                    kind: kind.to_string(),
                    expected: "numeric",
                }),
            }
        };
        let no_value = |event: EventKind| -> Result<EventKind, EventError> {
            match value {
                None => Ok(event),
                Some(_) => Err(EventError::UnexpectedValue {
                    kind: kind.to_string(),
                }),
            }
        };

        match kind {
            "MainsOn" => no_value(EventKind::Plant(PlantEvent::MainsOn)),
            "MainsOff" => no_value(EventKind::Plant(PlantEvent::MainsOff)),
            "InjectGensetFault" => no_value(EventKind::Plant(PlantEvent::InjectGensetFault)),
            "ClearGensetFault" => no_value(EventKind::Plant(PlantEvent::ClearGensetFault)),
            "HangController" => no_value(EventKind::Plant(PlantEvent::HangController)),
            "ResumeController" => no_value(EventKind::Plant(PlantEvent::ResumeController)),
            "ResetServiceHours" => no_value(EventKind::ResetServiceHours),
            "SetFuel" => {
                let liters = number(false, "fuel")?;
                if liters < 0.0 {
                    return Err(EventError::BadValue("fuel must be ≥ 0".into()));
                }
                Ok(EventKind::Plant(PlantEvent::SetFuel(liters)))
            }
            "SetAmbient" => Ok(EventKind::Plant(PlantEvent::SetAmbient(number(
                false, "ambient",
            )?))),
            "SetTrimmerGain" => Ok(EventKind::Plant(PlantEvent::SetTrimmerGain(number(
                true,
                "trimmer gain",
            )?))),
            "PressButton" => match &value {
                Some(EventValue::Text(b)) => b
                    .parse::<Button>()
                    .map(EventKind::PressButton)
                    .map_err(EventError::BadValue),
                _ => Err(EventError::MissingValue {
                    kind: kind.to_string(),
                    expected: "button name",
                }),
            },
            other => Err(EventError::unknown(other, &EVENT_KINDS)),
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{}({v})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}
