use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ControllerState, PresetField};

/// Rows of presets visible at once on the settings screen.
pub const SETTINGS_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Button {
    Up,
    Down,
    Set,
    Back,
}

impl Button {
    pub const ALL: [Button; 4] = [Button::Up, Button::Down, Button::Set, Button::Back];

    pub fn name(self) -> &'static str {
        match self {
            Button::Up => "Up",
            Button::Down => "Down",
            Button::Set => "Set",
            Button::Back => "Back",
        }
    }
}

impl fmt::Display for Button {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Button {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Button::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown button {s:?}, expected one of Up, Down, Set, Back"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Screen {
    #[default]
    Main,
    Settings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ScreenCursor {
    pub screen: Screen,
    /// Index into [`PresetField::ALL`].
    pub field: usize,
    /// First preset shown in the settings window.
    pub window_top: usize,
    /// Value being edited, not yet committed.
    pub pending: Option<i64>,
}

impl ScreenCursor {
    pub fn selected(&self) -> PresetField {
        PresetField::ALL[self.field]
    }

    fn move_to(&mut self, field: usize) {
        self.field = field;
        if field < self.window_top {
            self.window_top = field;
        } else if field >= self.window_top + SETTINGS_WINDOW {
            self.window_top = field + 1 - SETTINGS_WINDOW;
        }
    }
}

/// Front-panel button handling.
///
/// Main screen: `Set` opens the settings list. Settings list: `Up`/`Down`
/// move the cursor, `Set` starts editing, `Back` returns to the main
/// screen. While editing: `Up`/`Down` step the value, pinned to what the
/// other presets allow; `Set` commits and moves to the next preset; `Back`
/// drops the edit.
pub fn apply_button(state: &mut ControllerState, button: Button) {
    let before = state.ui;
    let count = PresetField::ALL.len();
    let ui = &mut state.ui;

    match (ui.screen, ui.pending, button) {
        (Screen::Main, _, Button::Set) => {
            *ui = ScreenCursor {
                screen: Screen::Settings,
                ..ScreenCursor::default()
            };
        }
        (Screen::Main, _, _) => {}
        (Screen::Settings, None, Button::Up) => ui.move_to((ui.field + count - 1) % count),
        (Screen::Settings, None, Button::Down) => ui.move_to((ui.field + 1) % count),
        (Screen::Settings, None, Button::Set) => {
            ui.pending = Some(ui.selected().get(&state.settings));
        }
        (Screen::Settings, None, Button::Back) => *ui = ScreenCursor::default(),
        (Screen::Settings, Some(value), Button::Up | Button::Down) => {
            let field = ui.selected();
            let delta = if button == Button::Up {
                field.step()
            } else {
                -field.step()
            };
            let (lo, hi) = field.legal_range(&state.settings);
            ui.pending = Some((value + delta).clamp(lo, hi));
        }
        (Screen::Settings, Some(value), Button::Set) => {
            let field = ui.selected();
            let (lo, hi) = field.legal_range(&state.settings);
            if (lo..=hi).contains(&value) {
                field.set(&mut state.settings, value);
                debug_assert!(state.settings.validate().is_ok());
                ui.pending = None;
                ui.move_to((ui.field + 1) % count);
            } else {
                ui.pending = Some(value.clamp(lo, hi));
            }
        }
        (Screen::Settings, Some(_), Button::Back) => ui.pending = None,
    }

    if state.ui != before {
        state.redraw_pending = true;
    }
}
