use std::path::Path;

use vtms_core::controller::{Screen, ScreenCursor};
use vtms_core::lcd::{render_main, render_settings, LCD_ROWS};
use vtms_core::{
    battery_voltage_from_adc, temperature_from_adc, AlarmSet, ControllerMode, Settings,
};

struct Golden {
    battery_code: u16,
    temperature_code: u16,
    mode: ControllerMode,
    alarms: AlarmSet,
    lines: Vec<String>,
}

fn load_goldens() -> Vec<Golden> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/lcd_goldens.txt");
    let text = std::fs::read_to_string(path).unwrap();
    let mut goldens: Vec<Golden> = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        if let Some(rest) = line.strip_prefix("case ") {
            let f: Vec<&str> = rest.split_whitespace().collect();
            let bits: Vec<bool> = f[3].chars().map(|c| c == '1').collect();
            goldens.push(Golden {
                battery_code: f[0].parse().unwrap(),
                temperature_code: f[1].parse().unwrap(),
                mode: ControllerMode::from_name(f[2]).unwrap(),
                alarms: AlarmSet::from_array(bits.try_into().unwrap()),
                lines: Vec::new(),
            });
        } else {
            let body = line
                .strip_prefix('|')
                .and_then(|l| l.strip_suffix('|'))
                .unwrap();
            goldens.last_mut().unwrap().lines.push(body.to_string());
        }
    }
    goldens
}

#[test]
fn twelve_main_screen_goldens() {
    let goldens = load_goldens();
    assert_eq!(goldens.len(), 12);
    for g in goldens {
        assert_eq!(g.lines.len(), LCD_ROWS);
        let frame = render_main(
            battery_voltage_from_adc(g.battery_code).unwrap(),
            temperature_from_adc(g.temperature_code).unwrap(),
            g.mode,
            g.alarms,
        );
        assert_eq!(
            frame.lines().as_slice(),
            g.lines.as_slice(),
            "case {} {}",
            g.battery_code,
            g.temperature_code
        );
    }
}

#[test]
fn settings_screen_mid_menu() {
    let cursor = ScreenCursor {
        screen: Screen::Settings,
        field: 4,
        window_top: 3,
        pending: Some(25200),
    };
    let frame = render_settings(&Settings::default(), &cursor);
    assert_eq!(
        frame.to_string(),
        "SETTINGS   EDIT 5/10\n BATT CUTOFF 43.0V  \n>BATT PHASE     7H* \n GEN PHASE      6H  "
    );
}
