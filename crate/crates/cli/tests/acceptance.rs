//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fail.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{self, Command};
use std::time::Instant;

use num_rational::Ratio;
use vtms_core::harness::{read_scenario_file, run_scenario, trace_to_string, Scenario, TraceRow};
use vtms_core::lcd::render_main;
use vtms_core::live::{Command as LiveCommand, LiveSim};
use vtms_core::{
    battery_voltage_from_adc, temperature_from_adc, AlarmSet, ControllerMode, Settings,
};

const TICK_MS: u64 = 100;
const PHASE_S: f64 = 21600.0;
const PHASE_TOLERANCE_S: f64 = 0.1;
const ALTERNATION_BUDGET_S: f64 = 30.0;
const ORACLE_BUDGET_S: f64 = 1.0;
const LOW_FUEL_L: f64 = 20.0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("conversion oracle", conversion_oracle),
        ("alternation", alternation),
        ("auto bypass", auto_bypass),
        ("genset fault", genset_fault),
        ("low fuel", low_fuel),
        ("temperature hysteresis", temperature_hysteresis),
        ("service hours", service_hours),
        ("determinism", determinism),
        ("batch/live equivalence", batch_live_equivalence),
        ("lcd goldens", lcd_goldens),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(panic_text(p.as_ref())));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        process::exit(1);
    }
}

fn panic_text(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<String>()
        .cloned()
        .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panicked".into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario_path(name: &str) -> PathBuf {
    workspace().join("scenarios").join(format!("{name}.toml"))
}

fn scenario(name: &str) -> Scenario {
    read_scenario_file(&scenario_path(name)).expect("bundled scenario")
}

fn rows(name: &str) -> Vec<TraceRow> {
    run_scenario(&scenario(name)).expect("scenario runs")
}

fn vtms(args: &[&std::ffi::OsStr]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_vtms"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "vtms {args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn vtms_run(name: &str, trace: &Path, state: Option<&Path>) -> Result<(), String> {
    let scenario = scenario_path(name);
    let mut args = vec![
        "run".as_ref(),
        scenario.as_os_str(),
        "--trace".as_ref(),
        trace.as_os_str(),
    ];
    if let Some(state) = state {
        args.extend(["--state".as_ref(), state.as_os_str()]);
    }
    vtms(&args)
}

/// `(t_ms, fields)` for each CSV row.
fn read_csv(path: &Path) -> Vec<(u64, Vec<String>)> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|line| {
            let fields: Vec<String> = line.split(',').map(str::to_string).collect();
            let t_ms = fields[0].replace('.', "").parse().unwrap();
            (t_ms, fields)
        })
        .collect()
}

fn conversion_oracle() -> Outcome {
    let started = Instant::now();
    let mut mismatches = 0;
    for code in 0..1024u32 {
        let volts = Ratio::new(code, 16u32);
        let whole = volts.floor();
        let tenths = ((volts - whole) * Ratio::from_integer(10)).floor();
        let got = battery_voltage_from_adc(code as u16).map_err(|e| e.to_string())?;
        if (u32::from(got.whole()), u32::from(got.tenths()))
            != (whole.to_integer(), tenths.to_integer())
        {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    ensure(mismatches == 0, || {
        format!("{mismatches} of 1024 codes differ")
    })?;
    ensure(elapsed < ORACLE_BUDGET_S, || format!("took {elapsed:.3} s"))?;
    Ok(format!(
        "1024/1024 codes exact, {:.1} ms (< {ORACLE_BUDGET_S} s)",
        elapsed * 1e3
    ))
}

fn alternation() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let trace = dir.path().join("day.csv");
    let started = Instant::now();
    vtms_run("mains-out-24h", &trace, None)?;
    let elapsed = started.elapsed().as_secs_f64();

    let mut phases: Vec<(&str, u64, u64)> = Vec::new();
    let rows = read_csv(&trace);
    ensure(rows.len() == 864_000, || format!("{} rows", rows.len()))?;
    for (t_ms, f) in &rows {
        let class = match f[1].as_str() {
            "BatteryPhase" => "Battery",
            "GensetCranking" | "GensetPhase" => "Genset",
            other => return Err(format!("unexpected mode {other} at {t_ms} ms")),
        };
        match phases.last_mut() {
            Some((c, _, last)) if *c == class => *last = *t_ms,
            _ => phases.push((class, *t_ms, *t_ms)),
        }
    }
    let order: Vec<&str> = phases.iter().map(|p| p.0).collect();
    ensure(order == ["Battery", "Genset", "Battery", "Genset"], || {
        format!("phases {order:?}")
    })?;
    let lengths: Vec<f64> = phases
        .iter()
        .map(|(_, first, last)| (last - first + TICK_MS) as f64 / 1000.0)
        .collect();
    for len in &lengths {
        ensure((len - PHASE_S).abs() <= PHASE_TOLERANCE_S, || {
            format!("phase lengths {lengths:?}")
        })?;
    }
    ensure(elapsed < ALTERNATION_BUDGET_S, || {
        format!("run took {elapsed:.1} s")
    })?;
    Ok(format!(
        "Battery/Genset/Battery/Genset = {lengths:?} s (±{PHASE_TOLERANCE_S} s), 864000 ticks in {elapsed:.2} s (< {ALTERNATION_BUDGET_S} s)"
    ))
}

fn auto_bypass() -> Outcome {
    let rows = rows("watchdog-bypass");
    let bypass = rows.iter().find(|r| r.bypass_active).map(|r| r.t_ms);
    let running = rows
        .iter()
        .find(|r| r.t_ms > 100_000 && r.genset_supply)
        .map(|r| r.t_ms);
    let within = |got: Option<u64>, want: u64| got.is_some_and(|t| t.abs_diff(want) <= TICK_MS);
    ensure(within(bypass, 102_100), || {
        format!("bypass first at {bypass:?} ms, want 102100")
    })?;
    ensure(within(running, 107_100), || {
        format!("genset running at {running:?} ms, want 107100")
    })?;
    Ok(format!(
        "bypass at {:.1} s (want 102.1), genset running at {:.1} s (want 107.1), ±1 tick",
        bypass.unwrap() as f64 / 1000.0,
        running.unwrap() as f64 / 1000.0
    ))
}

fn genset_fault() -> Outcome {
    let scn = scenario("genset-fault");
    let settings = scn.settings(&Settings::default());
    let rows = run_scenario(&scn).map_err(|e| e.to_string())?;
    let want_ms = u64::from(settings.crank_attempts_max * settings.crank_duration_s) * 1000;

    let cranking: Vec<usize> = (0..rows.len())
        .filter(|&i| rows[i].mode == ControllerMode::GensetCranking)
        .collect();
    let cranked_ms = cranking.len() as u64 * TICK_MS;
    ensure(cranked_ms == want_ms, || {
        format!("cranked {cranked_ms} ms, want {want_ms}")
    })?;
    let first = cranking[0];
    let last = *cranking.last().unwrap();
    ensure(last - first + 1 == cranking.len(), || {
        "cranking was not contiguous".into()
    })?;
    ensure(rows[..=last].iter().all(|r| !r.alarms.genset_fault), || {
        "fault raised early".into()
    })?;

    let after = &rows[last + 1];
    ensure(
        after.alarms.genset_fault && after.mode == ControllerMode::BatteryPhase,
        || {
            format!(
                "after cranking: {:?} fault={}",
                after.mode, after.alarms.genset_fault
            )
        },
    )?;
    let restored = rows
        .iter()
        .position(|r| !r.mains_fail)
        .ok_or("mains never returned")?;
    ensure(
        rows[last + 1..restored]
            .iter()
            .all(|r| r.alarms.genset_fault),
        || "fault cleared before mains returned".into(),
    )?;
    ensure(!rows[restored].alarms.genset_fault, || {
        "fault still set on mains".into()
    })?;
    Ok(format!(
        "{:.1} s cranking (want {:.1}), fault + BatteryPhase at {:.1} s, cleared at {:.1} s on MainsOn",
        cranked_ms as f64 / 1000.0,
        want_ms as f64 / 1000.0,
        after.t_ms as f64 / 1000.0,
        rows[restored].t_ms as f64 / 1000.0
    ))
}

fn low_fuel() -> Outcome {
    let rows = rows("low-fuel");
    let at_threshold = rows.iter().position(|r| r.fuel_l <= LOW_FUEL_L);
    let alarm = rows.iter().position(|r| r.alarms.low_fuel);
    ensure(at_threshold.is_some(), || "fuel never reached 20 L".into())?;
    ensure(alarm == at_threshold, || {
        format!("alarm at row {alarm:?}, fuel ≤ 20 L at row {at_threshold:?}")
    })?;
    let i = alarm.unwrap();
    ensure(rows[i].genset_supply, || {
        "genset not running at crossing".into()
    })?;
    Ok(format!(
        "alarm on first tick ≤ {LOW_FUEL_L} L: t={:.1} s, fuel {:.6} L (previous {:.6} L)",
        rows[i].t_ms as f64 / 1000.0,
        rows[i].fuel_l,
        rows[i - 1].fuel_l
    ))
}

fn hysteresis_run(name: &str) -> Result<String, String> {
    let settings = Settings::default();
    let rows = rows(name);
    let flips: Vec<usize> = (1..rows.len())
        .filter(|&i| rows[i].alarms.high_temperature != rows[i - 1].alarms.high_temperature)
        .collect();
    ensure(flips.len() == 2, || {
        format!("{name}: {} alarm transitions, want 2", flips.len())
    })?;
    let reading = |i: usize| i32::from(rows[i].temperature_c.celsius());
    let first_hot = (0..rows.len()).find(|&i| reading(i) >= settings.temp_alarm_on_c);
    ensure(
        rows[flips[0]].alarms.high_temperature && Some(flips[0]) == first_hot,
        || {
            format!(
                "{name}: on at row {}, first reading ≥ 40 at {first_hot:?}",
                flips[0]
            )
        },
    )?;
    let first_cool = (flips[0]..rows.len()).find(|&i| reading(i) <= settings.temp_alarm_off_c);
    ensure(Some(flips[1]) == first_cool, || {
        format!(
            "{name}: off at row {}, first reading ≤ 38 at {first_cool:?}",
            flips[1]
        )
    })?;
    let reversals = (2..rows.len())
        .filter(|&i| (reading(i) - reading(i - 1)) * (reading(i - 1) - reading(i - 2)) < 0)
        .count();
    Ok(format!(
        "on {:.1} s at {} C, off {:.1} s at {} C, {reversals} reading reversals",
        rows[flips[0]].t_ms as f64 / 1000.0,
        reading(flips[0]),
        rows[flips[1]].t_ms as f64 / 1000.0,
        reading(flips[1])
    ))
}

fn temperature_hysteresis() -> Outcome {
    let plain = hysteresis_run("temperature-ramp")?;
    let dither = hysteresis_run("temperature-ramp-dither")?;
    Ok(format!("ramp: {plain}; ±1 count dither: {dither}"))
}

fn service_hours() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let state = dir.path().join("vtms-state");
    let first = dir.path().join("first.csv");
    vtms_run("service-hours", &first, Some(&state))?;

    let rows = read_csv(&first);
    let supply = 5;
    let service = 17;
    let interval_ticks = 3600 * 1000 / TICK_MS as usize;
    let reached = rows
        .iter()
        .enumerate()
        .filter(|(_, (_, f))| f[supply] == "1")
        .nth(interval_ticks - 1)
        .map(|(i, _)| i)
        .ok_or("never accumulated 3600 s")?;
    let alarm = rows.iter().position(|(_, f)| f[service] == "1");
    ensure(alarm == Some(reached), || {
        format!("alarm at row {alarm:?}, 3600 s reached at row {reached}")
    })?;

    let second = dir.path().join("second.csv");
    vtms_run("service-restart", &second, Some(&state))?;
    let rows2 = read_csv(&second);
    ensure(rows2[0].1[service] == "1", || {
        "alarm lost across restart".into()
    })?;
    let cleared = rows2
        .iter()
        .position(|(_, f)| f[service] == "0")
        .ok_or("never cleared")?;
    ensure(rows2[cleared].0 == 10_100, || {
        format!("cleared at {} ms, want 10100", rows2[cleared].0)
    })?;
    ensure(
        rows2[cleared..].iter().all(|(_, f)| f[service] == "0"),
        || "re-asserted".into(),
    )?;

    let third = dir.path().join("third.csv");
    vtms_run("service-restart", &third, Some(&state))?;
    ensure(
        read_csv(&third).iter().all(|(_, f)| f[service] == "0"),
        || "reset not persisted".into(),
    )?;
    Ok(format!(
        "asserted at t={:.1} s on the 36000th running tick, survived restart, cleared at 10.1 s after ResetServiceHours and stayed clear",
        rows[reached].0 as f64 / 1000.0
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    vtms_run("golden", &a, None)?;
    vtms_run("golden", &b, None)?;
    let a = std::fs::read(a).map_err(|e| e.to_string())?;
    let b = std::fs::read(b).map_err(|e| e.to_string())?;
    ensure(a == b, || "two runs differ".into())?;
    let fixture =
        std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden.csv"))
            .map_err(|e| e.to_string())?;
    ensure(a == fixture, || {
        "run differs from the checked-in golden trace".into()
    })?;
    Ok(format!(
        "two runs byte-identical ({} bytes) and equal to tests/fixtures/golden.csv",
        a.len()
    ))
}

fn batch_live_equivalence() -> Outcome {
    let scn = scenario("golden");
    let batch = run_scenario(&scn).map_err(|e| e.to_string())?;

    let script = scn.events.clone();
    let mut quiet = scn.clone();
    quiet.events.clear();
    let mut live = LiveSim::new(&quiet, None, 60.0).map_err(|e| e.to_string())?;
    let mut pending = script.iter().peekable();
    for _ in 0..scn.tick_count() {
        while let Some(ev) = pending.next_if(|ev| ev.t_ms <= live.t_ms()) {
            let ack = live.apply_command(&LiveCommand::Event(ev.kind));
            ensure(ack.accepted, || {
                format!("rejected {}: {}", ev.kind, ack.detail)
            })?;
        }
        live.tick().map_err(|e| e.to_string())?;
    }
    let replayed = live.trace_slice(None, None);
    ensure(replayed.len() == batch.len(), || {
        format!("{} vs {} rows", replayed.len(), batch.len())
    })?;
    if let Some(i) = (0..batch.len()).find(|&i| batch[i] != replayed[i]) {
        return Err(format!("first difference at t={} ms", batch[i].t_ms));
    }
    ensure(
        trace_to_string(&batch) == trace_to_string(&replayed),
        || "CSV differs".into(),
    )?;
    Ok(format!(
        "{} rows identical with {} events sent as commands",
        batch.len(),
        script.len()
    ))
}

fn lcd_goldens() -> Outcome {
    let path = workspace().join("crates/core/tests/fixtures/lcd_goldens.txt");
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut cases: Vec<(Vec<String>, Vec<String>)> = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        if let Some(rest) = line.strip_prefix("case ") {
            cases.push((
                rest.split_whitespace().map(str::to_string).collect(),
                Vec::new(),
            ));
        } else {
            let body = line
                .strip_prefix('|')
                .and_then(|l| l.strip_suffix('|'))
                .ok_or("bad fixture line")?;
            cases
                .last_mut()
                .ok_or("fixture starts without a case")?
                .1
                .push(body.to_string());
        }
    }
    ensure(cases.len() == 12, || {
        format!("{} cases in fixture", cases.len())
    })?;
    for (tuple, want) in &cases {
        let bits: Vec<bool> = tuple[3].chars().map(|c| c == '1').collect();
        let frame = render_main(
            battery_voltage_from_adc(tuple[0].parse().unwrap()).unwrap(),
            temperature_from_adc(tuple[1].parse().unwrap()).unwrap(),
            ControllerMode::from_name(&tuple[2]).ok_or("bad mode")?,
            AlarmSet::from_array(bits.try_into().map_err(|_| "bad alarm bits")?),
        );
        ensure(frame.lines().as_slice() == want.as_slice(), || {
            format!("case {tuple:?}: got {:?}", frame.lines())
        })?;
    }
    Ok("12/12 frames byte-equal (4x20)".into())
}
