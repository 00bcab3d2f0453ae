use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vtms_cli::run::{self, RunArgs};
use vtms_cli::server::{ServeConfig, Server, DEFAULT_PORT, DEFAULT_STREAM_HZ};
use vtms_cli::{selftest, CliError, EXIT_INVARIANT, EXIT_OK, EXIT_VALIDATION};
use vtms_core::harness::{read_scenario_file, DEFAULT_STATE_FILE};
use vtms_core::live::{default_scenario, DEFAULT_TIME_SCALE};

/// BTS room voltage/temperature monitor simulator.
#[derive(Debug, Parser)]
#[command(name = "vtms", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run a scenario to completion and write its CSV trace.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// Stop after this many simulated seconds.
        #[arg(long, value_name = "S")]
        until: Option<f64>,
        /// Carry engine hours and presets in this file.
        #[arg(long, value_name = "FILE")]
        state: Option<PathBuf>,
    },
    /// Exhaustive conversion oracle and invariant checks.
    Selftest,
    /// Run the simulation in scaled real time behind an HTTP API.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Simulated seconds per wall second.
        #[arg(long, default_value_t = DEFAULT_TIME_SCALE)]
        time_scale: f64,
        #[arg(long, value_name = "FILE")]
        scenario: Option<PathBuf>,
        #[arg(long, value_name = "FILE", default_value = DEFAULT_STATE_FILE)]
        state: PathBuf,
        /// Default frames per wall second on /api/stream.
        #[arg(long, default_value_t = DEFAULT_STREAM_HZ)]
        stream_hz: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_VALIDATION as u8
            } else {
                EXIT_OK as u8
            });
        }
    };
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("vtms: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn dispatch(command: Cmd) -> Result<i32, CliError> {
    match command {
        Cmd::Run {
            scenario,
            trace,
            until,
            state,
        } => {
            run::execute(&RunArgs {
                scenario,
                trace,
                until_s: until,
                state_file: state,
            })?;
            Ok(EXIT_OK)
        }
        Cmd::Selftest => {
            let checks = selftest::run_all();
            for check in &checks {
                println!("{check}");
            }
            let failed = checks.iter().filter(|c| c.failure.is_some()).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(if failed == 0 { EXIT_OK } else { EXIT_INVARIANT })
        }
        Cmd::Serve {
            port,
            host,
            time_scale,
            scenario,
            state,
            stream_hz,
        } => {
            let scenario = match scenario {
                Some(path) => read_scenario_file(&path)?,
                None => default_scenario(),
            };
            let config = ServeConfig {
                host,
                port,
                scenario,
                state_file: Some(state),
                time_scale,
                stream_hz,
            };
            serve(config)?;
            Ok(EXIT_OK)
        }
    }
}

fn serve(config: ServeConfig) -> Result<(), CliError> {
    use vtms_cli::server::ServeError;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    runtime
        .block_on(async {
            let server = Server::bind(config).await?;
            log::info!("listening on http://{}", server.local_addr()?);
            server
                .run(async {
                    let _ = tokio::signal::ctrl_c().await;
                    log::info!("shutting down");
                })
                .await
        })
        .map_err(|e| match e {
            ServeError::Harness(e) => e.into(),
            ServeError::Config(m) => CliError::Validation(m),
            e => CliError::Io(e.to_string()),
        })
}
