//! `origin` — run Origin programs against the virtual device, inspect tokens
//! and syntax trees, or start an interactive session.
//!
//! Exit codes: 0 success, 1 runtime error, 2 lex/parse error, 3 budget
//! exceeded, 64 usage error.

mod repl;

use std::fs;
use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use origin_core::device::{load_wifi_config, DeviceState, SensorTrace};
use origin_core::interpreter::{ExecutionBudget, DEFAULT_MAX_STATEMENTS};
use origin_core::net::{MockTransport, RealTransport, Transport, TransportScript};
use origin_core::{dump_ast, dump_tokens, BuiltinRegistry, Error, RuntimeErrorKind};

const EXIT_OK: u8 = 0;
const EXIT_RUNTIME: u8 = 1;
const EXIT_SYNTAX: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "origin", version, about = "Origin language interpreter with a virtual IoT device")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program file
    Run(RunArgs),
    /// Dump the token stream of a program file
    Tokens { path: PathBuf },
    /// Dump the syntax tree of a program file as JSON
    Ast { path: PathBuf },
    /// Interactive session against a persistent virtual device
    Repl,
}

#[derive(Args)]
struct RunArgs {
    /// Program file (.origin)
    program: PathBuf,
    /// Sensor trace file (JSONL: {"t":0,"sensor":"accelerometerX","value":0.5})
    #[arg(long)]
    trace: Option<PathBuf>,
    /// WiFi config file ({"networks":[{"ssid":"...","password":"..."}]})
    #[arg(long)]
    wifi: Option<PathBuf>,
    /// Transport: "mock", "mock:script.json", or "real"
    #[arg(long, default_value = "mock")]
    transport: String,
    /// Write the full event log here as JSONL ("-" for standard output)
    #[arg(long, value_name = "PATH")]
    events_out: Option<String>,
    /// Statement budget (default 1000000; ORIGIN_MAX_STEPS overrides the default)
    #[arg(long)]
    max_steps: Option<u64>,
    /// Virtual-time budget in milliseconds
    #[arg(long)]
    max_virtual_ms: Option<u64>,
    /// Sleep for real during wait() calls (event log is unaffected)
    #[arg(long)]
    realtime: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit codes collide with the syntax-error code.
            let _ = e.print();
            return ExitCode::from(if e.exit_code() == 0 { EXIT_OK } else { EXIT_USAGE });
        }
    };
    let code = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Tokens { path } => cmd_tokens(&path),
        Command::Ast { path } => cmd_ast(&path),
        Command::Repl => repl::cmd_repl(),
    };
    ExitCode::from(code)
}

fn usage_error(message: impl std::fmt::Display) -> u8 {
    eprintln!("origin: error: {message}");
    EXIT_USAGE
}

fn read_file(path: &std::path::Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| usage_error(format_args!("cannot read {}: {e}", path.display())))
}

/// Default statement budget: ORIGIN_MAX_STEPS when set, else one million.
fn default_max_steps() -> Result<u64, u8> {
    match std::env::var("ORIGIN_MAX_STEPS") {
        Err(_) => Ok(DEFAULT_MAX_STATEMENTS),
        Ok(raw) => raw
            .parse()
            .map_err(|_| usage_error(format_args!("invalid ORIGIN_MAX_STEPS value \"{raw}\""))),
    }
}

fn build_transport(spec: &str) -> Result<Box<dyn Transport>, u8> {
    if spec == "mock" {
        return Ok(Box::new(MockTransport::default()));
    }
    if let Some(script_path) = spec.strip_prefix("mock:") {
        let text = read_file(std::path::Path::new(script_path))?;
        let script = TransportScript::parse(&text)
            .map_err(|e| usage_error(format_args!("{script_path}: {e}")))?;
        return Ok(Box::new(MockTransport::new(script)));
    }
    if spec == "real" {
        return Ok(Box::new(RealTransport::with_timeout(Duration::from_secs(10))));
    }
    Err(usage_error(format_args!(
        "invalid --transport \"{spec}\" (expected mock, mock:script.json, or real)"
    )))
}

fn report(error: &Error) -> u8 {
    match error {
        Error::Lex(e) => {
            eprintln!("origin: lex error at line {}: {}", e.line, e.message);
            EXIT_SYNTAX
        }
        Error::Parse(e) => {
            eprintln!("origin: parse error at line {}: {}", e.line, e.message);
            EXIT_SYNTAX
        }
        Error::Runtime(e) => {
            eprintln!("origin: {} at line {}: {}", e.kind.label(), e.line, e.message);
            if e.kind == RuntimeErrorKind::BudgetExceeded {
                EXIT_BUDGET
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn cmd_run(args: &RunArgs) -> u8 {
    let source = match read_file(&args.program) {
        Ok(s) => s,
        Err(code) => return code,
    };

    let mut device = DeviceState::new();
    if let Some(path) = &args.trace {
        let text = match read_file(path) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match SensorTrace::parse_jsonl(&text) {
            Ok(trace) => device.set_trace(trace),
            Err(e) => return usage_error(format_args!("{}: {e}", path.display())),
        }
    }
    if let Some(path) = &args.wifi {
        let text = match read_file(path) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match load_wifi_config(&text) {
            Ok(networks) => device.set_known_networks(networks),
            Err(e) => return usage_error(format_args!("{}: {e}", path.display())),
        }
    }
    device.set_realtime(args.realtime);

    let mut transport = match build_transport(&args.transport) {
        Ok(t) => t,
        Err(code) => return code,
    };

    let max_statements = match args.max_steps {
        Some(n) => n,
        None => match default_max_steps() {
            Ok(n) => n,
            Err(code) => return code,
        },
    };
    let budget = ExecutionBudget {
        max_statements,
        max_virtual_ms: args.max_virtual_ms,
    };

    let registry = BuiltinRegistry::standard();
    let mut print_console = |text: &str| println!("{text}");
    let result = origin_core::run_source(
        &source,
        &mut device,
        &registry,
        transport.as_mut(),
        budget,
        Some(&mut print_console),
    );

    let code = match &result {
        Ok(_) => EXIT_OK,
        Err(e) => report(e),
    };

    // The event log is written even when the run stopped early, so budget
    // runs and failed runs can still be inspected.
    if let Some(target) = &args.events_out {
        let jsonl = device.events_jsonl();
        if target == "-" {
            print!("{jsonl}");
            let _ = std::io::stdout().flush();
        } else if let Err(e) = fs::write(target, &jsonl) {
            return usage_error(format_args!("cannot write {target}: {e}"));
        }
    }
    code
}

fn cmd_tokens(path: &std::path::Path) -> u8 {
    let source = match read_file(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match origin_core::tokenize(&source) {
        Ok(tokens) => {
            print!("{}", dump_tokens(&tokens));
            EXIT_OK
        }
        Err(e) => report(&Error::Lex(e)),
    }
}

fn cmd_ast(path: &std::path::Path) -> u8 {
    let source = match read_file(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match origin_core::parse_source(&source) {
        Ok(program) => {
            println!("{}", dump_ast(&program));
            EXIT_OK
        }
        Err(e) => report(&e),
    }
}

/// Shared by the run and repl commands so stdout ordering is consistent.
pub(crate) fn stdin_is_interactive() -> bool {
    std::io::stdin().is_terminal() && std::io::stdout().is_terminal()
}
