//! Interpreter for the Origin programming language: a small procedure-oriented
//! scripting language for driving smartphone-style IoT components (sensors,
//! actuators, telephony, WiFi, HTTP).
//!
//! Programs run against a deterministic *virtual device* instead of real
//! hardware: a millisecond clock advanced only by `wait`, sensor readings
//! replayed from a trace file, simulated actuators, a WiFi credential table,
//! and an append-only event log capturing every externally visible effect.
//! Identical inputs produce byte-identical event logs.
//!
//! Pipeline: [`lexer::tokenize`] → [`parser::parse`] → [`interpreter::run`].
//! [`Session`] wraps the pipeline with persistent state for REPL-style use.

pub mod ast;
pub mod builtins;
pub mod device;
pub mod interpreter;
pub mod lexer;
pub mod net;
pub mod parser;
pub mod value;

pub use ast::{dump_ast, Program};
pub use builtins::BuiltinRegistry;
pub use device::{DeviceState, EventKind, EventRecord, SensorTrace};
pub use interpreter::{run, Environment, ExecutionBudget, RunOutcome, RuntimeError, RuntimeErrorKind};
pub use lexer::{dump_tokens, tokenize, LexError, Token, TokenKind};
pub use net::{MockTransport, RealTransport, Transport, TransportScript};
pub use parser::{parse, parse_source, ParseError};
pub use value::Value;

use thiserror::Error;

/// Any way an Origin source run can fail.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lex error at {0}")]
    Lex(#[from] LexError),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Runtime(#[from] RuntimeError),
}

/// Lex, parse, and run a source string in one step.
pub fn run_source(
    source: &str,
    device: &mut DeviceState,
    registry: &BuiltinRegistry,
    transport: &mut dyn Transport,
    budget: ExecutionBudget,
    console: Option<&mut dyn FnMut(&str)>,
) -> Result<RunOutcome, Error> {
    let program = parse_source(source)?;
    Ok(run(&program, device, registry, transport, budget, console)?)
}

/// A persistent interpreter session: one environment and one device shared
/// across multiple inputs, as used by the REPL and the Python bindings.
/// The virtual clock, actuator states, WiFi connectivity, and event log all
/// carry over from input to input.
pub struct Session {
    env: Environment,
    device: DeviceState,
    registry: BuiltinRegistry,
    transport: Box<dyn Transport>,
    budget: ExecutionBudget,
}

impl Session {
    pub fn new(device: DeviceState, transport: Box<dyn Transport>) -> Session {
        let mut env = Environment::global();
        env.push_scope(); // the session's persistent top-level scope
        Session {
            env,
            device,
            registry: BuiltinRegistry::standard(),
            transport,
            budget: ExecutionBudget::default(),
        }
    }

    pub fn with_budget(mut self, budget: ExecutionBudget) -> Session {
        self.budget = budget;
        self
    }

    /// Execute one input. Returns the value of the final statement when it is
    /// a bare expression, so callers can echo it. Statement budgets apply per
    /// input; on error the session stays usable and keeps prior state.
    pub fn eval(&mut self, source: &str) -> Result<Option<Value>, Error> {
        self.eval_with_console(source, None)
    }

    pub fn eval_with_console(
        &mut self,
        source: &str,
        console: Option<&mut dyn FnMut(&str)>,
    ) -> Result<Option<Value>, Error> {
        let program = parse_source(source)?;
        let depth = self.env.depth();
        let mut interp = interpreter::Interp {
            env: &mut self.env,
            device: &mut self.device,
            registry: &self.registry,
            transport: self.transport.as_mut(),
            budget: self.budget,
            statements_executed: 0,
            console,
        };
        let result = interp.eval_program(&program);
        // An error can abort mid-block; drop any scopes it left behind.
        self.env.truncate(depth);
        Ok(result?)
    }

    pub fn device(&self) -> &DeviceState {
        &self.device
    }

    pub fn device_mut(&mut self) -> &mut DeviceState {
        &mut self.device
    }

    /// Value of a session variable, if declared.
    pub fn get(&self, name: &str) -> Option<Value> {
        self.env.get(name)
    }
}
