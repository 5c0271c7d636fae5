//! Python bindings: tokenize and parse Origin source, run programs against
//! the virtual device, and drive a persistent interpreter session.
//!
//! Lex/parse and input-format problems raise `ValueError`; interpreter
//! failures (including budget exhaustion) raise `RuntimeError`.

use pyo3::conversion::IntoPyObjectExt;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use origin_core::device::{load_wifi_config, DeviceState, FormatError, SensorTrace};
use origin_core::interpreter::ExecutionBudget;
use origin_core::net::{MockTransport, RealTransport, TransportScript};
use origin_core::value::Value;
use origin_core::{BuiltinRegistry, Error};

fn to_py_err(error: Error) -> PyErr {
    match &error {
        Error::Lex(e) => PyValueError::new_err(format!("lex error at {e}")),
        Error::Parse(e) => PyValueError::new_err(format!("parse error at {e}")),
        Error::Runtime(_) => PyRuntimeError::new_err(error.to_string()),
    }
}

fn format_err(context: &str, error: FormatError) -> PyErr {
    PyValueError::new_err(format!("{context}: {error}"))
}

fn value_to_py(py: Python<'_>, value: &Value) -> PyResult<Py<PyAny>> {
    match value {
        Value::Number(n) => n.into_py_any(py),
        Value::Text(s) => s.into_py_any(py),
        Value::Null => Ok(py.None()),
        Value::Array(elements) => {
            let list = PyList::empty(py);
            for element in elements.borrow().iter() {
                list.append(value_to_py(py, element)?)?;
            }
            list.into_py_any(py)
        }
        Value::Json(object) => {
            let dict = PyDict::new(py);
            for (key, element) in object.borrow().entries() {
                dict.set_item(key, value_to_py(py, element)?)?;
            }
            dict.into_py_any(py)
        }
        Value::Component(c) => c.name().into_py_any(py),
        Value::Sensor(s) => s.name().into_py_any(py),
        Value::Request(_) => value.display().into_py_any(py),
    }
}

/// One lexical token with its source position.
#[pyclass(frozen)]
struct Token {
    #[pyo3(get)]
    kind: String,
    #[pyo3(get)]
    lexeme: String,
    #[pyo3(get)]
    line: u32,
    #[pyo3(get)]
    column: u32,
}

#[pymethods]
impl Token {
    fn __repr__(&self) -> String {
        format!(
            "Token({}:{} {} {:?})",
            self.line, self.column, self.kind, self.lexeme
        )
    }
}

/// Tokenize Origin source text into a list of tokens.
#[pyfunction]
fn tokenize(source: &str) -> PyResult<Vec<Token>> {
    let tokens = origin_core::tokenize(source).map_err(|e| to_py_err(Error::Lex(e)))?;
    Ok(tokens
        .into_iter()
        .map(|t| Token {
            kind: t.kind.name().to_string(),
            lexeme: t.lexeme,
            line: t.line,
            column: t.column,
        })
        .collect())
}

/// Parse Origin source text and return the syntax tree as a JSON string.
#[pyfunction]
fn ast_json(source: &str) -> PyResult<String> {
    let program = origin_core::parse_source(source).map_err(to_py_err)?;
    Ok(origin_core::dump_ast(&program))
}

fn build_device(
    trace: Option<&str>,
    wifi: Option<&str>,
) -> PyResult<DeviceState> {
    let mut device = DeviceState::new();
    if let Some(text) = trace {
        let trace = SensorTrace::parse_jsonl(text).map_err(|e| format_err("trace", e))?;
        device.set_trace(trace);
    }
    if let Some(text) = wifi {
        let networks = load_wifi_config(text).map_err(|e| format_err("wifi config", e))?;
        device.set_known_networks(networks);
    }
    Ok(device)
}

fn build_budget(max_steps: Option<u64>, max_virtual_ms: Option<u64>) -> ExecutionBudget {
    ExecutionBudget {
        max_statements: max_steps.unwrap_or(origin_core::interpreter::DEFAULT_MAX_STATEMENTS),
        max_virtual_ms,
    }
}

/// Everything a completed run reports.
#[pyclass(frozen)]
struct RunReport {
    /// Event log, one JSON object per line.
    #[pyo3(get)]
    events_jsonl: String,
    #[pyo3(get)]
    final_time_ms: u64,
    #[pyo3(get)]
    statements_executed: u64,
    /// Console lines in emission order.
    #[pyo3(get)]
    console: Vec<String>,
    /// Final top-level variables, name -> Python value.
    #[pyo3(get)]
    variables: Py<PyDict>,
    /// Requests the mock transport recorded: (method, url, body-or-None).
    #[pyo3(get)]
    requests: Py<PyList>,
}

/// Run a program against a fresh virtual device and return a report.
///
/// `trace`, `wifi`, and `transport_script` take the file contents (not
/// paths) in the same formats the CLI accepts. With `real_transport=True`
/// the request list in the report stays empty.
#[pyfunction]
#[pyo3(signature = (source, *, trace=None, wifi=None, transport_script=None,
                    max_steps=None, max_virtual_ms=None, real_transport=false))]
#[allow(clippy::too_many_arguments)]
fn run_program(
    py: Python<'_>,
    source: &str,
    trace: Option<&str>,
    wifi: Option<&str>,
    transport_script: Option<&str>,
    max_steps: Option<u64>,
    max_virtual_ms: Option<u64>,
    real_transport: bool,
) -> PyResult<RunReport> {
    let mut device = build_device(trace, wifi)?;
    let registry = BuiltinRegistry::standard();
    let script = match transport_script {
        Some(text) => TransportScript::parse(text).map_err(|e| format_err("transport script", e))?,
        None => TransportScript::empty(),
    };
    let mut mock = MockTransport::new(script);
    let mut real = RealTransport::new();
    let transport: &mut dyn origin_core::Transport = if real_transport {
        &mut real
    } else {
        &mut mock
    };

    let mut console = Vec::new();
    let mut sink = |text: &str| console.push(text.to_string());
    let outcome = origin_core::run_source(
        source,
        &mut device,
        &registry,
        transport,
        build_budget(max_steps, max_virtual_ms),
        Some(&mut sink),
    )
    .map_err(to_py_err)?;

    let variables = PyDict::new(py);
    let mut names: Vec<&String> = outcome.final_env.keys().collect();
    names.sort();
    for name in names {
        variables.set_item(name, value_to_py(py, &outcome.final_env[name])?)?;
    }

    let requests = PyList::empty(py);
    for call in mock.recorded_calls() {
        let body = call.body.as_ref().map(|b| String::from_utf8_lossy(b).into_owned());
        requests.append((call.method.as_str(), call.url.as_str(), body))?;
    }

    Ok(RunReport {
        events_jsonl: device.events_jsonl(),
        final_time_ms: outcome.final_time_ms,
        statements_executed: outcome.statements_executed,
        console,
        variables: variables.unbind(),
        requests: requests.unbind(),
    })
}

/// A persistent interpreter session: variables, the virtual clock, actuator
/// states, and the event log survive across `eval` calls.
#[pyclass(unsendable)]
struct Session {
    inner: origin_core::Session,
}

#[pymethods]
impl Session {
    #[new]
    #[pyo3(signature = (*, trace=None, wifi=None, transport_script=None, max_steps=None))]
    fn new(
        trace: Option<&str>,
        wifi: Option<&str>,
        transport_script: Option<&str>,
        max_steps: Option<u64>,
    ) -> PyResult<Session> {
        let device = build_device(trace, wifi)?;
        let script = match transport_script {
            Some(text) => {
                TransportScript::parse(text).map_err(|e| format_err("transport script", e))?
            }
            None => TransportScript::empty(),
        };
        let session = origin_core::Session::new(device, Box::new(MockTransport::new(script)))
            .with_budget(build_budget(max_steps, None));
        Ok(Session { inner: session })
    }

    /// Execute one input; returns the value of a trailing bare expression
    /// (converted to a Python value) or None.
    fn eval(&mut self, py: Python<'_>, source: &str) -> PyResult<Py<PyAny>> {
        match self.inner.eval(source).map_err(to_py_err)? {
            Some(value) => value_to_py(py, &value),
            None => Ok(py.None()),
        }
    }

    /// Look up a session variable.
    fn get(&self, py: Python<'_>, name: &str) -> PyResult<Py<PyAny>> {
        match self.inner.get(name) {
            Some(value) => value_to_py(py, &value),
            None => Ok(py.None()),
        }
    }

    fn events_jsonl(&self) -> String {
        self.inner.device().events_jsonl()
    }

    fn now_ms(&self) -> u64 {
        self.inner.device().now_ms()
    }
}

#[pymodule]
fn origin_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(ast_json, m)?)?;
    m.add_function(wrap_pyfunction!(run_program, m)?)?;
    m.add_class::<Token>()?;
    m.add_class::<RunReport>()?;
    m.add_class::<Session>()?;
    Ok(())
}
