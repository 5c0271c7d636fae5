//! Registry and semantics of every Origin builtin function: the bridge from
//! the language to the virtual device and the network transport.
//!
//! A call expression resolves to a builtin before any environment lookup, so
//! these names cannot be called as anything else. Handlers run synchronously
//! on the interpreter's thread and keep no state outside the device.

use crate::device::EventKind;
use crate::interpreter::{Interp, RuntimeError, RuntimeErrorKind};
use crate::net::{Method, TransportRequest};
use crate::value::{JsonObject, RequestData, Value};

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

type Handler = fn(&mut Interp<'_, '_>, Vec<Value>, u32) -> Result<Value, RuntimeError>;

/// Accepted argument counts for one builtin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exact(usize),
    OneOrTwo,
    Even,
}

impl Arity {
    pub fn accepts(self, count: usize) -> bool {
        match self {
            Arity::Exact(n) => count == n,
            Arity::OneOrTwo => count == 1 || count == 2,
            Arity::Even => count.is_multiple_of(2),
        }
    }

    pub fn describe(self) -> String {
        match self {
            Arity::Exact(1) => "1 argument".to_string(),
            Arity::Exact(n) => format!("{n} arguments"),
            Arity::OneOrTwo => "1 or 2 arguments".to_string(),
            Arity::Even => "an even number of arguments".to_string(),
        }
    }
}

pub struct Builtin {
    pub name: &'static str,
    pub arity: Arity,
    pub handler: Handler,
}

/// Name → builtin table.
pub struct BuiltinRegistry {
    functions: HashMap<&'static str, Builtin>,
}

impl BuiltinRegistry {
    /// The full Origin builtin set.
    pub fn standard() -> BuiltinRegistry {
        let table: &[(&'static str, Arity, Handler)] = &[
            ("input", Arity::Exact(1), builtin_input),
            ("output", Arity::OneOrTwo, builtin_output),
            ("wait", Arity::Exact(1), builtin_wait),
            ("call", Arity::Exact(1), builtin_call),
            ("message", Arity::Exact(2), builtin_message),
            ("wifiConnect", Arity::Exact(2), builtin_wifi_connect),
            ("json", Arity::Even, builtin_json),
            ("addJsonElement", Arity::Exact(3), builtin_add_json_element),
            ("request", Arity::Exact(1), builtin_request),
            ("addJson", Arity::Exact(2), builtin_add_json),
            ("get", Arity::Exact(1), builtin_get),
            ("post", Arity::Exact(1), builtin_post),
            ("put", Arity::Exact(1), builtin_put),
            ("delete", Arity::Exact(1), builtin_delete),
        ];
        let mut functions = HashMap::new();
        for (name, arity, handler) in table {
            functions.insert(
                *name,
                Builtin {
                    name,
                    arity: *arity,
                    handler: *handler,
                },
            );
        }
        BuiltinRegistry { functions }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Option<&Builtin> {
        self.functions.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.functions.values().map(|b| b.name)
    }
}

impl Default for BuiltinRegistry {
    fn default() -> Self {
        BuiltinRegistry::standard()
    }
}

/// `input(sensor)` — sample-and-hold reading at the current virtual time.
fn builtin_input(ctx: &mut Interp<'_, '_>, args: Vec<Value>, line: u32) -> Result<Value, RuntimeError> {
    match &args[0] {
        Value::Sensor(sensor) => Ok(Value::Number(ctx.device.read_sensor(*sensor))),
        Value::Component(component) => Err(RuntimeError::type_error(
            line,
            format!("'{}' is an actuator, not a sensor", component.name()),
        )),
        other => Err(RuntimeError::type_error(
            line,
            format!("input expects a sensor keyword, got {}", other.type_name()),
        )),
    }
}

/// `output(component, state)` drives an actuator; `output(text_or_number)`
/// prints to the console. Consecutive identical actuator states still log
/// as distinct events.
fn builtin_output(ctx: &mut Interp<'_, '_>, args: Vec<Value>, line: u32) -> Result<Value, RuntimeError> {
    if args.len() == 1 {
        let text = match &args[0] {
            Value::Text(s) => s.clone(),
            Value::Number(n) => crate::value::format_number(*n),
            other => {
                return Err(RuntimeError::type_error(
                    line,
                    format!("output expects text or a number, got {}", other.type_name()),
                ));
            }
        };
        ctx.device.emit(EventKind::Console { text: text.clone() });
        if let Some(console) = ctx.console.as_mut() {
            console(&text);
        }
        return Ok(Value::Null);
    }
    let component = match &args[0] {
        Value::Component(component) => *component,
        other => {
            return Err(RuntimeError::type_error(
                line,
                format!(
                    "output expects a component keyword first, got {}",
                    other.type_name()
                ),
            ));
        }
    };
    let state = match &args[1] {
        Value::Number(n) => u8::from(*n != 0.0),
        other => {
            return Err(RuntimeError::type_error(
                line,
                format!("output expects a number state, got {}", other.type_name()),
            ));
        }
    };
    ctx.device.set_actuator(component, state);
    ctx.device.emit(EventKind::Actuator { component, state });
    Ok(Value::Null)
}

/// `wait(ms)` — advance the virtual clock by floor(ms); the only builtin
/// that moves time.
fn builtin_wait(ctx: &mut Interp<'_, '_>, args: Vec<Value>, line: u32) -> Result<Value, RuntimeError> {
    let ms = match &args[0] {
        Value::Number(n) if *n >= 0.0 => n.floor(),
        Value::Number(n) => {
            return Err(RuntimeError::type_error(
                line,
                format!(
                    "wait expects a non-negative number of milliseconds, got {}",
                    crate::value::format_number(*n)
                ),
            ));
        }
        other => {
            return Err(RuntimeError::type_error(
                line,
                format!("wait expects a number, got {}", other.type_name()),
            ));
        }
    };
    let ms = if ms >= u64::MAX as f64 { u64::MAX } else { ms as u64 };
    ctx.device
        .advance_clock(ms, ctx.budget.max_virtual_ms)
        .map_err(|e| RuntimeError::new(RuntimeErrorKind::BudgetExceeded, line, e.to_string()))?;
    Ok(Value::Null)
}

/// `call(number)` — place a phone call; returns 1.
fn builtin_call(ctx: &mut Interp<'_, '_>, args: Vec<Value>, line: u32) -> Result<Value, RuntimeError> {
    let number = expect_text(&args[0], "call", "a phone number", line)?;
    ctx.device.emit(EventKind::Call { number });
    Ok(Value::Number(1.0))
}

/// `message(number, body)` — send an SMS; returns 1.
fn builtin_message(ctx: &mut Interp<'_, '_>, args: Vec<Value>, line: u32) -> Result<Value, RuntimeError> {
    let number = expect_text(&args[0], "message", "a phone number", line)?;
    let body = expect_text(&args[1], "message", "a message body", line)?;
    ctx.device.emit(EventKind::Sms { number, body });
    Ok(Value::Number(1.0))
}

/// `wifiConnect(ssid, password)` — 1 and connected iff the pair is in the
/// device's known-networks list, else 0 with connectivity unchanged.
fn builtin_wifi_connect(
    ctx: &mut Interp<'_, '_>,
    args: Vec<Value>,
    line: u32,
) -> Result<Value, RuntimeError> {
    let ssid = expect_text(&args[0], "wifiConnect", "an ssid", line)?;
    let password = expect_text(&args[1], "wifiConnect", "a password", line)?;
    let result = u8::from(ctx.device.try_wifi_connect(&ssid, &password));
    ctx.device.emit(EventKind::Wifi { ssid, result });
    Ok(Value::Number(f64::from(result)))
}

/// `json(key, value, ...)` — build a JSON object; keys keep first-occurrence
/// order and later duplicates overwrite.
fn builtin_json(_ctx: &mut Interp<'_, '_>, args: Vec<Value>, line: u32) -> Result<Value, RuntimeError> {
    let mut object = JsonObject::new();
    for (i, pair) in args.chunks_exact(2).enumerate() {
        let key = match &pair[0] {
            Value::Text(s) => s.clone(),
            other => {
                return Err(RuntimeError::type_error(
                    line,
                    format!(
                        "json key {} must be text, got {}",
                        i + 1,
                        other.type_name()
                    ),
                ));
            }
        };
        object.insert(key, jsonable(&pair[1], line)?);
    }
    Ok(Value::json(object))
}

/// `addJsonElement(obj, key, value)` — mutate the object in place.
fn builtin_add_json_element(
    _ctx: &mut Interp<'_, '_>,
    args: Vec<Value>,
    line: u32,
) -> Result<Value, RuntimeError> {
    let object = match &args[0] {
        Value::Json(object) => object.clone(),
        other => {
            return Err(RuntimeError::type_error(
                line,
                format!(
                    "addJsonElement expects a json object first, got {}",
                    other.type_name()
                ),
            ));
        }
    };
    let key = expect_text(&args[1], "addJsonElement", "a key", line)?;
    let value = jsonable(&args[2], line)?;
    object.borrow_mut().insert(key, value);
    Ok(Value::Null)
}

/// `request(url)` — a fresh request handle; only http/https URLs.
fn builtin_request(
    _ctx: &mut Interp<'_, '_>,
    args: Vec<Value>,
    line: u32,
) -> Result<Value, RuntimeError> {
    let url = expect_text(&args[0], "request", "a url", line)?;
    if !(url.starts_with("http://") || url.starts_with("https://")) {
        return Err(RuntimeError::type_error(
            line,
            format!("request url must start with http:// or https://, got \"{url}\""),
        ));
    }
    Ok(Value::Request(Rc::new(RefCell::new(RequestData::new(url)))))
}

/// `addJson(req, obj)` — set the request body to a deep copy of the object
/// taken now; a second call replaces the first body.
fn builtin_add_json(
    _ctx: &mut Interp<'_, '_>,
    args: Vec<Value>,
    line: u32,
) -> Result<Value, RuntimeError> {
    let request = match &args[0] {
        Value::Request(request) => request.clone(),
        other => {
            return Err(RuntimeError::type_error(
                line,
                format!("addJson expects a request first, got {}", other.type_name()),
            ));
        }
    };
    let object = match &args[1] {
        Value::Json(object) => object.clone(),
        other => {
            return Err(RuntimeError::type_error(
                line,
                format!("addJson expects a json object, got {}", other.type_name()),
            ));
        }
    };
    let copy = object.borrow().deep_copy().map_err(|_| {
        RuntimeError::type_error(line, "json structure is nested too deeply")
    })?;
    request.borrow_mut().body = Some(copy);
    Ok(Value::Null)
}

fn builtin_get(ctx: &mut Interp<'_, '_>, args: Vec<Value>, line: u32) -> Result<Value, RuntimeError> {
    http_call(ctx, args, line, Method::Get)
}

fn builtin_post(ctx: &mut Interp<'_, '_>, args: Vec<Value>, line: u32) -> Result<Value, RuntimeError> {
    http_call(ctx, args, line, Method::Post)
}

fn builtin_put(ctx: &mut Interp<'_, '_>, args: Vec<Value>, line: u32) -> Result<Value, RuntimeError> {
    http_call(ctx, args, line, Method::Put)
}

fn builtin_delete(ctx: &mut Interp<'_, '_>, args: Vec<Value>, line: u32) -> Result<Value, RuntimeError> {
    http_call(ctx, args, line, Method::Delete)
}

/// Shared semantics of `get`/`post`/`put`/`delete`: gated on WiFi
/// connectivity, result 1 iff the transport reports a 2xx status.
fn http_call(
    ctx: &mut Interp<'_, '_>,
    args: Vec<Value>,
    line: u32,
    method: Method,
) -> Result<Value, RuntimeError> {
    let request = match &args[0] {
        Value::Request(request) => request.clone(),
        other => {
            return Err(RuntimeError::type_error(
                line,
                format!(
                    "{} expects a request handle, got {}",
                    method.as_str().to_lowercase(),
                    other.type_name()
                ),
            ));
        }
    };
    let (url, body) = {
        let request = request.borrow();
        let body = match &request.body {
            None => None,
            Some(object) => Some(object.try_serialize().map_err(|_| {
                RuntimeError::type_error(line, "json structure is nested too deeply")
            })?),
        };
        (request.url.clone(), body)
    };

    if ctx.device.connected_ssid().is_none() {
        ctx.device.emit(EventKind::Http {
            method,
            url,
            body: None,
            status: None,
            result: 0,
            skipped: true,
        });
        return Ok(Value::Number(0.0));
    }

    let transport_request = TransportRequest {
        method,
        url: url.clone(),
        body: body.as_ref().map(|s| s.as_bytes().to_vec()),
    };
    let response = ctx.transport.execute(&transport_request);
    let result = u8::from((200..=299).contains(&response.status));
    ctx.device.emit(EventKind::Http {
        method,
        url,
        body,
        status: Some(response.status),
        result,
        skipped: false,
    });
    Ok(Value::Number(f64::from(result)))
}

fn expect_text(
    value: &Value,
    builtin: &str,
    what: &str,
    line: u32,
) -> Result<String, RuntimeError> {
    match value {
        Value::Text(s) => Ok(s.clone()),
        other => Err(RuntimeError::type_error(
            line,
            format!("{builtin} expects {what} as text, got {}", other.type_name()),
        )),
    }
}

/// Values allowed inside JSON structures: text, numbers, arrays, json.
fn jsonable(value: &Value, line: u32) -> Result<Value, RuntimeError> {
    match value {
        Value::Text(_) | Value::Number(_) | Value::Array(_) | Value::Json(_) => Ok(value.clone()),
        other => Err(RuntimeError::type_error(
            line,
            format!(
                "json values must be text, numbers, arrays, or json objects, got {}",
                other.type_name()
            ),
        )),
    }
}
