//! Dynamic runtime values.
//!
//! Arrays, JSON objects, and request handles have reference semantics (shared
//! and mutable in place), which is what lets `addJsonElement` mutate an object
//! held in a variable. Numbers are double-precision floats; the display form
//! drops a trailing `.0` so `output(10/5)` prints `2`.

use std::cell::RefCell;
use std::rc::Rc;

use crate::device::{ComponentId, SensorId};

#[derive(Debug, Clone)]
pub enum Value {
    Number(f64),
    Text(String),
    Array(Rc<RefCell<Vec<Value>>>),
    Json(Rc<RefCell<JsonObject>>),
    Request(Rc<RefCell<RequestData>>),
    Component(ComponentId),
    Sensor(SensorId),
    Null,
}

/// Rust-level equality, used by tests and collections: numbers and text by
/// value, reference types by identity (language-level `==` on arrays or json
/// is a runtime error, handled in the interpreter).
impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a == b,
            (Value::Text(a), Value::Text(b)) => a == b,
            (Value::Array(a), Value::Array(b)) => Rc::ptr_eq(a, b),
            (Value::Json(a), Value::Json(b)) => Rc::ptr_eq(a, b),
            (Value::Request(a), Value::Request(b)) => Rc::ptr_eq(a, b),
            (Value::Component(a), Value::Component(b)) => a == b,
            (Value::Sensor(a), Value::Sensor(b)) => a == b,
            (Value::Null, Value::Null) => true,
            _ => false,
        }
    }
}

impl Value {
    pub fn number(n: f64) -> Value {
        Value::Number(n)
    }

    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn array(elements: Vec<Value>) -> Value {
        Value::Array(Rc::new(RefCell::new(elements)))
    }

    pub fn json(object: JsonObject) -> Value {
        Value::Json(Rc::new(RefCell::new(object)))
    }

    /// Lowercase kind name used in error messages.
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Text(_) => "text",
            Value::Array(_) => "array",
            Value::Json(_) => "json",
            Value::Request(_) => "request",
            Value::Component(_) => "component",
            Value::Sensor(_) => "sensor",
            Value::Null => "null",
        }
    }

    /// Display form: what `output(x)` prints and what `+` concatenates.
    pub fn display(&self) -> String {
        match self {
            Value::Number(n) => format_number(*n),
            Value::Text(s) => s.clone(),
            Value::Array(elements) => {
                let parts: Vec<String> =
                    elements.borrow().iter().map(|v| v.display()).collect();
                format!("[{}]", parts.join(", "))
            }
            Value::Json(object) => object.borrow().serialize(),
            Value::Request(req) => {
                let req = req.borrow();
                format!("request({})", req.url)
            }
            Value::Component(c) => c.name().to_string(),
            Value::Sensor(s) => s.name().to_string(),
            Value::Null => "null".to_string(),
        }
    }
}

/// Format a number the way the language displays it: integral values print
/// without a fractional part. Rust's `f64` Display already behaves this way
/// and never uses exponent notation.
pub fn format_number(n: f64) -> String {
    format!("{n}")
}

/// A JSON object with insertion-ordered keys. Inserting an existing key
/// overwrites its value but keeps the key's original position.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JsonObject {
    entries: Vec<(String, Value)>,
}

/// JSON structures are built by reference and can be made cyclic; recursion
/// past this depth is reported instead of overflowing the stack.
pub const MAX_JSON_DEPTH: usize = 128;

/// Error raised when serializing or copying a JSON structure nested deeper
/// than [`MAX_JSON_DEPTH`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JsonDepthExceeded;

impl JsonObject {
    pub fn new() -> JsonObject {
        JsonObject::default()
    }

    pub fn insert(&mut self, key: String, value: Value) {
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some((_, slot)) => *slot = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, Value)] {
        &self.entries
    }

    /// Serialize as a compact JSON document: UTF-8, no insignificant
    /// whitespace, key order = insertion order, integral numbers without a
    /// trailing `.0`.
    pub fn serialize(&self) -> String {
        self.try_serialize()
            .unwrap_or_else(|_| "null".to_string())
    }

    pub fn try_serialize(&self) -> Result<String, JsonDepthExceeded> {
        let mut out = String::new();
        write_json_object(&mut out, self, 0)?;
        Ok(out)
    }

    /// Structural deep copy: nested objects and arrays are copied, so later
    /// mutations of the source do not show through.
    pub fn deep_copy(&self) -> Result<JsonObject, JsonDepthExceeded> {
        deep_copy_object(self, 0)
    }
}

fn deep_copy_object(object: &JsonObject, depth: usize) -> Result<JsonObject, JsonDepthExceeded> {
    if depth > MAX_JSON_DEPTH {
        return Err(JsonDepthExceeded);
    }
    let mut copy = JsonObject::new();
    for (key, value) in &object.entries {
        copy.entries
            .push((key.clone(), deep_copy_value(value, depth + 1)?));
    }
    Ok(copy)
}

fn deep_copy_value(value: &Value, depth: usize) -> Result<Value, JsonDepthExceeded> {
    if depth > MAX_JSON_DEPTH {
        return Err(JsonDepthExceeded);
    }
    Ok(match value {
        Value::Json(object) => Value::json(deep_copy_object(&object.borrow(), depth + 1)?),
        Value::Array(elements) => {
            let copied: Result<Vec<Value>, JsonDepthExceeded> = elements
                .borrow()
                .iter()
                .map(|v| deep_copy_value(v, depth + 1))
                .collect();
            Value::array(copied?)
        }
        other => other.clone(),
    })
}

fn write_json_object(
    out: &mut String,
    object: &JsonObject,
    depth: usize,
) -> Result<(), JsonDepthExceeded> {
    if depth > MAX_JSON_DEPTH {
        return Err(JsonDepthExceeded);
    }
    out.push('{');
    for (i, (key, value)) in object.entries.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_json_string(out, key);
        out.push(':');
        write_json_value(out, value, depth + 1)?;
    }
    out.push('}');
    Ok(())
}

fn write_json_value(out: &mut String, value: &Value, depth: usize) -> Result<(), JsonDepthExceeded> {
    if depth > MAX_JSON_DEPTH {
        return Err(JsonDepthExceeded);
    }
    match value {
        Value::Number(n) => {
            if n.is_finite() {
                out.push_str(&format_number(*n));
            } else {
                // JSON has no NaN or infinity.
                out.push_str("null");
            }
        }
        Value::Text(s) => write_json_string(out, s),
        Value::Array(elements) => {
            out.push('[');
            for (i, element) in elements.borrow().iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json_value(out, element, depth + 1)?;
            }
            out.push(']');
        }
        Value::Json(object) => write_json_object(out, &object.borrow(), depth + 1)?,
        // Insertion validation keeps these out of JSON structures.
        Value::Null | Value::Request(_) | Value::Component(_) | Value::Sensor(_) => {
            debug_assert!(matches!(value, Value::Null), "non-JSON value in JsonObject");
            out.push_str("null");
        }
    }
    Ok(())
}

fn write_json_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\u{08}' => out.push_str("\\b"),
            '\u{0c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// An HTTP request under construction: a URL plus an optional JSON body.
/// The body is a detached deep copy taken when `addJson` is called.
#[derive(Debug, Clone)]
pub struct RequestData {
    pub url: String,
    pub body: Option<JsonObject>,
}

impl RequestData {
    pub fn new(url: String) -> RequestData {
        RequestData { url, body: None }
    }
}
