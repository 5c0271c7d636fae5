//! The virtual Android device: deterministic millisecond clock, sensor trace
//! playback, actuator states, WiFi credential table, and the append-only
//! event log that every externally visible effect lands in.

use std::collections::HashMap;
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use crate::net::Method;

/// Output components the device simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentId {
    Led,
    Speaker,
}

impl ComponentId {
    pub const ALL: [ComponentId; 2] = [ComponentId::Led, ComponentId::Speaker];

    pub fn name(self) -> &'static str {
        match self {
            ComponentId::Led => "led",
            ComponentId::Speaker => "speaker",
        }
    }

    pub fn from_name(name: &str) -> Option<ComponentId> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sensors the device simulates. Readings come from a trace; sensors with no
/// trace data read 0.0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SensorId {
    AccelerometerX,
    AccelerometerY,
    AccelerometerZ,
    GyroscopeX,
    GyroscopeY,
    GyroscopeZ,
    Proximity,
    Pressure,
    Humidity,
    Light,
}

impl SensorId {
    pub const ALL: [SensorId; 10] = [
        SensorId::AccelerometerX,
        SensorId::AccelerometerY,
        SensorId::AccelerometerZ,
        SensorId::GyroscopeX,
        SensorId::GyroscopeY,
        SensorId::GyroscopeZ,
        SensorId::Proximity,
        SensorId::Pressure,
        SensorId::Humidity,
        SensorId::Light,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SensorId::AccelerometerX => "accelerometerX",
            SensorId::AccelerometerY => "accelerometerY",
            SensorId::AccelerometerZ => "accelerometerZ",
            SensorId::GyroscopeX => "gyroscopeX",
            SensorId::GyroscopeY => "gyroscopeY",
            SensorId::GyroscopeZ => "gyroscopeZ",
            SensorId::Proximity => "proximity",
            SensorId::Pressure => "pressure",
            SensorId::Humidity => "humidity",
            SensorId::Light => "light",
        }
    }

    pub fn from_name(name: &str) -> Option<SensorId> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One recorded reading: the value a sensor reports from `t_ms` onward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t_ms: u64,
    pub value: f64,
}

/// Per-sensor sample channels, each sorted by strictly increasing time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SensorTrace {
    channels: HashMap<SensorId, Vec<Sample>>,
}

/// Malformed input file (trace, WiFi config, or transport script).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl SensorTrace {
    pub fn new() -> SensorTrace {
        SensorTrace::default()
    }

    /// Parse a JSONL trace: one `{"t": <int ms>, "sensor": "<name>", "value": <number>}`
    /// object per line. Samples are grouped per sensor and sorted; a sensor
    /// with two samples at the same time is rejected. Blank lines are skipped.
    pub fn parse_jsonl(text: &str) -> Result<SensorTrace, FormatError> {
        let mut trace = SensorTrace::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let doc: serde_json::Value = serde_json::from_str(raw).map_err(|e| FormatError {
                line,
                message: format!("invalid JSON: {e}"),
            })?;
            let t_ms = doc
                .get("t")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| FormatError {
                    line,
                    message: "field \"t\" must be a non-negative integer".to_string(),
                })?;
            let sensor_name = doc
                .get("sensor")
                .and_then(|v| v.as_str())
                .ok_or_else(|| FormatError {
                    line,
                    message: "field \"sensor\" must be a string".to_string(),
                })?;
            let sensor = SensorId::from_name(sensor_name).ok_or_else(|| FormatError {
                line,
                message: format!("unknown sensor \"{sensor_name}\""),
            })?;
            let value = doc
                .get("value")
                .and_then(|v| v.as_f64())
                .ok_or_else(|| FormatError {
                    line,
                    message: "field \"value\" must be a number".to_string(),
                })?;
            let channel = trace.channels.entry(sensor).or_default();
            if channel.iter().any(|s| s.t_ms == t_ms) {
                return Err(FormatError {
                    line,
                    message: format!("duplicate sample time {t_ms} for sensor \"{sensor_name}\""),
                });
            }
            channel.push(Sample { t_ms, value });
        }
        for channel in trace.channels.values_mut() {
            channel.sort_by_key(|s| s.t_ms);
        }
        Ok(trace)
    }

    pub fn push_sample(&mut self, sensor: SensorId, t_ms: u64, value: f64) {
        let channel = self.channels.entry(sensor).or_default();
        channel.push(Sample { t_ms, value });
        channel.sort_by_key(|s| s.t_ms);
    }

    pub fn channel(&self, sensor: SensorId) -> &[Sample] {
        self.channels.get(&sensor).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sample-and-hold read: the value of the latest sample at or before
    /// `t_ms`, or 0.0 when no such sample exists.
    pub fn sample_at(&self, sensor: SensorId, t_ms: u64) -> f64 {
        let channel = self.channel(sensor);
        let idx = channel.partition_point(|s| s.t_ms <= t_ms);
        if idx == 0 {
            0.0
        } else {
            channel[idx - 1].value
        }
    }
}

/// A known WiFi network the device can join.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Network {
    pub ssid: String,
    pub password: String,
}

#[derive(Debug, Deserialize)]
struct WifiConfig {
    networks: Vec<Network>,
}

/// Parse a WiFi config document: `{"networks": [{"ssid": "...", "password": "..."}]}`.
pub fn load_wifi_config(text: &str) -> Result<Vec<Network>, FormatError> {
    let config: WifiConfig = serde_json::from_str(text).map_err(|e| FormatError {
        line: e.line(),
        message: format!("invalid WiFi config: {e}"),
    })?;
    Ok(config.networks)
}

/// One timestamped externally visible effect.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub t_ms: u64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Actuator {
        component: ComponentId,
        state: u8,
    },
    Console {
        text: String,
    },
    Call {
        number: String,
    },
    Sms {
        number: String,
        body: String,
    },
    Wifi {
        ssid: String,
        result: u8,
    },
    Http {
        method: Method,
        url: String,
        /// Serialized JSON body, when the request carried one.
        body: Option<String>,
        /// Transport status; absent when the call was skipped.
        status: Option<u16>,
        result: u8,
        /// True when WiFi was down and the transport was never invoked.
        skipped: bool,
    },
}

impl EventKind {
    pub fn type_name(&self) -> &'static str {
        match self {
            EventKind::Actuator { .. } => "actuator",
            EventKind::Console { .. } => "console",
            EventKind::Call { .. } => "call",
            EventKind::Sms { .. } => "sms",
            EventKind::Wifi { .. } => "wifi",
            EventKind::Http { .. } => "http",
        }
    }
}

impl EventRecord {
    /// Serialize to exactly one JSONL line (no trailing newline): fields in
    /// fixed order `t`, `type`, then payload fields alphabetically.
    pub fn to_jsonl_line(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{{\"t\":{},\"type\":\"{}\"", self.t_ms, self.kind.type_name()));
        match &self.kind {
            EventKind::Actuator { component, state } => {
                out.push_str(&format!(",\"component\":\"{}\",\"state\":{}", component.name(), state));
            }
            EventKind::Console { text } => {
                out.push_str(",\"text\":");
                push_json_string(&mut out, text);
            }
            EventKind::Call { number } => {
                out.push_str(",\"number\":");
                push_json_string(&mut out, number);
            }
            EventKind::Sms { number, body } => {
                out.push_str(",\"body\":");
                push_json_string(&mut out, body);
                out.push_str(",\"number\":");
                push_json_string(&mut out, number);
            }
            EventKind::Wifi { ssid, result } => {
                out.push_str(&format!(",\"result\":{result},\"ssid\":"));
                push_json_string(&mut out, ssid);
            }
            EventKind::Http {
                method,
                url,
                body,
                status,
                result,
                skipped,
            } => {
                if let Some(body) = body {
                    out.push_str(",\"body\":");
                    push_json_string(&mut out, body);
                }
                out.push_str(&format!(",\"method\":\"{}\"", method.as_str()));
                out.push_str(&format!(",\"result\":{result}"));
                if *skipped {
                    out.push_str(",\"skipped\":true");
                }
                if let Some(status) = status {
                    out.push_str(&format!(",\"status\":{status}"));
                }
                out.push_str(",\"url\":");
                push_json_string(&mut out, url);
            }
        }
        out.push('}');
        out
    }

    /// Parse one JSONL line produced by [`EventRecord::to_jsonl_line`].
    pub fn from_jsonl_line(line_text: &str) -> Result<EventRecord, FormatError> {
        let err = |message: String| FormatError { line: 1, message };
        let doc: serde_json::Value =
            serde_json::from_str(line_text).map_err(|e| err(format!("invalid JSON: {e}")))?;
        let t_ms = doc
            .get("t")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| err("missing \"t\"".to_string()))?;
        let type_name = doc
            .get("type")
            .and_then(|v| v.as_str())
            .ok_or_else(|| err("missing \"type\"".to_string()))?;
        let get_str = |field: &str| -> Result<String, FormatError> {
            doc.get(field)
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .ok_or_else(|| err(format!("missing \"{field}\"")))
        };
        let get_u8 = |field: &str| -> Result<u8, FormatError> {
            doc.get(field)
                .and_then(|v| v.as_u64())
                .and_then(|n| u8::try_from(n).ok())
                .ok_or_else(|| err(format!("missing \"{field}\"")))
        };
        let kind = match type_name {
            "actuator" => {
                let component_name = get_str("component")?;
                let component = ComponentId::from_name(&component_name)
                    .ok_or_else(|| err(format!("unknown component \"{component_name}\"")))?;
                EventKind::Actuator {
                    component,
                    state: get_u8("state")?,
                }
            }
            "console" => EventKind::Console { text: get_str("text")? },
            "call" => EventKind::Call { number: get_str("number")? },
            "sms" => EventKind::Sms {
                number: get_str("number")?,
                body: get_str("body")?,
            },
            "wifi" => EventKind::Wifi {
                ssid: get_str("ssid")?,
                result: get_u8("result")?,
            },
            "http" => {
                let method_name = get_str("method")?;
                let method = Method::from_name(&method_name)
                    .ok_or_else(|| err(format!("unknown method \"{method_name}\"")))?;
                EventKind::Http {
                    method,
                    url: get_str("url")?,
                    body: doc.get("body").and_then(|v| v.as_str()).map(str::to_string),
                    status: doc
                        .get("status")
                        .and_then(|v| v.as_u64())
                        .and_then(|n| u16::try_from(n).ok()),
                    result: get_u8("result")?,
                    skipped: doc.get("skipped").and_then(|v| v.as_bool()).unwrap_or(false),
                }
            }
            other => return Err(err(format!("unknown event type \"{other}\""))),
        };
        Ok(EventRecord { t_ms, kind })
    }
}

fn push_json_string(out: &mut String, s: &str) {
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
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Serialize an event list to JSONL, one record per line, trailing newline
/// after each line. Bit-exact across runs for golden testing.
pub fn events_to_jsonl(events: &[EventRecord]) -> String {
    let mut out = String::new();
    for event in events {
        out.push_str(&event.to_jsonl_line());
        out.push('\n');
    }
    out
}

/// Parse a JSONL event log back into records.
pub fn events_from_jsonl(text: &str) -> Result<Vec<EventRecord>, FormatError> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let record = EventRecord::from_jsonl_line(raw).map_err(|mut e| {
            e.line = idx + 1;
            e
        })?;
        events.push(record);
    }
    Ok(events)
}

/// Raised by [`DeviceState::advance_clock`] when a virtual-time budget would
/// be exceeded; the clock is left unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("virtual time limit of {limit_ms} ms exceeded")]
pub struct TimeLimitExceeded {
    pub limit_ms: u64,
}

/// The full simulated device. Owned by exactly one interpreter run at a time.
#[derive(Debug, Default)]
pub struct DeviceState {
    virtual_time_ms: u64,
    trace: SensorTrace,
    actuators: HashMap<ComponentId, u8>,
    known_networks: Vec<Network>,
    connected: Option<String>,
    events: Vec<EventRecord>,
    realtime: bool,
}

impl DeviceState {
    pub fn new() -> DeviceState {
        let mut actuators = HashMap::new();
        for component in ComponentId::ALL {
            actuators.insert(component, 0);
        }
        DeviceState {
            virtual_time_ms: 0,
            trace: SensorTrace::new(),
            actuators,
            known_networks: Vec::new(),
            connected: None,
            events: Vec::new(),
            realtime: false,
        }
    }

    pub fn set_trace(&mut self, trace: SensorTrace) {
        self.trace = trace;
    }

    pub fn set_known_networks(&mut self, networks: Vec<Network>) {
        self.known_networks = networks;
    }

    /// When set, `advance_clock` also sleeps for the same wall-clock duration.
    /// Sleeping never changes the event log.
    pub fn set_realtime(&mut self, realtime: bool) {
        self.realtime = realtime;
    }

    pub fn now_ms(&self) -> u64 {
        self.virtual_time_ms
    }

    /// Sample-and-hold sensor read at the current virtual time.
    pub fn read_sensor(&self, sensor: SensorId) -> f64 {
        self.trace.sample_at(sensor, self.virtual_time_ms)
    }

    /// Advance the virtual clock. If `max_virtual_ms` would be exceeded the
    /// clock is left unchanged and the limit error is returned instead.
    pub fn advance_clock(
        &mut self,
        ms: u64,
        max_virtual_ms: Option<u64>,
    ) -> Result<(), TimeLimitExceeded> {
        let target = self.virtual_time_ms.saturating_add(ms);
        if let Some(limit) = max_virtual_ms {
            if target > limit {
                return Err(TimeLimitExceeded { limit_ms: limit });
            }
        }
        if self.realtime && ms > 0 {
            std::thread::sleep(std::time::Duration::from_millis(ms));
        }
        self.virtual_time_ms = target;
        Ok(())
    }

    pub fn set_actuator(&mut self, component: ComponentId, state: u8) {
        self.actuators.insert(component, state);
    }

    pub fn actuator(&self, component: ComponentId) -> u8 {
        self.actuators.get(&component).copied().unwrap_or(0)
    }

    /// Attempt to join a network. Succeeds only when the exact (ssid,
    /// password) pair is configured; failure leaves connectivity unchanged.
    pub fn try_wifi_connect(&mut self, ssid: &str, password: &str) -> bool {
        let known = self
            .known_networks
            .iter()
            .any(|n| n.ssid == ssid && n.password == password);
        if known {
            self.connected = Some(ssid.to_string());
        }
        known
    }

    pub fn connected_ssid(&self) -> Option<&str> {
        self.connected.as_deref()
    }

    /// Append an event. The record must carry the current virtual time;
    /// anything else is a caller bug.
    pub fn emit_event(&mut self, record: EventRecord) {
        assert_eq!(
            record.t_ms, self.virtual_time_ms,
            "event timestamp must equal current virtual time"
        );
        self.events.push(record);
    }

    /// Append an event stamped with the current virtual time.
    pub fn emit(&mut self, kind: EventKind) {
        self.events.push(EventRecord {
            t_ms: self.virtual_time_ms,
            kind,
        });
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn events_jsonl(&self) -> String {
        events_to_jsonl(&self.events)
    }
}
