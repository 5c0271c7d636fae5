//! HTTP transport abstraction: a scriptable mock for tests and deterministic
//! runs, and a real blocking client for live runs.
//!
//! Failure is a status, never an exception — Origin programs only ever see
//! 1 or 0 from the network builtins, so transport problems map to the
//! synthetic status 0.

use std::time::Duration;

use serde::Deserialize;

use crate::device::FormatError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Get,
    Post,
    Put,
    Delete,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Get => "GET",
            Method::Post => "POST",
            Method::Put => "PUT",
            Method::Delete => "DELETE",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        match name {
            "GET" => Some(Method::Get),
            "POST" => Some(Method::Post),
            "PUT" => Some(Method::Put),
            "DELETE" => Some(Method::Delete),
            _ => None,
        }
    }
}

/// One request as seen by the transport; the body is the serialized JSON
/// document, byte-preserved for test assertions.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportRequest {
    pub method: Method,
    pub url: String,
    pub body: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransportResponse {
    pub status: u16,
}

/// Blocking request/response transport used by the network builtins.
pub trait Transport {
    fn execute(&mut self, request: &TransportRequest) -> TransportResponse;
}

/// Declarative description of how the mock transport answers requests:
/// first matching rule wins, default status 200 when nothing matches.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransportScript {
    rules: Vec<ScriptRule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptRule {
    pub method: Option<Method>,
    pub url_prefix: Option<String>,
    pub status: u16,
}

impl ScriptRule {
    fn matches(&self, request: &TransportRequest) -> bool {
        if let Some(method) = self.method {
            if method != request.method {
                return false;
            }
        }
        if let Some(prefix) = &self.url_prefix {
            if !request.url.starts_with(prefix.as_str()) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Deserialize)]
struct RawScript {
    rules: Vec<RawRule>,
}

#[derive(Debug, Deserialize)]
struct RawRule {
    #[serde(rename = "match", default)]
    match_: RawMatch,
    status: u16,
}

#[derive(Debug, Default, Deserialize)]
struct RawMatch {
    method: Option<String>,
    url_prefix: Option<String>,
}

impl TransportScript {
    pub fn empty() -> TransportScript {
        TransportScript::default()
    }

    pub fn with_rules(rules: Vec<ScriptRule>) -> TransportScript {
        TransportScript { rules }
    }

    /// Parse a script document:
    /// `{"rules":[{"match":{"method":"POST","url_prefix":"http://"},"status":200}]}`.
    pub fn parse(text: &str) -> Result<TransportScript, FormatError> {
        let raw: RawScript = serde_json::from_str(text).map_err(|e| FormatError {
            line: e.line(),
            message: format!("invalid transport script: {e}"),
        })?;
        let mut rules = Vec::new();
        for (i, rule) in raw.rules.into_iter().enumerate() {
            if !(100..=599).contains(&rule.status) {
                return Err(FormatError {
                    line: 1,
                    message: format!("rule {}: status {} outside 100-599", i + 1, rule.status),
                });
            }
            let method = match rule.match_.method {
                None => None,
                Some(name) => Some(Method::from_name(&name).ok_or_else(|| FormatError {
                    line: 1,
                    message: format!("rule {}: unknown method \"{name}\"", i + 1),
                })?),
            };
            rules.push(ScriptRule {
                method,
                url_prefix: rule.match_.url_prefix,
                status: rule.status,
            });
        }
        Ok(TransportScript { rules })
    }

    pub fn status_for(&self, request: &TransportRequest) -> u16 {
        self.rules
            .iter()
            .find(|rule| rule.matches(request))
            .map(|rule| rule.status)
            .unwrap_or(200)
    }
}

/// Mock transport: records every call verbatim and answers per script.
#[derive(Debug, Default)]
pub struct MockTransport {
    script: TransportScript,
    calls: Vec<TransportRequest>,
}

impl MockTransport {
    pub fn new(script: TransportScript) -> MockTransport {
        MockTransport {
            script,
            calls: Vec::new(),
        }
    }

    /// Exact requests in order, bodies byte-preserved.
    pub fn recorded_calls(&self) -> &[TransportRequest] {
        &self.calls
    }
}

impl Transport for MockTransport {
    fn execute(&mut self, request: &TransportRequest) -> TransportResponse {
        self.calls.push(request.clone());
        TransportResponse {
            status: self.script.status_for(request),
        }
    }
}

/// Real HTTP client. Any network failure maps to the synthetic status 0.
pub struct RealTransport {
    agent: ureq::Agent,
}

impl RealTransport {
    pub fn new() -> RealTransport {
        RealTransport::with_timeout(Duration::from_secs(10))
    }

    pub fn with_timeout(timeout: Duration) -> RealTransport {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        RealTransport {
            agent: config.into(),
        }
    }
}

impl Default for RealTransport {
    fn default() -> Self {
        RealTransport::new()
    }
}

impl Transport for RealTransport {
    fn execute(&mut self, request: &TransportRequest) -> TransportResponse {
        let mut builder = ureq::http::Request::builder()
            .method(request.method.as_str())
            .uri(&request.url);
        if request.body.is_some() {
            builder = builder.header("content-type", "application/json; charset=utf-8");
        }
        let body = request.body.clone().unwrap_or_default();
        let outcome = builder
            .body(body)
            .ok()
            .and_then(|req| self.agent.run(req).ok());
        let status = match outcome {
            Some(response) => response.status().as_u16(),
            None => 0,
        };
        TransportResponse { status }
    }
}
