use std::io::Read;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::BridgeError;

/// Moves request and response bodies between the client and a service.
pub trait Transport: Send + Sync {
    fn post(&self, endpoint: &str, body: &str) -> Result<String, BridgeError>;
    fn get(&self, endpoint: &str) -> Result<String, BridgeError>;
}

/// JSON over HTTP/1.1 to `base_url`.
pub struct HttpTransport {
    base_url: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(base_url: &str, timeout: Duration) -> HttpTransport {
        HttpTransport {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    // non-2xx bodies still carry structured error payloads
    fn body(result: Result<ureq::Response, ureq::Error>) -> Result<String, BridgeError> {
        let resp = match result {
            Ok(r) => r,
            Err(ureq::Error::Status(_, r)) => r,
            Err(e) => return Err(BridgeError::Transport(e.to_string())),
        };
        let mut text = String::new();
        resp.into_reader()
            .take(64 << 20)
            .read_to_string(&mut text)
            .map_err(|e| BridgeError::Transport(e.to_string()))?;
        Ok(text)
    }
}

impl Transport for HttpTransport {
    fn post(&self, endpoint: &str, body: &str) -> Result<String, BridgeError> {
        let req = self
            .agent
            .post(&format!("{}{endpoint}", self.base_url))
            .set("Content-Type", "application/json");
        Self::body(req.send_string(body))
    }

    fn get(&self, endpoint: &str) -> Result<String, BridgeError> {
        Self::body(self.agent.get(&format!("{}{endpoint}", self.base_url)).call())
    }
}

/// One recorded request/response; `request` is null for GET.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub endpoint: String,
    pub request: Value,
    pub response: Value,
}

/// Answers from recorded exchanges, matching on endpoint and request JSON.
#[derive(Debug, Clone, Default)]
pub struct ReplayTransport {
    exchanges: Vec<Exchange>,
}

impl ReplayTransport {
    pub fn new(exchanges: Vec<Exchange>) -> ReplayTransport {
        ReplayTransport { exchanges }
    }

    pub fn from_jsonl(text: &str) -> Result<ReplayTransport, BridgeError> {
        let exchanges = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| BridgeError::Protocol(format!("fixture line {}: {e}", i + 1)))
            })
            .collect::<Result<_, _>>()?;
        Ok(ReplayTransport { exchanges })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ReplayTransport, BridgeError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| BridgeError::Transport(format!("{}: {e}", path.display())))?;
        Self::from_jsonl(&text)
    }

    pub fn exchanges(&self) -> &[Exchange] {
        &self.exchanges
    }

    fn lookup(&self, endpoint: &str, request: &Value) -> Result<String, BridgeError> {
        self.exchanges
            .iter()
            .find(|x| x.endpoint == endpoint && &x.request == request)
            .map(|x| x.response.to_string())
            .ok_or_else(|| BridgeError::Transport(format!("no recorded exchange for {endpoint} {request}")))
    }
}

impl Transport for ReplayTransport {
    fn post(&self, endpoint: &str, body: &str) -> Result<String, BridgeError> {
        let request: Value =
            serde_json::from_str(body).map_err(|e| BridgeError::Protocol(format!("request is not JSON: {e}")))?;
        self.lookup(endpoint, &request)
    }

    fn get(&self, endpoint: &str) -> Result<String, BridgeError> {
        self.lookup(endpoint, &Value::Null)
    }
}

/// Passes calls through to `inner` and keeps every exchange, for writing
/// replay fixtures.
pub struct RecordingTransport {
    inner: Arc<dyn Transport>,
    log: Mutex<Vec<Exchange>>,
}

impl RecordingTransport {
    pub fn new(inner: Arc<dyn Transport>) -> RecordingTransport {
        RecordingTransport { inner, log: Mutex::new(Vec::new()) }
    }

    /// Distinct exchanges in first-seen order.
    pub fn exchanges(&self) -> Vec<Exchange> {
        self.log.lock().expect("recording lock").clone()
    }

    pub fn to_jsonl(&self) -> String {
        self.exchanges()
            .iter()
            .map(|x| serde_json::to_string(x).expect("exchange serializes") + "\n")
            .collect()
    }

    fn keep(&self, endpoint: &str, request: Value, response: &str) {
        let response = serde_json::from_str(response).unwrap_or(Value::String(response.to_string()));
        let x = Exchange { endpoint: endpoint.to_string(), request, response };
        let mut log = self.log.lock().expect("recording lock");
        if !log.contains(&x) {
            log.push(x);
        }
    }
}

impl Transport for RecordingTransport {
    fn post(&self, endpoint: &str, body: &str) -> Result<String, BridgeError> {
        let out = self.inner.post(endpoint, body)?;
        let request = serde_json::from_str(body).unwrap_or(Value::String(body.to_string()));
        self.keep(endpoint, request, &out);
        Ok(out)
    }

    fn get(&self, endpoint: &str) -> Result<String, BridgeError> {
        let out = self.inner.get(endpoint)?;
        self.keep(endpoint, Value::Null, &out);
        Ok(out)
    }
}
