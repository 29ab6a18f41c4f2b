//! Client side of the model-bridge wire protocol.
//!
//! Every stage call is one JSON request to a fixed endpoint:
//!
//! | stage       | endpoint         | response payload                     |
//! |-------------|------------------|--------------------------------------|
//! | `table`     | `/score-table`   | `table`, `score`                     |
//! | `column`    | `/tag-columns`   | `decisions: [{column, hit}]`         |
//! | `sqlgen`    | `/generate-sql`  | `candidates: [{sql, score}]`         |
//! | `valuefill` | `/fill-values`   | `output`                             |
//! | `paraphrase`| `/paraphrase`    | `paraphrases: [{text, similarity}]`  |
//!
//! Requests carry `protocol_version`, `stage`, `input` and, for `sqlgen`,
//! `beam_width`. Responses echo `protocol_version` and `stage` and add
//! `model_version`. Failures come back as
//! `{"protocol_version": 1, "error": {"code": ..., "message": ...}}`.
//! `GET /health` answers `{"protocol_version", "status", "model_version"}`.

mod client;
mod transport;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::submodel::{CandidateSql, ColumnDecision, ModelError};

pub use client::{answer, build_submodels, BridgeClient, LoopbackTransport};
pub use transport::{Exchange, HttpTransport, RecordingTransport, ReplayTransport, Transport};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("remote error {code}: {message}")]
    Remote { code: String, message: String },
    #[error("server speaks protocol {0}, client speaks {PROTOCOL_VERSION}")]
    Version(u32),
}

impl From<BridgeError> for ModelError {
    fn from(e: BridgeError) -> Self {
        match e {
            BridgeError::Protocol(_) | BridgeError::Version(_) => ModelError::Contract(e.to_string()),
            _ => ModelError::BackendUnavailable(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BridgeStage {
    Table,
    Column,
    Sqlgen,
    Valuefill,
    Paraphrase,
}

impl BridgeStage {
    pub fn endpoint(self) -> &'static str {
        match self {
            BridgeStage::Table => "/score-table",
            BridgeStage::Column => "/tag-columns",
            BridgeStage::Sqlgen => "/generate-sql",
            BridgeStage::Valuefill => "/fill-values",
            BridgeStage::Paraphrase => "/paraphrase",
        }
    }

    pub fn from_endpoint(endpoint: &str) -> Option<BridgeStage> {
        [Self::Table, Self::Column, Self::Sqlgen, Self::Valuefill, Self::Paraphrase]
            .into_iter()
            .find(|s| s.endpoint() == endpoint)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeRequest {
    pub protocol_version: u32,
    pub stage: BridgeStage,
    pub input: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam_width: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paraphrase {
    pub text: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "lowercase")]
pub enum Payload {
    Table { table: String, score: f64 },
    Column { decisions: Vec<ColumnDecision> },
    Sqlgen { candidates: Vec<CandidateSql> },
    Valuefill { output: String },
    Paraphrase { paraphrases: Vec<Paraphrase> },
}

impl Payload {
    pub fn stage(&self) -> BridgeStage {
        match self {
            Payload::Table { .. } => BridgeStage::Table,
            Payload::Column { .. } => BridgeStage::Column,
            Payload::Sqlgen { .. } => BridgeStage::Sqlgen,
            Payload::Valuefill { .. } => BridgeStage::Valuefill,
            Payload::Paraphrase { .. } => BridgeStage::Paraphrase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeResponse {
    pub protocol_version: u32,
    pub model_version: String,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub protocol_version: u32,
    pub error: ErrorBody,
}

impl ErrorResponse {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ErrorResponse {
            protocol_version: PROTOCOL_VERSION,
            error: ErrorBody { code: code.into(), message: message.into() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub protocol_version: u32,
    pub status: String,
    pub model_version: String,
}

/// Decodes a response body, surfacing error payloads and version or stage
/// mismatches.
pub fn decode_response(body: &str, expected: BridgeStage) -> Result<BridgeResponse, BridgeError> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| BridgeError::Protocol(format!("response is not JSON: {e}")))?;
    if value.get("error").is_some() {
        let err: ErrorResponse =
            serde_json::from_value(value).map_err(|e| BridgeError::Protocol(format!("bad error payload: {e}")))?;
        return Err(BridgeError::Remote { code: err.error.code, message: err.error.message });
    }
    let version = value.get("protocol_version").and_then(|v| v.as_u64());
    match version {
        Some(v) if v == PROTOCOL_VERSION as u64 => {}
        Some(v) => return Err(BridgeError::Version(v as u32)),
        None => return Err(BridgeError::Protocol("response lacks protocol_version".into())),
    }
    let resp: BridgeResponse =
        serde_json::from_value(value).map_err(|e| BridgeError::Protocol(format!("bad response payload: {e}")))?;
    if resp.payload.stage() != expected {
        return Err(BridgeError::Protocol(format!(
            "asked stage {:?}, answered {:?}",
            expected,
            resp.payload.stage()
        )));
    }
    Ok(resp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_wire_form() {
        let r = BridgeRequest {
            protocol_version: 1,
            stage: BridgeStage::Sqlgen,
            input: "q".into(),
            beam_width: Some(4),
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"protocol_version":1,"stage":"sqlgen","input":"q","beam_width":4}"#
        );
        let r = BridgeRequest { beam_width: None, stage: BridgeStage::Table, ..r };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"protocol_version":1,"stage":"table","input":"q"}"#);
    }

    #[test]
    fn response_round_trip() {
        let resp = BridgeResponse {
            protocol_version: 1,
            model_version: "stub-1".into(),
            payload: Payload::Table { table: "power_bill".into(), score: 0.75 },
        };
        let text = serde_json::to_string(&resp).unwrap();
        assert_eq!(
            text,
            r#"{"protocol_version":1,"model_version":"stub-1","stage":"table","table":"power_bill","score":0.75}"#
        );
        assert_eq!(decode_response(&text, BridgeStage::Table).unwrap(), resp);
        assert!(matches!(decode_response(&text, BridgeStage::Column), Err(BridgeError::Protocol(_))));
    }

    #[test]
    fn error_and_version_payloads() {
        let err = serde_json::to_string(&ErrorResponse::new("bad_stage", "no such stage")).unwrap();
        match decode_response(&err, BridgeStage::Table) {
            Err(BridgeError::Remote { code, .. }) => assert_eq!(code, "bad_stage"),
            other => panic!("{other:?}"),
        }
        let v2 = r#"{"protocol_version":2,"model_version":"m","stage":"valuefill","output":""}"#;
        assert!(matches!(decode_response(v2, BridgeStage::Valuefill), Err(BridgeError::Version(2))));
        assert!(matches!(decode_response("nope", BridgeStage::Valuefill), Err(BridgeError::Protocol(_))));
        assert!(matches!(
            ModelError::from(BridgeError::Transport("refused".into())),
            ModelError::BackendUnavailable(_)
        ));
    }

    #[test]
    fn endpoints_round_trip() {
        for s in [BridgeStage::Table, BridgeStage::Column, BridgeStage::Sqlgen, BridgeStage::Valuefill, BridgeStage::Paraphrase] {
            assert_eq!(BridgeStage::from_endpoint(s.endpoint()), Some(s));
        }
        assert_eq!(BridgeStage::from_endpoint("/health"), None);
    }
}
