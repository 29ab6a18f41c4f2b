use std::sync::Arc;
use std::time::Duration;

use super::{
    decode_response, BridgeError, BridgeRequest, BridgeResponse, BridgeStage, ErrorResponse, Health,
    HttpTransport, Paraphrase, Payload, Transport, PROTOCOL_VERSION,
};
use crate::augment::{AugmentError, ParaphraseProvider};
use crate::baseline::Baseline;
use crate::pipeline::{Backend, BackendSelection};
use crate::submodel::{
    CandidateSql, ColumnTagger, ColumnTagging, ModelError, SqlGenerator, Submodels, TableScore,
    TableScorer, ValueFiller,
};

/// Stage models served over a [`Transport`]. Cheap to clone.
#[derive(Clone)]
pub struct BridgeClient {
    transport: Arc<dyn Transport>,
}

impl BridgeClient {
    pub fn new(transport: Arc<dyn Transport>) -> BridgeClient {
        BridgeClient { transport }
    }

    pub fn http(base_url: &str, timeout: Duration) -> BridgeClient {
        BridgeClient::new(Arc::new(HttpTransport::new(base_url, timeout)))
    }

    pub fn health(&self) -> Result<Health, BridgeError> {
        let body = self.transport.get("/health")?;
        let h: Health =
            serde_json::from_str(&body).map_err(|e| BridgeError::Protocol(format!("bad health payload: {e}")))?;
        if h.protocol_version != PROTOCOL_VERSION {
            return Err(BridgeError::Version(h.protocol_version));
        }
        Ok(h)
    }

    pub fn call(&self, stage: BridgeStage, input: &str, beam_width: Option<usize>) -> Result<BridgeResponse, BridgeError> {
        let req = BridgeRequest { protocol_version: PROTOCOL_VERSION, stage, input: input.to_string(), beam_width };
        let body = serde_json::to_string(&req).expect("request serializes");
        decode_response(&self.transport.post(stage.endpoint(), &body)?, stage)
    }
}

fn unexpected() -> ModelError {
    ModelError::Contract("response stage differs from request stage".into())
}

impl TableScorer for BridgeClient {
    fn score(&self, input: &str) -> Result<TableScore, ModelError> {
        match self.call(BridgeStage::Table, input, None)?.payload {
            Payload::Table { table, score } => Ok(TableScore { table, score }),
            _ => Err(unexpected()),
        }
    }
}

impl ColumnTagger for BridgeClient {
    fn tag(&self, input: &str) -> Result<ColumnTagging, ModelError> {
        match self.call(BridgeStage::Column, input, None)?.payload {
            Payload::Column { decisions } => Ok(ColumnTagging { decisions }),
            _ => Err(unexpected()),
        }
    }
}

impl SqlGenerator for BridgeClient {
    fn generate(&self, input: &str, beam_width: usize) -> Result<Vec<CandidateSql>, ModelError> {
        match self.call(BridgeStage::Sqlgen, input, Some(beam_width))?.payload {
            Payload::Sqlgen { candidates } => Ok(candidates),
            _ => Err(unexpected()),
        }
    }
}

impl ValueFiller for BridgeClient {
    fn fill(&self, input: &str) -> Result<String, ModelError> {
        match self.call(BridgeStage::Valuefill, input, None)?.payload {
            Payload::Valuefill { output } => Ok(output),
            _ => Err(unexpected()),
        }
    }
}

impl ParaphraseProvider for BridgeClient {
    fn paraphrase(&self, question: &str) -> Result<Vec<(String, f64)>, AugmentError> {
        let resp = self
            .call(BridgeStage::Paraphrase, question, None)
            .map_err(|e| AugmentError::Provider(e.to_string()))?;
        match resp.payload {
            Payload::Paraphrase { paraphrases } => Ok(paraphrases.into_iter().map(|p| (p.text, p.similarity)).collect()),
            _ => Err(AugmentError::Provider("response stage differs from request stage".into())),
        }
    }
}

/// Picks a backend per stage. `bridge` is required when any stage uses it.
pub fn build_submodels(
    selection: &BackendSelection,
    baseline: &Baseline,
    bridge: Option<&BridgeClient>,
) -> Result<Submodels, ModelError> {
    let client = || {
        bridge
            .cloned()
            .ok_or_else(|| ModelError::BackendUnavailable("a stage selects the bridge but no bridge URL is set".into()))
    };
    let local = baseline.submodels();
    Ok(Submodels {
        table: match selection.table {
            Backend::Baseline => local.table,
            Backend::Bridge => Box::new(client()?),
        },
        column: match selection.column {
            Backend::Baseline => local.column,
            Backend::Bridge => Box::new(client()?),
        },
        sqlgen: match selection.sqlgen {
            Backend::Baseline => local.sqlgen,
            Backend::Bridge => Box::new(client()?),
        },
        filler: match selection.valuefill {
            Backend::Baseline => local.filler,
            Backend::Bridge => Box::new(client()?),
        },
    })
}

/// Serves one request body for `endpoint` from in-process models, producing
/// the same bodies a conforming service would. Used to record fixtures and
/// to stand in for the service in tests.
pub fn answer(
    models: &Submodels,
    paraphraser: &dyn ParaphraseProvider,
    model_version: &str,
    endpoint: &str,
    body: &str,
) -> String {
    let error = |code: &str, msg: String| serde_json::to_string(&ErrorResponse::new(code, msg)).expect("serializes");
    let Some(stage) = BridgeStage::from_endpoint(endpoint) else {
        return error("bad_endpoint", format!("no endpoint {endpoint}"));
    };
    let req: BridgeRequest = match serde_json::from_str(body) {
        Ok(r) => r,
        Err(e) => return error("malformed_input", e.to_string()),
    };
    if req.protocol_version != PROTOCOL_VERSION {
        return error("bad_version", format!("protocol {} is not supported", req.protocol_version));
    }
    if req.stage != stage {
        return error("bad_stage", format!("stage {:?} sent to {endpoint}", req.stage));
    }
    let payload = match stage {
        BridgeStage::Table => models.table.score(&req.input).map(|s| Payload::Table { table: s.table, score: s.score }),
        BridgeStage::Column => models.column.tag(&req.input).map(|t| Payload::Column { decisions: t.decisions }),
        BridgeStage::Sqlgen => models
            .sqlgen
            .generate(&req.input, req.beam_width.unwrap_or(1))
            .map(|candidates| Payload::Sqlgen { candidates }),
        BridgeStage::Valuefill => models.filler.fill(&req.input).map(|output| Payload::Valuefill { output }),
        BridgeStage::Paraphrase => match paraphraser.paraphrase(&req.input) {
            Ok(ps) => Ok(Payload::Paraphrase {
                paraphrases: ps.into_iter().map(|(text, similarity)| Paraphrase { text, similarity }).collect(),
            }),
            Err(e) => return error("model_error", e.to_string()),
        },
    };
    match payload {
        Ok(payload) => serde_json::to_string(&BridgeResponse {
            protocol_version: PROTOCOL_VERSION,
            model_version: model_version.to_string(),
            payload,
        })
        .expect("serializes"),
        Err(e) => error("model_error", e.to_string()),
    }
}

/// A transport that never leaves the process: requests are answered by
/// [`answer`] over the wrapped models.
pub struct LoopbackTransport {
    models: Submodels,
    paraphraser: Box<dyn ParaphraseProvider>,
    model_version: String,
}

impl LoopbackTransport {
    pub fn new(models: Submodels, paraphraser: Box<dyn ParaphraseProvider>, model_version: &str) -> Self {
        LoopbackTransport { models, paraphraser, model_version: model_version.to_string() }
    }
}

impl Transport for LoopbackTransport {
    fn post(&self, endpoint: &str, body: &str) -> Result<String, BridgeError> {
        Ok(answer(&self.models, self.paraphraser.as_ref(), &self.model_version, endpoint, body))
    }

    fn get(&self, endpoint: &str) -> Result<String, BridgeError> {
        if endpoint != "/health" {
            return Ok(serde_json::to_string(&ErrorResponse::new("bad_endpoint", endpoint)).expect("serializes"));
        }
        let h = Health {
            protocol_version: PROTOCOL_VERSION,
            status: "ok".into(),
            model_version: self.model_version.clone(),
        };
        Ok(serde_json::to_string(&h).expect("serializes"))
    }
}
