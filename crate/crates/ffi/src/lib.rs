//! C ABI over the stepsql pipeline.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free`. Every call returns a [`StepsqlStatus`]; on failure the
//! message is available from [`stepsql_last_error`] on the same thread until
//! the next call. Strings returned through out-parameters are freed with
//! [`stepsql_string_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stepsql::baseline::{Baseline, BaselineConfig, TriggerTable};
use stepsql::bridge::build_submodels;
use stepsql::pipeline::{Pipeline, PipelineConfig};
use stepsql::schema::Schema;
use stepsql::sql::{logic_form_equal, parse_sql};

/// Result code of every C entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepsqlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    InvalidSchema = 4,
    InvalidConfig = 5,
    InvalidSql = 6,
    StageFailed = 7,
    Panic = 8,
}

/// A loaded database schema.
pub struct StepsqlSchema {
    schema: Schema,
}

/// A pipeline with heuristic backends over one schema.
pub struct StepsqlPipeline {
    pipeline: Pipeline,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    // interior NULs would truncate the message on the C side
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

type Failure = (StepsqlStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> StepsqlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StepsqlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            StepsqlStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((StepsqlStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (StepsqlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn out_ptr<T>(out: *mut T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err((StepsqlStatus::NullArgument, format!("{what} is null")));
    }
    Ok(())
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NULs removed").into_raw()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next stepsql call on the same thread.
#[no_mangle]
pub extern "C" fn stepsql_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn stepsql_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a schema JSON file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stepsql_schema_load(path: *const c_char, out: *mut *mut StepsqlSchema) -> StepsqlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let path = text(path, "path")?;
        let json = std::fs::read_to_string(path).map_err(|e| (StepsqlStatus::Io, format!("{path}: {e}")))?;
        let schema = Schema::from_json(&json).map_err(|e| (StepsqlStatus::InvalidSchema, e.to_string()))?;
        *out = Box::into_raw(Box::new(StepsqlSchema { schema }));
        Ok(())
    })
}

/// Parses a schema from JSON text.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stepsql_schema_from_json(json: *const c_char, out: *mut *mut StepsqlSchema) -> StepsqlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let json = text(json, "json")?;
        let schema = Schema::from_json(json).map_err(|e| (StepsqlStatus::InvalidSchema, e.to_string()))?;
        *out = Box::into_raw(Box::new(StepsqlSchema { schema }));
        Ok(())
    })
}

/// Number of tables in the schema, or 0 for NULL.
///
/// # Safety
/// `schema` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stepsql_schema_table_count(schema: *const StepsqlSchema) -> usize {
    schema.as_ref().map_or(0, |s| s.schema.tables.len())
}

/// # Safety
/// `schema` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stepsql_schema_free(schema: *mut StepsqlSchema) {
    if !schema.is_null() {
        drop(Box::from_raw(schema));
    }
}

/// Builds a pipeline over a copy of `schema`. `config_json` is NULL for
/// defaults or a JSON object with pipeline settings; bridge backends are not
/// available here.
///
/// # Safety
/// `schema` must be a live handle; `config_json` NULL or NUL-terminated;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stepsql_pipeline_new(
    schema: *const StepsqlSchema,
    config_json: *const c_char,
    out: *mut *mut StepsqlPipeline,
) -> StepsqlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let schema = schema
            .as_ref()
            .ok_or((StepsqlStatus::NullArgument, "schema is null".to_string()))?;
        let config: PipelineConfig = if config_json.is_null() {
            PipelineConfig::default()
        } else {
            serde_json::from_str(text(config_json, "config_json")?)
                .map_err(|e| (StepsqlStatus::InvalidConfig, e.to_string()))?
        };
        config.validate().map_err(|e| (StepsqlStatus::InvalidConfig, e))?;
        let baseline = Baseline::with_config(
            schema.schema.clone(),
            TriggerTable::default(),
            BaselineConfig { mode: config.mode, ..BaselineConfig::default() },
        );
        let models = build_submodels(&config.backends, &baseline, None)
            .map_err(|e| (StepsqlStatus::InvalidConfig, e.to_string()))?;
        let pipeline = Pipeline::new(schema.schema.clone(), models, config);
        *out = Box::into_raw(Box::new(StepsqlPipeline { pipeline }));
        Ok(())
    })
}

/// # Safety
/// `pipeline` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stepsql_pipeline_free(pipeline: *mut StepsqlPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Translates `question`. On success `*out_sql` receives a string to release
/// with [`stepsql_string_free`]; on a stage failure the status is
/// `STEPSQL_STATUS_STAGE_FAILED` and the last error names the stage.
///
/// # Safety
/// `pipeline` must be a live handle; `question` NUL-terminated; `out_sql`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn stepsql_pipeline_ask(
    pipeline: *const StepsqlPipeline,
    question: *const c_char,
    out_sql: *mut *mut c_char,
) -> StepsqlStatus {
    guard(|| {
        out_ptr(out_sql, "out_sql")?;
        let p = pipeline
            .as_ref()
            .ok_or((StepsqlStatus::NullArgument, "pipeline is null".to_string()))?;
        let q = text(question, "question")?;
        let out = p.pipeline.run(q).map_err(|e| (StepsqlStatus::StageFailed, e.to_string()))?;
        *out_sql = c_string(out.sql.to_string());
        Ok(())
    })
}

/// Compares two queries by logic form (order-insensitive select list and
/// conjuncts) after resolving both against `schema`.
///
/// # Safety
/// `schema` must be a live handle; `a`, `b` NUL-terminated; `out_equal`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn stepsql_logic_form_equal(
    schema: *const StepsqlSchema,
    a: *const c_char,
    b: *const c_char,
    out_equal: *mut bool,
) -> StepsqlStatus {
    guard(|| {
        out_ptr(out_equal, "out_equal")?;
        let s = schema
            .as_ref()
            .ok_or((StepsqlStatus::NullArgument, "schema is null".to_string()))?;
        let parse = |p, what| {
            parse_sql(text(p, what)?, &s.schema).map_err(|e| (StepsqlStatus::InvalidSql, format!("{what}: {e}")))
        };
        let (qa, qb) = (parse(a, "a")?, parse(b, "b")?);
        *out_equal = logic_form_equal(&qa, &qb);
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stepsql_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
