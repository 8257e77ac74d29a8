//! JSON-over-HTTP v1 surface of the lesson bench.

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::registry::SessionRegistry;
use super::session::{verify_transcript, Mode, SessionOp, Transcript};
use crate::compute::{compute_request, ComputeOp, ComputeRequest};
use crate::error::Error;
use crate::matrix::Matrix;
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

pub fn status_for(e: &Error) -> StatusCode {
    match e {
        Error::UnknownSession(_) => StatusCode::NOT_FOUND,
        Error::GoalReached => StatusCode::CONFLICT,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody { code: self.0.code().into(), message: self.0.to_string() };
        (status_for(&self.0), Json(body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, Error> {
    serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("request body: {e}")))
}

fn reply<S: Serialize>(x: S) -> ApiResult {
    Ok(Json(serde_json::to_value(x).expect("responses serialize")))
}

#[derive(Deserialize)]
struct CreateBody {
    matrix: Matrix<Rational>,
    mode: Mode,
}

#[derive(Deserialize)]
struct OpBody {
    op: SessionOp,
}

#[derive(Deserialize)]
struct VerifyBody {
    transcript: Transcript,
}

async fn create(State(reg): State<Arc<SessionRegistry>>, bytes: Bytes) -> ApiResult {
    let b: CreateBody = body(&bytes)?;
    let state = reg.create(b.matrix, b.mode)?;
    reply(serde_json::json!({ "id": state.id, "state": state }))
}

async fn get_state(State(reg): State<Arc<SessionRegistry>>, Path(id): Path<String>) -> ApiResult {
    reply(reg.state(&id)?)
}

async fn apply(State(reg): State<Arc<SessionRegistry>>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let b: OpBody = body(&bytes)?;
    reply(reg.apply(&id, b.op)?)
}

async fn hint(State(reg): State<Arc<SessionRegistry>>, Path(id): Path<String>) -> ApiResult {
    reply(reg.hint(&id)?)
}

async fn whatif(State(reg): State<Arc<SessionRegistry>>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let b: OpBody = body(&bytes)?;
    reply(reg.whatif(&id, &b.op)?)
}

async fn export(State(reg): State<Arc<SessionRegistry>>, Path(id): Path<String>) -> ApiResult {
    reply(reg.export(&id)?)
}

async fn verify(bytes: Bytes) -> ApiResult {
    let b: VerifyBody = body(&bytes)?;
    let session = verify_transcript(&b.transcript)?;
    reply(serde_json::json!({ "valid": true, "steps": session.history().len(), "status": session.status() }))
}

async fn compute(Path(op): Path<String>, bytes: Bytes) -> ApiResult {
    let op: ComputeOp = op.parse()?;
    let req: ComputeRequest = body(&bytes)?;
    Ok(Json(compute_request(op, &req)?))
}

pub fn router(registry: Arc<SessionRegistry>) -> Router {
    Router::new()
        .route("/v1/session", post(create))
        .route("/v1/session/{id}", get(get_state))
        .route("/v1/session/{id}/op", post(apply))
        .route("/v1/session/{id}/hint", post(hint))
        .route("/v1/session/{id}/whatif", post(whatif))
        .route("/v1/session/{id}/export", get(export))
        .route("/v1/verify", post(verify))
        .route("/v1/compute/{op}", post(compute))
        .with_state(registry)
}

/// Serves until Ctrl-C, purging idle sessions once a minute.
pub async fn serve(addr: SocketAddr, registry: Arc<SessionRegistry>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let purger = Arc::clone(&registry);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            purger.purge_expired();
        }
    });
    axum::serve(listener, router(registry))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
