use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use matrixfirst::bench::{http::router, RegistryConfig, SessionRegistry};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> axum::Router {
    router(Arc::new(SessionRegistry::new(RegistryConfig::default()).unwrap()))
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

async fn raw(app: &axum::Router, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::builder().method("POST").uri(uri).body(Body::from(body.to_owned())).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

#[tokio::test]
async fn session_lifecycle() {
    let app = app();
    let (st, v) = call(&app, "POST", "/v1/session", Some(json!({"matrix": [[0, 2], [1, 1]], "mode": "reduce_to_rref"}))).await;
    assert_eq!(st, StatusCode::OK);
    let id = v["id"].as_str().unwrap().to_owned();
    assert_eq!(id.len(), 32);
    assert_eq!(v["state"]["status"], "in_progress");

    let (st, hint) = call(&app, "POST", &format!("/v1/session/{id}/hint"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(hint["suggested_op"], json!({"kind": "Swap", "i": 0, "j": 1}));

    let (_, w) = call(&app, "POST", &format!("/v1/session/{id}/whatif"), Some(json!({"op": hint["suggested_op"]}))).await;
    assert_eq!(w["would_reach_goal"], false);
    let (_, s) = call(&app, "GET", &format!("/v1/session/{id}"), None).await;
    assert_eq!(s["step_count"], 0);

    let ops = [
        json!({"kind": "Swap", "i": 0, "j": 1}),
        json!({"kind": "Scale", "i": 1, "factor": "1/2"}),
        json!({"kind": "AddMultiple", "src": 1, "factor": "-1", "dst": 0}),
    ];
    let mut last = Value::Null;
    for op in ops {
        let (st, v) = call(&app, "POST", &format!("/v1/session/{id}/op"), Some(json!({ "op": op }))).await;
        assert_eq!(st, StatusCode::OK);
        assert_eq!(v["accepted"], true, "{v}");
        last = v;
    }
    assert_eq!(last["state"]["status"], "goal_reached");
    assert_eq!(last["state"]["current"]["data"], json!([["1", "0"], ["0", "1"]]));
    assert_eq!(last["state"]["det"]["holds"], true);

    let (st, e) = call(&app, "POST", &format!("/v1/session/{id}/hint"), None).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(e["code"], "goal_reached");

    let (st, t) = call(&app, "GET", &format!("/v1/session/{id}/export"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(t["steps"].as_array().unwrap().len(), 3);
    let (st, v) = call(&app, "POST", "/v1/verify", Some(json!({ "transcript": t }))).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["valid"], true);

    let mut bad = t.clone();
    bad["steps"][1]["after"][1][1] = json!("2");
    let (st, e) = call(&app, "POST", "/v1/verify", Some(json!({ "transcript": bad }))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "replay_mismatch");
}

#[tokio::test]
async fn illegal_move_keeps_state() {
    let app = app();
    let (_, v) = call(&app, "POST", "/v1/session", Some(json!({"matrix": [[1, 2], [3, 4]], "mode": "ref"}))).await;
    let id = v["id"].as_str().unwrap().to_owned();
    let hash = v["state"]["hash"].clone();
    for op in [json!({"kind": "Scale", "i": 0, "factor": "0"}), json!({"kind": "Swap", "i": 0, "j": 5})] {
        let (st, r) = call(&app, "POST", &format!("/v1/session/{id}/op"), Some(json!({ "op": op }))).await;
        assert_eq!(st, StatusCode::OK);
        assert_eq!(r["accepted"], false);
        assert_eq!(r["state"]["hash"], hash);
        assert_eq!(r["state"]["step_count"], 0);
    }
}

#[tokio::test]
async fn krylov_session() {
    let app = app();
    let body = json!({"matrix": [[2, 0], [0, 3]], "mode": {"krylov": {"b": ["1", "1"]}}});
    let (st, v) = call(&app, "POST", "/v1/session", Some(body)).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    let id = v["id"].as_str().unwrap().to_owned();
    let mut state = v["state"].clone();
    while state["status"] == "in_progress" {
        let (_, r) = call(&app, "POST", &format!("/v1/session/{id}/op"), Some(json!({"op": {"kind": "NextIterate"}}))).await;
        assert_eq!(r["accepted"], true);
        state = r["state"].clone();
    }
    assert_eq!(state["annihilator"], "x^2 - 5x + 6");
}

#[tokio::test]
async fn errors_have_codes() {
    let app = app();
    let (st, e) = call(&app, "GET", "/v1/session/deadbeef", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(e["code"], "unknown_session");

    let (st, e) = raw(&app, "/v1/session", "{not json").await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "parse_error");

    let (st, e) = call(&app, "POST", "/v1/session", Some(json!({"matrix": [[1, 2], [3]], "mode": "ref"}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert!(e["message"].as_str().is_some());

    let (st, e) = call(&app, "POST", "/v1/compute/frobnicate", Some(json!({"matrix": [[1]]}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert!(e["code"].is_string());
}

#[tokio::test]
async fn compute_endpoints() {
    let app = app();
    let (st, v) = call(&app, "POST", "/v1/compute/inv", Some(json!({"matrix": [[1, 2], [2, 4]]}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "singular_matrix");

    let (st, v) = call(&app, "POST", "/v1/compute/det", Some(json!({"matrix": [[1, 2], [3, 4]]}))).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["det"], "-2");

    let (_, v) = call(&app, "POST", "/v1/compute/minpoly", Some(json!({"matrix": [[1, 1], [0, 1]]}))).await;
    assert!(v.to_string().contains("x^2 - 2x + 1"), "{v}");

    let (st, v) = call(
        &app,
        "POST",
        "/v1/compute/lstsq",
        Some(json!({"matrix": [[1, 0], [0, 1], [1, 1]], "args": {"domain": "float", "b": [1, 1, 0]}})),
    )
    .await;
    assert_eq!(st, StatusCode::OK, "{v}");
    let x: Vec<f64> = v["x"].as_array().unwrap().iter().map(|e| e.as_f64().unwrap()).collect();
    assert!((x[0] - 1.0 / 3.0).abs() < 1e-12 && (x[1] - 1.0 / 3.0).abs() < 1e-12, "{x:?}");

    let (st, v) = call(&app, "POST", "/v1/compute/eig", Some(json!({"matrix": [[0, -1], [1, 0]]}))).await;
    assert_eq!(st, StatusCode::OK);
    let evs = v["eigenvalues"].as_array().unwrap();
    assert_eq!(evs.len(), 2);
    assert!((evs[0]["im"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
