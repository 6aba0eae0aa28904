use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use moralplan_cli::server::router;
use serde_json::{json, Value};
use tower::ServiceExt;

const STEP_FIVE: &str = "The man could refrain from action. This would be permissible under the do-no-harm principle because this way the death of the five persons is not caused by his action. Alternatively, the man could pull the lever. Doing so is impermissible under the do-no-harm principle because this way the death of the one person is caused by his action.";

async fn call(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, "POST", uri, Some(body.to_string())).await
}

async fn with_trolley() -> (Router, String) {
    let app = router(Arc::default());
    let (status, body) = call(&app, "POST", "/models", Some(moralplan::document::trolley_json().to_string())).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    assert_eq!(body["actions"], json!(["pull", "refrain"]));
    (app, body["id"].as_str().unwrap().to_string())
}

#[tokio::test]
async fn model_round_trips() {
    let (app, id) = with_trolley().await;
    let (status, doc) = call(&app, "GET", &format!("/models/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["variables"], json!(["5willdie", "1willdie", "done"]));
    assert_eq!(doc["verbalizations"]["subject"], "the man");
}

#[tokio::test]
async fn default_session_starts_with_pull() {
    let (app, model) = with_trolley().await;
    let (status, s) = post(&app, "/sessions", json!({ "model": model })).await;
    assert_eq!(status, StatusCode::CREATED, "{s}");
    assert_eq!(s["current_plan"], json!(["pull"]));
    assert_eq!(s["judgments"].as_array().unwrap().len(), 3);
    let verdicts: Vec<bool> = s["judgments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|j| j["permissible"].as_bool().unwrap())
        .collect();
    assert_eq!(verdicts, [true, true, false]);
}

#[tokio::test]
async fn full_dialogue() {
    let (app, model) = with_trolley().await;
    let (_, s) = post(
        &app,
        "/sessions",
        json!({ "model": model, "plan": ["refrain"], "principle": "do-no-harm" }),
    )
    .await;
    let sid = s["id"].as_str().unwrap().to_string();
    let questions = format!("/sessions/{sid}/questions");

    let (status, ce) = post(
        &app,
        &questions,
        json!({ "constraint": { "kind": "include", "action": "pull" }, "principle": "do-no-harm" }),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{ce}");
    assert_eq!(ce["fallback_used"], true);
    assert_eq!(ce["hplan"], json!(["pull"]));
    assert_eq!(ce["rendered"], STEP_FIVE);
    assert_eq!(ce["alternative"]["necessary"], json!(["Caused(1willdie)"]));

    let (status, ce) = post(
        &app,
        &questions,
        json!({ "constraint": { "kind": "include", "action": "pull" }, "principle": "utilitarianism" }),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ce["fallback_used"], false);
    assert!(ce["rendered"]
        .as_str()
        .unwrap()
        .ends_with("permissible under the utilitarianism principle because five saved lives is better than one saved life."));

    let (status, s) = post(&app, &format!("/sessions/{sid}/adopt"), json!({ "plan": ["pull"] })).await;
    assert_eq!(status, StatusCode::OK, "{s}");
    assert_eq!(s["current_plan"], json!(["pull"]));

    let (status, s) = call(&app, "GET", &format!("/sessions/{sid}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s["current_plan"], json!(["pull"]));
    assert_eq!(s["history"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn errors_map_to_statuses() {
    let (app, model) = with_trolley().await;
    let (_, s) = post(&app, "/sessions", json!({ "model": model })).await;
    let sid = s["id"].as_str().unwrap().to_string();

    let (status, e) = post(
        &app,
        &format!("/sessions/{sid}/questions"),
        json!({ "constraint": { "kind": "before", "first": "pull", "second": "pull" }, "principle": "deontology" }),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{e}");
    assert_eq!(e["error"], "invalid_constraint");

    // `stuck` needs a fact nothing produces, so no plan can include it.
    let stuck = json!({
        "variables": ["key", "g"],
        "actions": [
            { "label": "go", "eff": ["g"] },
            { "label": "stuck", "pre": ["key"], "eff": ["g"] }
        ],
        "goal": ["g"]
    });
    let (_, m) = post(&app, "/models", stuck).await;
    let (_, s2) = post(&app, "/sessions", json!({ "model": m["id"] })).await;
    let (status, e) = post(
        &app,
        &format!("/sessions/{}/questions", s2["id"].as_str().unwrap()),
        json!({ "constraint": { "kind": "include", "action": "stuck" }, "principle": "deontology" }),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{e}");
    assert_eq!(e["error"], "contrast_case_infeasible");

    let (status, e) = call(&app, "GET", "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(e["error"], "not_found");

    let (status, _) = post(&app, "/sessions", json!({ "model": "m999" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, e) = call(&app, "POST", "/models", Some("{ not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(e["error"], "parse_error");

    let (status, e) = post(&app, &format!("/sessions/{sid}/adopt"), json!({ "plan": ["fly"] })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(e["error"], "unknown_action");

    let (status, e) = post(
        &app,
        &format!("/sessions/{sid}/questions"),
        json!({ "constraint": { "kind": "principle", "principle": "deontology" }, "principle": "deontology" }),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{e}");
}

#[tokio::test]
async fn adopt_then_history() {
    let (app, model) = with_trolley().await;
    let (_, s) = post(&app, "/sessions", json!({ "model": model, "plan": ["refrain"] })).await;
    let sid = s["id"].as_str().unwrap().to_string();
    post(
        &app,
        &format!("/sessions/{sid}/questions"),
        json!({ "constraint": { "kind": "exclude", "action": "refrain" }, "principle": "deontology" }),
    )
    .await;
    post(&app, &format!("/sessions/{sid}/adopt"), json!({ "plan": ["pull"] })).await;
    let (_, s) = call(&app, "GET", &format!("/sessions/{sid}"), None).await;
    assert_eq!(s["history"].as_array().unwrap().len(), 1);
    assert_eq!(s["history"][0]["hplan"], json!(["pull"]));
    assert_eq!(s["current_plan"], json!(["pull"]));
}
