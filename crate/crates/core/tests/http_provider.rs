//! Wire-level tests for the HTTP chat provider against a local server:
//! retry/backoff classification, fatal errors with body excerpts, request
//! shape, auth headers, and fail-fast on missing credentials.

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use emoharness::{
    render_prompt, Client, CompletionError, LabelSchema, ProviderConfig, PromptStrategy,
    RenderedPrompt,
};
use serde_json::{json, Value};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, Mutex};

fn schema5() -> LabelSchema {
    LabelSchema::new(["anger", "fear", "joy", "sadness", "surprise"]).unwrap()
}

fn probe_prompt() -> RenderedPrompt {
    render_prompt(
        PromptStrategy::ZeroShot,
        &[],
        "The happy crowd cheered.",
        &schema5(),
    )
    .unwrap()
}

/// What the mock server saw, for request-shape assertions.
#[derive(Default)]
struct Seen {
    hits: AtomicU32,
    auth: Mutex<Option<String>>,
    body: Mutex<Option<Value>>,
}

type ServerState = (Arc<Vec<(StatusCode, Value)>>, Arc<Seen>);

/// Serves `responses[i]` for the i-th request (clamping to the last entry),
/// recording the auth header and JSON body of every request.
async fn spawn_server(responses: Vec<(StatusCode, Value)>) -> (SocketAddr, Arc<Seen>) {
    let seen = Arc::new(Seen::default());
    let state = (Arc::new(responses), seen.clone());

    async fn handle(
        State((responses, seen)): State<ServerState>,
        headers: HeaderMap,
        Json(body): Json<Value>,
    ) -> (StatusCode, Json<Value>) {
        let n = seen.hits.fetch_add(1, Ordering::SeqCst) as usize;
        *seen.auth.lock().unwrap() = headers
            .get("authorization")
            .map(|v| v.to_str().unwrap_or_default().to_string());
        *seen.body.lock().unwrap() = Some(body);
        let (status, payload) = &responses[n.min(responses.len() - 1)];
        (*status, Json(payload.clone()))
    }

    let app = Router::new()
        .route("/v1/chat/completions", post(handle))
        .with_state(state);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
        .await
        .expect("bind test server");
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, app).await.expect("serve");
    });
    (addr, seen)
}

fn chat_payload(text: &str) -> Value {
    json!({
        "choices": [{"message": {"role": "assistant", "content": text}, "finish_reason": "stop"}],
        "model": "test-model"
    })
}

fn config_for(addr: SocketAddr) -> ProviderConfig {
    let mut config = ProviderConfig::http_chat(
        &format!("http://{addr}/v1/chat/completions"),
        "test-model",
    );
    config.max_retries = 3;
    config.base_backoff_secs = 0.01;
    config.request_timeout_secs = 5.0;
    config
}

#[tokio::test]
async fn transient_statuses_are_retried_until_success() {
    let (addr, seen) = spawn_server(vec![
        (StatusCode::TOO_MANY_REQUESTS, json!({"error": "slow down"})),
        (StatusCode::SERVICE_UNAVAILABLE, json!({"error": "warming up"})),
        (StatusCode::OK, chat_payload("Emotions: Joy")),
    ])
    .await;

    let client = Client::from_config(&config_for(addr), None).unwrap();
    let result = client.complete(&probe_prompt()).await.expect("should recover");

    assert_eq!(result.raw_text, "Emotions: Joy");
    assert_eq!(result.attempt_count, 3, "two failures then one success");
    assert!(!result.from_cache);
    assert_eq!(seen.hits.load(Ordering::SeqCst), 3);
}

#[tokio::test]
async fn client_errors_fail_immediately_with_body_excerpt() {
    let (addr, seen) = spawn_server(vec![(
        StatusCode::BAD_REQUEST,
        json!({"error": {"message": "unknown model `test-model`"}}),
    )])
    .await;

    let client = Client::from_config(&config_for(addr), None).unwrap();
    let err = client.complete(&probe_prompt()).await.unwrap_err();

    match err {
        CompletionError::Fatal { attempt, message } => {
            assert_eq!(attempt, 1, "fatal errors must not be retried");
            assert!(
                message.contains("400") && message.contains("unknown model"),
                "error should carry status and body excerpt, got: {message}"
            );
        }
        other => panic!("expected Fatal, got {other:?}"),
    }
    assert_eq!(seen.hits.load(Ordering::SeqCst), 1);
}

#[tokio::test]
async fn persistent_server_errors_exhaust_the_retry_budget() {
    let (addr, seen) = spawn_server(vec![(
        StatusCode::INTERNAL_SERVER_ERROR,
        json!({"error": "boom"}),
    )])
    .await;

    let mut config = config_for(addr);
    config.max_retries = 2;
    let client = Client::from_config(&config, None).unwrap();
    let err = client.complete(&probe_prompt()).await.unwrap_err();

    match err {
        CompletionError::RetriesExhausted {
            attempts, history, ..
        } => {
            assert_eq!(attempts, 3, "1 initial + 2 retries");
            assert_eq!(history.len(), 3, "one message per attempt");
            assert!(history.iter().all(|m| m.contains("500")));
        }
        other => panic!("expected RetriesExhausted, got {other:?}"),
    }
    assert_eq!(seen.hits.load(Ordering::SeqCst), 3);
}

#[tokio::test]
async fn request_carries_bearer_token_model_and_prompt() {
    let (addr, seen) = spawn_server(vec![(StatusCode::OK, chat_payload("Emotions: None"))]).await;

    std::env::set_var("HTTP_PROVIDER_TEST_KEY", "sekrit-token");
    let mut config = config_for(addr);
    config.auth_env_var = Some("HTTP_PROVIDER_TEST_KEY".to_string());
    config.temperature = 0.25;
    config.max_output_tokens = 64;

    let client = Client::from_config(&config, None).unwrap();
    let prompt = probe_prompt();
    client.complete(&prompt).await.expect("request should succeed");

    assert_eq!(
        seen.auth.lock().unwrap().as_deref(),
        Some("Bearer sekrit-token"),
        "API key must travel as a bearer header"
    );
    let body = seen.body.lock().unwrap().clone().expect("body captured");
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["temperature"], 0.25);
    assert_eq!(body["max_tokens"], 64);
    assert_eq!(body["messages"][0]["role"], "user");
    assert_eq!(body["messages"][0]["content"], Value::String(prompt.text.clone()));
}

#[tokio::test]
async fn missing_auth_env_var_fails_before_any_request() {
    let (addr, seen) = spawn_server(vec![(StatusCode::OK, chat_payload("Emotions: None"))]).await;

    let mut config = config_for(addr);
    config.auth_env_var = Some("HTTP_PROVIDER_TEST_KEY_THAT_IS_UNSET".to_string());
    std::env::remove_var("HTTP_PROVIDER_TEST_KEY_THAT_IS_UNSET");

    let err = match Client::from_config(&config, None) {
        Err(e) => e,
        Ok(_) => panic!("client construction should fail without the key"),
    };
    match err {
        CompletionError::Setup(message) => {
            assert!(
                message.contains("HTTP_PROVIDER_TEST_KEY_THAT_IS_UNSET"),
                "error should name the missing variable, got: {message}"
            );
        }
        other => panic!("expected Setup, got {other:?}"),
    }
    assert_eq!(
        seen.hits.load(Ordering::SeqCst),
        0,
        "no request may be sent without credentials"
    );
}

#[tokio::test]
async fn alternate_response_schema_is_understood() {
    // Some gateways answer in the candidates/parts shape instead of choices.
    let (addr, _seen) = spawn_server(vec![(
        StatusCode::OK,
        json!({
            "candidates": [{
                "content": {"parts": [{"text": "Emotions: "}, {"text": "Sadness"}]}
            }]
        }),
    )])
    .await;

    let client = Client::from_config(&config_for(addr), None).unwrap();
    let result = client.complete(&probe_prompt()).await.expect("should parse");
    assert_eq!(result.raw_text, "Emotions: Sadness");
}
