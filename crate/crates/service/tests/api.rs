use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use inscribe_service::{app, ServiceConfig, SOLVE_SECONDS_HEADER};
use serde_json::{json, Value};
use tower::ServiceExt;

fn service() -> Router {
    app(ServiceConfig {
        solver_threads: Some(2),
        ..ServiceConfig::default()
    })
}

async fn call(router: Router, req: Request<Body>) -> (StatusCode, Value, axum::http::HeaderMap) {
    let resp = router.oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let body = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, body, headers)
}

async fn post(router: Router, path: &str, body: &str) -> (StatusCode, Value, axum::http::HeaderMap) {
    let req = Request::post(path)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    call(router, req).await
}

async fn get(router: Router, path: &str) -> (StatusCode, Value) {
    let (s, b, _) = call(router, Request::get(path).body(Body::empty()).unwrap()).await;
    (s, b)
}

fn circle() -> Value {
    json!({"K": 1, "coeffs": [{"k": 1, "re": 1.0, "im": 0.0}]})
}

fn is_api_error(body: &Value, code: &str) -> bool {
    body["code"] == code && body["message"].is_string()
}

#[tokio::test]
async fn solve_pinwheel_into_circle() {
    let (_, config) = get(service(), "/api/pinwheel?n=3&theta=0.7").await;
    let body = json!({"curve": circle(), "config": config, "degree": 2, "opts": {"n_starts": 1500, "seed": 1}});
    let (status, report, headers) = post(service(), "/api/solve", &body.to_string()).await;
    assert_eq!(status, StatusCode::OK, "{report}");
    assert!(headers.contains_key(SOLVE_SECONDS_HEADER));
    assert!(report.get("wall_time").is_none());
    let found = report["inscriptions"].as_array().unwrap().iter().any(|ins| {
        let c = ins["poly"].as_array().unwrap();
        let m = |i: usize| c[i][0].as_f64().unwrap().hypot(c[i][1].as_f64().unwrap());
        m(0) < 1e-6 && (m(1) - 1.0).abs() < 1e-6 && m(2) < 1e-6
    });
    assert!(found);
}

#[tokio::test]
async fn identical_requests_give_identical_bodies() {
    let body = json!({
        "curve": {"K": 2, "coeffs": [{"k": 1, "re": 1.0, "im": 0.0}, {"k": -1, "re": 0.2, "im": 0.1}]},
        "config": {"alpha": [[1, 0], [-1, 0]], "beta": [[0, 1], [0, -1]]},
        "opts": {"n_starts": 400, "seed": 5}
    })
    .to_string();
    let (_, a, _) = post(service(), "/api/solve", &body).await;
    let (_, b, _) = post(service(), "/api/solve", &body).await;
    assert_eq!(a, b);
    assert!(!a["inscriptions"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn colinear_gives_empty_report() {
    let body = json!({
        "curve": circle(),
        "config": {"alpha": [[-2.5, 0], [-0.5, 0], [1.5, 0]], "beta": [[-1.5, 0], [0.5, 0], [2.5, 0]]},
        "degree": 2,
        "opts": {"n_starts": 2000}
    });
    let (status, report, _) = post(service(), "/api/solve", &body.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    assert!(report["inscriptions"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn solve_errors() {
    let figure_eight = json!({"K": 2, "coeffs": [{"k": 1, "re": 1.0, "im": 0.0}, {"k": -1, "re": 0.0, "im": 0.0}, {"k": 2, "re": 1.0, "im": 0.0}]});
    let config = json!({"alpha": [[1, 0], [-1, 0]], "beta": [[0, 1], [0, -1]]});
    let (status, body, _) = post(service(), "/api/solve", &json!({"curve": figure_eight, "config": config}).to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_api_error(&body, "InvalidCurve"), "{body}");

    let (status, body, _) = post(service(), "/api/solve", "{not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_api_error(&body, "MalformedJson"));

    let big = json!({"curve": circle(), "config": config, "opts": {"n_starts": 2_000_000}});
    let (status, body, _) = post(service(), "/api/solve", &big.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_api_error(&body, "RequestTooLarge"));

    let pts: Vec<Value> = (0..9).map(|k| json!([k as f64, 0.0])).collect();
    let beta: Vec<Value> = (0..9).map(|k| json!([k as f64, 1.0])).collect();
    let wide = json!({"curve": circle(), "config": {"alpha": pts, "beta": beta}});
    let (status, body, _) = post(service(), "/api/solve", &wide.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_api_error(&body, "RequestTooLarge"));

    let repeated = json!({"alpha": [[1, 0], [1, 0]], "beta": [[0, 1], [0, -1]]});
    let (status, body, _) = post(service(), "/api/solve", &json!({"curve": circle(), "config": repeated}).to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_api_error(&body, "RepeatedPoints"), "{body}");

    let (status, body, _) = post(
        service(),
        "/api/solve",
        &json!({"curve": circle(), "config": config, "degree": 4}).to_string(),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_api_error(&body, "DegreeMismatch"));
}

#[tokio::test]
async fn deadline_truncates() {
    let router = app(ServiceConfig {
        deadline: Duration::ZERO,
        ..ServiceConfig::default()
    });
    let body = json!({
        "curve": circle(),
        "config": {"alpha": [[1, 0], [-1, 0]], "beta": [[0, 1], [0, -1]]},
        "opts": {"n_starts": 5000}
    });
    let (status, report, _) = post(router, "/api/solve", &body.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report["truncated"], Value::Bool(true));
}

#[tokio::test]
async fn load_is_shed_when_no_slot_is_free() {
    let router = app(ServiceConfig {
        max_jobs: 1,
        deadline: Duration::from_secs(2),
        ..ServiceConfig::default()
    });
    let body = json!({
        "curve": circle(),
        "config": {"alpha": [[-2.5, 0], [-0.5, 0], [1.5, 0]], "beta": [[-1.5, 0], [0.5, 0], [2.5, 0]]},
        "opts": {"n_starts": 200000}
    })
    .to_string();
    let slow = {
        let (router, body) = (router.clone(), body.clone());
        tokio::spawn(async move { post(router, "/api/solve", &body).await })
    };
    tokio::time::sleep(Duration::from_millis(200)).await;
    let (status, err, _) = post(router, "/api/solve", &body).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert!(is_api_error(&err, "Overloaded"));
    slow.abort();
}

#[tokio::test]
async fn curve_fit() {
    let points: Vec<Value> = (0..64)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 64.0;
            json!([t.cos(), t.sin()])
        })
        .collect();
    let (status, body, _) = post(service(), "/api/curve/fit", &json!({"points": points}).to_string()).await;
    assert_eq!(status, StatusCode::OK);
    let c1 = body["curve"]["coeffs"].as_array().unwrap().iter().find(|c| c["k"] == 1).unwrap();
    assert!((c1["re"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(body["validation"]["turning_number"], 1);

    let (status, body, _) = post(service(), "/api/curve/fit", r#"{"points": [[0,0],[1,0],[0,1]]}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_api_error(&body, "TooFewPoints"));

    // a figure eight traced twice through the crossing
    let scribble: Vec<Value> = (0..80)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 80.0;
            json!([t.sin(), (2.0 * t).sin() / 2.0])
        })
        .collect();
    let (status, body, _) = post(service(), "/api/curve/fit", &json!({"points": scribble}).to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_api_error(&body, "FitProducesInvalidCurve"));
}

#[tokio::test]
async fn pinwheel_and_forms() {
    let (status, cfg) = get(service(), "/api/pinwheel?n=3&theta=1.0472").await;
    assert_eq!(status, StatusCode::OK);
    for side in ["alpha", "beta"] {
        for p in cfg[side].as_array().unwrap() {
            assert!((p[0].as_f64().unwrap().hypot(p[1].as_f64().unwrap()) - 1.0).abs() < 1e-12);
        }
    }
    let (status, body) = get(service(), "/api/pinwheel?n=3&theta=3.0").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_api_error(&body, "ThetaOutOfRange"));
    let (status, body) = get(service(), "/api/pinwheel?n=three").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["code"].is_string());

    let (_, square) = get(service(), "/api/pinwheel?n=2&theta=1.5707963267948966").await;
    let (status, forms, _) = post(service(), "/api/forms", &square.to_string()).await;
    assert_eq!(status, StatusCode::OK, "{forms}");
    for key in ["lambda", "mu"] {
        for v in forms[key].as_array().unwrap() {
            assert!((v.as_f64().unwrap() - 2.0).abs() < 1e-9);
        }
    }
    assert!(forms["oracle"]["max_relative_diff"].as_f64().unwrap() < 1e-8);

    let scrambled = json!({"alpha": [[1, 0], [0, 1]], "beta": [[-1, 0], [0, -1]]});
    let (status, body, _) = post(service(), "/api/forms", &scrambled.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(is_api_error(&body, "NotInterleaved"), "{body}");
}

#[tokio::test]
async fn verify_and_health() {
    let (status, report, _) = post(service(), "/api/verify", r#"{"suite": "maslov", "n_trials": 10}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report["pass"], Value::Bool(true));
    assert!(report["rows"].as_array().unwrap().iter().all(|r| r["pass"] == true));

    let (status, body, _) = post(service(), "/api/verify", r#"{"suite": "nope"}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_api_error(&body, "InvalidOption"));

    let (status, health) = get(service(), "/healthz").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(health["status"], "ok");
    assert!(health["version"].is_string());

    let (status, body) = get(service(), "/nowhere").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(is_api_error(&body, "NotFound"));
}
