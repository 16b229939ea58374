//! Stateless JSON API over the inscription library.
//!
//! Every error body is an [`ApiError`]. Solves and verification runs go to
//! the blocking pool behind a semaphore; when it is exhausted the request
//! is shed with 503 rather than queued.

use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use inscribe_core::config::{make_pinwheel, ConfigDocument};
use inscribe_core::curves::{fit_from_polyline, Polyline, DEFAULT_BANDWIDTH};
use inscribe_core::io::SolveDocument;
use inscribe_core::solver::MAX_SOLVER_N;
use inscribe_core::symplectic::{cross_ratio_oracle, diagonal_forms};
use inscribe_core::verify::{run_suite, Suite};
use inscribe_core::{CurveValidationReport, JordanCurve, PointConfig};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::sync::{OwnedSemaphorePermit, Semaphore};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub const MAX_STARTS: usize = 1_000_000;
pub const MAX_TRIALS: usize = 10_000;
pub const MAX_BANDWIDTH: usize = 256;
pub const SOLVE_SECONDS_HEADER: &str = "x-solve-seconds";

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Per-request solver deadline; longer solves return truncated reports.
    pub deadline: Duration,
    /// Concurrent blocking jobs before load shedding.
    pub max_jobs: usize,
    /// Solver threads per request; `None` shares the global pool.
    pub solver_threads: Option<usize>,
    /// Allowed CORS origin; `None` allows any.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            deadline: Duration::from_secs(30),
            max_jobs: std::thread::available_parallelism().map_or(2, |n| n.get()),
            solver_threads: None,
            cors_origin: None,
        }
    }
}

impl ServiceConfig {
    /// Reads `INSCRIBE_DEADLINE_SECS`, `INSCRIBE_MAX_JOBS`,
    /// `INSCRIBE_THREADS` and `INSCRIBE_CORS_ORIGIN`, keeping defaults for
    /// unset or unparsable values.
    pub fn from_env() -> Self {
        let mut cfg = ServiceConfig::default();
        let num = |key: &str| std::env::var(key).ok().and_then(|v| v.trim().parse::<u64>().ok()).filter(|v| *v > 0);
        if let Some(s) = num("INSCRIBE_DEADLINE_SECS") {
            cfg.deadline = Duration::from_secs(s);
        }
        if let Some(j) = num("INSCRIBE_MAX_JOBS") {
            cfg.max_jobs = j as usize;
        }
        cfg.solver_threads = num("INSCRIBE_THREADS").map(|t| t as usize);
        cfg.cors_origin = std::env::var("INSCRIBE_CORS_ORIGIN").ok().filter(|s| !s.is_empty());
        cfg
    }
}

#[derive(Clone)]
struct AppState {
    config: Arc<ServiceConfig>,
    jobs: Arc<Semaphore>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    #[serde(skip)]
    status: u16,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            code: code.to_string(),
            message: message.into(),
            detail: None,
            status: status.as_u16(),
        }
    }

    fn malformed(e: serde_json::Error) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "MalformedJson", e.to_string())
    }

    fn too_large(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "RequestTooLarge", message)
    }
}

impl From<inscribe_core::Error> for ApiError {
    fn from(e: inscribe_core::Error) -> Self {
        use inscribe_core::Error as E;
        let status = match e {
            E::Json(_) | E::MalformedCurve(_) | E::InvalidOption(_) | E::TooFewPoints { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let detail = match &e {
            E::InvalidCurve(r) | E::FitProducesInvalidCurve(r) => serde_json::to_value(r).ok(),
            _ => None,
        };
        ApiError {
            detail,
            ..ApiError::new(status, e.code(), e.to_string())
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(ApiError::malformed)
}

impl AppState {
    fn permit(&self) -> ApiResult<OwnedSemaphorePermit> {
        self.jobs.clone().try_acquire_owned().map_err(|_| {
            ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "Overloaded", "all solver slots are busy; retry later")
        })
    }

    /// Runs `job` on the blocking pool while holding a job slot.
    async fn blocking<T, F>(&self, job: F) -> ApiResult<T>
    where
        T: Send + 'static,
        F: FnOnce() -> ApiResult<T> + Send + 'static,
    {
        let permit = self.permit()?;
        let out = tokio::task::spawn_blocking(move || {
            let _permit = permit;
            job()
        })
        .await;
        out.unwrap_or_else(|e| {
            log::error!("blocking job failed: {e}");
            Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", "solver task failed"))
        })
    }
}

async fn solve(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let mut req = parse::<SolveDocument>(&body)?.into_request()?;
    let n = req.config.n();
    if n > MAX_SOLVER_N {
        return Err(ApiError::too_large(format!("n = {n} exceeds the limit of {MAX_SOLVER_N}")));
    }
    let starts = req.opts.starts_for(n);
    if starts > MAX_STARTS {
        return Err(ApiError::too_large(format!("n_starts = {starts} exceeds the limit of {MAX_STARTS}")));
    }
    req.opts.time_limit = Some(state.config.deadline);
    req.opts.threads = state.config.solver_threads;
    let report = state.blocking(move || Ok(req.solve()?)).await?;
    let seconds = report.wall_time.as_secs_f64();
    let mut value = serde_json::to_value(&report).map_err(ApiError::malformed)?;
    // wall time varies run to run; bodies must not
    if let Some(obj) = value.as_object_mut() {
        obj.remove("wall_time");
    }
    let mut response = Json(value).into_response();
    if let Ok(h) = HeaderValue::from_str(&format!("{seconds:.6}")) {
        response.headers_mut().insert(SOLVE_SECONDS_HEADER, h);
    }
    Ok(response)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FitRequest {
    points: Vec<[f64; 2]>,
    #[serde(default)]
    bandwidth: Option<usize>,
}

#[derive(Serialize)]
struct FitResponse {
    curve: JordanCurve,
    validation: CurveValidationReport,
}

async fn fit_curve(body: Bytes) -> ApiResult<Json<FitResponse>> {
    let req: FitRequest = parse(&body)?;
    let bandwidth = req.bandwidth.unwrap_or(DEFAULT_BANDWIDTH);
    if bandwidth > MAX_BANDWIDTH {
        return Err(ApiError::too_large(format!("bandwidth {bandwidth} exceeds {MAX_BANDWIDTH}")));
    }
    let polyline = Polyline { points: req.points };
    let curve = fit_from_polyline(&polyline.to_complex(), bandwidth)?;
    let validation = curve.validate();
    Ok(Json(FitResponse { curve, validation }))
}

#[derive(Deserialize)]
struct PinwheelQuery {
    n: usize,
    theta: f64,
}

async fn pinwheel(query: Result<Query<PinwheelQuery>, axum::extract::rejection::QueryRejection>) -> ApiResult<Json<PointConfig>> {
    let Query(q) = query.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "MalformedQuery", e.body_text()))?;
    if q.n > MAX_SOLVER_N {
        return Err(ApiError::too_large(format!("n = {} exceeds the limit of {MAX_SOLVER_N}", q.n)));
    }
    Ok(Json(make_pinwheel(q.n, q.theta)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyRequest {
    #[serde(default = "default_suite")]
    suite: String,
    #[serde(default = "default_trials")]
    n_trials: usize,
    #[serde(default)]
    seed: u64,
}

fn default_suite() -> String {
    "all".into()
}

fn default_trials() -> usize {
    50
}

async fn verify(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: VerifyRequest = parse(&body)?;
    let suite: Suite = req.suite.parse()?;
    if req.n_trials == 0 || req.n_trials > MAX_TRIALS {
        return Err(ApiError::too_large(format!("n_trials must be in 1..={MAX_TRIALS}")));
    }
    let report = state.blocking(move || Ok(run_suite(suite, req.n_trials, req.seed))).await?;
    Ok(Json(serde_json::to_value(report).map_err(ApiError::malformed)?))
}

#[derive(Serialize)]
struct OracleComparison {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    /// Largest relative gap between nullspace and closed-form ratios.
    max_relative_diff: f64,
}

#[derive(Serialize)]
struct FormsResponse {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    lambda_raw: Vec<[f64; 2]>,
    mu_raw: Vec<[f64; 2]>,
    singular_values: Vec<f64>,
    nullspace_residual: f64,
    pullback_defect: f64,
    oracle: OracleComparison,
}

async fn forms(body: Bytes) -> ApiResult<Json<FormsResponse>> {
    let config = parse::<ConfigDocument>(&body)?.into_config()?;
    let f = diagonal_forms(&config)?;
    let (lam, mu) = cross_ratio_oracle(&config)?;
    let max_relative_diff = lam
        .iter()
        .zip(&f.lambda_pos)
        .chain(mu.iter().zip(&f.mu_pos))
        .map(|(o, p)| (p / 2.0 - o).abs() / o.abs())
        .fold(0.0, f64::max);
    let pairs = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect();
    Ok(Json(FormsResponse {
        lambda: f.lambda_pos.clone(),
        mu: f.mu_pos.clone(),
        lambda_raw: pairs(&f.lambda_raw),
        mu_raw: pairs(&f.mu_raw),
        singular_values: f.singular_values,
        nullspace_residual: f.nullspace_residual,
        pullback_defect: f.pullback_defect,
        oracle: OracleComparison {
            lambda: lam,
            mu,
            max_relative_diff,
        },
    }))
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    name: &'static str,
    version: &'static str,
    uptime_secs: u64,
}

pub fn app(config: ServiceConfig) -> Router {
    let started = Instant::now();
    let cors = match &config.cors_origin {
        Some(origin) => match HeaderValue::from_str(origin) {
            Ok(h) => CorsLayer::new().allow_origin(AllowOrigin::exact(h)),
            Err(_) => CorsLayer::new().allow_origin(Any),
        },
        None => CorsLayer::new().allow_origin(Any),
    }
    .allow_methods([Method::GET, Method::POST])
    .allow_headers(Any)
    .expose_headers([axum::http::HeaderName::from_static(SOLVE_SECONDS_HEADER)]);
    let state = AppState {
        jobs: Arc::new(Semaphore::new(config.max_jobs.max(1))),
        config: Arc::new(config),
    };
    Router::new()
        .route("/api/solve", post(solve))
        .route("/api/curve/fit", post(fit_curve))
        .route("/api/pinwheel", get(pinwheel))
        .route("/api/verify", post(verify))
        .route("/api/forms", post(forms))
        .route(
            "/healthz",
            get(move || async move {
                Json(Health {
                    status: "ok",
                    name: env!("CARGO_PKG_NAME"),
                    version: env!("CARGO_PKG_VERSION"),
                    uptime_secs: started.elapsed().as_secs(),
                })
            }),
        )
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such route") })
        .layer(cors)
        .with_state(state)
}
