#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use chrono::{DateTime, TimeZone, Utc};
use http_body_util::BodyExt;
use patternquest::clock::ManualClock;
use patternquest::config::ServiceConfig;
use patternquest::http::{router, SEED_HEADER};
use patternquest::{SeedPolicy, Service};
use serde_json::Value;
use tower::ServiceExt;

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 3, 10, 9, 0, 0).unwrap()
}

pub struct App {
    pub router: Router,
    pub clock: Arc<ManualClock>,
}

impl App {
    pub fn open(dir: &Path, clock: Arc<ManualClock>) -> Self {
        Self::with(dir, clock, SeedPolicy::TestMode { base: Some(1) })
    }

    pub fn with(dir: &Path, clock: Arc<ManualClock>, seeds: SeedPolicy) -> Self {
        let service = Service::open(dir, ServiceConfig::default(), clock.clone(), seeds).unwrap();
        Self {
            router: router(Arc::new(service)),
            clock,
        }
    }

    pub async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        self.call_with_seed(method, uri, body, None).await
    }

    pub async fn call_with_seed(
        &self,
        method: Method,
        uri: &str,
        body: Option<Value>,
        seed: Option<u64>,
    ) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(seed) = seed {
            req = req.header(SEED_HEADER, seed.to_string());
        }
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(serde_json::to_vec(&b).unwrap())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|_| panic!("non-JSON body: {:?}", bytes))
        };
        (status, value)
    }

    pub async fn register(&self, name: &str) -> String {
        let (status, body) = self.call(Method::POST, "/players", Some(serde_json::json!({ "name": name }))).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["player_id"].as_str().unwrap().to_string()
    }

    pub async fn start(&self, player: &str, seed: u64) -> String {
        let (status, body) = self
            .call_with_seed(Method::POST, &format!("/players/{player}/sessions"), None, Some(seed))
            .await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["session_id"].as_str().unwrap().to_string()
    }

    /// Rolls, then answers right or wrong on purpose.
    pub async fn turn(&self, sid: &str, correct: bool) -> Value {
        let (status, roll) = self.call(Method::POST, &format!("/sessions/{sid}/roll"), None).await;
        assert_eq!(status, StatusCode::OK, "{roll}");
        let right = correct_index(&roll["card"]);
        let choice = if correct { right } else { (right + 1) % 4 };
        let (status, ans) = self
            .call(Method::POST, &format!("/sessions/{sid}/answer"), Some(serde_json::json!({ "choice": choice })))
            .await;
        assert_eq!(status, StatusCode::OK, "{ans}");
        ans
    }
}

/// The card view hides the answer; the test recovers it from the rule.
pub fn correct_index(card: &Value) -> usize {
    use patternquest_core::{next_term, PatternKind};
    let kind: PatternKind = serde_json::from_value(card["kind"].clone()).unwrap();
    let stem: Vec<i64> = serde_json::from_value(card["stem"].clone()).unwrap();
    let choices: Vec<i64> = serde_json::from_value(card["choices"].clone()).unwrap();
    let answer = next_term(kind, &stem).unwrap();
    choices.iter().position(|&c| c == answer).unwrap()
}

pub const GOLDEN_SEED: u64 = 2024;
pub const GOLDEN_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/happy_path.json");

/// The scripted game behind the golden transcript: register "Ana", start
/// with [`GOLDEN_SEED`], answer the second question wrong and every other one
/// right until the game ends. With `restart_after_roll = Some(k)` the service
/// is dropped and reopened on the same data directory between the roll and
/// the answer of turn `k`.
pub async fn golden_game(dir: &Path, restart_after_roll: Option<usize>) -> Value {
    let clock = Arc::new(ManualClock::new(t0()));
    let mut app = App::open(dir, clock.clone());
    let player = app.register("Ana").await;
    let sid = app.start(&player, GOLDEN_SEED).await;
    let mut turn = 0;
    let last = loop {
        clock.advance(chrono::Duration::seconds(7));
        let (status, roll) = app.call(Method::POST, &format!("/sessions/{sid}/roll"), None).await;
        assert_eq!(status, StatusCode::OK, "{roll}");
        if restart_after_roll == Some(turn) {
            app = App::open(dir, clock.clone());
        }
        let (status, view) = app.call(Method::GET, &format!("/sessions/{sid}"), None).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(view["pending"]["card"], roll["card"]);
        let right = correct_index(&view["pending"]["card"]);
        let choice = if turn == 1 { (right + 1) % 4 } else { right };
        let (status, ans) = app
            .call(Method::POST, &format!("/sessions/{sid}/answer"), Some(serde_json::json!({ "choice": choice })))
            .await;
        assert_eq!(status, StatusCode::OK, "{ans}");
        turn += 1;
        if ans["session"]["phase"] == "Victory" || ans["session"]["phase"] == "GameOver" {
            break ans;
        }
    };
    serde_json::json!({
        "seed": GOLDEN_SEED,
        "phase": last["session"]["phase"],
        "position": last["session"]["position"],
        "lifelines": last["session"]["lifelines"],
        "total_points": last["session"]["total_points"],
        "wallet_points": last["player"]["wallet"]["points"],
        "transcript": last["session"]["transcript"],
    })
}

/// Compares against the stored golden file, rewriting it instead when
/// `PATTERNQUEST_BLESS=1`.
pub fn check_golden(actual: &Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(actual).unwrap() + "\n";
    if std::env::var("PATTERNQUEST_BLESS").as_deref() == Ok("1") {
        std::fs::write(GOLDEN_PATH, &text).unwrap();
        return Ok(());
    }
    let stored = std::fs::read_to_string(GOLDEN_PATH).map_err(|e| format!("{GOLDEN_PATH}: {e}"))?;
    if stored == text {
        Ok(())
    } else {
        Err(format!("transcript differs from {GOLDEN_PATH}:\n{text}"))
    }
}
