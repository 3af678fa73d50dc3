use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use story_core::evaluation::evaluate;
use story_core::graph::GraphDocument;
use story_core::{LevelConstraints, NarrativeGraph, Snapshot, TropeClass};
use story_service::{router, EliteView, ServiceConfig, SessionInfo, SessionManager, TargetAck};
use tower::ServiceExt;

fn config() -> ServiceConfig {
    ServiceConfig {
        initial_population: 80,
        offspring_per_generation: 8,
        cell_capacity: 5,
        stream_interval: Duration::from_millis(200),
        ..ServiceConfig::default()
    }
}

fn app_with(config: ServiceConfig) -> (Router, Arc<SessionManager>) {
    let manager = Arc::new(SessionManager::open(config).unwrap());
    (router(manager.clone()), manager)
}

fn app() -> Router {
    app_with(config()).0
}

async fn send(app: &Router, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_owned())))
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

async fn json_of<T: serde::de::DeserializeOwned>(app: &Router, method: Method, uri: &str, body: Option<&str>) -> T {
    let (status, value) = send(app, method, uri, body).await;
    assert!(status.is_success(), "{uri}: {status} {value}");
    serde_json::from_value(value).unwrap()
}

async fn create(app: &Router, body: Option<&str>) -> String {
    let (status, value) = send(app, Method::POST, "/sessions", body).await;
    assert_eq!(status, StatusCode::CREATED, "{value}");
    value["id"].as_str().unwrap().to_owned()
}

async fn paused(app: &Router, body: Option<&str>) -> String {
    let id = create(app, body).await;
    let _: SessionInfo = json_of(app, Method::POST, &format!("/sessions/{id}/pause"), None).await;
    id
}

fn last_step_doc() -> String {
    include_str!("../../experiments/data/exp4_5.graph.json").to_owned()
}

fn two_heroes_doc() -> String {
    json!({
        "nodes": [
            {"id": "a", "trope": "HERO"},
            {"id": "c", "trope": "CONFLICT"},
            {"id": "b", "trope": "NEO"}
        ],
        "edges": [
            {"src": "a", "dst": "c", "kind": "PLAIN"},
            {"src": "c", "dst": "b", "kind": "PLAIN"}
        ]
    })
    .to_string()
}

#[tokio::test]
async fn create_without_body_targets_default_graph() {
    let app = app();
    let id = create(&app, None).await;
    let ack: TargetAck = json_of(&app, Method::GET, &format!("/sessions/{id}/target"), None).await;
    assert_eq!(ack.graph, NarrativeGraph::default_graph().to_document());
    assert_eq!(ack.evaluation.interestingness, 0.0);
    assert_eq!(ack.evaluation.coherence, 1.0);
    assert_eq!(ack.patterns["ConfP"], 1);
    let info: SessionInfo = json_of(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(info.status, story_service::Status::Running);
    assert_eq!(info.dims.selected, ["step", "interestingness"]);
}

#[tokio::test]
async fn sessions_are_isolated() {
    let app = app();
    let a = paused(&app, None).await;
    let b = paused(&app, None).await;
    assert_ne!(a, b);
    let _: TargetAck = json_of(&app, Method::PUT, &format!("/sessions/{a}/target"), Some(&last_step_doc())).await;
    let other: TargetAck = json_of(&app, Method::GET, &format!("/sessions/{b}/target"), None).await;
    assert_eq!(other.graph, NarrativeGraph::default_graph().to_document());
    let ids: Vec<String> = json_of(&app, Method::GET, "/sessions", None).await;
    assert_eq!(ids.len(), 2);
}

#[tokio::test]
async fn target_updates_are_scored() {
    let app = app();
    let id = create(&app, None).await;
    let ack: TargetAck = json_of(&app, Method::PUT, &format!("/sessions/{id}/target"), Some(&last_step_doc())).await;
    assert!((ack.evaluation.interestingness - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(ack.patterns["APD"], 1);
    // Read-your-writes.
    let read: TargetAck = json_of(&app, Method::GET, &format!("/sessions/{id}/target"), None).await;
    assert_eq!(read.graph, ack.graph);
    let ack: TargetAck = json_of(
        &app,
        Method::PUT,
        &format!("/sessions/{id}/target"),
        Some(&NarrativeGraph::default_graph().to_json()),
    )
    .await;
    assert_eq!(ack.evaluation.interestingness, 0.0);
}

#[tokio::test]
async fn over_budget_target_is_marked_infeasible() {
    let app = app();
    let body = json!({"constraints": {"heroes": 1, "enemies": 2, "quest_items": 2}}).to_string();
    let id = paused(&app, Some(&body)).await;
    let ack: TargetAck = json_of(&app, Method::PUT, &format!("/sessions/{id}/target"), Some(&two_heroes_doc())).await;
    assert!(!ack.evaluation.feasible);
    assert_eq!(ack.evaluation.violations, vec![story_core::Violation::Heroes]);
}

#[tokio::test]
async fn invalid_documents_are_rejected() {
    let app = app();
    let id = paused(&app, None).await;
    let uri = format!("/sessions/{id}/target");
    let dangling = json!({
        "nodes": [{"id": "a", "trope": "HERO"}],
        "edges": [{"src": "a", "dst": "ghost", "kind": "PLAIN"}]
    })
    .to_string();
    for bad in ["{", "{\"nodes\": []", &dangling, "{\"nodes\": [], \"edges\": []}"] {
        let (status, body) = send(&app, Method::PUT, &uri, Some(bad)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
        assert_eq!(body["error"], "invalid_document");
    }
    let (_, body) = send(&app, Method::PUT, &uri, Some(&dangling)).await;
    assert!(body["message"].as_str().unwrap().contains("integrity"), "{body}");
    let ack: TargetAck = json_of(&app, Method::GET, &uri, None).await;
    assert_eq!(ack.graph, NarrativeGraph::default_graph().to_document());
    let (status, _) = send(&app, Method::POST, "/sessions", Some(&dangling.replace("nodes", "graph"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_session_is_not_found() {
    let app = app();
    for (method, uri) in [
        (Method::GET, "/sessions/nope"),
        (Method::GET, "/sessions/nope/target"),
        (Method::GET, "/sessions/nope/grid"),
        (Method::GET, "/sessions/nope/cells/0/0"),
        (Method::POST, "/sessions/nope/pause"),
        (Method::GET, "/sessions/nope/stream"),
    ] {
        let (status, body) = send(&app, method, uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(body["error"], "unknown_session");
    }
}

#[tokio::test]
async fn grid_reports_projection_coverage() {
    let app = app();
    let id = paused(&app, None).await;
    let snap: Snapshot = json_of(&app, Method::GET, &format!("/sessions/{id}/grid"), None).await;
    assert_eq!(snap.granularity, 5);
    assert!(!snap.grid.is_empty());
    assert_eq!(snap.coverage, snap.grid.len() as f64 / 25.0);
    for c in &snap.grid {
        assert!(c.cell.iter().all(|&v| v < 5));
        assert!((0.0..=1.0).contains(&c.fitness));
    }
    let other: Snapshot =
        json_of(&app, Method::GET, &format!("/sessions/{id}/grid?x=diversity&y=conflicts"), None).await;
    assert_eq!(other.dims, [story_core::Dimension::Diversity, story_core::Dimension::Conflicts]);
    let (status, _) = send(&app, Method::GET, &format!("/sessions/{id}/grid?x=colour&y=step"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = send(&app, Method::GET, &format!("/sessions/{id}/grid?x=step"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn elite_views_match_client_side_evaluation() {
    let app = app();
    let body = json!({"constraints": {"heroes": 2, "enemies": 2, "quest_items": 2}}).to_string();
    let id = paused(&app, Some(&body)).await;
    let target: TargetAck = json_of(&app, Method::GET, &format!("/sessions/{id}/target"), None).await;
    let target = NarrativeGraph::try_from(target.graph).unwrap();
    let budgets = LevelConstraints {
        heroes: 2,
        enemies: 2,
        quest_items: 2,
    };
    let snap: Snapshot = json_of(&app, Method::GET, &format!("/sessions/{id}/grid"), None).await;
    for c in &snap.grid {
        let view: EliteView =
            json_of(&app, Method::GET, &format!("/sessions/{id}/cells/{}/{}", c.cell[0], c.cell[1]), None).await;
        let g = NarrativeGraph::try_from(view.graph.clone()).unwrap();
        let eval = evaluate::<f64>(&g, &target, Some(&budgets));
        assert!(eval.feasible);
        assert_eq!(view.fitness, eval.fitness);
        assert_eq!(view.coherence, eval.coherence);
        assert_eq!(view.interestingness, eval.dimensions.get(story_core::Dimension::Interestingness));
        assert_eq!(view.fitness, c.fitness);
        assert_eq!(view.digest, c.digest);
        assert_eq!(view.digest, g.canonical_hash());
        assert!(view.patterns.values().sum::<usize>() >= g.node_count());
    }
}

#[tokio::test]
async fn empty_cells_have_no_elite() {
    let app = app();
    let id = paused(&app, None).await;
    let snap: Snapshot = json_of(&app, Method::GET, &format!("/sessions/{id}/grid"), None).await;
    let empty = (0..5)
        .flat_map(|x| (0..5).map(move |y| [x, y]))
        .find(|c| snap.grid.iter().all(|g| g.cell != *c))
        .expect("a small archive leaves some cell empty");
    for method in [Method::GET, Method::POST] {
        let suffix = if method == Method::POST { "/adopt" } else { "" };
        let uri = format!("/sessions/{id}/cells/{}/{}{suffix}", empty[0], empty[1]);
        let (status, body) = send(&app, method, &uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND);
        assert_eq!(body["error"], "no_elite");
    }
}

#[tokio::test]
async fn adopting_an_elite_makes_it_the_target() {
    let app = app();
    let id = paused(&app, None).await;
    let snap: Snapshot = json_of(&app, Method::GET, &format!("/sessions/{id}/grid"), None).await;
    let cell = snap.grid.iter().max_by_key(|c| c.cell[0]).unwrap().cell;
    let view: EliteView = json_of(&app, Method::GET, &format!("/sessions/{id}/cells/{}/{}", cell[0], cell[1]), None).await;
    let ack: TargetAck =
        json_of(&app, Method::POST, &format!("/sessions/{id}/cells/{}/{}/adopt", cell[0], cell[1]), None).await;
    assert_eq!(ack.digest, view.digest);
    assert_eq!(ack.graph, view.graph);
    let target: TargetAck = json_of(&app, Method::GET, &format!("/sessions/{id}/target"), None).await;
    assert_eq!(target.digest, view.digest);
    let after: Snapshot = json_of(&app, Method::GET, &format!("/sessions/{id}/grid"), None).await;
    assert!(after.grid.iter().any(|c| c.cell[0] == 0), "identity individual sits at step 0");
}

#[tokio::test]
async fn dimensions_can_be_switched() {
    let app = app();
    let id = paused(&app, None).await;
    let uri = format!("/sessions/{id}/dimensions");
    let body = json!({"selected": ["diversity", "plot_points", "step"], "granularity": 4}).to_string();
    let info: SessionInfo = json_of(&app, Method::PUT, &uri, Some(&body)).await;
    assert_eq!(info.dims.granularity, 4);
    assert_eq!(info.dims.selected, ["diversity", "plot_points", "step"]);
    let snap: Snapshot = json_of(&app, Method::GET, &format!("/sessions/{id}/grid"), None).await;
    assert_eq!(snap.granularity, 4);
    assert_eq!(snap.dims, [story_core::Dimension::Diversity, story_core::Dimension::PlotPoints]);
    for bad in [
        json!({"selected": ["step", "sparkle"]}),
        json!({"selected": ["step"], "granularity": 1}),
        json!({"selected": []}),
    ] {
        let (status, body) = send(&app, Method::PUT, &uri, Some(&bad.to_string())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
        assert_eq!(body["error"], "invalid_request");
    }
}

#[tokio::test]
async fn constraint_changes_reclassify() {
    let app = app();
    let id = paused(&app, None).await;
    let uri = format!("/sessions/{id}/constraints");
    let loose: SessionInfo = json_of(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    let tight = json!({"heroes": 0, "enemies": 9, "quest_items": 9}).to_string();
    let info: SessionInfo = json_of(&app, Method::PUT, &uri, Some(&tight)).await;
    assert!(info.feasible < loose.feasible);
    assert_eq!(info.individuals, loose.individuals);
    let snap: Snapshot = json_of(&app, Method::GET, &format!("/sessions/{id}/grid"), None).await;
    for c in &snap.grid {
        let view: EliteView =
            json_of(&app, Method::GET, &format!("/sessions/{id}/cells/{}/{}", c.cell[0], c.cell[1]), None).await;
        let g = NarrativeGraph::try_from(view.graph).unwrap();
        assert_eq!(g.count_class(TropeClass::Hero), 0);
    }
    let relaxed: SessionInfo = json_of(&app, Method::PUT, &uri, Some("null")).await;
    assert_eq!(relaxed.constraints, None);
    assert!(relaxed.feasible >= info.feasible);
    let (status, _) = send(&app, Method::PUT, &uri, Some("{\"heroes\": -1, \"enemies\": 0, \"quest_items\": 0}")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn pause_freezes_generations() {
    let app = app();
    let id = create(&app, None).await;
    tokio::time::sleep(Duration::from_millis(200)).await;
    let info: SessionInfo = json_of(&app, Method::POST, &format!("/sessions/{id}/pause"), None).await;
    tokio::time::sleep(Duration::from_millis(300)).await;
    let later: SessionInfo = json_of(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(later.generation, info.generation);
    let _: SessionInfo = json_of(&app, Method::POST, &format!("/sessions/{id}/resume"), None).await;
    let start = Instant::now();
    loop {
        let now: SessionInfo = json_of(&app, Method::GET, &format!("/sessions/{id}"), None).await;
        if now.generation > info.generation {
            break;
        }
        assert!(start.elapsed() < Duration::from_secs(20), "no progress after resume");
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
}

async fn next_event(body: &mut Body, buffer: &mut String, wait: Duration) -> Option<Snapshot> {
    let deadline = tokio::time::Instant::now() + wait;
    loop {
        if let Some(end) = buffer.find("\n\n") {
            let event: String = buffer.drain(..end + 2).collect();
            let data = event.lines().find_map(|l| l.strip_prefix("data: "));
            match data {
                Some(d) => return Some(serde_json::from_str(d).unwrap()),
                None => continue,
            }
        }
        let frame = tokio::time::timeout_at(deadline, body.frame()).await.ok()??.ok()?;
        if let Ok(data) = frame.into_data() {
            buffer.push_str(std::str::from_utf8(&data).unwrap());
        }
    }
}

#[tokio::test]
async fn stream_is_throttled_and_ordered() {
    let app = app();
    let id = create(&app, None).await;
    let req = Request::get(format!("/sessions/{id}/stream")).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "text/event-stream");
    let mut body = resp.into_body();
    let mut buffer = String::new();
    let mut seen = Vec::new();
    for _ in 0..4 {
        let snap = next_event(&mut body, &mut buffer, Duration::from_secs(20)).await.expect("event");
        seen.push((Instant::now(), snap.generation));
    }
    for w in seen.windows(2) {
        assert!(w[1].1 > w[0].1, "generations increase: {:?}", seen.iter().map(|s| s.1).collect::<Vec<_>>());
        assert!(w[1].0 - w[0].0 >= Duration::from_millis(180), "events are spaced");
    }

    let _: SessionInfo = json_of(&app, Method::POST, &format!("/sessions/{id}/pause"), None).await;
    // At most one snapshot already in flight, then silence.
    let _ = next_event(&mut body, &mut buffer, Duration::from_millis(450)).await;
    assert!(next_event(&mut body, &mut buffer, Duration::from_millis(600)).await.is_none());
}

#[test]
fn default_stream_interval_is_one_second() {
    assert_eq!(ServiceConfig::default().stream_interval, Duration::from_secs(1));
}

#[tokio::test]
async fn restart_restores_sessions_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config();
    cfg.state_dir = Some(dir.path().to_owned());
    let (app, manager) = app_with(cfg.clone());
    let body = json!({
        "constraints": {"heroes": 2, "enemies": 2, "quest_items": 3},
        "dims": {"selected": ["step", "interestingness", "diversity"], "granularity": 6}
    })
    .to_string();
    let id = create(&app, Some(&body)).await;
    tokio::time::sleep(Duration::from_millis(200)).await;
    let _: TargetAck = json_of(&app, Method::PUT, &format!("/sessions/{id}/target"), Some(&last_step_doc())).await;
    let _: SessionInfo = json_of(&app, Method::POST, &format!("/sessions/{id}/pause"), None).await;
    let before = manager.get(&id).unwrap().call(|w| w.state_json()).await.unwrap();
    let info_before: SessionInfo = json_of(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    let grid_before: Snapshot = json_of(&app, Method::GET, &format!("/sessions/{id}/grid"), None).await;
    tokio::task::spawn_blocking(move || manager.shutdown()).await.unwrap();
    let saved = std::fs::read_to_string(dir.path().join(format!("{id}.session.json"))).unwrap();
    assert_eq!(saved, before);

    let (app, manager) = app_with(cfg);
    let after = manager.get(&id).unwrap().call(|w| w.state_json()).await.unwrap();
    assert_eq!(after, before);
    let info_after: SessionInfo = json_of(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(info_after, info_before);
    assert_eq!(info_after.constraints.unwrap().quest_items, 3);
    let grid_after: Snapshot = json_of(&app, Method::GET, &format!("/sessions/{id}/grid"), None).await;
    assert_eq!(grid_after, grid_before);
    let target: TargetAck = json_of(&app, Method::GET, &format!("/sessions/{id}/target"), None).await;
    let expected: GraphDocument = serde_json::from_str(&last_step_doc()).unwrap();
    assert_eq!(target.graph, expected);
    // New sessions do not reuse restored ids.
    let fresh = create(&app, None).await;
    assert_ne!(fresh, id);
}

#[tokio::test]
async fn deleting_a_session_removes_its_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config();
    cfg.state_dir = Some(dir.path().to_owned());
    let (app, _manager) = app_with(cfg);
    let id = paused(&app, None).await;
    let file = dir.path().join(format!("{id}.session.json"));
    assert!(file.exists());
    let (status, _) = send(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    assert!(!file.exists());
    let (status, _) = send(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
