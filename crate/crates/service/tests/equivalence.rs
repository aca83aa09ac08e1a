use std::sync::Arc;

use ats_core::{generate_streams, run_replay, CourseModel, Engine, Scenario};
use ats_service::{spawn_server, AppState, HttpBackend};

#[test]
fn in_process_and_http_replays_agree() {
    let course = CourseModel::canonical();
    let dir = tempfile::tempdir().unwrap();
    generate_streams(&Scenario::demo(&course, 9), &course, dir.path()).unwrap();

    let local = run_replay(dir.path(), &course, &Engine::in_memory()).unwrap();

    let state = AppState::new(Arc::new(Engine::in_memory()), "t", 4).unwrap();
    let server = spawn_server(state, "127.0.0.1:0").unwrap();
    let http = HttpBackend::new(&server.base_url(), "t").unwrap();
    let remote = run_replay(dir.path(), &course, &http).unwrap();
    server.shutdown().unwrap();

    assert!(local.clip_count() > 0);
    assert_eq!(local.to_json().unwrap(), remote.to_json().unwrap());
}
