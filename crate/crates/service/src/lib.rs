//! HTTP+JSON front end for the tutoring engine.
//!
//! Learners authenticate with per-learner bearer tokens issued by the admin
//! account; the admin token is set in the service config. Every response is
//! a JSON object with `ok` and either the payload fields or an `error`.

pub mod api;
pub mod client;
pub mod config;
pub mod server;

pub use api::{router, AppState};
pub use client::HttpBackend;
pub use config::ServiceConfig;
pub use server::{build_state, serve, spawn_server, ServerHandle};
