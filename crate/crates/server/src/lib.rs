//! HTTP service and command-line front end for `patternquest-core`.
//!
//! [`service::Service`] holds the request logic and talks only to the
//! on-disk store; [`http::router`] exposes it as JSON over HTTP and
//! [`cli`] wires up the `patternquest` binary.

pub mod cli;
pub mod clock;
pub mod config;
pub mod error;
pub mod http;
pub mod service;
pub mod views;

pub use error::ApiError;
pub use service::{SeedPolicy, Service};
