//! Scenario configuration, persistence and command entry points.

mod persist;

pub use persist::{to_json_string, write_json};
