//! Command-line and HTTP front end for `odqa-core`.

pub mod app;
pub mod server;

pub use app::{load_engine, EngineSources};
pub use server::router;
