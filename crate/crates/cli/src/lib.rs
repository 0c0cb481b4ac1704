//! Command-line front end: file formats and command implementations.

pub mod app;
pub mod files;

pub use app::run;
