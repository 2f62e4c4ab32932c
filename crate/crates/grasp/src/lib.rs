//! Command-line front end and read-only report server for `grasp-core`.

pub mod cli;
pub mod server;
