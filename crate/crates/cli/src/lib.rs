//! The `rdpc` command-line tool: argument grammar, config merging, output
//! rendering and the verification suites.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod verify;
