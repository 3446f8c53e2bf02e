//! File-backed workbench around `sciwb-core`: workspace persistence, the
//! `sciwb` command line and the JSON HTTP API.

pub mod cli;
pub mod formats;
pub mod ops;
pub mod seed;
pub mod server;
pub mod workspace;

pub use sciwb_core as core;
pub use workspace::{open_workspace, save_phrasebank, Workspace, WorkspaceError};
