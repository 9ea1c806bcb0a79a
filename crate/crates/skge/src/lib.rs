//! Command-line pipeline and file formats around `skge-core`.
//!
//! This crate owns everything that touches the filesystem: the binary model
//! format with its vocabulary sidecars, scene/ontology JSON loading, run
//! manifests, and the rendered outputs (tables, CSV, SVG).

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;
pub mod manifest;
pub mod render;
