//! Knowledge-graph embeddings for driving-scene context understanding.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! - [`kg`]: an interned triple store with vocabularies, per-relation and
//!   type indexes, statistics, and a tab-separated text format.
//! - [`scene`]: parsing of scene-annotation datasets and emission of a scene
//!   knowledge graph over the `includes` / `isParticipantOf` ontology
//!   structure.
//! - [`model`]: scoring functions and analytic gradients for TransE, RESCAL,
//!   and HolE over a shared parameter representation.
//! - [`train`]: negative-sampling margin-ranking SGD with deterministic
//!   seeding, entity-ball normalization, and an optional hogwild mode.
//! - [`eval`]: intrinsic quality metrics (categorization, coherence,
//!   semantic transitional distance) with per-class/per-relation reports.
//! - [`analytics`]: nearest neighbors, most-similar scene pairs, and exact
//!   t-SNE / PCA projection to 2D.
//! - [`synth`]: seeded generators for clustered synthetic scene datasets,
//!   used by tests and benchmarks.
//!
//! The crate is `no_std`-compatible (`alloc` required): disable default
//! features and enable `libm`. The `std` feature adds wall-clock epoch
//! timing and multi-threaded training; `fft` adds an `O(d log d)` circular
//! correlation path used by HolE at higher dimensions.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("skge-core needs either the `std` or the `libm` feature for float math");

pub mod analytics;
pub mod eval;
pub mod kg;
pub mod linalg;
pub mod model;
pub mod scene;
pub mod synth;
pub mod train;

mod fmath;
