//! The narrative guide from `book/`, attached here so that every code
//! snippet in the chapters runs under `cargo test --doc`.
//!
//! mdBook does not execute Rust snippets against the crate by itself, so
//! the chapters are included as doc comments on empty modules; rustdoc
//! compiles and runs each fenced `rust` block exactly as the book displays
//! it, which keeps the book and the library in sync by construction.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/warped-geometry.md")]
pub mod warped_geometry {}

#[doc = include_str!("../../../book/src/evolution.md")]
pub mod evolution_systems {}

#[doc = include_str!("../../../book/src/certification.md")]
pub mod certification {}

#[doc = include_str!("../../../book/src/global-presentation.md")]
pub mod global_presentation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod command_line {}
