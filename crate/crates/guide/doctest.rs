//! Doc-test shim for the guide in `book/`.
//!
//! mdBook renders the chapters but cannot execute them; including each
//! chapter as rustdoc makes `cargo test --doc` compile and run every
//! `rust` code fence, so the book cannot drift from the library. Each
//! chapter gets its own module so a failing listing names its chapter.

#[doc = include_str!("../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../book/src/archive-store.md")]
pub mod archive_store {}

#[doc = include_str!("../../book/src/export-format.md")]
pub mod export_format {}

#[doc = include_str!("../../book/src/fork-detection.md")]
pub mod fork_detection {}

#[doc = include_str!("../../book/src/motive-classification.md")]
pub mod motive_classification {}

#[doc = include_str!("../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../book/src/appendix-formats.md")]
pub mod appendix_formats {}
