//! Doc-tested chapters of the guide.
//!
//! mdbook cannot run listings against a workspace crate, so each chapter is
//! pulled in here as module docs and `cargo test --doc` runs them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/noise.md")]
pub mod noise {}
#[doc = include_str!("../../../book/src/heat.md")]
pub mod heat {}
#[doc = include_str!("../../../book/src/colehopf.md")]
pub mod colehopf {}
#[doc = include_str!("../../../book/src/weakform.md")]
pub mod weakform {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
