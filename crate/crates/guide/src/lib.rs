//! The book under `book/src`, one module per chapter. mdbook cannot link
//! snippets against workspace crates, so `cargo test --doc` runs them here.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/maps.md")]
pub mod maps {}
#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}
#[doc = include_str!("../../../book/src/agents.md")]
pub mod agents {}
#[doc = include_str!("../../../book/src/planning.md")]
pub mod planning {}
#[doc = include_str!("../../../book/src/heterogeneous.md")]
pub mod heterogeneous {}
#[doc = include_str!("../../../book/src/benchmark.md")]
pub mod benchmark {}
