//! The guide chapters, included as documentation modules so that every code
//! fence in `book/src/*.md` runs under `cargo test --doc` and stays in sync
//! with the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/mobius.md")]
pub mod mobius {}

#[doc = include_str!("../../../book/src/surfaces.md")]
pub mod surfaces {}

#[doc = include_str!("../../../book/src/cocycles.md")]
pub mod cocycles {}

#[doc = include_str!("../../../book/src/canonical.md")]
pub mod canonical_representation {}

#[doc = include_str!("../../../book/src/schottky.md")]
pub mod schottky_systems {}

#[doc = include_str!("../../../book/src/cusps.md")]
pub mod cusps {}

#[doc = include_str!("../../../book/src/srb.md")]
pub mod srb_statistics {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod experiment_runner {}
