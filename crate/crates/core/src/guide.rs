//! The narrative guide, shared with the rendered book.
//!
//! Each module below embeds one chapter of `book/src/`, so the book's
//! code blocks run as doctests and the two cannot drift apart without
//! failing `cargo test --doc`. Render the book itself with
//! `mdbook build book`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/stable-laws.md")]
pub mod stable_laws {}

#[doc = include_str!("../../../book/src/actions-and-triplets.md")]
pub mod actions_and_triplets {}

#[doc = include_str!("../../../book/src/markov-fields.md")]
pub mod markov_fields {}

#[doc = include_str!("../../../book/src/decompositions-and-ledgers.md")]
pub mod decompositions_and_ledgers {}

#[doc = include_str!("../../../book/src/verdicts-and-diagnostics.md")]
pub mod verdicts_and_diagnostics {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
