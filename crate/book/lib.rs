//! The guide's chapters, compiled so that every listing runs as a doc-test.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/running.md")]
pub mod running {}
#[doc = include_str!("src/configuration.md")]
pub mod configuration {}
#[doc = include_str!("src/time-step.md")]
pub mod time_step {}
#[doc = include_str!("src/monitors.md")]
pub mod monitors {}
#[doc = include_str!("src/material.md")]
pub mod material {}
#[doc = include_str!("src/archives.md")]
pub mod archives {}
