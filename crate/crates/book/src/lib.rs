//! The guide in `book/src`, compiled as doc comments so `cargo test` runs
//! every snippet.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/history.md")]
pub mod history {}
#[doc = include_str!("../../../book/src/success-and-age.md")]
pub mod success_and_age {}
#[doc = include_str!("../../../book/src/mtbtf.md")]
pub mod mtbtf {}
#[doc = include_str!("../../../book/src/indicators.md")]
pub mod indicators {}
#[doc = include_str!("../../../book/src/timing.md")]
pub mod timing {}
#[doc = include_str!("../../../book/src/gates-and-heatmaps.md")]
pub mod gates_and_heatmaps {}
#[doc = include_str!("../../../book/src/synthetic-data.md")]
pub mod synthetic_data {}
#[doc = include_str!("../../../book/src/file-formats.md")]
pub mod file_formats {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
