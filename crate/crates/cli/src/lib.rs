//! Subcommands of the `omnitrack` binary.

pub mod config;
pub mod cubemap;
pub mod evaluate;
pub mod generate;
pub mod report;
pub mod sample;
pub mod selftest;
pub mod stats;

pub use config::{BenchConfig, Overrides, Resolved};
pub use cubemap::cmd_cubemap;
pub use evaluate::cmd_evaluate;
pub use generate::cmd_generate;
pub use report::cmd_report;
pub use sample::cmd_sample_tracker;
pub use selftest::cmd_selftest;
pub use stats::cmd_stats;

/// Recorded in every manifest written by the tool.
pub const ARTIFACT_VERSION: &str = concat!("omnitrack ", env!("CARGO_PKG_VERSION"));

pub(crate) fn hex(bytes: &[u8]) -> String {
    use std::fmt::Write as _;
    bytes
        .iter()
        .fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}
