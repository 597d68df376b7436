//! File formats: netpbm images, config files, CSV tables, run manifests.

pub mod config;
pub mod manifest;
pub mod netpbm;
pub mod tables;

pub use config::{ConfigError, RawConfig};
pub use manifest::{adjudicate, RunManifest};
pub use netpbm::{read_pbm, write_pbm, ParseError, PbmFormat, PgmSidecar};
