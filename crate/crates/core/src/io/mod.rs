//! Persistence: configuration text, binary snapshots, PGM images, and the
//! file-backed run observer.

pub mod config;
pub mod output;
pub mod pgm;
pub mod snapshot;

pub use config::{parse_config, ConfigError, SimConfig};
pub use output::OutputWriter;
pub use pgm::{encode_pgm, export_image};
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot};
