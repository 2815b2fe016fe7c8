//! Configuration files, history CSVs and binary field snapshots.

pub mod config;
pub mod history;
pub mod snapshot;

pub use config::{load_config, parse_config, RunConfig};
pub use history::{parse_history_csv, read_history_csv, write_history_csv, HistoryWriter, HISTORY_HEADER};
pub use snapshot::{read_snapshot, read_snapshot_from, write_snapshot, write_snapshot_to};
