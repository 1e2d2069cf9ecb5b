//! Configuration, CSV handling and the `fundadmin` command line.

mod cli;
pub mod config;
pub mod csvio;
pub mod format;

pub use cli::{run_cli, CliError};
pub use config::{parse_config, ConfigError, RawConfig, RunConfig, SweepGrid};
pub use csvio::{
    read_annual_csv, read_calibration_csv, write_report_csv, write_sweep_csv, CsvError,
};
