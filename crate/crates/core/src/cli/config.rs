//! TOML config files merged under command-line flags.
//!
//! Top-level keys set the common flags; a table named after a subcommand sets
//! that subcommand's flags. A value given on the command line wins over the
//! file, which wins over the built-in default.

use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

pub fn read_config(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.parse::<toml::Table>()
        .map_err(|e| Error::format(path, 0, e.message().to_string()))
}

pub fn to_table<T: Serialize>(value: &T) -> Result<toml::Table> {
    toml::Table::try_from(value).map_err(|e| Error::invalid(format!("config not representable: {e}")))
}

/// Overlays `file` onto `parsed` for every key not set on the command line.
/// Keys of `file` whose value is a table are skipped when `skip_tables` is set,
/// so subcommand sections do not leak into the common flags.
pub fn merge<T: Serialize + DeserializeOwned>(
    parsed: &T,
    command: &Command,
    matches: &ArgMatches,
    file: Option<&toml::Table>,
    skip_tables: bool,
) -> Result<T> {
    let mut table = to_table(parsed)?;
    if let Some(file) = file {
        let known: Vec<&str> = command.get_arguments().map(|a| a.get_id().as_str()).collect();
        for (key, value) in file {
            if skip_tables && value.is_table() {
                continue;
            }
            if key == "config" || !known.contains(&key.as_str()) {
                return Err(Error::invalid(format!("unknown config key `{key}`")));
            }
            if matches.value_source(key) != Some(ValueSource::CommandLine) {
                table.insert(key.clone(), value.clone());
            }
        }
    }
    T::deserialize(table).map_err(|e| Error::invalid(format!("bad config value: {e}")))
}
