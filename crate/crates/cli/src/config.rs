//! Key-value config files. Keys mirror the long flag names; a flag given on
//! the command line wins over the file.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::CliError;

pub struct Config {
    table: toml::Table,
    used: BTreeSet<String>,
}

impl Config {
    pub fn empty() -> Self {
        Self {
            table: toml::Table::new(),
            used: BTreeSet::new(),
        }
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::empty());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| CliError::Usage(format!("bad config: {e}")))?;
        Ok(Self {
            table,
            used: BTreeSet::new(),
        })
    }

    /// `cli` if set, otherwise the config value under `key`.
    pub fn pick<T: DeserializeOwned>(
        &mut self,
        cli: Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        self.used.insert(key.to_string());
        if cli.is_some() {
            return Ok(cli);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key:?}: {e}"))),
        }
    }

    /// Boolean switches: set by either source.
    pub fn flag(&mut self, cli: bool, key: &str) -> Result<bool, CliError> {
        Ok(cli || self.pick::<bool>(None, key)?.unwrap_or(false))
    }

    /// Rejects keys the command never asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let unknown: Vec<&str> = self
            .table
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "unknown config keys: {}",
                unknown.join(", ")
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_wins() {
        let mut c = Config::parse("h = 3.0\nk = 1.5\n").unwrap();
        assert_eq!(c.pick(Some(9.0), "h").unwrap(), Some(9.0));
        assert_eq!(c.pick::<f64>(None, "k").unwrap(), Some(1.5));
        assert!(c.finish().is_ok());
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let mut c = Config::parse("h = 3.0\nhopz = 2\n").unwrap();
        c.pick::<f64>(None, "h").unwrap();
        assert!(matches!(c.finish(), Err(CliError::Usage(_))));
    }

    #[test]
    fn type_mismatch_is_reported() {
        let mut c = Config::parse("shots = \"many\"\n").unwrap();
        assert!(c.pick::<u64>(None, "shots").is_err());
    }

    #[test]
    fn lists_and_flags() {
        let mut c = Config::parse("receivers = [1, 2, 3]\ncheck = true\n").unwrap();
        assert_eq!(
            c.pick::<Vec<usize>>(None, "receivers").unwrap(),
            Some(vec![1, 2, 3])
        );
        assert!(c.flag(false, "check").unwrap());
    }
}
