//! Flat key-value config files and the resolved run configuration.
//!
//! A config file is a flat TOML table whose keys are the long flag names
//! without the leading dashes (`omega-max = 0.5`). Flags win over the file.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::path::Path;

use nonthermal::cascade::CascadePolicy;
use nonthermal::{BlackHoleState, Error, GridSpec, Normalization};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub struct Resolver {
    table: toml::Table,
    used: RefCell<BTreeSet<String>>,
}

impl Resolver {
    pub fn empty() -> Self {
        Resolver {
            table: toml::Table::new(),
            used: RefCell::default(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))?;
        if let Some((k, _)) = table.iter().find(|(_, v)| v.is_table()) {
            return Err(Error::Usage(format!("config key `{k}`: nested tables are not supported")));
        }
        Ok(Resolver {
            table,
            used: RefCell::default(),
        })
    }

    /// Flag value if given, else the file value, else `None`.
    pub fn get<T: DeserializeOwned>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, Error> {
        self.used.borrow_mut().insert(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| Error::Usage(format!("config key `{key}`: {e}"))),
        }
    }

    pub fn or<T: DeserializeOwned>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, Error> {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    pub fn require<T: DeserializeOwned>(&self, key: &str, flag: Option<T>) -> Result<T, Error> {
        self.get(key, flag)?
            .ok_or_else(|| Error::Usage(format!("--{key} is required")))
    }

    pub fn parsed<T>(&self, key: &str, flag: Option<String>, default: &str) -> Result<T, Error>
    where
        T: std::str::FromStr<Err = Error>,
    {
        self.or(key, flag, default.to_string())?.parse()
    }

    /// Reject file keys that no flag of the running command consumed.
    pub fn finish(&self) -> Result<(), Error> {
        let used = self.used.borrow();
        match self.table.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(Error::Usage(format!("unknown config key `{k}` for this command"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Cascade,
    Verify,
    Typicality,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TypicalitySetup {
    pub levels: usize,
    pub degeneracy: u64,
    pub dim_o: u64,
    pub n_seeds: u64,
}

/// Everything that determines the bytes of a run's outputs. Output paths
/// and worker count are deliberately absent.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<BlackHoleState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_spec: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<CascadePolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub typicality: Option<TypicalitySetup>,
}

impl RunConfig {
    pub fn new(command: Command, seed: u64) -> Self {
        RunConfig {
            command,
            state: None,
            grid_spec: None,
            normalization: None,
            policy: None,
            n_samples: None,
            seed,
            suite: None,
            typicality: None,
        }
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolver(text: &str) -> Resolver {
        Resolver {
            table: text.parse().unwrap(),
            used: RefCell::default(),
        }
    }

    #[test]
    fn flag_overrides_file() {
        let r = resolver("mass = 2\nbins = 8");
        assert_eq!(r.or("mass", Some(3.0), 1.0).unwrap(), 3.0);
        assert_eq!(r.or::<f64>("mass", None, 1.0).unwrap(), 2.0);
        assert_eq!(r.or::<usize>("bins", None, 64).unwrap(), 8);
        assert_eq!(r.or::<f64>("alpha", None, 0.0).unwrap(), 0.0);
        r.finish().unwrap();
    }

    #[test]
    fn unknown_and_mistyped_keys_are_usage_errors() {
        let r = resolver("mass = 2\nbogus = 1");
        r.get::<f64>("mass", None).unwrap();
        assert!(matches!(r.finish(), Err(Error::Usage(_))));
        let r = resolver("bins = \"many\"");
        assert!(matches!(r.get::<usize>("bins", None), Err(Error::Usage(_))));
    }

    #[test]
    fn hash_depends_on_seed() {
        let a = RunConfig::new(Command::Verify, 1);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
