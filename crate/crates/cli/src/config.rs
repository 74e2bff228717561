//! Experiment configuration files.
//!
//! A config is JSON. Unknown keys are rejected at every level, defaults are
//! filled in on load, and [`ExperimentConfig::to_json`] writes the
//! normalized form back out, so load, dump, load is a fixed point.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use privcount_core::harness::{EpochConfig, Mechanism, Owner, SlotPolicy, WriteMode, DEFAULT_CHECKSUM_BITS};
use privcount_core::verify::BlindingKind;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Every mechanism is run on the same populations.
    pub mechanisms: Vec<Mechanism>,
    /// Synthetic populations; exclusive with `dataset`.
    #[serde(default)]
    pub population: Option<PopulationSweep>,
    /// CSV with header `owner_id,value`; exclusive with `population`.
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub epoch: EpochSettings,
    #[serde(default)]
    pub crypto: CryptoMode,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Directory a relative `dataset` path is resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// One population per entry of `totals`; `groups[v]` owners hold value `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSweep {
    pub totals: Vec<u64>,
    pub groups: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochSettings {
    #[serde(default = "default_parties")]
    pub parties: usize,
    #[serde(default = "default_k")]
    pub k_threshold: u64,
    #[serde(default)]
    pub db_slots: Option<u64>,
    #[serde(default)]
    pub mu: Option<u64>,
    #[serde(default = "default_checksum_bits")]
    pub checksum_bits: u32,
    #[serde(default)]
    pub epoch_id: u64,
    #[serde(default = "default_verification")]
    pub verification: Option<BlindingKind>,
    #[serde(default)]
    pub slot_policy: SlotPolicy,
}

impl Default for EpochSettings {
    fn default() -> Self {
        EpochSettings {
            parties: default_parties(),
            k_threshold: default_k(),
            db_slots: None,
            mu: None,
            checksum_bits: default_checksum_bits(),
            epoch_id: 0,
            verification: default_verification(),
            slot_policy: SlotPolicy::default(),
        }
    }
}

/// How owners reach the aggregators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CryptoMode {
    /// Claims are counted directly; no database is built.
    #[default]
    None,
    /// Point functions XORed into the database in the clear.
    Plaintext,
    /// FSS keys generated and evaluated by every aggregator.
    Full,
}

fn default_trials() -> u64 {
    1
}

fn default_parties() -> usize {
    3
}

fn default_k() -> u64 {
    2
}

fn default_checksum_bits() -> u32 {
    DEFAULT_CHECKSUM_BITS
}

fn default_verification() -> Option<BlindingKind> {
    Some(BlindingKind::Square)
}

impl ExperimentConfig {
    /// Reads, applies `key=value` overrides, parses and validates.
    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: Value = serde_json::from_str(&text).map_err(CliError::config)?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let mut cfg: ExperimentConfig = serde_json::from_value(value).map_err(CliError::config)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.validate()?;
        Ok(cfg)
    }

    /// The dataset path, resolved against the config file's directory.
    pub fn dataset_path(&self) -> Option<PathBuf> {
        let ds = self.dataset.as_ref()?;
        Some(match &self.base_dir {
            Some(dir) if ds.is_relative() => dir.join(ds),
            _ => ds.clone(),
        })
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(CliError::config)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.mechanisms.is_empty() {
            return Err(CliError::Config("at least one mechanism is required".into()));
        }
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        match (&self.population, &self.dataset) {
            (Some(p), None) => {
                if p.totals.is_empty() {
                    return Err(CliError::Config("population.totals is empty".into()));
                }
                let assigned: u64 = p.groups.iter().sum();
                if let Some(t) = p.totals.iter().find(|&&t| t < assigned) {
                    return Err(CliError::Config(format!(
                        "population total {t} is below the {assigned} assigned owners"
                    )));
                }
            }
            (None, Some(_)) => {}
            _ => return Err(CliError::Config("exactly one of population and dataset is required".into())),
        }
        for m in &self.mechanisms {
            let cfg = self.epoch_config(*m, 0, 0);
            cfg.validate().map_err(CliError::config)?;
            if let Some(p) = &self.population {
                if !m.is_binary() && p.groups.len() as u64 > u64::from(m.max_value()) + 1 {
                    return Err(CliError::Config(format!(
                        "{} groups exceed the {} mechanism's domain",
                        p.groups.len(),
                        m.name()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn epoch_config(&self, mechanism: Mechanism, master_seed: u64, trial: u64) -> EpochConfig {
        let e = &self.epoch;
        EpochConfig {
            parties: e.parties,
            k_threshold: e.k_threshold,
            db_slots: e.db_slots,
            mu: e.mu,
            mechanism,
            checksum_bits: e.checksum_bits,
            epoch_id: e.epoch_id + trial,
            master_seed,
            verification: e.verification,
            write_mode: match self.crypto {
                CryptoMode::Full => WriteMode::Full,
                _ => WriteMode::Plaintext,
            },
            slot_policy: e.slot_policy,
        }
    }
}

/// Sets a dotted path such as `epoch.parties=4`. The value is parsed as
/// JSON and falls back to a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> CliResult<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let new: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), new);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| CliError::Config(format!("`{part}` in `{path}` is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::Config(format!("index {idx} out of range (len {len}) in `{path}`")))?;
                if last {
                    *slot = new;
                    return Ok(());
                }
                slot
            }
            _ => return Err(CliError::Config(format!("`{path}` does not name an object field"))),
        };
    }
    Err(CliError::Config("empty override path".into()))
}

#[derive(Debug, Deserialize)]
struct DatasetRow {
    owner_id: String,
    value: Option<u32>,
}

/// Loads `owner_id,value` rows. An empty value means the owner holds none.
/// Binary mechanisms read value 1 as "yes" and 0 as "no".
pub fn load_dataset(path: &Path, mechanisms: &[Mechanism]) -> CliResult<Vec<Owner>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read dataset {}: {e}", path.display())))?;
    let headers = reader.headers().map_err(CliError::config)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["owner_id", "value"] {
        return Err(CliError::Config(format!(
            "dataset header must be owner_id,value, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let binary = mechanisms.iter().any(Mechanism::is_binary);
    let max = mechanisms.iter().filter(|m| !m.is_binary()).map(Mechanism::max_value).min();
    let mut seen = HashSet::new();
    let mut owners = Vec::new();
    for (line, row) in reader.deserialize::<DatasetRow>().enumerate() {
        let row = row.map_err(|e| CliError::Config(format!("dataset row {}: {e}", line + 2)))?;
        if !seen.insert(row.owner_id.clone()) {
            return Err(CliError::Config(format!("duplicate owner_id `{}`", row.owner_id)));
        }
        if let Some(v) = row.value {
            if binary && v > 1 {
                return Err(CliError::Config(format!("value {v} for `{}` is not 0/1", row.owner_id)));
            }
            if max.is_some_and(|max| v > max) {
                return Err(CliError::Config(format!("value {v} for `{}` is outside the domain", row.owner_id)));
            }
        }
        let value = match row.value {
            Some(0) if binary => None,
            other => other,
        };
        owners.push(Owner { id: row.owner_id, value, two_row_writer: false });
    }
    if owners.is_empty() {
        return Err(CliError::Config("dataset has no rows".into()));
    }
    Ok(owners)
}
