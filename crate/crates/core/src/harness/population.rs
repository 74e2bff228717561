use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A data owner and the truthful value they hold, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Owner {
    pub id: String,
    pub value: Option<u32>,
    /// Submits a round-one write touching two database rows.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub two_row_writer: bool,
}

impl Owner {
    pub fn from_values(values: &[Option<u32>]) -> Vec<Owner> {
        values
            .iter()
            .enumerate()
            .map(|(i, &value)| Owner { id: format!("owner-{i}"), value, two_row_writer: false })
            .collect()
    }
}

/// `groups[v]` owners hold value `v`; the remaining `total - sum(groups)` hold none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub total: u64,
    pub groups: Vec<u64>,
}

pub fn generate_population<R: Rng + ?Sized>(spec: &PopulationSpec, rng: &mut R) -> Result<Vec<Option<u32>>> {
    let assigned: u64 = spec.groups.iter().sum();
    if assigned > spec.total {
        return Err(Error::SpecError(format!("{assigned} truthful owners exceed the total of {}", spec.total)));
    }
    let mut out = Vec::with_capacity(spec.total as usize);
    for (v, &count) in spec.groups.iter().enumerate() {
        out.extend(std::iter::repeat_n(Some(v as u32), count as usize));
    }
    out.resize(spec.total as usize, None);
    out.shuffle(rng);
    Ok(out)
}
