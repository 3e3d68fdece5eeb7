//! Frequency of hits (FoH) across large assays, weighted against targets
//! that are near-duplicates of each other.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ChemError, Result};

/// Only assays testing more compounds than this count.
pub const MIN_ASSAY_SIZE: u64 = 10_000;
pub const FOH_THRESHOLD: f64 = 0.26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssayTest {
    pub cid: u64,
    pub aid: u64,
    pub active: bool,
    pub assay_size: u64,
}

/// Per-compound assay outcomes, the assay-to-target map and pairwise
/// percent sequence identity between targets.
///
/// JSON layout:
/// `{"tests": [{"cid", "aid", "active", "assay_size"}], "targets": {"aid": "target"},
///   "identity": [["target_a", "target_b", percent]]}`
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromiscuityTable {
    #[serde(default)]
    pub tests: Vec<AssayTest>,
    #[serde(default)]
    pub targets: BTreeMap<u64, String>,
    #[serde(default)]
    pub identity: Vec<(String, String, f64)>,
    #[serde(skip)]
    by_cid: BTreeMap<u64, Vec<usize>>,
    #[serde(skip)]
    si: BTreeMap<(String, String), f64>,
}

fn pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl PromiscuityTable {
    pub fn new(tests: Vec<AssayTest>, targets: BTreeMap<u64, String>, identity: Vec<(String, String, f64)>) -> Self {
        let mut t = PromiscuityTable {
            tests,
            targets,
            identity,
            ..Default::default()
        };
        t.index();
        t
    }

    fn index(&mut self) {
        self.by_cid.clear();
        for (i, t) in self.tests.iter().enumerate() {
            self.by_cid.entry(t.cid).or_default().push(i);
        }
        self.si = self
            .identity
            .iter()
            .map(|(a, b, v)| (pair(a, b), *v))
            .collect();
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut t: PromiscuityTable =
            serde_json::from_str(text).map_err(|e| ChemError::Invalid(format!("promiscuity table: {e}")))?;
        t.index();
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ChemError::Invalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn target(&self, aid: u64) -> String {
        self.targets.get(&aid).cloned().unwrap_or_else(|| format!("aid:{aid}"))
    }

    fn identity(&self, a: &str, b: &str) -> f64 {
        self.si.get(&pair(a, b)).copied().unwrap_or(0.0)
    }
}

/// FoH = sum of w over active eligible assays / sum of w over all eligible
/// assays, with w = 1 - %SI/100 and %SI the largest identity between the
/// assay's target and any other target this compound was tested against.
/// `None` when the compound has no eligible assays.
pub fn foh(cid: u64, table: &PromiscuityTable) -> Result<Option<f64>> {
    let Some(rows) = table.by_cid.get(&cid) else {
        return Ok(None);
    };
    let eligible: Vec<&AssayTest> = rows
        .iter()
        .map(|&i| &table.tests[i])
        .filter(|t| t.assay_size > MIN_ASSAY_SIZE)
        .collect();
    if eligible.is_empty() {
        return Ok(None);
    }
    let targets: BTreeSet<String> = eligible.iter().map(|t| table.target(t.aid)).collect();
    let (mut active, mut total) = (0.0, 0.0);
    for t in &eligible {
        let own = table.target(t.aid);
        let si = targets
            .iter()
            .filter(|o| **o != own)
            .map(|o| table.identity(&own, o))
            .fold(0.0, f64::max);
        if !(0.0..=100.0).contains(&si) {
            return Err(ChemError::Invalid(format!(
                "sequence identity {si} between {own} and another target is outside [0, 100]"
            )));
        }
        let w = 1.0 - si / 100.0;
        total += w;
        if t.active {
            active += w;
        }
    }
    Ok(if total > 0.0 { Some(active / total) } else { None })
}
