//! Adapted cross-validation folds and Bemis-Murcko scaffold splits.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curation::CompoundRecord;
use crate::mol::{aromatize, canonical_form, parse_smiles, BondOrder, Molecule};

pub const ACYCLIC: &str = "ACYCLIC";
/// Bins holding more than this fraction of all molecules go to training.
pub const LARGE_BIN_FRACTION: f64 = 0.10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplitError {
    #[error("k = {0} folds requested; at least 3 are needed")]
    TooFewFolds(usize),
    #[error("{actives} actives cannot be stratified into {k} folds")]
    TooFewActives { actives: usize, k: usize },
    #[error("record {0} has no label")]
    Unlabeled(u64),
    #[error("dataset of {0} records is too small to populate three splits")]
    TooSmall(usize),
    #[error("record {cid}: {reason}")]
    BadStructure { cid: u64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }

    pub fn parse(text: &str) -> Option<Split> {
        match text.trim() {
            "train" => Some(Split::Train),
            "valid" => Some(Split::Valid),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Scheme {
    AdaptedCv { k: usize, test_fold: usize },
    Scaffold { ratio: [u32; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitPlan {
    #[serde(flatten)]
    pub scheme: Scheme,
    pub seed: u64,
    #[serde(skip)]
    pub assignments: BTreeMap<u64, Split>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SplitCounts {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl SplitPlan {
    pub fn counts(&self) -> SplitCounts {
        let mut c = SplitCounts::default();
        for s in self.assignments.values() {
            match s {
                Split::Train => c.train += 1,
                Split::Valid => c.valid += 1,
                Split::Test => c.test += 1,
            }
        }
        c
    }

    pub fn members(&self, split: Split) -> Vec<u64> {
        self.assignments
            .iter()
            .filter(|(_, &s)| s == split)
            .map(|(&c, _)| c)
            .collect()
    }

    /// `cid,split` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cid", "split"])?;
        for (cid, s) in &self.assignments {
            w.write_record([cid.to_string().as_str(), s.name()])?;
        }
        w.flush()
    }

    /// Sidecar metadata: scheme, seed, counts and warnings.
    pub fn metadata_json(&self) -> String {
        let mut v = serde_json::to_value(self).unwrap();
        v["counts"] = serde_json::to_value(self.counts()).unwrap();
        serde_json::to_string_pretty(&v).unwrap()
    }
}

/// Scheme and seed from a split sidecar.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SplitMeta {
    #[serde(flatten)]
    pub scheme: Scheme,
    pub seed: u64,
}

/// Reads the `cid,split` table written by [`SplitPlan::write_csv`].
pub fn read_split_csv<R: std::io::Read>(input: R) -> Result<BTreeMap<u64, Split>, String> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let cid = rec.get(0).and_then(|c| c.trim().parse().ok());
        let split = rec.get(1).and_then(Split::parse);
        match (cid, split) {
            (Some(c), Some(s)) => {
                out.insert(c, s);
            }
            _ => return Err(format!("line {}: expected cid,split", i + 2)),
        }
    }
    Ok(out)
}

/// Labels are stratified: actives and inactives are shuffled separately and
/// dealt round-robin, so per-fold active counts differ by at most one. Plan
/// `i` tests on fold `i` and validates on fold `i - 1` (wrapping).
pub fn make_cv_folds(records: &[CompoundRecord], k: usize, seed: u64) -> Result<Vec<SplitPlan>, SplitError> {
    if k < 3 {
        return Err(SplitError::TooFewFolds(k));
    }
    if let Some(r) = records.iter().find(|r| r.label.is_none()) {
        return Err(SplitError::Unlabeled(r.cid));
    }
    let mut actives: Vec<u64> = records.iter().filter(|r| r.is_active()).map(|r| r.cid).collect();
    let mut inactives: Vec<u64> = records.iter().filter(|r| !r.is_active()).map(|r| r.cid).collect();
    if actives.len() < k {
        return Err(SplitError::TooFewActives { actives: actives.len(), k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    actives.shuffle(&mut rng);
    inactives.shuffle(&mut rng);
    let mut fold_of = HashMap::new();
    for (i, cid) in actives.iter().chain(&inactives).enumerate() {
        fold_of.insert(*cid, i % k);
    }
    Ok((0..k)
        .map(|test| {
            let valid = (test + k - 1) % k;
            let assignments = records
                .iter()
                .map(|r| {
                    let f = fold_of[&r.cid];
                    let s = if f == test {
                        Split::Test
                    } else if f == valid {
                        Split::Valid
                    } else {
                        Split::Train
                    };
                    (r.cid, s)
                })
                .collect();
            SplitPlan {
                scheme: Scheme::AdaptedCv { k, test_fold: test },
                seed,
                assignments,
                warnings: Vec::new(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScaffoldOptions {
    /// Keep terminal atoms attached by a double bond (ring carbonyl O and
    /// the like) instead of pruning them.
    pub keep_exocyclic_double: bool,
}

/// Ring systems plus linkers of the heavy-atom graph, with pruned bonds
/// turned into hydrogens on the retained atoms; `None` when acyclic.
pub fn murcko_framework(mol: &Molecule, options: ScaffoldOptions) -> Option<Molecule> {
    let heavy = mol.without_explicit_hydrogens();
    let n = heavy.atom_count();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|i| heavy.degree(i)).collect();
    loop {
        let prune: Vec<usize> = (0..n)
            .filter(|&i| alive[i] && degree[i] <= 1)
            .filter(|&i| {
                !(options.keep_exocyclic_double
                    && heavy.neighbors(i).iter().any(|nb| {
                        alive[nb.atom] && heavy.bond(nb.bond).order == BondOrder::Double
                    }))
            })
            .collect();
        if prune.is_empty() {
            break;
        }
        for &i in &prune {
            alive[i] = false;
        }
        for &i in &prune {
            for nb in heavy.neighbors(i) {
                if alive[nb.atom] {
                    degree[nb.atom] -= 1;
                }
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    if keep.is_empty() || keep.iter().all(|&i| !heavy.is_atom_in_ring(i)) {
        return None;
    }
    let mut atoms = heavy.atoms().to_vec();
    for b in heavy.bonds() {
        for (kept, gone) in [(b.begin, b.end), (b.end, b.begin)] {
            if alive[kept] && !alive[gone] {
                let a = &mut atoms[kept];
                let add = if a.is_aromatic {
                    1
                } else {
                    b.order.valence() as u8
                };
                a.explicit_h_count += add;
            }
        }
    }
    let edited = Molecule::new(atoms, heavy.bonds().to_vec()).ok()?;
    Some(edited.subgraph(&keep))
}

/// Canonical framework key, or [`ACYCLIC`].
pub fn bm_scaffold(mol: &Molecule) -> String {
    bm_scaffold_with(mol, ScaffoldOptions::default())
}

pub fn bm_scaffold_with(mol: &Molecule, options: ScaffoldOptions) -> String {
    match murcko_framework(mol, options) {
        Some(f) => canonical_form(&f),
        None => ACYCLIC.to_string(),
    }
}

/// Scaffold keys for every record, in input order.
pub fn scaffold_keys(records: &[CompoundRecord], options: ScaffoldOptions) -> Result<Vec<String>, SplitError> {
    records
        .par_iter()
        .map(|r| {
            let m = parse_smiles(&r.smiles).map_err(|e| SplitError::BadStructure {
                cid: r.cid,
                reason: e.to_string(),
            })?;
            Ok(bm_scaffold_with(&aromatize(&m), options))
        })
        .collect()
}

pub fn scaffold_split(records: &[CompoundRecord], ratio: [u32; 3], seed: u64) -> Result<SplitPlan, SplitError> {
    let keys = scaffold_keys(records, ScaffoldOptions::default())?;
    scaffold_split_from_keys(records, &keys, ratio, seed)
}

/// Bins larger than 10% of the data are forced into train; the remaining
/// bins, largest first with seeded shuffling among equal sizes, each go to
/// the split with the largest shortfall against its quota.
pub fn scaffold_split_from_keys(
    records: &[CompoundRecord],
    keys: &[String],
    ratio: [u32; 3],
    seed: u64,
) -> Result<SplitPlan, SplitError> {
    let total = records.len();
    if total < 3 {
        return Err(SplitError::TooSmall(total));
    }
    let mut bins: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for (r, k) in records.iter().zip(keys) {
        bins.entry(k.as_str()).or_default().push(r.cid);
    }
    let ratio_sum: u32 = ratio.iter().sum();
    let quota: Vec<f64> = ratio
        .iter()
        .map(|&x| total as f64 * x as f64 / ratio_sum as f64)
        .collect();
    let splits = [Split::Train, Split::Valid, Split::Test];
    let mut filled = [0usize; 3];
    let mut assignments = BTreeMap::new();
    let mut rest: Vec<Vec<u64>> = Vec::new();
    for (_, cids) in bins {
        if cids.len() as f64 > LARGE_BIN_FRACTION * total as f64 {
            filled[0] += cids.len();
            for c in cids {
                assignments.insert(c, Split::Train);
            }
        } else {
            rest.push(cids);
        }
    }
    rest.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    rest.sort_by_key(|b| std::cmp::Reverse(b.len()));
    for cids in rest {
        let target = (0..3)
            .max_by(|&a, &b| {
                let (da, db) = (quota[a] - filled[a] as f64, quota[b] - filled[b] as f64);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        filled[target] += cids.len();
        for c in cids {
            assignments.insert(c, splits[target]);
        }
    }
    let mut warnings = Vec::new();
    for (i, s) in splits.iter().enumerate() {
        if filled[i] == 0 {
            let msg = format!("{} split is empty; large scaffold bins absorbed the data", s.name());
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    Ok(SplitPlan {
        scheme: Scheme::Scaffold { ratio },
        seed,
        assignments,
        warnings,
    })
}
