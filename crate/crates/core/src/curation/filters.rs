//! Single-molecule and record-level filters.

use std::collections::{BTreeSet, HashMap};

use crate::error::{ChemError, Result};
use crate::mol::{aromatize, canonical_form, molecular_weight, parse_smiles, split_fragments, Molecule};
use crate::physchem::{hba, hbd};
use crate::smarts::Catalog;

use super::records::CompoundRecord;

/// MW difference at or below which a mixture is treated as ambiguous.
pub const MIXTURE_MW_TOLERANCE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<T = ()> {
    Keep(T),
    Remove(String),
}

impl<T> Verdict<T> {
    pub fn is_keep(&self) -> bool {
        matches!(self, Verdict::Keep(_))
    }
}

/// Records dropped by a record-level filter, with reasons.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub removed: Vec<(u64, String)>,
    pub flagged: Vec<(u64, String)>,
}

fn dedupe_key(smiles: &str) -> Option<String> {
    parse_smiles(smiles).ok().map(|m| canonical_form(&aromatize(&m)))
}

/// Keeps the first record of each group sharing a cid, a canonical form or
/// an InChI. Conflicting labels inside a group flag the retained record.
pub fn dedupe(records: Vec<CompoundRecord>) -> (Vec<CompoundRecord>, FilterOutcome) {
    use rayon::prelude::*;
    let keys: Vec<Option<String>> = records.par_iter().map(|r| dedupe_key(&r.smiles)).collect();
    let (keep, out) = dedupe_indices(&records, &keys);
    let keep: BTreeSet<usize> = keep.into_iter().collect();
    let survivors = records
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|(_, r)| r)
        .collect();
    (survivors, out)
}

/// Indices of retained records given precomputed canonical forms.
pub(crate) fn dedupe_indices(records: &[CompoundRecord], keys: &[Option<String>]) -> (Vec<usize>, FilterOutcome) {
    let mut by_cid: HashMap<u64, usize> = HashMap::new();
    let mut by_form: HashMap<&str, usize> = HashMap::new();
    let mut by_inchi: HashMap<&str, usize> = HashMap::new();
    let mut kept: Vec<usize> = Vec::new();
    let mut out = FilterOutcome::default();
    let mut conflicted = BTreeSet::new();
    for (i, r) in records.iter().enumerate() {
        let inchi = r.inchi.as_deref().filter(|s| !s.is_empty());
        let hit = by_cid
            .get(&r.cid)
            .map(|&k| (k, "cid"))
            .or_else(|| keys[i].as_deref().and_then(|f| by_form.get(f)).map(|&k| (k, "canonical form")))
            .or_else(|| inchi.and_then(|s| by_inchi.get(s)).map(|&k| (k, "InChI")));
        match hit {
            Some((k, what)) => {
                let first = &records[k];
                let reason = if first.cid == r.cid {
                    format!("duplicate {what} of retained record")
                } else {
                    format!("duplicate {what} of cid {}", first.cid)
                };
                out.removed.push((r.cid, reason));
                if let (Some(a), Some(b)) = (first.label, r.label) {
                    if a != b && conflicted.insert(first.cid) {
                        out.flagged
                            .push((first.cid, format!("label conflict with duplicate cid {}", r.cid)));
                    }
                }
            }
            None => {
                kept.push(i);
                by_cid.insert(r.cid, i);
                if let Some(f) = keys[i].as_deref() {
                    by_form.insert(f, i);
                }
                if let Some(s) = inchi {
                    by_inchi.insert(s, i);
                }
            }
        }
    }
    (kept, out)
}

/// Drops records whose SMILES does not parse.
pub fn parser_filter(records: Vec<CompoundRecord>) -> (Vec<CompoundRecord>, FilterOutcome) {
    let mut out = FilterOutcome::default();
    let mut kept = Vec::new();
    for r in records {
        match parse_smiles(&r.smiles) {
            Ok(_) => kept.push(r),
            Err(e) => out.removed.push((r.cid, format!("parse error: {e}"))),
        }
    }
    (kept, out)
}

fn has_carbon(mol: &Molecule) -> bool {
    mol.atoms().iter().any(|a| a.element == 6)
}

/// Removes carbon-free structures. CO2 and cyanide count as organic here.
pub fn inorganic_filter(mol: &Molecule) -> Verdict {
    if has_carbon(mol) {
        Verdict::Keep(())
    } else {
        Verdict::Remove("no carbon atoms".into())
    }
}

/// Resolves a multi-fragment structure to one fragment, or discards it.
/// Single-fragment input is returned unchanged.
pub fn handle_mixture(mol: &Molecule) -> Verdict<Molecule> {
    let frags = split_fragments(mol);
    if frags.len() <= 1 {
        return Verdict::Keep(mol.clone());
    }
    let forms: Vec<String> = frags.iter().map(|f| canonical_form(&aromatize(f))).collect();
    if forms.iter().all(|f| *f == forms[0]) {
        return Verdict::Keep(frags.into_iter().next().unwrap());
    }
    let weights: Vec<f64> = frags.iter().map(molecular_weight).collect();
    let hi = weights.iter().cloned().fold(f64::MIN, f64::max);
    let lo = weights.iter().cloned().fold(f64::MAX, f64::min);
    if hi - lo <= MIXTURE_MW_TOLERANCE {
        return Verdict::Remove(format!("mixture fragments within {MIXTURE_MW_TOLERANCE} Da ({:.2})", hi - lo));
    }
    let mut survivors: Vec<(usize, &str)> = Vec::new();
    for (i, f) in frags.iter().enumerate() {
        if !has_carbon(f) {
            continue;
        }
        let passes = lipinski(&LipinskiInputs::native(f)).map(|l| l.pass).unwrap_or(false);
        if passes && !survivors.iter().any(|(_, form)| *form == forms[i]) {
            survivors.push((i, &forms[i]));
        }
    }
    match survivors.as_slice() {
        [(i, _)] => Verdict::Keep(frags[*i].clone()),
        [] => Verdict::Remove("mixture has no drug-like organic fragment".into()),
        many => Verdict::Remove(format!("mixture has {} drug-like organic fragments", many.len())),
    }
}

/// Lipinski inputs; a `None` field is a gap in the property provider.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LipinskiInputs {
    pub mw: Option<f64>,
    pub logp: Option<f64>,
    pub hbd: Option<f64>,
    pub hba: Option<f64>,
}

impl LipinskiInputs {
    pub fn new(mw: f64, logp: f64, hbd: f64, hba: f64) -> Self {
        LipinskiInputs {
            mw: Some(mw),
            logp: Some(logp),
            hbd: Some(hbd),
            hba: Some(hba),
        }
    }

    pub fn native(mol: &Molecule) -> Self {
        let (logp, _) = crate::physchem::crippen_totals(mol);
        Self::new(molecular_weight(mol), logp, hbd(mol) as f64, hba(mol) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipinskiResult {
    pub pass: bool,
    pub violations: Vec<&'static str>,
}

/// Rule of five with inclusive limits; at most one violation passes.
pub fn lipinski(inputs: &LipinskiInputs) -> Result<LipinskiResult> {
    let checks = [
        ("molecular_weight", inputs.mw, 500.0),
        ("logp", inputs.logp, 5.0),
        ("hbd", inputs.hbd, 5.0),
        ("hba", inputs.hba, 10.0),
    ];
    let mut violations = Vec::new();
    for (name, value, limit) in checks {
        let v = value.ok_or_else(|| {
            ChemError::MissingProperty(format!("{name} not supplied by the property provider"))
        })?;
        if v > limit {
            violations.push(name);
        }
    }
    Ok(LipinskiResult {
        pass: violations.len() <= 1,
        violations,
    })
}

pub fn optical_filter(records: Vec<CompoundRecord>, blocklist: &BTreeSet<u64>) -> (Vec<CompoundRecord>, FilterOutcome) {
    let mut out = FilterOutcome::default();
    let kept = records
        .into_iter()
        .filter(|r| {
            let hit = blocklist.contains(&r.cid);
            if hit {
                out.removed.push((r.cid, "optical interference blocklist".into()));
            }
            !hit
        })
        .collect();
    (kept, out)
}

pub fn pains_catalog_filter(mol: &Molecule, catalog: &Catalog) -> Verdict {
    match catalog.first_match(mol) {
        Some(name) => Verdict::Remove(format!("PAINS pattern {name}")),
        None => Verdict::Keep(()),
    }
}
