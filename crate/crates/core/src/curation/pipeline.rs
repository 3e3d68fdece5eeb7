//! The curation pipeline with a telescoping per-step report.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ChemError;
use crate::mol::{aromatize, canonical_form, neutralize, parse_smiles, split_fragments, Molecule};
use crate::smarts::{Catalog, CompileOptions};

use super::filters::{self, dedupe_indices, LipinskiInputs, Verdict};
use super::hierarchy::{evaluate_hierarchy, load_hierarchy, HierarchyError, ScreenHierarchy};
use super::promiscuity::{foh, PromiscuityTable, FOH_THRESHOLD};
use super::records::{CompoundRecord, Label, DEFAULT_INACTIVE_UM};

#[derive(Debug, Error)]
pub enum CurationError {
    #[error("missing resource file {0}")]
    MissingResource(PathBuf),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Chem(#[from] ChemError),
    #[error("bad curation config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Dedupe,
    Hierarchy,
    Parser,
    Inorganic,
    Mixture,
    Neutralize,
    Aromatize,
    Foh,
    Optical,
    PainsCatalog,
    Druglike,
}

impl Step {
    pub fn name(self) -> &'static str {
        match self {
            Step::Dedupe => "dedupe",
            Step::Hierarchy => "hierarchy",
            Step::Parser => "parser",
            Step::Inorganic => "inorganic",
            Step::Mixture => "mixture",
            Step::Neutralize => "neutralize",
            Step::Aromatize => "aromatize",
            Step::Foh => "foh",
            Step::Optical => "optical",
            Step::PainsCatalog => "pains_catalog",
            Step::Druglike => "druglike",
        }
    }
}

pub const PAPER_ORDER: [Step; 11] = [
    Step::Dedupe,
    Step::Hierarchy,
    Step::Parser,
    Step::Inorganic,
    Step::Mixture,
    Step::Neutralize,
    Step::Aromatize,
    Step::Foh,
    Step::Optical,
    Step::PainsCatalog,
    Step::Druglike,
];

#[derive(Debug, Clone)]
pub struct CurationConfig {
    pub steps: Vec<Step>,
    pub hierarchy: Option<ScreenHierarchy>,
    pub promiscuity: Option<PromiscuityTable>,
    pub optical_blocklist: BTreeSet<u64>,
    pub pains: Catalog,
    pub inactive_um: f64,
    pub foh_threshold: f64,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            steps: PAPER_ORDER.to_vec(),
            hierarchy: None,
            promiscuity: None,
            optical_blocklist: BTreeSet::new(),
            pains: Catalog::pains(),
            inactive_um: DEFAULT_INACTIVE_UM,
            foh_threshold: FOH_THRESHOLD,
        }
    }
}

fn default_inactive_um() -> f64 {
    DEFAULT_INACTIVE_UM
}

fn default_foh_threshold() -> f64 {
    FOH_THRESHOLD
}

/// File-level curation settings; paths resolve against the config file's
/// directory. `pains_catalog` defaults to the bundled catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurationSettings {
    #[serde(default)]
    pub steps: Option<Vec<Step>>,
    #[serde(default)]
    pub hierarchy: Option<PathBuf>,
    #[serde(default)]
    pub promiscuity: Option<PathBuf>,
    /// One cid per line.
    #[serde(default)]
    pub optical_blocklist: Option<PathBuf>,
    #[serde(default)]
    pub pains_catalog: Option<PathBuf>,
    #[serde(default = "default_inactive_um")]
    pub inactive_um: f64,
    #[serde(default = "default_foh_threshold")]
    pub foh_threshold: f64,
}

impl Default for CurationSettings {
    fn default() -> Self {
        CurationSettings {
            steps: None,
            hierarchy: None,
            promiscuity: None,
            optical_blocklist: None,
            pains_catalog: None,
            inactive_um: DEFAULT_INACTIVE_UM,
            foh_threshold: FOH_THRESHOLD,
        }
    }
}

fn existing(base: &Path, p: &Path) -> Result<PathBuf, CurationError> {
    let full = base.join(p);
    if full.is_file() {
        Ok(full)
    } else {
        Err(CurationError::MissingResource(full))
    }
}

pub fn read_blocklist(path: &Path) -> Result<BTreeSet<u64>, CurationError> {
    let text = std::fs::read_to_string(path).map_err(|_| CurationError::MissingResource(path.to_path_buf()))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#') && *l != "cid")
        .map(|l| {
            l.parse()
                .map_err(|_| CurationError::Config(format!("{}: bad cid {l:?}", path.display())))
        })
        .collect()
}

impl CurationSettings {
    pub fn resolve(&self, base: &Path) -> Result<CurationConfig, CurationError> {
        if !(self.inactive_um > 0.0) {
            return Err(CurationError::Config("inactive_um must be positive".into()));
        }
        let mut cfg = CurationConfig {
            inactive_um: self.inactive_um,
            foh_threshold: self.foh_threshold,
            ..CurationConfig::default()
        };
        if let Some(steps) = &self.steps {
            cfg.steps = steps.clone();
        }
        if let Some(p) = &self.hierarchy {
            cfg.hierarchy = Some(load_hierarchy(&existing(base, p)?)?);
        }
        if let Some(p) = &self.promiscuity {
            cfg.promiscuity = Some(PromiscuityTable::load(&existing(base, p)?)?);
        }
        if let Some(p) = &self.optical_blocklist {
            cfg.optical_blocklist = read_blocklist(&existing(base, p)?)?;
        }
        if let Some(p) = &self.pains_catalog {
            cfg.pains = Catalog::load(&existing(base, p)?, CompileOptions::default())?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepReport {
    pub step: Step,
    pub input: usize,
    pub removed: usize,
    /// Structures rewritten in place (salt stripping, neutralization).
    pub modified: usize,
    pub flagged: usize,
    pub output: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrailEntry {
    pub cid: u64,
    pub step: Step,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CurationReport {
    pub input: usize,
    pub output: usize,
    pub actives: usize,
    pub inactives: usize,
    pub steps: Vec<StepReport>,
    pub removals: Vec<TrailEntry>,
    /// Records kept but worth a manual look.
    pub expert_queue: Vec<TrailEntry>,
}

impl CurationReport {
    pub fn active_percent(&self) -> f64 {
        if self.output == 0 {
            0.0
        } else {
            100.0 * self.actives as f64 / self.output as f64
        }
    }

    pub fn removed_in(&self, step: Step) -> usize {
        self.steps.iter().filter(|s| s.step == step).map(|s| s.removed).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<14} {:>9} {:>9} {:>9} {:>9} {:>9}", "step", "input", "removed", "modified", "flagged", "output");
        for r in &self.steps {
            let _ = writeln!(
                s,
                "{:<14} {:>9} {:>9} {:>9} {:>9} {:>9}",
                r.step.name(),
                r.input,
                r.removed,
                r.modified,
                r.flagged,
                r.output
            );
        }
        let _ = writeln!(
            s,
            "final: {} compounds, {} actives, {} inactives ({:.3}% active)",
            self.output,
            self.actives,
            self.inactives,
            self.active_percent()
        );
        s
    }
}

struct Item {
    rec: CompoundRecord,
    mol: Result<Molecule, String>,
    changed: bool,
}

enum Action {
    Keep,
    Modified,
    Remove(String),
}

fn apply_per_item(
    items: Vec<Item>,
    f: impl Fn(&mut Item) -> Result<(Action, Option<String>), CurationError> + Sync + Send,
    step: Step,
    report: &mut CurationReport,
) -> Result<Vec<Item>, CurationError> {
    let input = items.len();
    let results: Vec<(Item, Result<(Action, Option<String>), CurationError>)> = items
        .into_par_iter()
        .map(|mut it| {
            let r = f(&mut it);
            (it, r)
        })
        .collect();
    let mut kept = Vec::with_capacity(results.len());
    let (mut removed, mut modified, mut flagged) = (0, 0, 0);
    for (it, r) in results {
        let (action, flag) = r?;
        if let Some(reason) = flag {
            flagged += 1;
            report.expert_queue.push(TrailEntry {
                cid: it.rec.cid,
                step,
                reason,
            });
        }
        match action {
            Action::Remove(reason) => {
                removed += 1;
                report.removals.push(TrailEntry {
                    cid: it.rec.cid,
                    step,
                    reason,
                });
            }
            Action::Modified => {
                modified += 1;
                kept.push(it);
            }
            Action::Keep => kept.push(it),
        }
    }
    report.steps.push(StepReport {
        step,
        input,
        removed,
        modified,
        flagged,
        output: kept.len(),
    });
    Ok(kept)
}

fn molecule(it: &Item) -> Result<&Molecule, String> {
    it.mol.as_ref().map_err(|e| format!("parse error: {e}"))
}

fn verdict(v: Verdict) -> Action {
    match v {
        Verdict::Keep(()) => Action::Keep,
        Verdict::Remove(r) => Action::Remove(r),
    }
}

macro_rules! need_mol {
    ($it:expr) => {
        match molecule($it) {
            Ok(m) => m,
            Err(reason) => return Ok((Action::Remove(reason), None)),
        }
    };
}

/// Runs the configured steps. Every removed record appears once in the
/// trail, and each step's output count is the next step's input.
pub fn run_pipeline(
    records: Vec<CompoundRecord>,
    config: &CurationConfig,
) -> Result<(Vec<CompoundRecord>, CurationReport), CurationError> {
    let mut report = CurationReport {
        input: records.len(),
        ..Default::default()
    };
    let mut items: Vec<Item> = records
        .into_par_iter()
        .map(|rec| {
            let mol = parse_smiles(&rec.smiles).map_err(|e| e.to_string());
            Item {
                rec,
                mol,
                changed: false,
            }
        })
        .collect();

    for &step in &config.steps {
        items = match step {
            Step::Dedupe => {
                let keys: Vec<Option<String>> = items
                    .par_iter()
                    .map(|it| it.mol.as_ref().ok().map(|m| canonical_form(&aromatize(m))))
                    .collect();
                let recs: Vec<CompoundRecord> = items.iter().map(|it| it.rec.clone()).collect();
                let (keep, out) = dedupe_indices(&recs, &keys);
                let keep: BTreeSet<usize> = keep.into_iter().collect();
                let input = items.len();
                for (cid, reason) in out.removed {
                    report.removals.push(TrailEntry { cid, step, reason });
                }
                let flagged = out.flagged.len();
                for (cid, reason) in out.flagged {
                    report.expert_queue.push(TrailEntry { cid, step, reason });
                }
                let kept: Vec<Item> = items
                    .into_iter()
                    .enumerate()
                    .filter(|(i, _)| keep.contains(i))
                    .map(|(_, it)| it)
                    .collect();
                report.steps.push(StepReport {
                    step,
                    input,
                    removed: input - kept.len(),
                    modified: 0,
                    flagged,
                    output: kept.len(),
                });
                kept
            }
            Step::Hierarchy => {
                let labels = match &config.hierarchy {
                    Some(h) => Some(evaluate_hierarchy(h)?),
                    None => None,
                };
                let default_um = config.inactive_um;
                apply_per_item(
                    items,
                    |it| {
                        if let (Some(labels), Some(h)) = (&labels, &config.hierarchy) {
                            let Some(&label) = labels.get(&it.rec.cid) else {
                                return Ok((Action::Remove("not in the hierarchy's active or inactive set".into()), None));
                            };
                            it.rec.label = Some(label);
                            it.rec.activity_value = match label {
                                Label::Active => h.activity_value(it.rec.cid).or(it.rec.activity_value),
                                Label::Inactive => None,
                            };
                        }
                        if it.rec.label == Some(Label::Inactive) && it.rec.activity_value.is_none() {
                            it.rec.activity_value = Some(default_um);
                        }
                        Ok((Action::Keep, None))
                    },
                    step,
                    &mut report,
                )?
            }
            Step::Parser => apply_per_item(
                items,
                |it| {
                    Ok(match molecule(it) {
                        Ok(_) => (Action::Keep, None),
                        Err(r) => (Action::Remove(r), None),
                    })
                },
                step,
                &mut report,
            )?,
            Step::Inorganic => apply_per_item(
                items,
                |it| Ok((verdict(filters::inorganic_filter(need_mol!(it))), None)),
                step,
                &mut report,
            )?,
            Step::Mixture => apply_per_item(
                items,
                |it| {
                    let m = need_mol!(it);
                    let n = split_fragments(m).len();
                    if n <= 1 {
                        return Ok((Action::Keep, None));
                    }
                    Ok(match filters::handle_mixture(m) {
                        Verdict::Keep(frag) => {
                            it.mol = Ok(frag);
                            it.changed = true;
                            (Action::Modified, Some(format!("mixture of {n} fragments reduced to one")))
                        }
                        Verdict::Remove(r) => (Action::Remove(r), None),
                    })
                },
                step,
                &mut report,
            )?,
            Step::Neutralize => apply_per_item(
                items,
                |it| {
                    let m = need_mol!(it);
                    if m.atoms().iter().all(|a| a.formal_charge == 0) {
                        return Ok((Action::Keep, None));
                    }
                    let n = neutralize(m);
                    let same = n.atom_count() == m.atom_count()
                        && n.atoms().iter().zip(m.atoms()).all(|(a, b)| {
                            a.formal_charge == b.formal_charge && a.explicit_h_count == b.explicit_h_count
                        });
                    if same {
                        return Ok((Action::Keep, None));
                    }
                    it.mol = Ok(n);
                    it.changed = true;
                    Ok((Action::Modified, None))
                },
                step,
                &mut report,
            )?,
            Step::Aromatize => apply_per_item(
                items,
                |it| {
                    let m = aromatize(need_mol!(it));
                    it.mol = Ok(m);
                    Ok((Action::Keep, None))
                },
                step,
                &mut report,
            )?,
            Step::Foh => {
                let threshold = config.foh_threshold;
                apply_per_item(
                    items,
                    |it| {
                        let Some(table) = &config.promiscuity else {
                            return Ok((Action::Keep, None));
                        };
                        Ok(match foh(it.rec.cid, table)? {
                            Some(f) if f > threshold => {
                                (Action::Remove(format!("frequency of hits {f:.3} > {threshold}")), None)
                            }
                            _ => (Action::Keep, None),
                        })
                    },
                    step,
                    &mut report,
                )?
            }
            Step::Optical => apply_per_item(
                items,
                |it| {
                    Ok(if config.optical_blocklist.contains(&it.rec.cid) {
                        (Action::Remove("optical interference blocklist".into()), None)
                    } else {
                        (Action::Keep, None)
                    })
                },
                step,
                &mut report,
            )?,
            Step::PainsCatalog => apply_per_item(
                items,
                |it| Ok((verdict(filters::pains_catalog_filter(need_mol!(it), &config.pains)), None)),
                step,
                &mut report,
            )?,
            Step::Druglike => apply_per_item(
                items,
                |it| {
                    let r = filters::lipinski(&LipinskiInputs::native(need_mol!(it)))?;
                    Ok(if r.pass {
                        (Action::Keep, None)
                    } else {
                        (Action::Remove(format!("Lipinski violations: {}", r.violations.join(", "))), None)
                    })
                },
                step,
                &mut report,
            )?,
        };
    }

    let out: Vec<CompoundRecord> = items
        .into_par_iter()
        .map(|it| {
            let mut rec = it.rec;
            if it.changed {
                if let Ok(m) = &it.mol {
                    rec.smiles = canonical_form(m);
                }
            }
            rec
        })
        .collect();
    report.output = out.len();
    report.actives = out.iter().filter(|r| r.label == Some(Label::Active)).count();
    report.inactives = out.iter().filter(|r| r.label == Some(Label::Inactive)).count();
    Ok((out, report))
}
