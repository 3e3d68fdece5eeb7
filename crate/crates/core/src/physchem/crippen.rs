//! Wildman-Crippen atom typing for logP and molar refractivity.

use std::sync::OnceLock;

use crate::mol::Molecule;
use crate::smarts::{compile_pattern, MatchTarget, Pattern};

pub struct CrippenType {
    pub label: String,
    pub pattern: Pattern,
    pub logp: f64,
    pub mr: f64,
}

fn types() -> &'static [CrippenType] {
    static TYPES: OnceLock<Vec<CrippenType>> = OnceLock::new();
    TYPES.get_or_init(|| parse_table(include_str!("../../data/crippen.txt")))
}

fn parse_table(text: &str) -> Vec<CrippenType> {
    let mut out = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let pattern = compile_pattern(f[1]).expect("crippen table pattern compiles");
        let num = |i: usize| {
            f.get(i)
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().expect("crippen table value"))
                .unwrap_or(0.0)
        };
        out.push(CrippenType {
            label: f[0].to_string(),
            pattern,
            logp: num(2),
            mr: num(3),
        });
    }
    out
}

/// Per-atom (logP, MR) contributions and type labels; the first table row
/// whose pattern matches with its first atom on the atom wins. Untyped atoms
/// contribute zero and get an empty label.
pub fn crippen_contributions(mol: &Molecule) -> (Vec<f64>, Vec<f64>, Vec<&'static str>) {
    let n = mol.atom_count();
    let target = MatchTarget::new(mol);
    let mut logp = vec![0.0; n];
    let mut mr = vec![0.0; n];
    let mut labels = vec![""; n];
    for i in 0..n {
        if let Some(t) = types().iter().find(|t| t.pattern.matches_at(&target, i)) {
            logp[i] = t.logp;
            mr[i] = t.mr;
            labels[i] = t.label.as_str();
        }
    }
    (logp, mr, labels)
}

/// Molecular (logP, MR), hydrogens included as typed atoms.
pub fn crippen_totals(mol: &Molecule) -> (f64, f64) {
    let with_h = mol.with_explicit_hydrogens();
    let (logp, mr, _) = crippen_contributions(&with_h);
    (logp.iter().sum(), mr.iter().sum())
}
