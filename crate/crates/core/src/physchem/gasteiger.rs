//! Gasteiger-Marsili partial equalization of orbital electronegativity.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{ChemError, Result};
use crate::mol::{Hybridization, Molecule};

const ITERATIONS: usize = 12;
const DAMPING: f64 = 0.5;
/// Cation electronegativity used for hydrogen.
const IONX_H: f64 = 20.02;

type Params = [f64; 3];

fn table() -> &'static HashMap<(String, String), Params> {
    static TABLE: OnceLock<HashMap<(String, String), Params>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut map = HashMap::new();
        for line in include_str!("../../data/gasteiger.txt").lines() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let p = |i: usize| f[i].parse::<f64>().expect("gasteiger table value");
            map.insert((f[0].to_string(), f[1].to_string()), [p(2), p(3), p(4)]);
        }
        map
    })
}

fn mode(mol: &Molecule, atom: usize) -> &'static str {
    match mol.hybridization(atom) {
        Hybridization::Sp3 => "sp3",
        Hybridization::Sp2 => "sp2",
        Hybridization::Sp => "sp",
        _ if mol.atom(atom).element == 1 => "*",
        _ if mol.atom(atom).element == 16 => {
            let oxygens = mol
                .neighbors(atom)
                .iter()
                .filter(|nb| mol.atom(nb.atom).element == 8)
                .count();
            match oxygens {
                2 => "so2",
                1 => "so",
                _ => "sp3",
            }
        }
        _ => "",
    }
}

/// Formal charges spread evenly over same-element atoms two conjugated bonds
/// away (carboxylate oxygens, nitro oxygens, amidinium nitrogens).
fn initial_charges(mol: &Molecule) -> Vec<f64> {
    let mut charges = vec![0.0; mol.atom_count()];
    for i in 0..mol.atom_count() {
        let atom = mol.atom(i);
        let mut formal = atom.formal_charge as f64;
        if formal == 0.0 || charges[i] != 0.0 {
            continue;
        }
        let mut marked = vec![i];
        for nb1 in mol.neighbors(i) {
            if !mol.bond(nb1.bond).is_conjugated {
                continue;
            }
            for nb2 in mol.neighbors(nb1.atom) {
                if nb2.bond == nb1.bond || !mol.bond(nb2.bond).is_conjugated {
                    continue;
                }
                let y = mol.atom(nb2.atom);
                if y.element == atom.element {
                    formal += y.formal_charge as f64;
                    marked.push(nb2.atom);
                }
            }
        }
        let share = formal / marked.len() as f64;
        for m in marked {
            charges[m] = share;
        }
    }
    charges
}

/// Heavy-atom (or graph-atom) charges and the summed charge of each atom's
/// non-node hydrogens.
pub fn gasteiger_charges(mol: &Molecule) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = mol.atom_count();
    let params = table();
    let h_params = params[&("H".to_string(), "*".to_string())];
    let mut atom_params = Vec::with_capacity(n);
    for i in 0..n {
        let atom = mol.atom(i);
        let key = (atom.symbol().to_string(), mode(mol, i).to_string());
        match params.get(&key) {
            Some(p) => atom_params.push(Some(*p)),
            None if mol.degree(i) == 0 && atom.explicit_h_count == 0 => atom_params.push(None),
            None => {
                let m = if key.1.is_empty() { "unhybridized" } else { &key.1 };
                return Err(ChemError::UnparameterizedElement(format!(
                    "{} ({m}) at atom {i}",
                    key.0
                )));
            }
        }
    }
    let mut charges = initial_charges(mol);
    let mut h_charges = vec![0.0; n];
    let ionx: Vec<f64> = (0..n)
        .map(|i| match (mol.atom(i).element, atom_params[i]) {
            (1, _) => IONX_H,
            (_, Some(p)) => p[0] + p[1] + p[2],
            (_, None) => 0.0,
        })
        .collect();
    let mut energy = vec![0.0; n];
    let mut damp = DAMPING;
    for _ in 0..ITERATIONS {
        for i in 0..n {
            if let Some(p) = atom_params[i] {
                energy[i] = p[0] + charges[i] * (p[1] + p[2] * charges[i]);
            }
        }
        for i in 0..n {
            if atom_params[i].is_none() {
                continue;
            }
            let mut dq = 0.0;
            for nb in mol.neighbors(i) {
                let dx = energy[nb.atom] - energy[i];
                dq += if dx < 0.0 {
                    dx / ionx[nb.atom]
                } else {
                    dx / ionx[i]
                };
            }
            let nh = mol.atom(i).explicit_h_count as f64;
            if nh > 0.0 {
                let qh = h_charges[i] / nh;
                let enr = h_params[0] + qh * (h_params[1] + h_params[2] * qh);
                let dx = enr - energy[i];
                let dqh = if dx < 0.0 { dx / IONX_H } else { dx / ionx[i] };
                dq += nh * dqh;
                h_charges[i] -= nh * dqh * damp;
            }
            charges[i] += damp * dq;
        }
        damp *= DAMPING;
    }
    Ok((charges, h_charges))
}
