//! Conjugation and hybridization perception.

use super::{BondOrder, Molecule};
use crate::elements;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hybridization {
    S,
    Sp,
    Sp2,
    Sp3,
    Sp3d,
    Sp3d2,
    Unspecified,
}

fn default_valence(z: u8) -> i32 {
    elements::element(z)
        .and_then(|e| e.valences.first().copied())
        .map(i32::from)
        .unwrap_or(-1)
}

fn outer_electrons(z: u8) -> i32 {
    elements::element(z)
        .map(|e| e.outer_electrons as i32)
        .unwrap_or(0)
}

/// Bond valence sum rounded the way integer valence models do (x.5 + 0.1 floored).
pub(crate) fn explicit_valence(mol: &Molecule, atom: usize) -> i32 {
    (mol.bond_valence_sum(atom) + 0.1).floor() as i32
}

/// Electrons an atom can donate to a pi system; negative when it cannot take part.
pub(crate) fn pi_electrons_available(mol: &Molecule, atom: usize) -> i32 {
    let a = mol.atom(atom);
    let dv = default_valence(a.element);
    if dv <= 1 {
        return -1;
    }
    let degree = mol.total_degree(atom) as i32;
    if degree > 3 {
        return -1;
    }
    let nlp = (outer_electrons(a.element) - dv - a.formal_charge as i32).max(0);
    let mut res = (dv - degree) + nlp;
    if res > 1 {
        let unsaturations = explicit_valence(mol, atom) - mol.degree(atom) as i32;
        if unsaturations > 1 {
            res = 1;
        }
    }
    res
}

fn conjugation_candidate(mol: &Molecule, atom: usize) -> bool {
    let z = mol.atom(atom).element;
    let nouter = outer_electrons(z);
    (z <= 10 || (nouter != 5 && nouter != 6) || (nouter == 6 && mol.total_degree(atom) < 2))
        && pi_electrons_available(mol, atom) > 0
}

/// Conjugation flags per bond: aromatic bonds, plus pairs of bonds at a
/// 2- or 3-coordinate atom where one is a multiple bond and the far atom can
/// take part in a pi system.
pub(crate) fn conjugated_bonds(mol: &Molecule) -> Vec<bool> {
    let mut conj: Vec<bool> = mol
        .bonds()
        .iter()
        .map(|b| b.order == BondOrder::Aromatic)
        .collect();
    for atom in 0..mol.atom_count() {
        if !conjugation_candidate(mol, atom) {
            continue;
        }
        let sbo = mol.total_degree(atom);
        if !(2..=3).contains(&sbo) {
            continue;
        }
        for nb1 in mol.neighbors(atom) {
            if mol.bond(nb1.bond).order.valence() < 1.5 {
                continue;
            }
            for nb2 in mol.neighbors(atom) {
                if nb1.bond == nb2.bond {
                    continue;
                }
                if mol.total_degree(nb2.atom) > 3 {
                    continue;
                }
                if conjugation_candidate(mol, nb2.atom) {
                    conj[nb1.bond] = true;
                    conj[nb2.bond] = true;
                }
            }
        }
    }
    conj
}

fn atom_has_conjugated_bond(mol: &Molecule, atom: usize) -> bool {
    mol.neighbors(atom)
        .iter()
        .any(|nb| mol.bond(nb.bond).is_conjugated)
}

fn bonds_plus_lone_pairs(mol: &Molecule, atom: usize) -> i32 {
    let a = mol.atom(atom);
    let deg = mol.total_degree(atom) as i32;
    if a.element <= 1 {
        return deg;
    }
    let nouter = outer_electrons(a.element);
    let total_valence = explicit_valence(mol, atom) + a.explicit_h_count as i32;
    let chg = a.formal_charge as i32;
    let free = nouter - (total_valence + chg);
    // below an octet without radicals the same expression applies
    deg + free / 2
}

pub(crate) fn hybridization(mol: &Molecule, atom: usize) -> Hybridization {
    let norbs = if mol.atom(atom).element < 89 {
        bonds_plus_lone_pairs(mol, atom)
    } else {
        mol.total_degree(atom) as i32
    };
    match norbs {
        0 | 1 => Hybridization::S,
        2 => Hybridization::Sp,
        3 => Hybridization::Sp2,
        4 => {
            if mol.total_degree(atom) < 4 && atom_has_conjugated_bond(mol, atom) {
                Hybridization::Sp2
            } else {
                Hybridization::Sp3
            }
        }
        5 => Hybridization::Sp3d,
        6 => Hybridization::Sp3d2,
        _ => Hybridization::Unspecified,
    }
}
