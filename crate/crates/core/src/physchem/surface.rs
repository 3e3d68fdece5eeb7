//! Topological polar surface area (Ertl) and Labute approximate surface area
//! contributions.

use std::f64::consts::PI;

use crate::elements;
use crate::mol::{BondOrder, Molecule};

#[derive(Default, Clone, Copy)]
struct BondCounts {
    heavy: u32,
    single: u32,
    double: u32,
    triple: u32,
    aromatic: u32,
    hydrogens: u32,
}

/// Per-atom TPSA contributions from N and O atoms.
pub fn tpsa_contributions(mol: &Molecule) -> Vec<f64> {
    let n = mol.atom_count();
    let mut counts = vec![BondCounts::default(); n];
    for b in mol.bonds() {
        let (a1, a2) = (mol.atom(b.begin), mol.atom(b.end));
        if a1.element != 1 && a2.element != 1 {
            for i in [b.begin, b.end] {
                let c = &mut counts[i];
                c.heavy += 1;
                match b.order {
                    BondOrder::Single => c.single += 1,
                    BondOrder::Double => c.double += 1,
                    BondOrder::Triple => c.triple += 1,
                    BondOrder::Aromatic => c.aromatic += 1,
                }
            }
        } else if a1.element == 1 {
            counts[b.end].hydrogens += 1;
        } else {
            counts[b.begin].hydrogens += 1;
        }
    }
    let mut out = vec![0.0; n];
    for i in 0..n {
        let atom = mol.atom(i);
        if atom.element != 7 && atom.element != 8 {
            continue;
        }
        let c = BondCounts {
            hydrogens: counts[i].hydrogens + atom.explicit_h_count as u32,
            ..counts[i]
        };
        let chg = atom.formal_charge;
        let in3 = mol.ring_info().is_atom_in_ring_of_size(i, 3);
        let (h, s, d, t, a) = (c.hydrogens, c.single, c.double, c.triple, c.aromatic);
        let value = if atom.element == 7 {
            let v = match c.heavy {
                1 => match (h, chg) {
                    (0, 0) if t == 1 => Some(23.79),
                    (1, 0) if d == 1 => Some(23.85),
                    (2, 0) if s == 1 => Some(26.02),
                    (2, 1) if d == 1 => Some(25.59),
                    (3, 1) if s == 1 => Some(27.64),
                    _ => None,
                },
                2 => {
                    if h == 0 && chg == 0 && s == 1 && d == 1 {
                        Some(12.36)
                    } else if h == 0 && chg == 0 && t == 1 && d == 1 {
                        Some(13.60)
                    } else if h == 1 && chg == 0 && s == 2 && in3 {
                        Some(21.94)
                    } else if h == 1 && chg == 0 && s == 2 {
                        Some(12.03)
                    } else if h == 0 && chg == 1 && t == 1 && s == 1 {
                        Some(4.36)
                    } else if h == 1 && chg == 1 && d == 1 && s == 1 {
                        Some(13.97)
                    } else if h == 2 && chg == 1 && s == 2 {
                        Some(16.61)
                    } else if h == 0 && chg == 0 && a == 2 {
                        Some(12.89)
                    } else if h == 1 && chg == 0 && a == 2 {
                        Some(15.79)
                    } else if h == 1 && chg == 1 && a == 2 {
                        Some(14.14)
                    } else {
                        None
                    }
                }
                3 => {
                    if h == 0 && chg == 0 && s == 3 && in3 {
                        Some(3.01)
                    } else if h == 0 && chg == 0 && s == 3 {
                        Some(3.24)
                    } else if h == 0 && chg == 0 && s == 1 && d == 2 {
                        Some(11.68)
                    } else if h == 0 && chg == 1 && s == 2 && d == 1 {
                        Some(3.01)
                    } else if h == 1 && chg == 1 && s == 3 {
                        Some(4.44)
                    } else if h == 0 && chg == 0 && a == 3 {
                        Some(4.41)
                    } else if h == 0 && chg == 0 && s == 1 && a == 2 {
                        Some(4.93)
                    } else if h == 0 && chg == 0 && d == 1 && a == 2 {
                        Some(8.39)
                    } else if h == 0 && chg == 1 && a == 3 {
                        Some(4.10)
                    } else if h == 0 && chg == 1 && s == 1 && a == 2 {
                        Some(3.88)
                    } else {
                        None
                    }
                }
                4 if h == 0 && s == 4 && chg == 1 => Some(0.0),
                _ => None,
            };
            v.unwrap_or_else(|| (30.5 - c.heavy as f64 * 8.2 + h as f64 * 1.5).max(0.0))
        } else {
            let v = match c.heavy {
                1 => match (h, chg) {
                    (0, 0) if d == 1 => Some(17.07),
                    (1, 0) if s == 1 => Some(20.23),
                    (0, -1) if s == 1 => Some(23.06),
                    _ => None,
                },
                2 if h == 0 && chg == 0 && s == 2 && in3 => Some(12.53),
                2 if h == 0 && chg == 0 && s == 2 => Some(9.23),
                2 if h == 0 && chg == 0 && a == 2 => Some(13.14),
                _ => None,
            };
            v.unwrap_or_else(|| (28.5 - c.heavy as f64 * 8.6 + h as f64 * 1.5).max(0.0))
        };
        out[i] = value;
    }
    out
}

/// Labute ASA per atom plus the lumped hydrogen term. Each atom carries one
/// hydrogen correction regardless of its hydrogen count, as in the reference
/// implementation the node features were defined against.
pub fn labute_contributions(mol: &Molecule) -> (Vec<f64>, f64) {
    let n = mol.atom_count();
    let rads: Vec<f64> = mol
        .atoms()
        .iter()
        .map(|a| elements::element(a.element).map_or(0.0, |e| e.bond_radius))
        .collect();
    let mut v = vec![0.0; n];
    for b in mol.bonds() {
        let (ri, rj) = (rads[b.begin], rads[b.end]);
        let correction = match b.order {
            BondOrder::Single => 0.0,
            BondOrder::Double => 0.2,
            BondOrder::Triple => 0.3,
            BondOrder::Aromatic => 0.1,
        };
        let bij = ri + rj - correction;
        let dij = (ri - rj).abs().max(bij).min(ri + rj);
        v[b.begin] += rj * rj - (ri - dij) * (ri - dij) / dij;
        v[b.end] += ri * ri - (rj - dij) * (rj - dij) / dij;
    }
    let rh = elements::element(1).unwrap().bond_radius;
    let mut h = 0.0;
    for i in 0..n {
        let ri = rads[i];
        let dij = (ri - rh).abs().max(ri + rh).min(ri + rh);
        v[i] += rh * rh - (ri - dij) * (ri - dij) / dij;
        h += ri * ri - (rh - dij) * (rh - dij) / dij;
    }
    for i in 0..n {
        v[i] = PI * rads[i] * (4.0 * rads[i] - v[i]);
    }
    let h_contrib = if h > 0.0 {
        PI * rh * (4.0 * rh - h)
    } else {
        0.0
    };
    (v, h_contrib)
}
