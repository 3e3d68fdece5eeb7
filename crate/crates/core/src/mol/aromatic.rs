//! Hueckel aromaticity on individual SSSR rings.

use super::{BondOrder, Molecule};

/// Pi electrons contributed by `atom` to ring `ring_bonds`, or `None` when the
/// atom cannot be part of an aromatic ring.
fn ring_pi_electrons(mol: &Molecule, atom: usize) -> Option<u32> {
    let a = mol.atom(atom);
    let charge = a.formal_charge;
    let mut has_aromatic = false;
    let mut ring_double = false;
    let mut exo_double_hetero = false;
    for nb in mol.neighbors(atom) {
        let b = mol.bond(nb.bond);
        match b.order {
            BondOrder::Triple => return None,
            BondOrder::Aromatic => has_aromatic = true,
            BondOrder::Double => {
                if b.in_ring {
                    ring_double = true;
                } else if a.element == 6 && matches!(mol.atom(nb.atom).element, 7 | 8 | 16 | 34) {
                    exo_double_hetero = true;
                } else {
                    return None;
                }
            }
            BondOrder::Single => {}
        }
    }
    if ring_double {
        return Some(1);
    }
    if exo_double_hetero {
        return Some(0);
    }
    let total_degree = mol.total_degree(atom);
    if total_degree > 3 {
        return None;
    }
    match (a.element, charge) {
        (6, 0) if has_aromatic => Some(1),
        (6, -1) => Some(2),
        (6, 1) => Some(0),
        (5, 0) => Some(0),
        (7 | 15 | 33, 0) => {
            if total_degree == 3 {
                Some(2)
            } else if has_aromatic {
                Some(1)
            } else {
                None
            }
        }
        (7 | 15, 1) if has_aromatic => Some(1),
        (7, -1) => Some(2),
        (8 | 16 | 34 | 52, 0) if total_degree == 2 => Some(2),
        (8 | 16 | 34, 1) if has_aromatic => Some(1),
        _ => None,
    }
}

fn ring_is_aromatic(mol: &Molecule, ring: &[usize]) -> bool {
    let mut total = 0;
    for &a in ring {
        match ring_pi_electrons(mol, a) {
            Some(e) => total += e,
            None => return false,
        }
    }
    total % 4 == 2
}

/// Rewrites rings satisfying the 4n+2 rule as aromatic. Idempotent; atom
/// count, bond count and charges never change.
pub fn aromatize(mol: &Molecule) -> Molecule {
    let info = mol.ring_info();
    let aromatic_rings: Vec<usize> = (0..info.len())
        .filter(|&r| {
            let already = info.ring_bonds[r]
                .iter()
                .all(|&b| mol.bond(b).order == BondOrder::Aromatic);
            !already && ring_is_aromatic(mol, &info.rings[r])
        })
        .collect();
    if aromatic_rings.is_empty() {
        return mol.clone();
    }
    let mut atoms = mol.atoms().to_vec();
    let mut bonds = mol.bonds().to_vec();
    for r in aromatic_rings {
        for &a in &info.rings[r] {
            atoms[a].is_aromatic = true;
        }
        for &b in &info.ring_bonds[r] {
            bonds[b].order = BondOrder::Aromatic;
        }
    }
    mol.rebuild(atoms, bonds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::{canonical_form, parse_smiles};

    fn aromatic_bonds(m: &Molecule) -> usize {
        m.bonds()
            .iter()
            .filter(|b| b.order == BondOrder::Aromatic)
            .count()
    }

    #[test]
    fn kekule_benzene() {
        let m = aromatize(&parse_smiles("C1=CC=CC=C1").unwrap());
        assert_eq!(aromatic_bonds(&m), 6);
        assert!(m.atoms().iter().all(|a| a.is_aromatic));
        assert_eq!(
            canonical_form(&m),
            canonical_form(&parse_smiles("c1ccccc1").unwrap())
        );
    }

    #[test]
    fn cyclohexane_unchanged() {
        let m = parse_smiles("C1CCCCC1").unwrap();
        let a = aromatize(&m);
        assert_eq!(aromatic_bonds(&a), 0);
    }

    #[test]
    fn heteroaromatics() {
        let pyridine = aromatize(&parse_smiles("C1=CC=NC=C1").unwrap());
        assert_eq!(aromatic_bonds(&pyridine), 6);
        assert!(pyridine.atom(3).is_aromatic);
        assert_eq!(pyridine.atom(3).explicit_h_count, 0);
        let pyrrole = aromatize(&parse_smiles("C1=CNC=C1").unwrap());
        assert_eq!(aromatic_bonds(&pyrrole), 5);
        let furan = aromatize(&parse_smiles("C1=COC=C1").unwrap());
        assert_eq!(aromatic_bonds(&furan), 5);
        let pyridone = aromatize(&parse_smiles("O=C1C=CC=CN1").unwrap());
        assert_eq!(aromatic_bonds(&pyridone), 6);
    }

    #[test]
    fn non_aromatic_rings_stay_kekulized() {
        let quinone = aromatize(&parse_smiles("O=C1C=CC(=O)C=C1").unwrap());
        assert_eq!(aromatic_bonds(&quinone), 0);
        let cot = aromatize(&parse_smiles("C1=CC=CC=CC=C1").unwrap());
        assert_eq!(aromatic_bonds(&cot), 0);
        let cyclopentadiene = aromatize(&parse_smiles("C1=CCC=C1").unwrap());
        assert_eq!(aromatic_bonds(&cyclopentadiene), 0);
    }

    #[test]
    fn fused_and_idempotent() {
        let naph = parse_smiles("C1=CC=C2C=CC=CC2=C1").unwrap();
        let once = aromatize(&naph);
        assert_eq!(aromatic_bonds(&once), 11);
        let twice = aromatize(&once);
        assert_eq!(canonical_form(&once), canonical_form(&twice));
        assert_eq!(once.atom_count(), naph.atom_count());
        assert_eq!(once.bond_count(), naph.bond_count());
        let indole = aromatize(&parse_smiles("C1=CC=C2NC=CC2=C1").unwrap());
        assert_eq!(
            canonical_form(&indole),
            canonical_form(&parse_smiles("c1ccc2[nH]ccc2c1").unwrap())
        );
        let fluorene = aromatize(&parse_smiles("C1=CC=C2C(=C1)CC1=CC=CC=C12").unwrap());
        assert_eq!(aromatic_bonds(&fluorene), 12);
    }
}
