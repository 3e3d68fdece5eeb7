//! Neutralize-by-atom and fragment splitting.

use super::Molecule;

fn has_neighbor_with_charge_sign(mol: &Molecule, atom: usize, positive: bool) -> bool {
    mol.neighbors(atom).iter().any(|nb| {
        let c = mol.atom(nb.atom).formal_charge;
        if positive {
            c > 0
        } else {
            c < 0
        }
    })
}

/// Neutralizes +1 atoms carrying hydrogen and -1 atoms, unless the charge is
/// balanced by an adjacent counter-charge. Quaternary cations are left alone.
pub fn neutralize(mol: &Molecule) -> Molecule {
    let mut atoms = mol.atoms().to_vec();
    let mut drop_h_nodes = Vec::new();
    let mut changed = false;
    for i in 0..mol.atom_count() {
        let charge = mol.atom(i).formal_charge;
        match charge {
            1 if mol.total_h(i) > 0 && !has_neighbor_with_charge_sign(mol, i, false) => {
                atoms[i].formal_charge = 0;
                if atoms[i].explicit_h_count > 0 {
                    atoms[i].explicit_h_count -= 1;
                } else if let Some(nb) = mol
                    .neighbors(i)
                    .iter()
                    .find(|nb| mol.atom(nb.atom).is_hydrogen() && mol.degree(nb.atom) == 1)
                {
                    drop_h_nodes.push(nb.atom);
                }
                changed = true;
            }
            -1 if !has_neighbor_with_charge_sign(mol, i, true) => {
                atoms[i].formal_charge = 0;
                atoms[i].explicit_h_count += 1;
                changed = true;
            }
            _ => {}
        }
    }
    if !changed {
        return mol.clone();
    }
    let edited = mol.rebuild(atoms, mol.bonds().to_vec());
    if drop_h_nodes.is_empty() {
        return edited;
    }
    let keep: Vec<usize> = (0..edited.atom_count())
        .filter(|i| !drop_h_nodes.contains(i))
        .collect();
    edited.subgraph(&keep)
}

/// Connected components as separate molecules, atoms kept in original order.
pub fn split_fragments(mol: &Molecule) -> Vec<Molecule> {
    let (labels, count) = mol.component_labels();
    if count <= 1 {
        return vec![mol.clone()];
    }
    (0..count)
        .map(|c| {
            let keep: Vec<usize> = (0..mol.atom_count()).filter(|&i| labels[i] == c).collect();
            mol.subgraph(&keep)
        })
        .collect()
}
