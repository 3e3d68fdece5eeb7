//! Canonical atom ranking and canonical SMILES.
//!
//! Ranks start from the atom invariant (element, charge, degree, hydrogen
//! count, aromatic flag, isotope, ring membership) and are refined from
//! sorted neighbor (rank, bond order) lists until stable. Remaining ties are
//! broken by promoting one atom of the lowest tied class and refining again.

use super::writer::write_with_ranks;
use super::Molecule;

fn rank_by_keys<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0u32; keys.len()];
    for (pos, &i) in idx.iter().enumerate() {
        if pos > 0 && keys[idx[pos - 1]] == keys[i] {
            ranks[i] = ranks[idx[pos - 1]];
        } else {
            ranks[i] = pos as u32;
        }
    }
    ranks
}

fn class_count(ranks: &[u32]) -> usize {
    let mut r = ranks.to_vec();
    r.sort_unstable();
    r.dedup();
    r.len()
}

fn refine(mol: &Molecule, ranks: &mut Vec<u32>) {
    let mut classes = class_count(ranks);
    loop {
        let keys: Vec<(u32, Vec<(u32, u8)>)> = (0..mol.atom_count())
            .map(|i| {
                let mut nbrs: Vec<(u32, u8)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|nb| (ranks[nb.atom], mol.bond(nb.bond).order.code()))
                    .collect();
                nbrs.sort_unstable();
                (ranks[i], nbrs)
            })
            .collect();
        let next = rank_by_keys(&keys);
        let next_classes = class_count(&next);
        *ranks = next;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }
}

/// Refined invariant classes before tie-breaking: atoms that share a value
/// are topologically equivalent under the refinement.
pub fn symmetry_classes(mol: &Molecule) -> Vec<u32> {
    let n = mol.atom_count();
    let invariants: Vec<_> = (0..n)
        .map(|i| {
            let a = mol.atom(i);
            (
                a.element,
                a.formal_charge,
                mol.degree(i),
                mol.total_h(i),
                a.is_aromatic,
                a.isotope.unwrap_or(0),
                mol.is_atom_in_ring(i),
            )
        })
        .collect();
    let mut ranks = rank_by_keys(&invariants);
    refine(mol, &mut ranks);
    ranks
}

/// Canonical rank per atom; a permutation of `0..n`.
pub fn canonical_ranks(mol: &Molecule) -> Vec<u32> {
    let n = mol.atom_count();
    let mut ranks = symmetry_classes(mol);
    while class_count(&ranks) < n {
        // lowest rank value shared by more than one atom
        let mut counts = std::collections::BTreeMap::new();
        for &r in &ranks {
            *counts.entry(r).or_insert(0usize) += 1;
        }
        let tied = *counts.iter().find(|(_, &c)| c > 1).unwrap().0;
        let pick = (0..n).find(|&i| ranks[i] == tied).unwrap();
        for r in ranks.iter_mut() {
            *r *= 2;
        }
        for (i, r) in ranks.iter_mut().enumerate() {
            if *r == tied * 2 && i != pick {
                *r += 1;
            }
        }
        refine(mol, &mut ranks);
    }
    ranks
}

/// Canonical SMILES: invariant under atom reordering. Stereo annotations are
/// not part of the canonical form.
pub fn canonical_form(mol: &Molecule) -> String {
    let ranks = canonical_ranks(mol);
    write_with_ranks(mol, &ranks, true)
}
