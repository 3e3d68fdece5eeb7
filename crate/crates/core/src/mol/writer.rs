//! SMILES writer. Traversal order comes from a per-atom rank; canonical output
//! uses canonical ranks, plain output uses atom indices.

use std::fmt::Write;

use super::smiles::{implicit_hydrogens, is_organic_subset};
use super::{BondOrder, Molecule};

struct Dfs {
    order: Vec<usize>,
    parent_bond: Vec<usize>,
    children: Vec<Vec<usize>>,
    /// (bond, partner) ring closures opened at an atom
    opens: Vec<Vec<(usize, usize)>>,
    /// ring closure bonds closed at an atom
    closes: Vec<Vec<usize>>,
}

fn traverse(mol: &Molecule, ranks: &[u32], root: usize, visited: &mut [bool], dfs: &mut Dfs) {
    // iterative DFS mirroring the recursive emission order
    let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    let sorted_nbrs = |a: usize| -> Vec<usize> {
        let mut v: Vec<usize> = (0..mol.neighbors(a).len()).collect();
        v.sort_by_key(|&k| ranks[mol.neighbors(a)[k].atom]);
        v
    };
    visited[root] = true;
    dfs.order.push(root);
    stack.push((root, sorted_nbrs(root), 0));
    let mut bond_seen = vec![false; mol.bond_count()];
    while let Some((a, nbrs, pos)) = stack.last_mut() {
        if *pos >= nbrs.len() {
            stack.pop();
            continue;
        }
        let nb = mol.neighbors(*a)[nbrs[*pos]];
        *pos += 1;
        let a = *a;
        if bond_seen[nb.bond] {
            continue;
        }
        bond_seen[nb.bond] = true;
        if visited[nb.atom] {
            // back edge: ring closure opened at the earlier atom
            dfs.opens[nb.atom].push((nb.bond, a));
            dfs.closes[a].push(nb.bond);
        } else {
            visited[nb.atom] = true;
            dfs.parent_bond[nb.atom] = nb.bond;
            dfs.children[a].push(nb.atom);
            dfs.order.push(nb.atom);
            stack.push((nb.atom, sorted_nbrs(nb.atom), 0));
        }
    }
}

fn smiles_bond_sum(mol: &Molecule, atom: usize) -> u32 {
    mol.neighbors(atom)
        .iter()
        .map(|nb| match mol.bond(nb.bond).order {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        })
        .sum()
}

fn atom_text(mol: &Molecule, i: usize, out: &mut String) {
    let a = mol.atom(i);
    let organic = is_organic_subset(a.element, a.is_aromatic)
        && a.formal_charge == 0
        && a.isotope.is_none()
        && implicit_hydrogens(a.element, a.is_aromatic, smiles_bond_sum(mol, i))
            == Some(a.explicit_h_count as u32);
    let sym = a.symbol();
    let sym = if a.is_aromatic {
        sym.to_ascii_lowercase()
    } else {
        sym.to_string()
    };
    if organic {
        out.push_str(&sym);
        return;
    }
    out.push('[');
    if let Some(iso) = a.isotope {
        let _ = write!(out, "{iso}");
    }
    out.push_str(&sym);
    match a.explicit_h_count {
        0 => {}
        1 => out.push('H'),
        h => {
            let _ = write!(out, "H{h}");
        }
    }
    match a.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => {
            let _ = write!(out, "+{c}");
        }
        c => {
            let _ = write!(out, "-{}", -c);
        }
    }
    out.push(']');
}

fn bond_text(mol: &Molecule, bond: usize, out: &mut String) {
    let b = mol.bond(bond);
    let both_aromatic = mol.atom(b.begin).is_aromatic && mol.atom(b.end).is_aromatic;
    match b.order {
        BondOrder::Single if both_aromatic => out.push('-'),
        BondOrder::Single => {}
        BondOrder::Double => out.push('='),
        BondOrder::Triple => out.push('#'),
        BondOrder::Aromatic if both_aromatic => {}
        BondOrder::Aromatic => out.push(':'),
    }
}

fn ring_label(d: usize, out: &mut String) {
    if d < 10 {
        let _ = write!(out, "{d}");
    } else {
        let _ = write!(out, "%{d:02}");
    }
}

fn emit(mol: &Molecule, ranks: &[u32], dfs: &Dfs, root: usize) -> String {
    let mut out = String::new();
    let mut digit_of_bond = vec![usize::MAX; mol.bond_count()];
    let mut in_use: Vec<bool> = vec![false; 100];
    // explicit stack of (atom, phase); phase 0 = write atom, then children
    enum Step {
        Atom(usize),
        Text(&'static str),
    }
    let mut stack = vec![Step::Atom(root)];
    while let Some(step) = stack.pop() {
        let a = match step {
            Step::Text(t) => {
                out.push_str(t);
                continue;
            }
            Step::Atom(a) => a,
        };
        if dfs.parent_bond[a] != usize::MAX {
            bond_text(mol, dfs.parent_bond[a], &mut out);
        }
        atom_text(mol, a, &mut out);
        for &b in &dfs.closes[a] {
            let d = digit_of_bond[b];
            bond_text(mol, b, &mut out);
            ring_label(d, &mut out);
            in_use[d] = false;
        }
        let mut opens = dfs.opens[a].clone();
        opens.sort_by_key(|&(_, partner)| ranks[partner]);
        for (b, _) in opens {
            let d = (1..100).find(|&d| !in_use[d]).expect("fewer than 100 open rings");
            in_use[d] = true;
            digit_of_bond[b] = d;
            ring_label(d, &mut out);
        }
        let kids = &dfs.children[a];
        // push in reverse so the first child is processed first
        for (k, &c) in kids.iter().enumerate().rev() {
            if k + 1 < kids.len() {
                stack.push(Step::Text(")"));
                stack.push(Step::Atom(c));
                stack.push(Step::Text("("));
            } else {
                stack.push(Step::Atom(c));
            }
        }
    }
    out
}

pub(crate) fn write_with_ranks(mol: &Molecule, ranks: &[u32], sort_fragments: bool) -> String {
    let n = mol.atom_count();
    let mut dfs = Dfs {
        order: Vec::with_capacity(n),
        parent_bond: vec![usize::MAX; n],
        children: vec![Vec::new(); n],
        opens: vec![Vec::new(); n],
        closes: vec![Vec::new(); n],
    };
    let mut visited = vec![false; n];
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&i| ranks[i]);
    let mut parts = Vec::new();
    for &root in &by_rank {
        if visited[root] {
            continue;
        }
        traverse(mol, ranks, root, &mut visited, &mut dfs);
        parts.push(emit(mol, ranks, &dfs, root));
    }
    if sort_fragments {
        parts.sort();
    }
    parts.join(".")
}

/// Writes SMILES following atom index order. Stereo markers are not written.
pub fn write_smiles(mol: &Molecule) -> String {
    let ranks: Vec<u32> = (0..mol.atom_count() as u32).collect();
    write_with_ranks(mol, &ranks, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::{canonical_form, parse_smiles};

    #[test]
    fn round_trips() {
        for s in [
            "CCO",
            "c1ccccc1",
            "CC(=O)[O-].[Na+]",
            "c1ccc2[nH]ccc2c1",
            "C1CC2CCC1CC2",
            "[13CH3]C#N",
            "c1ccccc1-c1ccccc1",
            "O=c1cccc[nH]1",
            "C[N+](C)(C)C",
            "C1CCC2(CC1)CCCC2",
            "CS(=O)(=O)N",
            "[2H]C([2H])([2H])O",
        ] {
            let m = parse_smiles(s).unwrap();
            let written = write_smiles(&m);
            let back = parse_smiles(&written).unwrap_or_else(|e| panic!("{s} -> {written}: {e}"));
            assert_eq!(canonical_form(&back), canonical_form(&m), "{s} -> {written}");
        }
    }

    #[test]
    fn many_ring_closures() {
        // cubane needs several simultaneous closures
        let m = parse_smiles("C12C3C4C1C5C2C3C45").unwrap();
        let c = canonical_form(&m);
        let back = parse_smiles(&c).unwrap();
        assert_eq!(canonical_form(&back), c);
    }
}
