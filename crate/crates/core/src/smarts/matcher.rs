//! Backtracking subgraph-monomorphism search (VF2-style candidate generation
//! from already-mapped neighbors, with atom and bond predicate pruning).

use std::cell::RefCell;
use std::collections::HashMap;

use super::{AtomPrim, BondPrim, Pattern};
use crate::mol::{BondOrder, Molecule};

#[derive(Debug, Clone)]
struct AtomInfo {
    element: u8,
    aromatic: bool,
    charge: i8,
    isotope: u16,
    total_h: u8,
    implicit_h: u8,
    degree: u8,
    total_degree: u8,
    valence: u8,
    ring_count: u8,
    ring_bonds: u8,
}

/// Per-molecule data precomputed once and reused across many patterns.
/// Holds a memo for recursive sub-patterns, so it is meant for one thread.
pub struct MatchTarget<'m> {
    mol: &'m Molecule,
    info: Vec<AtomInfo>,
    recursive_memo: RefCell<HashMap<(usize, usize), bool>>,
}

impl<'m> MatchTarget<'m> {
    pub fn new(mol: &'m Molecule) -> Self {
        let rings = mol.ring_info();
        let info = (0..mol.atom_count())
            .map(|i| {
                let a = mol.atom(i);
                let ring_bonds = mol
                    .neighbors(i)
                    .iter()
                    .filter(|nb| mol.bond(nb.bond).in_ring)
                    .count();
                AtomInfo {
                    element: a.element,
                    aromatic: a.is_aromatic,
                    charge: a.formal_charge,
                    isotope: a.isotope.unwrap_or(0),
                    total_h: mol.total_h(i) as u8,
                    implicit_h: a.explicit_h_count,
                    degree: mol.degree(i) as u8,
                    total_degree: mol.total_degree(i) as u8,
                    valence: mol.total_valence(i).round() as u8,
                    ring_count: rings.num_atom_rings(i) as u8,
                    ring_bonds: ring_bonds as u8,
                }
            })
            .collect();
        MatchTarget {
            mol,
            info,
            recursive_memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn molecule(&self) -> &Molecule {
        self.mol
    }

    fn atom_prim(&self, prim: &AtomPrim, t: usize) -> bool {
        let a = &self.info[t];
        match prim {
            AtomPrim::Any => true,
            AtomPrim::Aromatic(flag) => a.aromatic == *flag,
            AtomPrim::Element { z, aromatic } => {
                a.element == *z && aromatic.is_none_or(|f| f == a.aromatic)
            }
            AtomPrim::Isotope(i) => a.isotope == *i,
            AtomPrim::Charge(c) => a.charge == *c,
            AtomPrim::TotalH(n) => a.total_h == *n,
            AtomPrim::ImplicitH(None) => a.implicit_h > 0,
            AtomPrim::ImplicitH(Some(n)) => a.implicit_h == *n,
            AtomPrim::Degree(n) => a.degree == *n,
            AtomPrim::TotalDegree(n) => a.total_degree == *n,
            AtomPrim::Valence(n) => a.valence == *n,
            AtomPrim::RingCount(None) => a.ring_count > 0,
            AtomPrim::RingCount(Some(n)) => a.ring_count == *n,
            AtomPrim::RingSize(None) => a.ring_count > 0,
            AtomPrim::RingSize(Some(0)) => a.ring_count == 0,
            AtomPrim::RingSize(Some(n)) => self
                .mol
                .ring_info()
                .is_atom_in_ring_of_size(t, *n as usize),
            AtomPrim::RingConnectivity(None) => a.ring_bonds > 0,
            AtomPrim::RingConnectivity(Some(n)) => a.ring_bonds == *n,
            AtomPrim::Recursive(sub) => {
                let key = (sub.as_ref() as *const Pattern as usize, t);
                if let Some(&hit) = self.recursive_memo.borrow().get(&key) {
                    return hit;
                }
                let hit = search(sub, self, Some(t), None);
                self.recursive_memo.borrow_mut().insert(key, hit);
                hit
            }
        }
    }

    fn atom_ok(&self, p: &Pattern, q: usize, t: usize) -> bool {
        p.atoms[q].eval(&mut |prim| self.atom_prim(prim, t))
    }

    fn bond_ok(&self, p: &Pattern, qb: usize, tb: usize) -> bool {
        let b = self.mol.bond(tb);
        p.bonds[qb].expr.eval(&mut |prim| match prim {
            BondPrim::Single => b.order == BondOrder::Single,
            BondPrim::Double => b.order == BondOrder::Double,
            BondPrim::Triple => b.order == BondOrder::Triple,
            BondPrim::Aromatic => b.order == BondOrder::Aromatic,
            BondPrim::Ring => b.in_ring,
            BondPrim::Any => true,
        })
    }
}

struct Search<'p, 't, 'm> {
    p: &'p Pattern,
    t: &'t MatchTarget<'m>,
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_, '_, '_> {
    fn feasible(&self, q: usize, t: usize) -> bool {
        if self.used[t] || !self.t.atom_ok(self.p, q, t) {
            return false;
        }
        for &(qn, qb) in self.p.neighbors(q) {
            let tn = self.map[qn];
            if tn == usize::MAX {
                continue;
            }
            match self.t.mol.bond_between(t, tn) {
                Some(tb) if self.t.bond_ok(self.p, qb, tb) => {}
                _ => return false,
            }
        }
        true
    }

    fn extend(&mut self, depth: usize, root: Option<usize>) -> bool {
        if depth == self.p.order.len() {
            return true;
        }
        let q = self.p.order[depth];
        let candidates: Vec<usize> = match self.p.anchor[q] {
            Some(a) => self
                .t
                .mol
                .neighbors(self.map[a])
                .iter()
                .map(|nb| nb.atom)
                .collect(),
            None if depth == 0 && root.is_some() => vec![root.unwrap()],
            None => (0..self.t.info.len()).collect(),
        };
        for t in candidates {
            if self.feasible(q, t) {
                self.map[q] = t;
                self.used[t] = true;
                if self.extend(depth + 1, root) {
                    return true;
                }
                self.map[q] = usize::MAX;
                self.used[t] = false;
            }
        }
        false
    }
}

fn search(
    p: &Pattern,
    target: &MatchTarget<'_>,
    root: Option<usize>,
    out: Option<&mut Vec<usize>>,
) -> bool {
    if p.atoms.len() > target.info.len() {
        return false;
    }
    let mut s = Search {
        p,
        t: target,
        map: vec![usize::MAX; p.atoms.len()],
        used: vec![false; target.info.len()],
    };
    let found = s.extend(0, root);
    if found {
        if let Some(out) = out {
            *out = s.map;
        }
    }
    found
}

impl Pattern {
    /// Match against a prepared target; see [`MatchTarget`].
    pub fn matches(&self, target: &MatchTarget<'_>) -> bool {
        search(self, target, None, None)
    }

    /// True when an embedding exists with query atom 0 mapped to `atom`.
    pub fn matches_at(&self, target: &MatchTarget<'_>, atom: usize) -> bool {
        search(self, target, Some(atom), None)
    }
}

/// True when some injective mapping of query atoms satisfies every atom and
/// bond predicate. Stops at the first embedding.
pub fn has_match(mol: &Molecule, p: &Pattern) -> bool {
    search(p, &MatchTarget::new(mol), None, None)
}

/// First embedding found, as target atom index per query atom.
pub fn find_match(mol: &Molecule, p: &Pattern) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    search(p, &MatchTarget::new(mol), None, Some(&mut out)).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::super::compile_pattern;
    use super::*;
    use crate::mol::parse_smiles;

    fn m(smiles: &str, smarts: &str) -> bool {
        has_match(&parse_smiles(smiles).unwrap(), &compile_pattern(smarts).unwrap())
    }

    #[test]
    fn basic_matches() {
        assert!(m("c1ccccc1", "c1ccccc1"));
        assert!(!m("C", "[OH]"));
        assert!(m("Cc1ccccc1", "[CH3]c"));
        assert!(m("CCO", "[OH]"));
        assert!(!m("COC", "[OH]"));
        assert!(m("CC(=O)O", "C(=O)[OX2H1]"));
        assert!(!m("C1CCCCC1", "c"));
        assert!(m("C1CCCCC1", "[C;R1;r6]"));
        assert!(!m("CCCCCC", "[R]"));
        assert!(m("CC#N", "C#N"));
        assert!(m("c1ccccc1C", "c-[CH3]"));
        assert!(!m("c1ccccc1C", "c:[CH3]"));
        assert!(m("C[N+](=O)[O-]", "[N+](=O)[O-]"));
        assert!(m("CCO.[Na+]", "[Na+].[OH]"));
        assert!(!m("CCO", "[Na+].[OH]"));
    }

    #[test]
    fn recursive() {
        assert!(m("CC(=O)O", "[$([OH]C=O)]"));
        assert!(!m("CCO", "[$([OH]C=O)]"));
        assert!(m("C[N+](=O)[O-]", "[N+;$(*~[#8-])]"));
        assert!(!m("C[N+](C)(C)C", "[N+;$(*~[#8-])]"));
    }

    #[test]
    fn mapping_is_injective() {
        let mol = parse_smiles("CCO").unwrap();
        let p = compile_pattern("CC").unwrap();
        let map = find_match(&mol, &p).unwrap();
        assert_ne!(map[0], map[1]);
        assert!(!m("CO", "CC"));
    }
}
