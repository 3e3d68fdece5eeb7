//! Smallest set of smallest rings.
//!
//! Candidate cycles come from Horton's construction restricted to ring bonds
//! (non-bridges): for every ring atom `v` and ring bond `(x, y)`, the cycle
//! `path(v, x) + (x, y) + path(y, v)` when the two shortest paths only share
//! `v`. Candidates are sorted by length and kept when linearly independent
//! over GF(2) in edge space, until the cyclomatic number is reached.

use std::collections::{HashSet, VecDeque};

use super::Molecule;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RingInfo {
    /// Ordered atom cycles.
    pub rings: Vec<Vec<usize>>,
    /// Bond indices of each ring, aligned with `rings`.
    pub ring_bonds: Vec<Vec<usize>>,
    atom_rings: Vec<Vec<usize>>,
    bond_rings: Vec<Vec<usize>>,
}

impl RingInfo {
    pub fn atom_in_ring(&self, atom: usize) -> bool {
        self.atom_rings.get(atom).is_some_and(|r| !r.is_empty())
    }

    pub fn bond_in_ring(&self, bond: usize) -> bool {
        self.bond_rings.get(bond).is_some_and(|r| !r.is_empty())
    }

    /// Indices of rings containing `atom`.
    pub fn atom_ring_indices(&self, atom: usize) -> &[usize] {
        self.atom_rings.get(atom).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn bond_ring_indices(&self, bond: usize) -> &[usize] {
        self.bond_rings.get(bond).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn num_atom_rings(&self, atom: usize) -> usize {
        self.atom_ring_indices(atom).len()
    }

    pub fn is_atom_in_ring_of_size(&self, atom: usize, size: usize) -> bool {
        self.atom_ring_indices(atom)
            .iter()
            .any(|&r| self.rings[r].len() == size)
    }

    pub fn smallest_ring_size(&self, atom: usize) -> Option<usize> {
        self.atom_ring_indices(atom)
            .iter()
            .map(|&r| self.rings[r].len())
            .min()
    }

    pub fn len(&self) -> usize {
        self.rings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }
}

/// Marks bridges with Tarjan's low-link DFS (iterative).
fn bridges(mol: &Molecule) -> Vec<bool> {
    let n = mol.atom_count();
    let mut is_bridge = vec![false; mol.bond_count()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (atom, parent bond, next neighbor index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (a, pb, ref mut next)) = stack.last_mut() {
            let nbrs = mol.neighbors(a);
            if *next < nbrs.len() {
                let nb = nbrs[*next];
                *next += 1;
                if nb.bond == pb {
                    continue;
                }
                if disc[nb.atom] == usize::MAX {
                    disc[nb.atom] = timer;
                    low[nb.atom] = timer;
                    timer += 1;
                    stack.push((nb.atom, nb.bond, 0));
                } else {
                    low[a] = low[a].min(disc[nb.atom]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[a]);
                    if low[a] > disc[p] {
                        is_bridge[pb] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

struct Candidate {
    atoms: Vec<usize>,
    bonds: Vec<usize>,
}

pub(crate) fn perceive_rings(mol: &Molecule) -> RingInfo {
    let n = mol.atom_count();
    let nb = mol.bond_count();
    let mut info = RingInfo {
        atom_rings: vec![Vec::new(); n],
        bond_rings: vec![Vec::new(); nb],
        ..Default::default()
    };
    if nb < 3 {
        return info;
    }
    let bridge = bridges(mol);
    let ring_bonds: Vec<usize> = (0..nb).filter(|&b| !bridge[b]).collect();
    if ring_bonds.is_empty() {
        return info;
    }
    let mut ring_atom = vec![false; n];
    for &b in &ring_bonds {
        ring_atom[mol.bond(b).begin] = true;
        ring_atom[mol.bond(b).end] = true;
    }
    let ring_atoms: Vec<usize> = (0..n).filter(|&a| ring_atom[a]).collect();

    // cyclomatic number of the ring subgraph
    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0;
    for &s in &ring_atoms {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = ncomp;
        let mut stack = vec![s];
        while let Some(a) = stack.pop() {
            for e in mol.neighbors(a) {
                if !bridge[e.bond] && comp[e.atom] == usize::MAX {
                    comp[e.atom] = ncomp;
                    stack.push(e.atom);
                }
            }
        }
        ncomp += 1;
    }
    let target = ring_bonds.len() + ncomp - ring_atoms.len();

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut parent = vec![usize::MAX; n];
    let mut parent_bond = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    for &v in &ring_atoms {
        for &a in &ring_atoms {
            parent[a] = usize::MAX;
            parent_bond[a] = usize::MAX;
            depth[a] = usize::MAX;
        }
        depth[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(a) = queue.pop_front() {
            for e in mol.neighbors(a) {
                if bridge[e.bond] || depth[e.atom] != usize::MAX {
                    continue;
                }
                depth[e.atom] = depth[a] + 1;
                parent[e.atom] = a;
                parent_bond[e.atom] = e.bond;
                queue.push_back(e.atom);
            }
        }
        let path = |mut x: usize| -> (Vec<usize>, Vec<usize>) {
            let mut atoms = vec![x];
            let mut bonds = Vec::new();
            while x != v {
                bonds.push(parent_bond[x]);
                x = parent[x];
                atoms.push(x);
            }
            (atoms, bonds)
        };
        for &b in &ring_bonds {
            let (x, y) = (mol.bond(b).begin, mol.bond(b).end);
            if depth[x] == usize::MAX || depth[y] == usize::MAX {
                continue;
            }
            if parent_bond[x] == b || parent_bond[y] == b {
                continue;
            }
            let (px, bx) = path(x);
            let (py, by) = path(y);
            // paths may only share v
            let set: HashSet<usize> = px[..px.len() - 1].iter().copied().collect();
            if py[..py.len() - 1].iter().any(|a| set.contains(a)) {
                continue;
            }
            let mut key: Vec<usize> = bx.iter().chain(by.iter()).copied().collect();
            key.push(b);
            key.sort_unstable();
            if !seen.insert(key.clone()) {
                continue;
            }
            // cycle: x ... v ... y (x->v along px, then v->y reversed py)
            let mut atoms = px.clone();
            atoms.extend(py.iter().rev().skip(1));
            candidates.push(Candidate { atoms, bonds: key });
        }
    }
    candidates.sort_by(|a, b| {
        a.bonds
            .len()
            .cmp(&b.bonds.len())
            .then_with(|| a.bonds.cmp(&b.bonds))
    });

    // GF(2) elimination over bond bitsets
    let words = nb.div_ceil(64);
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new(); // (pivot bit, row)
    for cand in candidates {
        if info.rings.len() == target {
            break;
        }
        let mut row = vec![0u64; words];
        for &b in &cand.bonds {
            row[b / 64] |= 1 << (b % 64);
        }
        for (pivot, brow) in &basis {
            if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (w, bw) in row.iter_mut().zip(brow) {
                    *w ^= bw;
                }
            }
        }
        let pivot = row
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize);
        let Some(pivot) = pivot else { continue };
        // keep basis reduced so the pivot test above stays valid
        for (_, brow) in basis.iter_mut() {
            if brow[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (bw, w) in brow.iter_mut().zip(&row) {
                    *bw ^= w;
                }
            }
        }
        basis.push((pivot, row));
        let ri = info.rings.len();
        for &a in &cand.atoms {
            info.atom_rings[a].push(ri);
        }
        for &b in &cand.bonds {
            info.bond_rings[b].push(ri);
        }
        // bonds in ring order
        let k = cand.atoms.len();
        let ordered: Vec<usize> = (0..k)
            .map(|i| {
                mol.bond_between(cand.atoms[i], cand.atoms[(i + 1) % k])
                    .expect("consecutive ring atoms are bonded")
            })
            .collect();
        info.ring_bonds.push(ordered);
        info.rings.push(cand.atoms);
    }
    info
}
