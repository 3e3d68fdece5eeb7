//! Molecular graph model.
//!
//! A [`Molecule`] is an immutable, simple, undirected graph of [`Atom`]s and
//! [`Bond`]s. Ring membership and bond conjugation are perceived once at
//! construction; every structure-editing operation returns a new molecule.

mod aromatic;
mod canon;
mod normalize;
mod perceive;
mod rings;
pub mod sdf;
pub mod smiles;
mod writer;

use std::collections::BTreeMap;

use crate::elements;
use crate::error::{ChemError, Result};

pub use aromatic::aromatize;
pub use canon::{canonical_form, canonical_ranks, symmetry_classes};
pub use normalize::{neutralize, split_fragments};
pub use perceive::Hybridization;
pub use rings::RingInfo;
pub use sdf::{parse_sdf, SdfError, SdfRecord};
pub use smiles::parse_smiles;
pub use writer::write_smiles;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Valence contribution; aromatic counts as 1.5.
    pub fn valence(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }

    /// Valence in doubled units, so aromatic bonds stay integral.
    pub(crate) fn twice_valence(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

/// Tetrahedral chirality marker as written in the input. Annotation only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chirality {
    CounterClockwise,
    Clockwise,
}

/// Directional bond marker (`/` or `\`) as written in the input. Annotation only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    /// Atomic number, at least 1.
    pub element: u8,
    pub formal_charge: i8,
    /// Hydrogens attached to this atom that are not graph nodes.
    pub explicit_h_count: u8,
    pub is_aromatic: bool,
    pub isotope: Option<u16>,
    pub chirality: Option<Chirality>,
    /// Cartesian position in Angstrom.
    pub coordinates: Option<[f64; 3]>,
    pub computed_props: BTreeMap<String, f64>,
}

impl Atom {
    pub fn new(element: u8) -> Self {
        Atom {
            element,
            formal_charge: 0,
            explicit_h_count: 0,
            is_aromatic: false,
            isotope: None,
            chirality: None,
            coordinates: None,
            computed_props: BTreeMap::new(),
        }
    }

    pub fn with_charge(mut self, charge: i8) -> Self {
        self.formal_charge = charge;
        self
    }

    pub fn with_hydrogens(mut self, count: u8) -> Self {
        self.explicit_h_count = count;
        self
    }

    pub fn aromatic(mut self, flag: bool) -> Self {
        self.is_aromatic = flag;
        self
    }

    pub fn at(mut self, xyz: [f64; 3]) -> Self {
        self.coordinates = Some(xyz);
        self
    }

    pub fn symbol(&self) -> &'static str {
        elements::symbol(self.element)
    }

    pub fn is_hydrogen(&self) -> bool {
        self.element == 1
    }

    pub fn mass(&self) -> f64 {
        elements::weight(self.element)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub order: BondOrder,
    /// Derived at construction.
    pub in_ring: bool,
    /// Derived at construction.
    pub is_conjugated: bool,
    pub direction: Option<BondDirection>,
}

impl Bond {
    pub fn new(begin: usize, end: usize, order: BondOrder) -> Self {
        Bond {
            begin,
            end,
            order,
            in_ring: false,
            is_conjugated: false,
            direction: None,
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.begin == atom {
            self.end
        } else {
            self.begin
        }
    }

    pub fn touches(&self, atom: usize) -> bool {
        self.begin == atom || self.end == atom
    }
}

/// Neighbor entry: adjacent atom and the connecting bond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub atom: usize,
    pub bond: usize,
}

#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<Neighbor>>,
    ring_info: RingInfo,
    pub name: Option<String>,
    pub source_cid: Option<u64>,
}

impl Molecule {
    /// Builds a molecule, validating graph invariants and perceiving rings and
    /// conjugation. Derived bond flags in the input are recomputed.
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self> {
        let n = atoms.len();
        for (i, atom) in atoms.iter().enumerate() {
            if atom.element == 0 || elements::element(atom.element).is_none() {
                return Err(ChemError::Invalid(format!(
                    "atom {i} has invalid atomic number {}",
                    atom.element
                )));
            }
        }
        let with_coords = atoms.iter().filter(|a| a.coordinates.is_some()).count();
        if with_coords != 0 && with_coords != n {
            return Err(ChemError::Invalid(
                "coordinates must be present on all atoms or none".into(),
            ));
        }
        let mut adjacency = vec![Vec::new(); n];
        for (bi, b) in bonds.iter().enumerate() {
            if b.begin >= n || b.end >= n {
                return Err(ChemError::Invalid(format!(
                    "bond {bi} references missing atom"
                )));
            }
            if b.begin == b.end {
                return Err(ChemError::Invalid(format!("bond {bi} is a self-loop")));
            }
            if adjacency[b.begin]
                .iter()
                .any(|nb: &Neighbor| nb.atom == b.end)
            {
                return Err(ChemError::Invalid(format!(
                    "duplicate bond between atoms {} and {}",
                    b.begin, b.end
                )));
            }
            adjacency[b.begin].push(Neighbor {
                atom: b.end,
                bond: bi,
            });
            adjacency[b.end].push(Neighbor {
                atom: b.begin,
                bond: bi,
            });
        }
        let mut mol = Molecule {
            atoms,
            bonds,
            adjacency,
            ring_info: RingInfo::default(),
            name: None,
            source_cid: None,
        };
        mol.ring_info = rings::perceive_rings(&mol);
        for (bi, bond) in mol.bonds.iter_mut().enumerate() {
            bond.in_ring = mol.ring_info.bond_in_ring(bi);
        }
        let conj = perceive::conjugated_bonds(&mol);
        for (bond, c) in mol.bonds.iter_mut().zip(conj) {
            bond.is_conjugated = c;
        }
        Ok(mol)
    }

    pub fn empty() -> Self {
        Molecule::new(Vec::new(), Vec::new()).expect("empty molecule is valid")
    }

    pub fn with_name(mut self, name: Option<String>) -> Self {
        self.name = name;
        self
    }

    pub fn with_cid(mut self, cid: Option<u64>) -> Self {
        self.source_cid = cid;
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn neighbors(&self, atom: usize) -> &[Neighbor] {
        &self.adjacency[atom]
    }

    pub fn ring_info(&self) -> &RingInfo {
        &self.ring_info
    }

    /// Smallest set of smallest rings, each an ordered atom cycle.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.ring_info.rings
    }

    /// Number of graph neighbors (including explicit hydrogen nodes).
    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn heavy_degree(&self, atom: usize) -> usize {
        self.adjacency[atom]
            .iter()
            .filter(|nb| !self.atoms[nb.atom].is_hydrogen())
            .count()
    }

    /// Hydrogen count: implicit count plus hydrogen neighbors in the graph.
    pub fn total_h(&self, atom: usize) -> usize {
        self.atoms[atom].explicit_h_count as usize
            + self.adjacency[atom]
                .iter()
                .filter(|nb| self.atoms[nb.atom].is_hydrogen())
                .count()
    }

    /// Degree counting implicit hydrogens as neighbors.
    pub fn total_degree(&self, atom: usize) -> usize {
        self.degree(atom) + self.atoms[atom].explicit_h_count as usize
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|nb| nb.atom == b)
            .map(|nb| nb.bond)
    }

    /// Sum of bond valences (aromatic 1.5) over graph bonds.
    pub fn bond_valence_sum(&self, atom: usize) -> f64 {
        self.adjacency[atom]
            .iter()
            .map(|nb| self.bonds[nb.bond].order.valence())
            .sum()
    }

    /// Bond valence sum plus implicit hydrogens.
    pub fn total_valence(&self, atom: usize) -> f64 {
        self.bond_valence_sum(atom) + self.atoms[atom].explicit_h_count as f64
    }

    pub fn net_charge(&self) -> i32 {
        self.atoms.iter().map(|a| a.formal_charge as i32).sum()
    }

    pub fn has_coordinates(&self) -> bool {
        !self.atoms.is_empty() && self.atoms.iter().all(|a| a.coordinates.is_some())
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| !a.is_hydrogen()).count()
    }

    pub fn is_atom_in_ring(&self, atom: usize) -> bool {
        self.ring_info.atom_in_ring(atom)
    }

    pub fn hybridization(&self, atom: usize) -> Hybridization {
        perceive::hybridization(self, atom)
    }

    /// Connected-component label for every atom, numbered in order of first atom.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.atoms.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            stack.push(start);
            while let Some(a) = stack.pop() {
                for nb in &self.adjacency[a] {
                    if label[nb.atom] == usize::MAX {
                        label[nb.atom] = count;
                        stack.push(nb.atom);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// All-pairs shortest path lengths in bonds; `usize::MAX` when disconnected.
    pub fn topological_distances(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut dist = vec![vec![usize::MAX; n]; n];
        let mut queue = std::collections::VecDeque::new();
        for (s, row) in dist.iter_mut().enumerate() {
            row[s] = 0;
            queue.push_back(s);
            while let Some(a) = queue.pop_front() {
                let d = row[a];
                for nb in &self.adjacency[a] {
                    if row[nb.atom] == usize::MAX {
                        row[nb.atom] = d + 1;
                        queue.push_back(nb.atom);
                    }
                }
            }
        }
        dist
    }

    /// Induced subgraph on `keep` (in the given order), re-perceived.
    pub fn subgraph(&self, keep: &[usize]) -> Molecule {
        let mut map = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let atoms = keep.iter().map(|&i| self.atoms[i].clone()).collect();
        let bonds = self
            .bonds
            .iter()
            .filter(|b| map[b.begin] != usize::MAX && map[b.end] != usize::MAX)
            .map(|b| Bond {
                begin: map[b.begin],
                end: map[b.end],
                ..b.clone()
            })
            .collect();
        Molecule::new(atoms, bonds)
            .expect("induced subgraph of a valid molecule is valid")
            .with_name(self.name.clone())
            .with_cid(self.source_cid)
    }

    /// Returns the same molecule with atoms reordered: new atom `i` is old atom `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Molecule {
        assert_eq!(order.len(), self.atoms.len(), "permutation length");
        self.subgraph(order)
    }

    /// Rebuilds with edited atoms/bonds while keeping identity metadata.
    pub(crate) fn rebuild(&self, atoms: Vec<Atom>, bonds: Vec<Bond>) -> Molecule {
        Molecule::new(atoms, bonds)
            .expect("edit preserves graph validity")
            .with_name(self.name.clone())
            .with_cid(self.source_cid)
    }

    /// Converts implicit hydrogens into explicit hydrogen nodes. New hydrogens
    /// are appended after the existing atoms, in parent order. Coordinates, if
    /// present, are placed 1.0 Angstrom from the parent along a fixed axis
    /// pattern; callers needing real geometry must supply it.
    pub fn with_explicit_hydrogens(&self) -> Molecule {
        let mut atoms: Vec<Atom> = self.atoms.clone();
        let mut bonds: Vec<Bond> = self.bonds.clone();
        let dirs = [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        for i in 0..self.atoms.len() {
            let nh = self.atoms[i].explicit_h_count as usize;
            atoms[i].explicit_h_count = 0;
            for k in 0..nh {
                let mut h = Atom::new(1);
                if let Some(p) = self.atoms[i].coordinates {
                    let d = dirs[k % dirs.len()];
                    h.coordinates = Some([p[0] + d[0], p[1] + d[1], p[2] + d[2]]);
                }
                let hi = atoms.len();
                atoms.push(h);
                bonds.push(Bond::new(i, hi, BondOrder::Single));
            }
        }
        self.rebuild(atoms, bonds)
    }

    /// Removes hydrogen nodes that carry no charge or isotope label, folding
    /// them into the parent's hydrogen count.
    pub fn without_explicit_hydrogens(&self) -> Molecule {
        let removable: Vec<bool> = (0..self.atoms.len())
            .map(|i| {
                let a = &self.atoms[i];
                a.is_hydrogen()
                    && a.formal_charge == 0
                    && a.isotope.is_none()
                    && self.degree(i) == 1
                    && !self.atoms[self.adjacency[i][0].atom].is_hydrogen()
            })
            .collect();
        let mut atoms = self.atoms.clone();
        for (i, &r) in removable.iter().enumerate() {
            if r {
                let parent = self.adjacency[i][0].atom;
                atoms[parent].explicit_h_count += 1;
            }
        }
        let keep: Vec<usize> = (0..atoms.len()).filter(|&i| !removable[i]).collect();
        let tmp = self.rebuild(atoms, self.bonds.clone());
        tmp.subgraph(&keep)
    }
}

/// Sum of standard atomic weights, including implicit hydrogens.
pub fn molecular_weight(mol: &Molecule) -> f64 {
    mol.atoms()
        .iter()
        .map(|a| a.mass() + a.explicit_h_count as f64 * elements::HYDROGEN_WEIGHT)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_and_self_bonds() {
        let atoms = vec![Atom::new(6), Atom::new(6)];
        let dup = vec![
            Bond::new(0, 1, BondOrder::Single),
            Bond::new(1, 0, BondOrder::Single),
        ];
        assert!(Molecule::new(atoms.clone(), dup).is_err());
        assert!(Molecule::new(atoms.clone(), vec![Bond::new(0, 0, BondOrder::Single)]).is_err());
        assert!(Molecule::new(atoms, vec![Bond::new(0, 2, BondOrder::Single)]).is_err());
    }

    #[test]
    fn partial_coordinates_rejected() {
        let atoms = vec![Atom::new(6).at([0.0; 3]), Atom::new(6)];
        assert!(Molecule::new(atoms, vec![]).is_err());
    }

    #[test]
    fn weights() {
        let methane = parse_smiles("C").unwrap();
        assert!((molecular_weight(&methane) - 16.04).abs() < 0.01);
        let water = parse_smiles("O").unwrap();
        assert!((molecular_weight(&water) - 18.02).abs() < 0.01);
        assert_eq!(molecular_weight(&Molecule::empty()), 0.0);
    }

    #[test]
    fn explicit_hydrogen_round_trip() {
        let m = parse_smiles("CC(=O)O").unwrap();
        let h = m.with_explicit_hydrogens();
        assert_eq!(h.atom_count(), 8);
        assert_eq!(h.total_h(0), 3);
        let back = h.without_explicit_hydrogens();
        assert_eq!(canonical_form(&back), canonical_form(&m));
    }
}
