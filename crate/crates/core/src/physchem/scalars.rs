//! Whole-molecule scalar descriptors.

use std::collections::BTreeMap;

use super::{crippen, AtomProperties};
use crate::error::{ChemError, Result};
use crate::mol::{molecular_weight, BondOrder, Molecule};

/// Scalar names in descriptor order.
pub const SCALAR_NAMES: [&str; 23] = [
    "molecular_weight",
    "hbd",
    "hba",
    "logp",
    "total_charge",
    "rotatable_bonds",
    "aromatic_rings",
    "rings",
    "tpsa",
    "girth",
    "bond_girth",
    "largest_ring",
    "smallest_ring",
    "atoms_in_aromatic_fused_rings",
    "atoms_in_fused_rings",
    "sigma_charge_min",
    "sigma_charge_max",
    "sigma_charge_std",
    "sigma_charge_sum_abs",
    "v_charge_min",
    "v_charge_max",
    "v_charge_std",
    "v_charge_sum_abs",
];

pub fn hbd(mol: &Molecule) -> usize {
    (0..mol.atom_count())
        .filter(|&i| matches!(mol.atom(i).element, 7 | 8) && mol.total_h(i) > 0)
        .count()
}

pub fn hba(mol: &Molecule) -> usize {
    mol.atoms()
        .iter()
        .filter(|a| matches!(a.element, 7 | 8))
        .count()
}

fn is_amide_cn(mol: &Molecule, c: usize, n: usize) -> bool {
    mol.atom(c).element == 6
        && mol.atom(n).element == 7
        && mol.neighbors(c).iter().any(|nb| {
            mol.atom(nb.atom).element == 8 && mol.bond(nb.bond).order == BondOrder::Double
        })
}

pub fn rotatable_bonds(mol: &Molecule) -> usize {
    mol.bonds()
        .iter()
        .filter(|b| {
            b.order == BondOrder::Single
                && !b.in_ring
                && !mol.atom(b.begin).is_hydrogen()
                && !mol.atom(b.end).is_hydrogen()
                && mol.heavy_degree(b.begin) > 1
                && mol.heavy_degree(b.end) > 1
                && !is_amide_cn(mol, b.begin, b.end)
                && !is_amide_cn(mol, b.end, b.begin)
        })
        .count()
}

fn aromatic_ring_flags(mol: &Molecule) -> Vec<bool> {
    mol.ring_info()
        .ring_bonds
        .iter()
        .map(|bonds| bonds.iter().all(|&b| mol.bond(b).order == BondOrder::Aromatic))
        .collect()
}

/// Atoms belonging to a ring that shares a bond with another ring, counting
/// only rings accepted by `keep`.
fn fused_ring_atoms(mol: &Molecule, keep: &[bool]) -> usize {
    let info = mol.ring_info();
    let mut atoms = vec![false; mol.atom_count()];
    for (r, bonds) in info.ring_bonds.iter().enumerate() {
        if !keep[r] {
            continue;
        }
        let fused = bonds.iter().any(|&b| {
            info.bond_ring_indices(b)
                .iter()
                .any(|&other| other != r && keep[other])
        });
        if fused {
            for &a in &info.rings[r] {
                atoms[a] = true;
            }
        }
    }
    atoms.iter().filter(|&&x| x).count()
}

fn bond_girth(mol: &Molecule) -> usize {
    mol.topological_distances()
        .iter()
        .flatten()
        .filter(|&&d| d != usize::MAX)
        .copied()
        .max()
        .unwrap_or(0)
}

fn girth(mol: &Molecule) -> Result<f64> {
    if mol.atom_count() <= 1 {
        return Ok(0.0);
    }
    if !mol.has_coordinates() {
        return Err(ChemError::MissingCoordinates);
    }
    let xyz: Vec<[f64; 3]> = mol.atoms().iter().map(|a| a.coordinates.unwrap()).collect();
    let mut best: f64 = 0.0;
    for i in 0..xyz.len() {
        for j in i + 1..xyz.len() {
            best = best.max(distance(xyz[i], xyz[j]));
        }
    }
    Ok(best)
}

pub(crate) fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// min, max, population standard deviation, sum of absolute values.
fn summary(v: &[f64]) -> [f64; 4] {
    if v.is_empty() {
        return [0.0; 4];
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    [
        v.iter().copied().fold(f64::INFINITY, f64::min),
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        var.sqrt(),
        v.iter().map(|x| x.abs()).sum(),
    ]
}

/// logP as the sum of per-atom Crippen contributions, with implicit hydrogens
/// typed as their own atoms.
pub fn logp(mol: &Molecule, props: &AtomProperties) -> f64 {
    let full = mol.with_explicit_hydrogens();
    let (h_logp, _, _) = crippen::crippen_contributions(&full);
    props.crippen_logp.iter().sum::<f64>() + h_logp[mol.atom_count()..].iter().sum::<f64>()
}

/// (MW, logP, HBD, HBA) computed natively; needs no coordinates or charges.
pub fn lipinski_inputs(mol: &Molecule) -> (f64, f64, usize, usize) {
    let (logp, _) = crippen::crippen_totals(mol);
    (molecular_weight(mol), logp, hbd(mol), hba(mol))
}

/// The 23 scalar descriptors, keyed by [`SCALAR_NAMES`]. Girth needs
/// coordinates for molecules with more than one atom.
pub fn molecule_scalars(mol: &Molecule, props: &AtomProperties) -> Result<BTreeMap<&'static str, f64>> {
    let aromatic = aromatic_ring_flags(mol);
    let all = vec![true; aromatic.len()];
    let sizes: Vec<usize> = mol.rings().iter().map(Vec::len).collect();
    let sigma = summary(&props.sigma_charge);
    let vq = summary(&props.v_charge);
    let values = [
        molecular_weight(mol),
        hbd(mol) as f64,
        hba(mol) as f64,
        logp(mol, props),
        mol.net_charge() as f64,
        rotatable_bonds(mol) as f64,
        aromatic.iter().filter(|&&a| a).count() as f64,
        sizes.len() as f64,
        props.tpsa_contrib.iter().sum(),
        girth(mol)?,
        bond_girth(mol) as f64,
        sizes.iter().copied().max().unwrap_or(0) as f64,
        sizes.iter().copied().min().unwrap_or(0) as f64,
        fused_ring_atoms(mol, &aromatic) as f64,
        fused_ring_atoms(mol, &all) as f64,
        sigma[0],
        sigma[1],
        sigma[2],
        sigma[3],
        vq[0],
        vq[1],
        vq[2],
        vq[3],
    ];
    Ok(SCALAR_NAMES.iter().copied().zip(values).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::parse_smiles;
    use crate::physchem::{atom_properties, PropertyProvider};

    fn scalars(smiles: &str) -> Result<BTreeMap<&'static str, f64>> {
        let m = parse_smiles(smiles).unwrap();
        let p = atom_properties(&m, &PropertyProvider::Native).unwrap();
        molecule_scalars(&m, &p)
    }

    #[test]
    fn benzene() {
        let m = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(rotatable_bonds(&m), 0);
        assert_eq!(bond_girth(&m), 3);
        assert_eq!(aromatic_ring_flags(&m), vec![true]);
        assert!(matches!(scalars("c1ccccc1"), Err(ChemError::MissingCoordinates)));
    }

    #[test]
    fn single_atom() {
        let s = scalars("C").unwrap();
        assert_eq!(s["girth"], 0.0);
        assert_eq!(s["bond_girth"], 0.0);
        assert_eq!(s["rings"], 0.0);
        assert_eq!(s.len(), 23);
    }

    #[test]
    fn fused_counts() {
        let m = parse_smiles("c1ccc2ccccc2c1").unwrap();
        let arom = aromatic_ring_flags(&m);
        assert_eq!(fused_ring_atoms(&m, &arom), 10);
        let m = parse_smiles("c1ccccc1C1CCCCC1").unwrap();
        assert_eq!(fused_ring_atoms(&m, &[true, true]), 0);
        let m = parse_smiles("c1ccc2c(c1)CCCC2").unwrap();
        assert_eq!(fused_ring_atoms(&m, &aromatic_ring_flags(&m)), 0);
        assert_eq!(fused_ring_atoms(&m, &[true, true]), 10);
    }

    #[test]
    fn rotatable_definition() {
        assert_eq!(rotatable_bonds(&parse_smiles("CCCC").unwrap()), 1);
        assert_eq!(rotatable_bonds(&parse_smiles("CC(=O)NC").unwrap()), 0);
        assert_eq!(rotatable_bonds(&parse_smiles("C=CC=C").unwrap()), 1);
        assert_eq!(rotatable_bonds(&parse_smiles("CC#CC").unwrap()), 0);
        assert_eq!(hbd(&parse_smiles("OCCN(C)C").unwrap()), 1);
        assert_eq!(hba(&parse_smiles("OCCN(C)C").unwrap()), 2);
    }
}
