//! Kier-Hall electrotopological state indices.

use crate::elements;
use crate::mol::Molecule;

fn principal_quantum_number(z: u8) -> f64 {
    match z {
        0..=2 => 1.0,
        3..=10 => 2.0,
        11..=18 => 3.0,
        19..=36 => 4.0,
        37..=54 => 5.0,
        55..=86 => 6.0,
        _ => 7.0,
    }
}

/// Intrinsic state per atom: ((2/N)^2 * dv + 1) / degree, with dv the valence
/// electrons minus attached hydrogens. Isolated atoms get 0.
pub fn intrinsic_states(mol: &Molecule) -> Vec<f64> {
    (0..mol.atom_count())
        .map(|i| {
            let atom = mol.atom(i);
            let degree = mol.degree(i);
            if degree == 0 {
                return 0.0;
            }
            let outer = elements::element(atom.element).map_or(0, |e| e.outer_electrons) as f64;
            let dv = outer - atom.explicit_h_count as f64;
            let n = principal_quantum_number(atom.element);
            (4.0 / (n * n) * dv + 1.0) / degree as f64
        })
        .collect()
}

/// E-state index: intrinsic state plus the perturbation
/// sum_j (I_i - I_j) / (d_ij + 1)^2 over atoms in the same component.
pub fn estate_indices(mol: &Molecule) -> Vec<f64> {
    let is = intrinsic_states(mol);
    let dist = mol.topological_distances();
    let n = is.len();
    let mut out = is.clone();
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] == usize::MAX {
                continue;
            }
            let p = (dist[i][j] + 1) as f64;
            let t = (is[i] - is[j]) / (p * p);
            out[i] += t;
            out[j] -= t;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::parse_smiles;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ethanol_hand_values() {
        // I = [2, 1.5, 6]; perturbations over d = 1, 2, 1
        let e = estate_indices(&parse_smiles("CCO").unwrap());
        for (got, want) in e.iter().zip([121.0 / 72.0, 0.25, 545.0 / 72.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
    }
}
