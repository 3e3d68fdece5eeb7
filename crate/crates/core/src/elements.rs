//! Periodic table data used for valence checks, masses and surface-area radii.

#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub symbol: &'static str,
    /// Standard atomic weight in Daltons.
    pub weight: f64,
    /// Covalent bond radius in Angstrom (Labute ASA uses it).
    pub bond_radius: f64,
    pub outer_electrons: u8,
    /// Allowed neutral valences, ascending. Empty means unconstrained.
    pub valences: &'static [u8],
}

static TABLE: [Element; 103] = [
    Element { symbol: "H", weight: 1.008, bond_radius: 0.33, outer_electrons: 1, valences: &[1] },
    Element { symbol: "He", weight: 4.003, bond_radius: 0.7, outer_electrons: 2, valences: &[0] },
    Element { symbol: "Li", weight: 6.941, bond_radius: 1.23, outer_electrons: 1, valences: &[1] },
    Element { symbol: "Be", weight: 9.012, bond_radius: 0.9, outer_electrons: 2, valences: &[2] },
    Element { symbol: "B", weight: 10.812, bond_radius: 0.82, outer_electrons: 3, valences: &[3] },
    Element { symbol: "C", weight: 12.011, bond_radius: 0.77, outer_electrons: 4, valences: &[4] },
    Element { symbol: "N", weight: 14.007, bond_radius: 0.7, outer_electrons: 5, valences: &[3] },
    Element { symbol: "O", weight: 15.999, bond_radius: 0.66, outer_electrons: 6, valences: &[2] },
    Element { symbol: "F", weight: 18.998, bond_radius: 0.611, outer_electrons: 7, valences: &[1] },
    Element { symbol: "Ne", weight: 20.18, bond_radius: 0.7, outer_electrons: 8, valences: &[0] },
    Element { symbol: "Na", weight: 22.99, bond_radius: 1.54, outer_electrons: 1, valences: &[1] },
    Element { symbol: "Mg", weight: 24.305, bond_radius: 1.36, outer_electrons: 2, valences: &[2] },
    Element { symbol: "Al", weight: 26.982, bond_radius: 1.18, outer_electrons: 3, valences: &[3] },
    Element { symbol: "Si", weight: 28.086, bond_radius: 0.937, outer_electrons: 4, valences: &[4] },
    Element { symbol: "P", weight: 30.974, bond_radius: 0.89, outer_electrons: 5, valences: &[3, 5] },
    Element { symbol: "S", weight: 32.067, bond_radius: 1.04, outer_electrons: 6, valences: &[2, 4, 6] },
    Element { symbol: "Cl", weight: 35.453, bond_radius: 0.997, outer_electrons: 7, valences: &[1] },
    Element { symbol: "Ar", weight: 39.948, bond_radius: 1.74, outer_electrons: 8, valences: &[0] },
    Element { symbol: "K", weight: 39.098, bond_radius: 2.03, outer_electrons: 1, valences: &[1] },
    Element { symbol: "Ca", weight: 40.078, bond_radius: 1.74, outer_electrons: 2, valences: &[2] },
    Element { symbol: "Sc", weight: 44.956, bond_radius: 1.44, outer_electrons: 3, valences: &[] },
    Element { symbol: "Ti", weight: 47.867, bond_radius: 1.32, outer_electrons: 4, valences: &[] },
    Element { symbol: "V", weight: 50.944, bond_radius: 1.22, outer_electrons: 5, valences: &[] },
    Element { symbol: "Cr", weight: 51.996, bond_radius: 1.18, outer_electrons: 6, valences: &[] },
    Element { symbol: "Mn", weight: 54.938, bond_radius: 1.17, outer_electrons: 7, valences: &[] },
    Element { symbol: "Fe", weight: 55.845, bond_radius: 1.17, outer_electrons: 8, valences: &[] },
    Element { symbol: "Co", weight: 58.933, bond_radius: 1.16, outer_electrons: 9, valences: &[] },
    Element { symbol: "Ni", weight: 58.693, bond_radius: 1.15, outer_electrons: 10, valences: &[] },
    Element { symbol: "Cu", weight: 63.546, bond_radius: 1.17, outer_electrons: 11, valences: &[] },
    Element { symbol: "Zn", weight: 65.39, bond_radius: 1.25, outer_electrons: 2, valences: &[] },
    Element { symbol: "Ga", weight: 69.723, bond_radius: 1.26, outer_electrons: 3, valences: &[3] },
    Element { symbol: "Ge", weight: 72.61, bond_radius: 1.188, outer_electrons: 4, valences: &[4] },
    Element { symbol: "As", weight: 74.922, bond_radius: 1.2, outer_electrons: 5, valences: &[3, 5] },
    Element { symbol: "Se", weight: 78.96, bond_radius: 1.17, outer_electrons: 6, valences: &[2, 4, 6] },
    Element { symbol: "Br", weight: 79.904, bond_radius: 1.167, outer_electrons: 7, valences: &[1] },
    Element { symbol: "Kr", weight: 83.8, bond_radius: 1.91, outer_electrons: 8, valences: &[0] },
    Element { symbol: "Rb", weight: 85.468, bond_radius: 2.16, outer_electrons: 1, valences: &[1] },
    Element { symbol: "Sr", weight: 87.62, bond_radius: 1.91, outer_electrons: 2, valences: &[2] },
    Element { symbol: "Y", weight: 88.906, bond_radius: 1.62, outer_electrons: 3, valences: &[] },
    Element { symbol: "Zr", weight: 91.224, bond_radius: 1.45, outer_electrons: 4, valences: &[] },
    Element { symbol: "Nb", weight: 92.906, bond_radius: 1.34, outer_electrons: 5, valences: &[] },
    Element { symbol: "Mo", weight: 95.94, bond_radius: 1.3, outer_electrons: 6, valences: &[] },
    Element { symbol: "Tc", weight: 98.0, bond_radius: 1.27, outer_electrons: 7, valences: &[] },
    Element { symbol: "Ru", weight: 101.07, bond_radius: 1.25, outer_electrons: 8, valences: &[] },
    Element { symbol: "Rh", weight: 102.906, bond_radius: 1.25, outer_electrons: 9, valences: &[] },
    Element { symbol: "Pd", weight: 106.42, bond_radius: 1.28, outer_electrons: 10, valences: &[] },
    Element { symbol: "Ag", weight: 107.868, bond_radius: 1.34, outer_electrons: 11, valences: &[] },
    Element { symbol: "Cd", weight: 112.412, bond_radius: 1.48, outer_electrons: 2, valences: &[] },
    Element { symbol: "In", weight: 114.818, bond_radius: 1.44, outer_electrons: 3, valences: &[3] },
    Element { symbol: "Sn", weight: 118.711, bond_radius: 1.385, outer_electrons: 4, valences: &[2, 4] },
    Element { symbol: "Sb", weight: 121.76, bond_radius: 1.4, outer_electrons: 5, valences: &[3, 5] },
    Element { symbol: "Te", weight: 127.6, bond_radius: 1.378, outer_electrons: 6, valences: &[2, 4, 6] },
    Element { symbol: "I", weight: 126.904, bond_radius: 1.387, outer_electrons: 7, valences: &[1, 3, 5] },
    Element { symbol: "Xe", weight: 131.29, bond_radius: 1.98, outer_electrons: 8, valences: &[0, 2, 4, 6] },
    Element { symbol: "Cs", weight: 132.905, bond_radius: 2.35, outer_electrons: 1, valences: &[1] },
    Element { symbol: "Ba", weight: 137.328, bond_radius: 1.98, outer_electrons: 2, valences: &[2] },
    Element { symbol: "La", weight: 138.906, bond_radius: 1.69, outer_electrons: 3, valences: &[] },
    Element { symbol: "Ce", weight: 140.116, bond_radius: 1.83, outer_electrons: 4, valences: &[] },
    Element { symbol: "Pr", weight: 140.908, bond_radius: 1.82, outer_electrons: 3, valences: &[] },
    Element { symbol: "Nd", weight: 144.24, bond_radius: 1.81, outer_electrons: 4, valences: &[] },
    Element { symbol: "Pm", weight: 145.0, bond_radius: 1.8, outer_electrons: 5, valences: &[] },
    Element { symbol: "Sm", weight: 150.36, bond_radius: 1.8, outer_electrons: 6, valences: &[] },
    Element { symbol: "Eu", weight: 151.964, bond_radius: 1.99, outer_electrons: 7, valences: &[] },
    Element { symbol: "Gd", weight: 157.25, bond_radius: 1.79, outer_electrons: 8, valences: &[] },
    Element { symbol: "Tb", weight: 158.925, bond_radius: 1.76, outer_electrons: 9, valences: &[] },
    Element { symbol: "Dy", weight: 162.5, bond_radius: 1.75, outer_electrons: 10, valences: &[] },
    Element { symbol: "Ho", weight: 164.93, bond_radius: 1.74, outer_electrons: 11, valences: &[] },
    Element { symbol: "Er", weight: 167.26, bond_radius: 1.73, outer_electrons: 12, valences: &[] },
    Element { symbol: "Tm", weight: 168.934, bond_radius: 1.72, outer_electrons: 13, valences: &[] },
    Element { symbol: "Yb", weight: 173.04, bond_radius: 1.94, outer_electrons: 14, valences: &[] },
    Element { symbol: "Lu", weight: 174.967, bond_radius: 1.72, outer_electrons: 15, valences: &[] },
    Element { symbol: "Hf", weight: 178.49, bond_radius: 1.44, outer_electrons: 4, valences: &[] },
    Element { symbol: "Ta", weight: 180.948, bond_radius: 1.34, outer_electrons: 5, valences: &[] },
    Element { symbol: "W", weight: 183.84, bond_radius: 1.3, outer_electrons: 6, valences: &[] },
    Element { symbol: "Re", weight: 186.207, bond_radius: 1.28, outer_electrons: 7, valences: &[] },
    Element { symbol: "Os", weight: 190.23, bond_radius: 1.26, outer_electrons: 8, valences: &[] },
    Element { symbol: "Ir", weight: 192.217, bond_radius: 1.27, outer_electrons: 9, valences: &[] },
    Element { symbol: "Pt", weight: 195.078, bond_radius: 1.3, outer_electrons: 10, valences: &[] },
    Element { symbol: "Au", weight: 196.967, bond_radius: 1.34, outer_electrons: 11, valences: &[] },
    Element { symbol: "Hg", weight: 200.59, bond_radius: 1.49, outer_electrons: 2, valences: &[] },
    Element { symbol: "Tl", weight: 204.383, bond_radius: 1.48, outer_electrons: 3, valences: &[] },
    Element { symbol: "Pb", weight: 207.2, bond_radius: 1.48, outer_electrons: 4, valences: &[2, 4] },
    Element { symbol: "Bi", weight: 208.98, bond_radius: 1.45, outer_electrons: 5, valences: &[3, 5] },
    Element { symbol: "Po", weight: 209.0, bond_radius: 1.46, outer_electrons: 6, valences: &[2, 4, 6] },
    Element { symbol: "At", weight: 210.0, bond_radius: 1.45, outer_electrons: 7, valences: &[1, 3, 5] },
    Element { symbol: "Rn", weight: 222.0, bond_radius: 2.4, outer_electrons: 8, valences: &[0] },
    Element { symbol: "Fr", weight: 223.0, bond_radius: 2.0, outer_electrons: 1, valences: &[1] },
    Element { symbol: "Ra", weight: 226.0, bond_radius: 1.9, outer_electrons: 2, valences: &[2] },
    Element { symbol: "Ac", weight: 227.0, bond_radius: 1.88, outer_electrons: 3, valences: &[] },
    Element { symbol: "Th", weight: 232.038, bond_radius: 1.79, outer_electrons: 4, valences: &[] },
    Element { symbol: "Pa", weight: 231.036, bond_radius: 1.61, outer_electrons: 3, valences: &[] },
    Element { symbol: "U", weight: 238.029, bond_radius: 1.58, outer_electrons: 4, valences: &[] },
    Element { symbol: "Np", weight: 237.0, bond_radius: 1.55, outer_electrons: 5, valences: &[] },
    Element { symbol: "Pu", weight: 244.0, bond_radius: 1.53, outer_electrons: 6, valences: &[] },
    Element { symbol: "Am", weight: 243.0, bond_radius: 1.07, outer_electrons: 7, valences: &[] },
    Element { symbol: "Cm", weight: 247.0, bond_radius: 0.0, outer_electrons: 8, valences: &[] },
    Element { symbol: "Bk", weight: 247.0, bond_radius: 0.0, outer_electrons: 9, valences: &[] },
    Element { symbol: "Cf", weight: 251.0, bond_radius: 0.0, outer_electrons: 10, valences: &[] },
    Element { symbol: "Es", weight: 252.0, bond_radius: 0.0, outer_electrons: 11, valences: &[] },
    Element { symbol: "Fm", weight: 257.0, bond_radius: 0.0, outer_electrons: 12, valences: &[] },
    Element { symbol: "Md", weight: 258.0, bond_radius: 0.0, outer_electrons: 13, valences: &[] },
    Element { symbol: "No", weight: 259.0, bond_radius: 0.0, outer_electrons: 14, valences: &[] },
    Element { symbol: "Lr", weight: 262.0, bond_radius: 0.0, outer_electrons: 15, valences: &[] },
];

/// Looks up an element by atomic number.
pub fn element(atomic_number: u8) -> Option<&'static Element> {
    if atomic_number == 0 {
        return None;
    }
    TABLE.get(atomic_number as usize - 1)
}

pub fn atomic_number(symbol: &str) -> Option<u8> {
    TABLE
        .iter()
        .position(|e| e.symbol == symbol)
        .map(|i| (i + 1) as u8)
}

pub fn symbol(atomic_number: u8) -> &'static str {
    element(atomic_number).map(|e| e.symbol).unwrap_or("*")
}

pub fn weight(atomic_number: u8) -> f64 {
    element(atomic_number).map(|e| e.weight).unwrap_or(0.0)
}

pub const HYDROGEN_WEIGHT: f64 = 1.008;

/// Principal quantum number of the valence shell.
pub fn period(atomic_number: u8) -> u8 {
    match atomic_number {
        0..=2 => 1,
        3..=10 => 2,
        11..=18 => 3,
        19..=36 => 4,
        37..=54 => 5,
        55..=86 => 6,
        _ => 7,
    }
}
