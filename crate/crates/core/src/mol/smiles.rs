//! SMILES reader covering the OpenSMILES subset used by assay deposits:
//! organic-subset and bracket atoms (isotope, chirality, H count, charge,
//! atom class), branches, ring closures including `%nn`, bond symbols,
//! directional bonds and dot-disconnected components.

use std::collections::BTreeMap;

use super::{Atom, Bond, BondDirection, BondOrder, Chirality, Molecule};
use crate::elements;
use crate::error::{ChemError, Result};

/// Allowed valences for organic-subset atoms.
pub(crate) fn organic_valences(z: u8) -> Option<&'static [u8]> {
    Some(match z {
        5 => &[3],
        6 => &[4],
        7 => &[3, 5],
        8 => &[2],
        15 => &[3, 5],
        16 => &[2, 4, 6],
        9 => &[1],
        17 | 35 | 53 => &[1, 3, 5, 7],
        _ => return None,
    })
}

pub(crate) fn is_organic_subset(z: u8, aromatic: bool) -> bool {
    if aromatic {
        matches!(z, 5 | 6 | 7 | 8 | 15 | 16)
    } else {
        organic_valences(z).is_some()
    }
}

/// Hydrogens implied for an unbracketed atom given its bonds.
///
/// `bond_sum` counts aromatic bonds as 1. Aromatic B/C/N/P atoms reserve one
/// extra valence for the pi bond; aromatic atoms never move to a higher
/// valence state.
pub(crate) fn implicit_hydrogens(z: u8, aromatic: bool, bond_sum: u32) -> Option<u32> {
    let valences = organic_valences(z)?;
    if aromatic {
        let pi = u32::from(matches!(z, 5 | 6 | 7 | 15));
        let used = bond_sum + pi;
        return Some((valences[0] as u32).saturating_sub(used));
    }
    valences
        .iter()
        .find(|&&v| v as u32 >= bond_sum)
        .map(|&v| v as u32 - bond_sum)
}

fn bond_sum_smiles(order: BondOrder) -> u32 {
    match order {
        BondOrder::Single | BondOrder::Aromatic => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
    }
}

struct PendingBond {
    order: Option<BondOrder>,
    direction: Option<BondDirection>,
}

struct RingOpen {
    atom: usize,
    order: Option<BondOrder>,
    direction: Option<BondDirection>,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bracket: Vec<bool>,
    bonds: Vec<Bond>,
    rings: BTreeMap<u32, RingOpen>,
    defaulted_aromatic: Vec<usize>,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(ChemError::Syntax {
            position: self.pos,
            reason: reason.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<(Vec<Atom>, Vec<bool>, Vec<Bond>, Vec<usize>)> {
        let mut prev: Option<usize> = None;
        let mut branch_stack: Vec<Option<usize>> = Vec::new();
        let mut pending: Option<PendingBond> = None;
        let mut expect_atom = true; // at start or after '.'
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() || pending.is_some() {
                        return self.err("branch must follow an atom");
                    }
                    branch_stack.push(prev);
                    self.pos += 1;
                    if self.peek() == Some(b')') {
                        return self.err("empty branch");
                    }
                }
                b')' => {
                    if pending.is_some() {
                        return self.err("bond symbol before ')'");
                    }
                    match branch_stack.pop() {
                        Some(p) => prev = p,
                        None => return self.err("unmatched ')'"),
                    }
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() || prev.is_none() {
                        return self.err("misplaced '.'");
                    }
                    self.pos += 1;
                    prev = None;
                    expect_atom = true;
                }
                b'-' | b'=' | b'#' | b'$' | b':' | b'/' | b'\\' => {
                    if pending.is_some() {
                        return self.err("consecutive bond symbols");
                    }
                    if prev.is_none() {
                        return self.err("bond symbol without preceding atom");
                    }
                    let (order, direction) = match c {
                        b'-' => (Some(BondOrder::Single), None),
                        b'=' => (Some(BondOrder::Double), None),
                        b'#' => (Some(BondOrder::Triple), None),
                        b'$' => return self.err("quadruple bonds are not supported"),
                        b':' => (Some(BondOrder::Aromatic), None),
                        b'/' => (None, Some(BondDirection::Up)),
                        _ => (None, Some(BondDirection::Down)),
                    };
                    pending = Some(PendingBond { order, direction });
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(atom) = prev else {
                        return self.err("ring closure without preceding atom");
                    };
                    let digit = self.ring_number()?;
                    let bond = pending.take();
                    self.ring_closure(atom, digit, bond)?;
                }
                _ => {
                    let idx = self.atom()?;
                    if let Some(p) = prev {
                        let bond = pending.take();
                        self.add_bond(
                            p,
                            idx,
                            bond.as_ref().and_then(|b| b.order),
                            bond.and_then(|b| b.direction),
                        )?;
                    } else if pending.is_some() {
                        return self.err("bond symbol without preceding atom");
                    } else if !expect_atom {
                        return self.err("unexpected atom");
                    }
                    expect_atom = false;
                    prev = Some(idx);
                }
            }
        }
        if pending.is_some() {
            return self.err("dangling bond symbol");
        }
        if !branch_stack.is_empty() {
            return self.err("unclosed branch");
        }
        if let Some((&digit, _)) = self.rings.iter().next() {
            return Err(ChemError::UnmatchedRingClosure { digit });
        }
        if self.atoms.is_empty() {
            return self.err("no atoms");
        }
        if expect_atom {
            return self.err("trailing '.'");
        }
        Ok((self.atoms, self.bracket, self.bonds, self.defaulted_aromatic))
    }

    fn ring_number(&mut self) -> Result<u32> {
        let c = self.peek().unwrap();
        if c == b'%' {
            let d1 = self.text.get(self.pos + 1).copied();
            let d2 = self.text.get(self.pos + 2).copied();
            match (d1, d2) {
                (Some(a @ b'0'..=b'9'), Some(b @ b'0'..=b'9')) => {
                    self.pos += 3;
                    Ok(((a - b'0') * 10 + (b - b'0')) as u32)
                }
                _ => self.err("'%' must be followed by two digits"),
            }
        } else {
            self.pos += 1;
            Ok((c - b'0') as u32)
        }
    }

    fn ring_closure(&mut self, atom: usize, digit: u32, bond: Option<PendingBond>) -> Result<()> {
        let (order, direction) = match bond {
            Some(b) => (b.order, b.direction),
            None => (None, None),
        };
        match self.rings.remove(&digit) {
            None => {
                self.rings.insert(
                    digit,
                    RingOpen {
                        atom,
                        order,
                        direction,
                    },
                );
                Ok(())
            }
            Some(open) => {
                if open.atom == atom {
                    return self.err("ring closure to the same atom");
                }
                let order = match (open.order, order) {
                    (Some(a), Some(b)) if a != b => {
                        return self.err("conflicting ring-closure bond orders")
                    }
                    (a, b) => a.or(b),
                };
                self.add_bond(open.atom, atom, order, direction.or(open.direction))
            }
        }
    }

    fn add_bond(
        &mut self,
        a: usize,
        b: usize,
        order: Option<BondOrder>,
        direction: Option<BondDirection>,
    ) -> Result<()> {
        if self.bonds.iter().any(|x| x.touches(a) && x.touches(b)) {
            return self.err("duplicate bond between the same atoms");
        }
        let order = match order {
            Some(o) => o,
            None if self.atoms[a].is_aromatic && self.atoms[b].is_aromatic => {
                self.defaulted_aromatic.push(self.bonds.len());
                BondOrder::Aromatic
            }
            None => BondOrder::Single,
        };
        let mut bond = Bond::new(a, b, order);
        bond.direction = direction;
        self.bonds.push(bond);
        Ok(())
    }

    fn atom(&mut self) -> Result<usize> {
        let c = self.peek().unwrap();
        if c == b'[' {
            return self.bracket_atom();
        }
        let two = self.text.get(self.pos..self.pos + 2);
        let (z, aromatic, len) = match (c, two) {
            (b'C', Some(b"Cl")) => (17, false, 2),
            (b'B', Some(b"Br")) => (35, false, 2),
            (b'B', _) => (5, false, 1),
            (b'C', _) => (6, false, 1),
            (b'N', _) => (7, false, 1),
            (b'O', _) => (8, false, 1),
            (b'P', _) => (15, false, 1),
            (b'S', _) => (16, false, 1),
            (b'F', _) => (9, false, 1),
            (b'I', _) => (53, false, 1),
            (b'b', _) => (5, true, 1),
            (b'c', _) => (6, true, 1),
            (b'n', _) => (7, true, 1),
            (b'o', _) => (8, true, 1),
            (b'p', _) => (15, true, 1),
            (b's', _) => (16, true, 1),
            (b'*', _) => return self.err("wildcard atoms are not supported"),
            _ => return self.err(format!("unexpected character '{}'", c as char)),
        };
        self.pos += len;
        self.atoms.push(Atom::new(z).aromatic(aromatic));
        self.bracket.push(false);
        Ok(self.atoms.len() - 1)
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            std::str::from_utf8(&self.text[start..self.pos])
                .ok()?
                .parse()
                .ok()
        }
    }

    fn bracket_atom(&mut self) -> Result<usize> {
        self.pos += 1; // '['
        let isotope = self.number();
        if isotope.is_some_and(|i| i > u16::MAX as u32) {
            return self.err("isotope out of range");
        }
        // element symbol
        let c = match self.peek() {
            Some(c) => c,
            None => return self.err("unterminated bracket atom"),
        };
        let (z, aromatic) = if c.is_ascii_lowercase() {
            let two = self.text.get(self.pos..self.pos + 2);
            let (z, len) = match two {
                Some(b"se") => (34, 2),
                Some(b"as") => (33, 2),
                Some(b"te") => (52, 2),
                _ => match c {
                    b'b' => (5, 1),
                    b'c' => (6, 1),
                    b'n' => (7, 1),
                    b'o' => (8, 1),
                    b'p' => (15, 1),
                    b's' => (16, 1),
                    _ => return self.err("unknown aromatic symbol"),
                },
            };
            self.pos += len;
            (z, true)
        } else if c.is_ascii_uppercase() {
            let next = self.text.get(self.pos + 1).copied();
            let mut found = None;
            if let Some(n) = next.filter(|n| n.is_ascii_lowercase()) {
                let sym = [c, n];
                let sym = std::str::from_utf8(&sym).unwrap_or("");
                if let Some(z) = elements::atomic_number(sym) {
                    found = Some((z, 2));
                }
            }
            if found.is_none() {
                let sym = [c];
                let sym = std::str::from_utf8(&sym).unwrap_or("");
                if let Some(z) = elements::atomic_number(sym) {
                    found = Some((z, 1));
                }
            }
            match found {
                Some((z, len)) => {
                    self.pos += len;
                    (z, false)
                }
                None => return self.err("unknown element symbol"),
            }
        } else if c == b'*' {
            return self.err("wildcard atoms are not supported");
        } else {
            return self.err("expected element symbol");
        };
        let mut atom = Atom::new(z).aromatic(aromatic);
        atom.isotope = isotope.map(|i| i as u16);
        // chirality
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                atom.chirality = Some(Chirality::Clockwise);
            } else {
                atom.chirality = Some(Chirality::CounterClockwise);
                // extended classes (@TH1, @SP2, @OH12, ...) are kept as the base marker
                if matches!(self.peek(), Some(b'T' | b'A' | b'S' | b'O'))
                    && self
                        .text
                        .get(self.pos + 1)
                        .is_some_and(|c| c.is_ascii_uppercase())
                {
                    self.pos += 2;
                    self.number();
                }
            }
        }
        // hydrogens
        if self.peek() == Some(b'H') {
            self.pos += 1;
            let n = self.number().unwrap_or(1);
            if n > 9 {
                return self.err("hydrogen count out of range");
            }
            atom.explicit_h_count = n as u8;
        }
        // charge
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let mut magnitude = 1i32;
            if let Some(n) = self.number() {
                magnitude = n as i32;
            } else {
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    magnitude += 1;
                }
            }
            if magnitude > 15 {
                return self.err("charge out of range");
            }
            atom.formal_charge = if sign == b'+' { magnitude } else { -magnitude } as i8;
        }
        // atom class
        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.number().is_none() {
                return self.err("atom class requires a number");
            }
        }
        if self.peek() != Some(b']') {
            return self.err("expected ']'");
        }
        self.pos += 1;
        self.atoms.push(atom);
        self.bracket.push(true);
        Ok(self.atoms.len() - 1)
    }
}

/// Allowed valences for a charged atom, using the isoelectronic neighbor.
pub(crate) fn charged_valences(z: u8, charge: i8) -> Option<&'static [u8]> {
    let shifted = z as i32 - charge as i32;
    if !(1..=118).contains(&shifted) {
        return None;
    }
    // only second/third row main-group atoms are checked
    match z {
        5..=9 | 14..=17 => {}
        _ => return None,
    }
    match shifted as u8 {
        1 | 3 | 9 | 17 | 35 | 53 => Some(&[1]),
        2 | 10 | 18 => Some(&[0]),
        4 => Some(&[2]),
        z => organic_valences(z).or_else(|| match z {
            14 => Some(&[4]),
            _ => None,
        }),
    }
}

/// Parses a SMILES string into a perceived molecule.
pub fn parse_smiles(text: &str) -> Result<Molecule> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ChemError::Syntax {
            position: 0,
            reason: "empty SMILES".into(),
        });
    }
    let parser = Parser {
        text: trimmed.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bracket: Vec::new(),
        bonds: Vec::new(),
        rings: BTreeMap::new(),
        defaulted_aromatic: Vec::new(),
    };
    let (mut atoms, bracket, mut bonds, defaulted) = parser.parse()?;
    let mut bond_sum = vec![0u32; atoms.len()];
    let mut twice_valence = vec![0u32; atoms.len()];
    for b in &bonds {
        for a in [b.begin, b.end] {
            bond_sum[a] += bond_sum_smiles(b.order);
            twice_valence[a] += b.order.twice_valence();
        }
    }
    for (i, atom) in atoms.iter_mut().enumerate() {
        if bracket[i] {
            let valence = twice_valence[i] / 2 + atom.explicit_h_count as u32;
            if !atom.is_aromatic {
                if let Some(allowed) = charged_valences(atom.element, atom.formal_charge) {
                    let max = *allowed.last().unwrap() as u32;
                    if valence > max {
                        return Err(ChemError::Valence {
                            atom: i,
                            symbol: atom.symbol().to_string(),
                            valence,
                        });
                    }
                }
            }
            continue;
        }
        match implicit_hydrogens(atom.element, atom.is_aromatic, bond_sum[i]) {
            Some(h) => atom.explicit_h_count = h as u8,
            None => {
                return Err(ChemError::Valence {
                    atom: i,
                    symbol: atom.symbol().to_string(),
                    valence: bond_sum[i],
                })
            }
        }
        if atom.is_aromatic {
            let max = *organic_valences(atom.element).unwrap().last().unwrap() as u32;
            if bond_sum[i] > max {
                return Err(ChemError::Valence {
                    atom: i,
                    symbol: atom.symbol().to_string(),
                    valence: bond_sum[i],
                });
            }
        }
    }
    let mol = Molecule::new(atoms.clone(), bonds.clone())?;
    // an unmarked bond between two aromatic atoms outside any ring is single
    let demote: Vec<usize> = defaulted
        .into_iter()
        .filter(|&b| !mol.bond(b).in_ring)
        .collect();
    if demote.is_empty() {
        return Ok(mol);
    }
    for b in demote {
        bonds[b].order = BondOrder::Single;
    }
    Molecule::new(atoms, bonds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::molecular_weight;

    #[test]
    fn methane() {
        let m = parse_smiles("C").unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.atom(0).explicit_h_count, 4);
    }

    #[test]
    fn benzene() {
        let m = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(m.atom_count(), 6);
        assert!(m.atoms().iter().all(|a| a.is_aromatic && a.explicit_h_count == 1));
        assert_eq!(m.rings().len(), 1);
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
    }

    #[test]
    fn acetate() {
        let m = parse_smiles("[O-]C(=O)C").unwrap();
        assert_eq!(m.atom(0).formal_charge, -1);
        assert_eq!(m.atom(0).explicit_h_count, 0);
        assert_eq!(m.net_charge(), -1);
        assert_eq!(m.atom(3).explicit_h_count, 3);
        assert_eq!(m.atom(2).explicit_h_count, 0);
    }

    #[test]
    fn aromatic_heteroatoms() {
        let pyridine = parse_smiles("n1ccccc1").unwrap();
        assert_eq!(pyridine.atom(0).explicit_h_count, 0);
        let pyrrole = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(pyrrole.atom(3).explicit_h_count, 1);
        let thiophene = parse_smiles("c1ccsc1").unwrap();
        assert_eq!(thiophene.atom(3).explicit_h_count, 0);
        let naphthalene = parse_smiles("c1ccc2ccccc2c1").unwrap();
        assert_eq!(naphthalene.atom(3).explicit_h_count, 0);
    }

    #[test]
    fn higher_valence_states() {
        let m = parse_smiles("CS(=O)(=O)C").unwrap();
        assert_eq!(m.atom(1).explicit_h_count, 0);
        let m = parse_smiles("OP(=O)(O)O").unwrap();
        assert_eq!(m.atom(1).explicit_h_count, 0);
        let m = parse_smiles("CN(=O)=O").unwrap();
        assert_eq!(m.atom(1).explicit_h_count, 0);
    }

    #[test]
    fn stereo_is_annotation_only() {
        let a = parse_smiles("F/C=C/F").unwrap();
        let b = parse_smiles("FC=CF").unwrap();
        assert_eq!(a.atom_count(), b.atom_count());
        assert_eq!(a.bond(0).direction, Some(BondDirection::Up));
        let c = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        assert_eq!(c.atom(1).chirality, Some(Chirality::Clockwise));
        assert_eq!(c.atom(1).explicit_h_count, 1);
    }

    #[test]
    fn fragments_and_percent_closures() {
        let m = parse_smiles("CCO.CCO").unwrap();
        assert_eq!(m.component_labels().1, 2);
        let m = parse_smiles("C%10CCCCC%10").unwrap();
        assert_eq!(m.rings().len(), 1);
        let m = parse_smiles("C1CC.C1").unwrap();
        assert_eq!(m.component_labels().1, 1);
    }

    #[test]
    fn charges_and_isotopes() {
        let m = parse_smiles("[13CH4]").unwrap();
        assert_eq!(m.atom(0).isotope, Some(13));
        let m = parse_smiles("[Fe+++]").unwrap();
        assert_eq!(m.atom(0).formal_charge, 3);
        let m = parse_smiles("[NH4+]").unwrap();
        assert_eq!(m.atom(0).explicit_h_count, 4);
        assert!((molecular_weight(&m) - 18.04).abs() < 0.01);
    }

    #[test]
    fn biaryl_link_is_single() {
        let m = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        let singles = m.bonds().iter().filter(|b| b.order == BondOrder::Single).count();
        assert_eq!(singles, 1);
        assert!(m.bonds().iter().filter(|b| b.order == BondOrder::Aromatic).all(|b| b.in_ring));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_smiles("C1CC"),
            Err(ChemError::UnmatchedRingClosure { digit: 1 })
        ));
        assert!(matches!(parse_smiles(""), Err(ChemError::Syntax { .. })));
        assert!(matches!(parse_smiles("C(C"), Err(ChemError::Syntax { .. })));
        assert!(matches!(parse_smiles("CC)"), Err(ChemError::Syntax { .. })));
        assert!(matches!(parse_smiles("C=="), Err(ChemError::Syntax { .. })));
        assert!(matches!(parse_smiles("C[Xx]"), Err(ChemError::Syntax { .. })));
        assert!(matches!(
            parse_smiles("C(C)(C)(C)(C)C"),
            Err(ChemError::Valence { .. })
        ));
        assert!(matches!(parse_smiles("[CH5]"), Err(ChemError::Valence { .. })));
        assert!(matches!(parse_smiles("C."), Err(ChemError::Syntax { .. })));
        match parse_smiles("CC?C") {
            Err(ChemError::Syntax { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
