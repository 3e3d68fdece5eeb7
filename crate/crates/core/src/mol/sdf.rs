//! MDL V2000 SD-file reader and a minimal writer.
//!
//! Blocks that fail to parse are skipped and reported with the line number
//! (1-based, counted over the whole stream) where the problem was found.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::io::BufRead;

use super::smiles::{charged_valences, organic_valences};
use super::{Atom, Bond, BondOrder, Molecule};
use crate::elements;

#[derive(Debug, Clone)]
pub struct SdfRecord {
    pub molecule: Molecule,
    /// Data items (`> <name>`) verbatim, multi-line values joined by `\n`.
    pub fields: BTreeMap<String, String>,
    /// Line of the block's title.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdfError {
    /// Zero-based index of the block in the stream.
    pub block: usize,
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for SdfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block {} line {}: {}", self.block, self.line, self.reason)
    }
}

impl std::error::Error for SdfError {}

/// Streaming reader yielding one result per `$$$$`-terminated block.
pub struct SdfReader<R> {
    input: R,
    line_no: usize,
    block: usize,
    done: bool,
}

impl<R: BufRead> SdfReader<R> {
    pub fn new(input: R) -> Self {
        SdfReader {
            input,
            line_no: 0,
            block: 0,
            done: false,
        }
    }

    fn next_block(&mut self) -> Option<std::result::Result<(usize, Vec<String>), SdfError>> {
        if self.done {
            return None;
        }
        let start = self.line_no + 1;
        let mut lines = Vec::new();
        let mut buf = String::new();
        loop {
            buf.clear();
            match self.input.read_line(&mut buf) {
                Ok(0) => {
                    self.done = true;
                    if lines.iter().all(|l: &String| l.trim().is_empty()) {
                        return None;
                    }
                    return Some(Ok((start, lines)));
                }
                Ok(_) => {
                    self.line_no += 1;
                    let line = buf.trim_end_matches(['\n', '\r']).to_string();
                    if line.starts_with("$$$$") {
                        return Some(Ok((start, lines)));
                    }
                    lines.push(line);
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(SdfError {
                        block: self.block,
                        line: self.line_no + 1,
                        reason: format!("read error: {e}"),
                    }));
                }
            }
        }
    }
}

impl<R: BufRead> Iterator for SdfReader<R> {
    type Item = std::result::Result<SdfRecord, SdfError>;

    fn next(&mut self) -> Option<Self::Item> {
        let block = self.block;
        let item = self.next_block()?;
        self.block += 1;
        Some(item.and_then(|(start, lines)| {
            parse_block(&lines, start).map_err(|(offset, reason)| SdfError {
                block,
                line: start + offset,
                reason,
            })
        }))
    }
}

/// Reads every block; malformed blocks are skipped and reported.
pub fn parse_sdf<R: BufRead>(input: R) -> (Vec<SdfRecord>, Vec<SdfError>) {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for item in SdfReader::new(input) {
        match item {
            Ok(r) => records.push(r),
            Err(e) => errors.push(e),
        }
    }
    (records, errors)
}

type BlockResult<T> = std::result::Result<T, (usize, String)>;

fn field<'a>(line: &'a str, from: usize, to: usize) -> &'a str {
    let end = to.min(line.len());
    if from >= end {
        return "";
    }
    line.get(from..end).unwrap_or("").trim()
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str, offset: usize) -> BlockResult<T> {
    s.parse()
        .map_err(|_| (offset, format!("cannot read {what} from {s:?}")))
}

fn charge_from_code(code: i32) -> i8 {
    match code {
        1 => 3,
        2 => 2,
        3 => 1,
        5 => -1,
        6 => -2,
        7 => -3,
        _ => 0,
    }
}

fn implied_hydrogens(atom: &Atom, bond_sum: u32, valence_field: u32) -> u8 {
    if valence_field == 15 {
        return 0;
    }
    if valence_field > 0 {
        return valence_field.saturating_sub(bond_sum) as u8;
    }
    let shifted = atom.element as i32 - atom.formal_charge as i32;
    let valences = if atom.formal_charge == 0 {
        organic_valences(atom.element)
    } else {
        charged_valences(atom.element, atom.formal_charge)
    };
    let Some(valences) = valences else {
        return 0;
    };
    if atom.is_aromatic {
        let pi = u32::from(matches!(shifted, 5 | 6 | 7 | 15));
        return (valences[0] as u32).saturating_sub(bond_sum + pi) as u8;
    }
    valences
        .iter()
        .find(|&&v| v as u32 >= bond_sum)
        .map(|&v| (v as u32 - bond_sum) as u8)
        .unwrap_or(0)
}

fn parse_block(lines: &[String], start: usize) -> std::result::Result<SdfRecord, (usize, String)> {
    // skip blank separator lines some writers leave before a block
    if lines.len() < 4 {
        return Err((lines.len(), "truncated block: missing header or counts line".into()));
    }
    let title = lines[0].trim().to_string();
    let counts = &lines[3];
    if counts.contains("V3000") {
        return Err((3, "V3000 blocks are not supported".into()));
    }
    let n_atoms: usize = parse_num(field(counts, 0, 3), "atom count", 3)
        .map_err(|_| (3, format!("malformed counts line {counts:?}")))?;
    let n_bonds: usize = parse_num(field(counts, 3, 6), "bond count", 3)
        .map_err(|_| (3, format!("malformed counts line {counts:?}")))?;
    if lines.len() < 4 + n_atoms + n_bonds {
        return Err((
            lines.len(),
            format!("truncated block: expected {n_atoms} atoms and {n_bonds} bonds"),
        ));
    }
    let mut atoms = Vec::with_capacity(n_atoms);
    let mut valence_fields = Vec::with_capacity(n_atoms);
    for k in 0..n_atoms {
        let off = 4 + k;
        let l = &lines[off];
        if l.len() < 34 {
            return Err((off, format!("atom line too short: {l:?}")));
        }
        let x: f64 = parse_num(field(l, 0, 10), "x coordinate", off)?;
        let y: f64 = parse_num(field(l, 10, 20), "y coordinate", off)?;
        let z: f64 = parse_num(field(l, 20, 30), "z coordinate", off)?;
        let sym = field(l, 31, 34);
        let (element, isotope) = match sym {
            "D" => (1, Some(2)),
            "T" => (1, Some(3)),
            s => (
                elements::atomic_number(s)
                    .ok_or_else(|| (off, format!("unknown element symbol {s:?}")))?,
                None,
            ),
        };
        let mass_diff: i32 = match field(l, 34, 36) {
            "" => 0,
            s => parse_num(s, "mass difference", off)?,
        };
        let charge_code: i32 = match field(l, 36, 39) {
            "" => 0,
            s => parse_num(s, "charge code", off)?,
        };
        let valence: u32 = match field(l, 48, 51) {
            "" => 0,
            s => parse_num(s, "valence", off)?,
        };
        let mut atom = Atom::new(element)
            .with_charge(charge_from_code(charge_code))
            .at([x, y, z]);
        atom.isotope = isotope;
        if mass_diff != 0 {
            let base = elements::weight(element).round() as i32;
            atom.isotope = Some((base + mass_diff).max(1) as u16);
        }
        atoms.push(atom);
        valence_fields.push(valence);
    }
    let mut bonds = Vec::with_capacity(n_bonds);
    for k in 0..n_bonds {
        let off = 4 + n_atoms + k;
        let l = &lines[off];
        let a: usize = parse_num(field(l, 0, 3), "bond atom", off)?;
        let b: usize = parse_num(field(l, 3, 6), "bond atom", off)?;
        let t: u32 = parse_num(field(l, 6, 9), "bond type", off)?;
        if a == 0 || b == 0 || a > n_atoms || b > n_atoms {
            return Err((off, format!("bond references atom outside 1..{n_atoms}")));
        }
        let order = match t {
            1 => BondOrder::Single,
            2 => BondOrder::Double,
            3 => BondOrder::Triple,
            4 => BondOrder::Aromatic,
            other => return Err((off, format!("unsupported bond type {other}"))),
        };
        bonds.push(Bond::new(a - 1, b - 1, order));
    }
    // properties block
    let mut idx = 4 + n_atoms + n_bonds;
    let mut saw_end = false;
    let mut charges_reset = false;
    while idx < lines.len() {
        let l = &lines[idx];
        if l.starts_with("M  END") {
            saw_end = true;
            idx += 1;
            break;
        }
        let is_chg = l.starts_with("M  CHG");
        if is_chg || l.starts_with("M  ISO") {
            if is_chg && !charges_reset {
                for a in atoms.iter_mut() {
                    a.formal_charge = 0;
                }
                charges_reset = true;
            }
            let n: usize = parse_num(field(l, 6, 9), "entry count", idx)?;
            for e in 0..n {
                let base = 9 + e * 8;
                let ai: usize = parse_num(field(l, base, base + 4), "atom index", idx)?;
                let v: i32 = parse_num(field(l, base + 4, base + 8), "value", idx)?;
                if ai == 0 || ai > n_atoms {
                    return Err((idx, format!("property references atom {ai}")));
                }
                if is_chg {
                    atoms[ai - 1].formal_charge = v as i8;
                } else {
                    atoms[ai - 1].isotope = Some(v.max(1) as u16);
                }
            }
        }
        idx += 1;
    }
    if !saw_end {
        return Err((lines.len(), "truncated block: missing 'M  END'".into()));
    }
    let mut fields = BTreeMap::new();
    while idx < lines.len() {
        let l = &lines[idx];
        idx += 1;
        if !l.starts_with('>') {
            continue;
        }
        let name = match (l.find('<'), l.rfind('>')) {
            (Some(open), Some(close)) if close > open => l[open + 1..close].to_string(),
            _ => l[1..].trim().to_string(),
        };
        let mut value = Vec::new();
        while idx < lines.len() && !lines[idx].is_empty() {
            value.push(lines[idx].as_str());
            idx += 1;
        }
        fields.insert(name, value.join("\n"));
    }
    // aromatic flags and implied hydrogens
    let mut bond_sum = vec![0u32; n_atoms];
    for b in &bonds {
        let v = match b.order {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        };
        bond_sum[b.begin] += v;
        bond_sum[b.end] += v;
        if b.order == BondOrder::Aromatic {
            atoms[b.begin].is_aromatic = true;
            atoms[b.end].is_aromatic = true;
        }
    }
    for (i, atom) in atoms.iter_mut().enumerate() {
        atom.explicit_h_count = implied_hydrogens(atom, bond_sum[i], valence_fields[i]);
    }
    let cid = title
        .trim_start_matches("CID")
        .trim_start_matches(':')
        .trim()
        .parse::<u64>()
        .ok();
    let molecule = Molecule::new(atoms, bonds)
        .map_err(|e| (3, e.to_string()))?
        .with_name((!title.is_empty()).then_some(title))
        .with_cid(cid);
    Ok(SdfRecord {
        molecule,
        fields,
        line: start,
    })
}

fn charge_code(charge: i8) -> i32 {
    match charge {
        3 => 1,
        2 => 2,
        1 => 3,
        -1 => 5,
        -2 => 6,
        -3 => 7,
        _ => 0,
    }
}

/// Writes one V2000 block terminated by `$$$$`. Hydrogens stay implicit
/// unless they are graph nodes; molecules without coordinates get zeros.
pub fn write_sdf_block(mol: &Molecule, fields: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    let title = match (&mol.name, mol.source_cid) {
        (Some(n), _) => n.clone(),
        (None, Some(c)) => c.to_string(),
        _ => String::new(),
    };
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "  screenkit");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>3}{:>3}  0  0  0  0  0  0  0  0999 V2000",
        mol.atom_count(),
        mol.bond_count()
    );
    for a in mol.atoms() {
        let [x, y, z] = a.coordinates.unwrap_or([0.0; 3]);
        let _ = writeln!(
            out,
            "{x:>10.4}{y:>10.4}{z:>10.4} {:<3} 0{:>3}  0  0  0  0  0  0  0  0  0  0",
            a.symbol(),
            charge_code(a.formal_charge)
        );
    }
    for b in mol.bonds() {
        let _ = writeln!(
            out,
            "{:>3}{:>3}{:>3}  0",
            b.begin + 1,
            b.end + 1,
            b.order.code()
        );
    }
    let charged: Vec<_> = mol
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.formal_charge != 0)
        .collect();
    for chunk in charged.chunks(8) {
        let _ = write!(out, "M  CHG{:>3}", chunk.len());
        for (i, a) in chunk {
            let _ = write!(out, " {:>3} {:>3}", i + 1, a.formal_charge);
        }
        out.push('\n');
    }
    let labelled: Vec<_> = mol
        .atoms()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.isotope.map(|iso| (i, iso)))
        .collect();
    for chunk in labelled.chunks(8) {
        let _ = write!(out, "M  ISO{:>3}", chunk.len());
        for (i, iso) in chunk {
            let _ = write!(out, " {:>3} {:>3}", i + 1, iso);
        }
        out.push('\n');
    }
    out.push_str("M  END\n");
    for (k, v) in fields {
        let _ = writeln!(out, "> <{k}>\n{v}\n");
    }
    out.push_str("$$$$\n");
    out
}
