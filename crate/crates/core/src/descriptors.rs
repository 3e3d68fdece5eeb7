//! The 391-dimensional domain descriptor: 23 scalars, signed 2D
//! autocorrelations (4 x 32) and signed 3D autocorrelations (4 x 60).
//!
//! Each autocorrelation bin holds three accumulators of |P_i * P_j| over
//! ordered atom pairs, split by sign class: both >= 0, mixed, both < 0.
//! Zero counts as nonnegative. Sums are raw (not normalized by pair counts).

use std::io::Write;

use crate::error::{ChemError, Result};
use crate::mol::Molecule;
use crate::physchem::{distance, molecule_scalars, AtomProperties, SCALAR_NAMES};

pub const LEN_SCALARS: usize = 23;
pub const LEN_2D: usize = 32;
pub const LEN_3D: usize = 60;
pub const DESCRIPTOR_LEN: usize = LEN_SCALARS + 4 * LEN_2D + 4 * LEN_3D;
pub const LAYOUT_VERSION: u32 = 1;

/// Largest bond distance with its own bin (bins 0..=10).
const MAX_BONDS: usize = 10;
const BIN_WIDTH: f64 = 0.25;
const R_MIN: f64 = 1.0;
const N_3D_BINS: usize = 20;

const PROPERTY_LABELS: [&str; 4] = ["sigma_charge", "v_charge", "is_h", "is_aromatic"];
const CLASS_LABELS: [&str; 3] = ["pp", "pn", "nn"];

fn sign_class(a: f64, b: f64) -> usize {
    match (a >= 0.0, b >= 0.0) {
        (true, true) => 0,
        (false, false) => 2,
        _ => 1,
    }
}

/// Bond-distance bins 0..=10. Bin 0 (i = j) only has the two same-sign slots.
pub fn signed_autocorrelation_2d(mol: &Molecule, p: &[f64]) -> [f64; LEN_2D] {
    let dist = mol.topological_distances();
    let mut out = [0.0; LEN_2D];
    let n = p.len();
    for i in 0..n {
        for j in 0..n {
            let d = dist[i][j];
            if d > MAX_BONDS {
                continue;
            }
            let v = (p[i] * p[j]).abs();
            let class = sign_class(p[i], p[j]);
            if d == 0 {
                out[if class == 0 { 0 } else { 1 }] += v;
            } else {
                out[2 + (d - 1) * 3 + class] += v;
            }
        }
    }
    out
}

/// Euclidean bins of 0.25 Angstrom over [1, 6), ordered pairs i != j.
pub fn signed_autocorrelation_3d(mol: &Molecule, p: &[f64]) -> Result<[f64; LEN_3D]> {
    if mol.atom_count() > 0 && !mol.has_coordinates() {
        return Err(ChemError::MissingCoordinates);
    }
    let xyz: Vec<[f64; 3]> = mol.atoms().iter().filter_map(|a| a.coordinates).collect();
    let mut out = [0.0; LEN_3D];
    for i in 0..xyz.len() {
        for j in 0..xyz.len() {
            if i == j {
                continue;
            }
            let r = distance(xyz[i], xyz[j]);
            if r < R_MIN {
                continue;
            }
            let bin = ((r - R_MIN) / BIN_WIDTH).floor() as usize;
            if bin >= N_3D_BINS {
                continue;
            }
            out[bin * 3 + sign_class(p[i], p[j])] += (p[i] * p[j]).abs();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorVector {
    pub scalars: [f64; LEN_SCALARS],
    /// Four 32-value blocks: sigma, V, is-H, is-aromatic.
    pub ac2d: Vec<f64>,
    /// Four 60-value blocks in the same property order.
    pub ac3d: Vec<f64>,
}

impl DescriptorVector {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(DESCRIPTOR_LEN);
        v.extend_from_slice(&self.scalars);
        v.extend_from_slice(&self.ac2d);
        v.extend_from_slice(&self.ac3d);
        v
    }
}

/// The four atomic properties fed to the autocorrelations.
pub fn autocorrelation_properties(mol: &Molecule, props: &AtomProperties) -> [Vec<f64>; 4] {
    let sign = |b: bool| if b { 1.0 } else { -1.0 };
    [
        props.sigma_charge.clone(),
        props.v_charge.clone(),
        mol.atoms().iter().map(|a| sign(a.is_hydrogen())).collect(),
        mol.atoms().iter().map(|a| sign(a.is_aromatic)).collect(),
    ]
}

pub fn full_descriptor(mol: &Molecule, props: &AtomProperties) -> Result<DescriptorVector> {
    let map = molecule_scalars(mol, props)?;
    let mut scalars = [0.0; LEN_SCALARS];
    for (slot, name) in scalars.iter_mut().zip(SCALAR_NAMES) {
        *slot = map[name];
    }
    let mut ac2d = Vec::with_capacity(4 * LEN_2D);
    let mut ac3d = Vec::with_capacity(4 * LEN_3D);
    for p in autocorrelation_properties(mol, props) {
        ac2d.extend_from_slice(&signed_autocorrelation_2d(mol, &p));
        ac3d.extend_from_slice(&signed_autocorrelation_3d(mol, &p)?);
    }
    Ok(DescriptorVector { scalars, ac2d, ac3d })
}

/// Column names f0..f390 map to, in order.
pub fn layout() -> Vec<String> {
    let mut names: Vec<String> = SCALAR_NAMES.iter().map(|s| format!("scalar:{s}")).collect();
    for p in PROPERTY_LABELS {
        names.push(format!("ac2d:{p}:d0:pp"));
        names.push(format!("ac2d:{p}:d0:nn"));
        for d in 1..=MAX_BONDS {
            for c in CLASS_LABELS {
                names.push(format!("ac2d:{p}:d{d}:{c}"));
            }
        }
    }
    for p in PROPERTY_LABELS {
        for b in 0..N_3D_BINS {
            let lo = R_MIN + b as f64 * BIN_WIDTH;
            for c in CLASS_LABELS {
                names.push(format!("ac3d:{p}:r{lo:.2}-{:.2}:{c}", lo + BIN_WIDTH));
            }
        }
    }
    names
}

/// Layout sidecar text: a header describing conventions, then one
/// `column<TAB>name` line per feature.
pub fn write_layout<W: Write>(mut out: W) -> std::io::Result<()> {
    writeln!(out, "# descriptor layout version {LAYOUT_VERSION}, {DESCRIPTOR_LEN} columns")?;
    writeln!(out, "# autocorrelation bins hold raw sums of |P_i*P_j| over ordered pairs; no pair-count normalization")?;
    writeln!(out, "# sign classes: pp both >= 0, pn mixed, nn both < 0; 2D bin d0 is i = j; 3D bins are half-open [lo, hi) Angstrom")?;
    for (i, name) in layout().iter().enumerate() {
        writeln!(out, "f{i}\t{name}")?;
    }
    Ok(())
}

/// Descriptor table as CSV with header `cid,f0,...,f390`.
pub fn write_csv<W: Write>(out: W, rows: &[(u64, DescriptorVector)]) -> Result<()> {
    let err = |e: csv::Error| ChemError::Invalid(format!("descriptor csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["cid".to_string()];
    header.extend((0..DESCRIPTOR_LEN).map(|i| format!("f{i}")));
    w.write_record(&header).map_err(err)?;
    for (cid, d) in rows {
        let mut rec = vec![cid.to_string()];
        rec.extend(d.to_vec().iter().map(|x| format!("{x:?}")));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush()
        .map_err(|e| ChemError::Invalid(format!("descriptor csv: {e}")))
}

/// Reads a `cid,f0,...` table back; every row must have the header's width.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<(u64, Vec<f64>)>> {
    let err = |line: usize, what: &str| ChemError::Invalid(format!("descriptor csv line {line}: {what}"));
    let mut rdr = csv::Reader::from_reader(input);
    let width = rdr.headers().map_err(|e| ChemError::Invalid(format!("descriptor csv: {e}")))?.len();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ChemError::Invalid(format!("descriptor csv: {e}")))?;
        if rec.len() != width {
            return Err(err(i + 2, "wrong number of columns"));
        }
        let cid = rec[0].parse().map_err(|_| err(i + 2, "bad cid"))?;
        let values = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|_| err(i + 2, "bad value")))
            .collect::<Result<Vec<f64>>>()?;
        out.push((cid, values));
    }
    Ok(out)
}
