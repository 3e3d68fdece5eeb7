//! Per-atom and per-molecule physicochemical properties.

mod crippen;
mod estate;
mod gasteiger;
mod scalars;
mod surface;
mod vcharge;

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

pub use crippen::{crippen_contributions, crippen_totals};
pub use estate::{estate_indices, intrinsic_states};
pub use gasteiger::gasteiger_charges;
pub use scalars::{hba, hbd, lipinski_inputs, molecule_scalars, rotatable_bonds, SCALAR_NAMES};
pub(crate) use scalars::distance;
pub use surface::{labute_contributions, tpsa_contributions};
pub use vcharge::v_charges;

use crate::error::{ChemError, Result};
use crate::mol::Molecule;

/// Property names as they appear in property files.
pub const PROPERTY_NAMES: [&str; 9] = [
    "gasteiger_charge",
    "gasteiger_h_charge",
    "crippen_logp",
    "crippen_mr",
    "tpsa_contrib",
    "labute_asa_contrib",
    "estate_index",
    "sigma_charge",
    "v_charge",
];

/// Arrays aligned with the molecule's atom order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomProperties {
    pub gasteiger_charge: Vec<f64>,
    pub gasteiger_h_charge: Vec<f64>,
    pub crippen_logp: Vec<f64>,
    pub crippen_mr: Vec<f64>,
    pub tpsa_contrib: Vec<f64>,
    pub labute_asa_contrib: Vec<f64>,
    pub estate_index: Vec<f64>,
    pub sigma_charge: Vec<f64>,
    pub v_charge: Vec<f64>,
}

impl AtomProperties {
    pub fn get(&self, name: &str) -> Option<&Vec<f64>> {
        Some(match name {
            "gasteiger_charge" => &self.gasteiger_charge,
            "gasteiger_h_charge" => &self.gasteiger_h_charge,
            "crippen_logp" => &self.crippen_logp,
            "crippen_mr" => &self.crippen_mr,
            "tpsa_contrib" => &self.tpsa_contrib,
            "labute_asa_contrib" => &self.labute_asa_contrib,
            "estate_index" => &self.estate_index,
            "sigma_charge" => &self.sigma_charge,
            "v_charge" => &self.v_charge,
            _ => return None,
        })
    }

    fn get_mut(&mut self, name: &str) -> Option<&mut Vec<f64>> {
        Some(match name {
            "gasteiger_charge" => &mut self.gasteiger_charge,
            "gasteiger_h_charge" => &mut self.gasteiger_h_charge,
            "crippen_logp" => &mut self.crippen_logp,
            "crippen_mr" => &mut self.crippen_mr,
            "tpsa_contrib" => &mut self.tpsa_contrib,
            "labute_asa_contrib" => &mut self.labute_asa_contrib,
            "estate_index" => &mut self.estate_index,
            "sigma_charge" => &mut self.sigma_charge,
            "v_charge" => &mut self.v_charge,
            _ => return None,
        })
    }
}

/// Computes every property from the shipped parameter tables.
pub fn native_properties(mol: &Molecule) -> Result<AtomProperties> {
    let (gasteiger_charge, gasteiger_h_charge) = gasteiger_charges(mol)?;
    let (crippen_logp, crippen_mr, _) = crippen_contributions(mol);
    let (labute_asa_contrib, _) = labute_contributions(mol);
    Ok(AtomProperties {
        sigma_charge: gasteiger_charge.clone(),
        gasteiger_charge,
        gasteiger_h_charge,
        crippen_logp,
        crippen_mr,
        tpsa_contrib: tpsa_contributions(mol),
        labute_asa_contrib,
        estate_index: estate_indices(mol),
        v_charge: v_charges(mol),
    })
}

/// Per-atom values read from a `cid,atom_index,prop_name,value` CSV.
#[derive(Debug, Clone, Default)]
pub struct PropertyTable {
    values: HashMap<u64, BTreeMap<String, BTreeMap<usize, f64>>>,
}

impl PropertyTable {
    pub fn from_reader<R: Read>(input: R) -> Result<Self> {
        let mut table = PropertyTable::default();
        let mut reader = csv::Reader::from_reader(input);
        for (line, row) in reader.records().enumerate() {
            let row = row.map_err(|e| ChemError::Invalid(format!("property file: {e}")))?;
            let bad = |what: &str| ChemError::Invalid(format!("property file row {}: bad {what}", line + 2));
            if row.len() != 4 {
                return Err(bad("column count"));
            }
            let cid: u64 = row[0].trim().parse().map_err(|_| bad("cid"))?;
            let atom: usize = row[1].trim().parse().map_err(|_| bad("atom_index"))?;
            let name = row[2].trim();
            if !PROPERTY_NAMES.contains(&name) {
                return Err(bad("prop_name"));
            }
            let value: f64 = row[3].trim().parse().map_err(|_| bad("value"))?;
            table.insert(cid, name, atom, value);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| ChemError::Invalid(format!("{}: {e}", path.display())))?;
        Self::from_reader(std::io::BufReader::new(f))
    }

    pub fn insert(&mut self, cid: u64, name: &str, atom: usize, value: f64) {
        self.values
            .entry(cid)
            .or_default()
            .entry(name.to_string())
            .or_default()
            .insert(atom, value);
    }

    pub fn insert_molecule(&mut self, cid: u64, props: &AtomProperties) {
        for name in PROPERTY_NAMES {
            for (i, &v) in props.get(name).unwrap().iter().enumerate() {
                self.insert(cid, name, i, v);
            }
        }
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let err = |e: csv::Error| ChemError::Invalid(format!("property file: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cid", "atom_index", "prop_name", "value"]).map_err(err)?;
        let mut cids: Vec<&u64> = self.values.keys().collect();
        cids.sort();
        for cid in cids {
            for (name, atoms) in &self.values[cid] {
                for (atom, value) in atoms {
                    w.write_record([cid.to_string(), atom.to_string(), name.clone(), format!("{value:?}")])
                        .map_err(err)?;
                }
            }
        }
        w.flush().map_err(|e| ChemError::Invalid(format!("property file: {e}")))?;
        Ok(())
    }

    pub fn contains(&self, cid: u64) -> bool {
        self.values.contains_key(&cid)
    }
}

#[derive(Debug, Clone, Default)]
pub enum PropertyProvider {
    #[default]
    Native,
    /// Values from a property file; properties the file does not list for a
    /// cid fall back to native computation.
    File(PropertyTable),
}

pub fn atom_properties(mol: &Molecule, provider: &PropertyProvider) -> Result<AtomProperties> {
    let table = match provider {
        PropertyProvider::Native => return native_properties(mol),
        PropertyProvider::File(t) => t,
    };
    let cid = mol
        .source_cid
        .ok_or_else(|| ChemError::MissingProperty("molecule has no cid".into()))?;
    let listed = table.values.get(&cid);
    let complete = listed.is_some_and(|m| PROPERTY_NAMES.iter().all(|n| m.contains_key(*n)));
    let mut props = if complete {
        AtomProperties::default()
    } else {
        native_properties(mol)?
    };
    let n = mol.atom_count();
    for (name, atoms) in listed.into_iter().flatten() {
        let mut column = Vec::with_capacity(n);
        for i in 0..n {
            match atoms.get(&i) {
                Some(&v) => column.push(v),
                None => {
                    return Err(ChemError::MissingProperty(format!(
                        "{name} for cid {cid} atom {i}"
                    )))
                }
            }
        }
        *props.get_mut(name).unwrap() = column;
    }
    if listed.is_none() {
        return Err(ChemError::MissingProperty(format!("no rows for cid {cid}")));
    }
    Ok(props)
}
