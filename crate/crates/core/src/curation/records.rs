//! Compound records and the dataset CSV (`cid,inchi,smiles,label,activity_value`).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ChemError, Result};

/// Activity value assigned to inactives when the source gives none, in uM.
pub const DEFAULT_INACTIVE_UM: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Active,
    Inactive,
}

impl Label {
    pub fn is_active(self) -> bool {
        self == Label::Active
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundRecord {
    pub cid: u64,
    pub smiles: String,
    pub inchi: Option<String>,
    pub label: Option<Label>,
    /// uM; positive when present.
    pub activity_value: Option<f64>,
}

impl CompoundRecord {
    pub fn new(cid: u64, smiles: impl Into<String>) -> Self {
        CompoundRecord {
            cid,
            smiles: smiles.into(),
            inchi: None,
            label: None,
            activity_value: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    pub fn is_active(&self) -> bool {
        self.label == Some(Label::Active)
    }
}

#[derive(Serialize, Deserialize)]
struct Row {
    cid: u64,
    inchi: String,
    smiles: String,
    label: String,
    activity_value: String,
}

fn csv_err(e: csv::Error) -> ChemError {
    ChemError::Invalid(format!("dataset csv: {e}"))
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<CompoundRecord>> {
    let mut out = Vec::new();
    let mut rdr = csv::Reader::from_reader(input);
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(csv_err)?;
        let bad = |what: &str| ChemError::Invalid(format!("dataset csv row {}: bad {what}", i + 2));
        let label = match row.label.trim() {
            "" => None,
            "1" => Some(Label::Active),
            "0" => Some(Label::Inactive),
            _ => return Err(bad("label")),
        };
        let activity_value = match row.activity_value.trim() {
            "" => None,
            s => {
                let v: f64 = s.parse().map_err(|_| bad("activity_value"))?;
                if !(v > 0.0) {
                    return Err(bad("activity_value (must be > 0)"));
                }
                Some(v)
            }
        };
        out.push(CompoundRecord {
            cid: row.cid,
            smiles: row.smiles,
            inchi: Some(row.inchi).filter(|s| !s.is_empty()),
            label,
            activity_value,
        });
    }
    Ok(out)
}

pub fn write_records<W: Write>(out: W, records: &[CompoundRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(Row {
            cid: r.cid,
            inchi: r.inchi.clone().unwrap_or_default(),
            smiles: r.smiles.clone(),
            label: match r.label {
                Some(Label::Active) => "1".into(),
                Some(Label::Inactive) => "0".into(),
                None => String::new(),
            },
            activity_value: r.activity_value.map(|v| format!("{v}")).unwrap_or_default(),
        })
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| ChemError::Invalid(format!("dataset csv: {e}")))
}
