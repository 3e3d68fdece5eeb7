//! Graph tensors for learning: 28 node features, 7 edge features, bond
//! topology (2D) or a 6 Angstrom distance cutoff with positions (3D).
//!
//! Dataset container layout (all integers u32 little-endian, reals f64 LE):
//!
//! ```text
//! <dir>/meta.json    {"format": "screenkit-graphs", "version": 1, "kind": "2d"|"3d", "hydrogens": ...}
//! <dir>/graphs.bin   concatenated records
//! <dir>/index.csv    cid,offset,length   (byte offsets into graphs.bin)
//!
//! record: n_nodes, node_dim, n_edges, edge_dim, has_pos (u32 0/1)
//!         node_features  n_nodes x node_dim, row-major
//!         edges          n_edges x 2 (u32 source, target)
//!         edge_features  n_edges x edge_dim, row-major
//!         positions      n_nodes x 3 when has_pos
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ChemError, Result};
use crate::mol::{BondOrder, Molecule};
use crate::physchem::{distance, AtomProperties};

pub const NODE_DIM: usize = 28;
pub const EDGE_DIM: usize = 7;
pub const CUTOFF: f64 = 6.0;

const ELEMENT_SLOTS: [u8; 11] = [1, 6, 7, 8, 9, 14, 15, 16, 17, 35, 53];

#[derive(Debug, Clone, PartialEq)]
pub struct GraphTensor {
    /// Row-major, `n x NODE_DIM`.
    pub node_features: Vec<[f64; NODE_DIM]>,
    /// Directed pairs; both directions are stored.
    pub edges: Vec<(usize, usize)>,
    /// Aligned with `edges`; empty for 3D graphs.
    pub edge_features: Vec<[f64; EDGE_DIM]>,
    pub positions: Option<Vec<[f64; 3]>>,
}

impl GraphTensor {
    pub fn num_nodes(&self) -> usize {
        self.node_features.len()
    }
}

pub fn node_feature_vector(atom: usize, mol: &Molecule, props: &AtomProperties) -> [f64; NODE_DIM] {
    let a = mol.atom(atom);
    let mut f = [0.0; NODE_DIM];
    let slot = ELEMENT_SLOTS.iter().position(|&z| z == a.element).unwrap_or(11);
    f[slot] = 1.0;
    let degree = mol.total_degree(atom);
    if (1..=4).contains(&degree) {
        f[11 + degree] = 1.0;
    } else {
        log::debug!("atom {atom}: degree {degree} outside 1-4, degree block left empty");
    }
    f[16] = a.formal_charge as f64;
    f[17] = mol.is_atom_in_ring(atom) as u8 as f64;
    f[18] = a.is_aromatic as u8 as f64;
    f[19] = mol.total_valence(atom);
    f[20] = a.mass();
    f[21] = props.gasteiger_charge[atom];
    f[22] = props.gasteiger_h_charge[atom];
    f[23] = props.crippen_logp[atom];
    f[24] = props.crippen_mr[atom];
    f[25] = props.tpsa_contrib[atom];
    f[26] = props.labute_asa_contrib[atom];
    f[27] = props.estate_index[atom];
    f
}

fn node_matrix(mol: &Molecule, props: &AtomProperties) -> Vec<[f64; NODE_DIM]> {
    (0..mol.atom_count())
        .map(|i| node_feature_vector(i, mol, props))
        .collect()
}

pub fn edge_feature_vector(mol: &Molecule, bond: usize) -> [f64; EDGE_DIM] {
    let b = mol.bond(bond);
    let mut f = [0.0; EDGE_DIM];
    f[0] = (b.order == BondOrder::Aromatic) as u8 as f64;
    f[1] = b.is_conjugated as u8 as f64;
    f[2] = b.in_ring as u8 as f64;
    let slot = match b.order {
        BondOrder::Single => 3,
        BondOrder::Aromatic => 4,
        BondOrder::Double => 5,
        BondOrder::Triple => 6,
    };
    f[slot] = 1.0;
    f
}

pub fn build_2d_graph(mol: &Molecule, props: &AtomProperties) -> GraphTensor {
    let mut edges = Vec::with_capacity(2 * mol.bond_count());
    let mut edge_features = Vec::with_capacity(2 * mol.bond_count());
    for (i, b) in mol.bonds().iter().enumerate() {
        let f = edge_feature_vector(mol, i);
        edges.push((b.begin, b.end));
        edges.push((b.end, b.begin));
        edge_features.push(f);
        edge_features.push(f);
    }
    GraphTensor {
        node_features: node_matrix(mol, props),
        edges,
        edge_features,
        positions: None,
    }
}

/// Ordered pairs of distinct atoms closer than `cutoff` (strict).
pub fn radius_edges(positions: &[[f64; 3]], cutoff: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..positions.len() {
        for j in 0..positions.len() {
            if i != j && distance(positions[i], positions[j]) < cutoff {
                edges.push((i, j));
            }
        }
    }
    edges
}

pub fn build_3d_graph(mol: &Molecule, props: &AtomProperties) -> Result<GraphTensor> {
    if !mol.has_coordinates() {
        return Err(ChemError::MissingCoordinates);
    }
    let positions: Vec<[f64; 3]> = mol.atoms().iter().map(|a| a.coordinates.unwrap()).collect();
    Ok(GraphTensor {
        node_features: node_matrix(mol, props),
        edges: radius_edges(&positions, CUTOFF),
        edge_features: Vec::new(),
        positions: Some(positions),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "3d")]
    ThreeD,
}

/// Whether hydrogens are graph nodes (SDF input with H) or folded into
/// heavy atoms (SMILES input).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HydrogenMode {
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format: String,
    pub version: u32,
    pub kind: GraphKind,
    pub hydrogens: HydrogenMode,
    pub node_dim: usize,
    pub edge_dim: usize,
    pub cutoff: Option<f64>,
    pub count: usize,
}

fn io_err(path: &Path, e: std::io::Error) -> ChemError {
    ChemError::Invalid(format!("{}: {e}", path.display()))
}

pub fn encode_graph(g: &GraphTensor) -> Vec<u8> {
    let mut out = Vec::new();
    let node_dim = if g.node_features.is_empty() { NODE_DIM } else { g.node_features[0].len() };
    let edge_dim = if g.edge_features.is_empty() { 0 } else { EDGE_DIM };
    for v in [g.num_nodes(), node_dim, g.edges.len(), edge_dim, g.positions.is_some() as usize] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for row in &g.node_features {
        for x in row {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    for &(s, t) in &g.edges {
        out.extend_from_slice(&(s as u32).to_le_bytes());
        out.extend_from_slice(&(t as u32).to_le_bytes());
    }
    for row in &g.edge_features {
        for x in row {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    for p in g.positions.iter().flatten() {
        for x in p {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn decode_graph(bytes: &[u8]) -> Result<GraphTensor> {
    let bad = || ChemError::Invalid("truncated or malformed graph record".into());
    let mut pos = 0;
    let u32_at = |pos: &mut usize| -> Result<usize> {
        let b = bytes.get(*pos..*pos + 4).ok_or_else(bad)?;
        *pos += 4;
        Ok(u32::from_le_bytes(b.try_into().unwrap()) as usize)
    };
    let n = u32_at(&mut pos)?;
    let node_dim = u32_at(&mut pos)?;
    let n_edges = u32_at(&mut pos)?;
    let edge_dim = u32_at(&mut pos)?;
    let has_pos = u32_at(&mut pos)? == 1;
    if node_dim != NODE_DIM || (edge_dim != 0 && edge_dim != EDGE_DIM) {
        return Err(bad());
    }
    let f64_at = |pos: &mut usize| -> Result<f64> {
        let b = bytes.get(*pos..*pos + 8).ok_or_else(bad)?;
        *pos += 8;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    };
    let mut node_features = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = [0.0; NODE_DIM];
        for x in row.iter_mut() {
            *x = f64_at(&mut pos)?;
        }
        node_features.push(row);
    }
    let mut edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let s = bytes.get(pos..pos + 8).ok_or_else(bad)?;
        pos += 8;
        edges.push((
            u32::from_le_bytes(s[..4].try_into().unwrap()) as usize,
            u32::from_le_bytes(s[4..].try_into().unwrap()) as usize,
        ));
    }
    let mut edge_features = Vec::new();
    if edge_dim > 0 {
        for _ in 0..n_edges {
            let mut row = [0.0; EDGE_DIM];
            for x in row.iter_mut() {
                *x = f64_at(&mut pos)?;
            }
            edge_features.push(row);
        }
    }
    let positions = if has_pos {
        let mut p = Vec::with_capacity(n);
        for _ in 0..n {
            p.push([f64_at(&mut pos)?, f64_at(&mut pos)?, f64_at(&mut pos)?]);
        }
        Some(p)
    } else {
        None
    };
    if pos != bytes.len() {
        return Err(bad());
    }
    Ok(GraphTensor {
        node_features,
        edges,
        edge_features,
        positions,
    })
}

/// Writes a dataset container; graphs are stored in the given order.
pub fn write_dataset(
    dir: &Path,
    kind: GraphKind,
    hydrogens: HydrogenMode,
    graphs: &[(u64, GraphTensor)],
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let data_path = dir.join("graphs.bin");
    let mut data = BufWriter::new(fs::File::create(&data_path).map_err(|e| io_err(&data_path, e))?);
    let mut index = csv::Writer::from_path(dir.join("index.csv"))
        .map_err(|e| ChemError::Invalid(format!("index.csv: {e}")))?;
    index
        .write_record(["cid", "offset", "length"])
        .map_err(|e| ChemError::Invalid(format!("index.csv: {e}")))?;
    let mut offset = 0usize;
    for (cid, g) in graphs {
        let bytes = encode_graph(g);
        data.write_all(&bytes).map_err(|e| io_err(&data_path, e))?;
        index
            .write_record([cid.to_string(), offset.to_string(), bytes.len().to_string()])
            .map_err(|e| ChemError::Invalid(format!("index.csv: {e}")))?;
        offset += bytes.len();
    }
    data.flush().map_err(|e| io_err(&data_path, e))?;
    index
        .flush()
        .map_err(|e| io_err(&dir.join("index.csv"), e))?;
    let meta = DatasetMeta {
        format: "screenkit-graphs".into(),
        version: 1,
        kind,
        hydrogens,
        node_dim: NODE_DIM,
        edge_dim: if kind == GraphKind::TwoD { EDGE_DIM } else { 0 },
        cutoff: (kind == GraphKind::ThreeD).then_some(CUTOFF),
        count: graphs.len(),
    };
    let meta_path = dir.join("meta.json");
    fs::write(&meta_path, serde_json::to_string_pretty(&meta).unwrap()).map_err(|e| io_err(&meta_path, e))
}

/// Random-access reader over a dataset container.
pub struct GraphDataset {
    pub meta: DatasetMeta,
    data: Vec<u8>,
    index: BTreeMap<u64, (usize, usize)>,
    order: Vec<u64>,
}

impl GraphDataset {
    pub fn open(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("meta.json");
        let meta: DatasetMeta = serde_json::from_str(
            &fs::read_to_string(&meta_path).map_err(|e| io_err(&meta_path, e))?,
        )
        .map_err(|e| ChemError::Invalid(format!("meta.json: {e}")))?;
        let data_path = dir.join("graphs.bin");
        let data = fs::read(&data_path).map_err(|e| io_err(&data_path, e))?;
        let mut index = BTreeMap::new();
        let mut order = Vec::new();
        let mut rdr = csv::Reader::from_path(dir.join("index.csv"))
            .map_err(|e| ChemError::Invalid(format!("index.csv: {e}")))?;
        for row in rdr.records() {
            let row = row.map_err(|e| ChemError::Invalid(format!("index.csv: {e}")))?;
            let parse = |i: usize| -> Result<u64> {
                row.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| ChemError::Invalid("index.csv: bad row".into()))
            };
            let cid = parse(0)?;
            index.insert(cid, (parse(1)? as usize, parse(2)? as usize));
            order.push(cid);
        }
        Ok(GraphDataset { meta, data, index, order })
    }

    pub fn cids(&self) -> &[u64] {
        &self.order
    }

    pub fn get(&self, cid: u64) -> Result<GraphTensor> {
        let &(offset, len) = self
            .index
            .get(&cid)
            .ok_or_else(|| ChemError::MissingProperty(format!("no graph for cid {cid}")))?;
        let bytes = self
            .data
            .get(offset..offset + len)
            .ok_or_else(|| ChemError::Invalid("index points past end of graphs.bin".into()))?;
        decode_graph(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::{aromatize, parse_smiles, Atom};
    use crate::physchem::native_properties;

    fn props(m: &Molecule) -> AtomProperties {
        native_properties(m).unwrap()
    }

    #[test]
    fn methane_and_selenium_nodes() {
        let m = parse_smiles("C").unwrap();
        let f = node_feature_vector(0, &m, &props(&m));
        assert_eq!(f[1], 1.0);
        assert_eq!(f[15], 1.0);
        assert_eq!(f[16], 0.0);
        assert_eq!(f[..16].iter().sum::<f64>(), 2.0);

        let m = parse_smiles("[Se]").unwrap();
        let zeros = AtomProperties {
            gasteiger_charge: vec![0.0],
            gasteiger_h_charge: vec![0.0],
            crippen_logp: vec![0.0],
            crippen_mr: vec![0.0],
            tpsa_contrib: vec![0.0],
            labute_asa_contrib: vec![0.0],
            estate_index: vec![0.0],
            sigma_charge: vec![0.0],
            v_charge: vec![0.0],
        };
        let f = node_feature_vector(0, &m, &zeros);
        assert_eq!(f[11], 1.0);
        assert!(f[12..16].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn benzene_graph() {
        let m = aromatize(&parse_smiles("C1=CC=CC=C1").unwrap());
        let g = build_2d_graph(&m, &props(&m));
        let f = g.node_features[0];
        assert_eq!((f[17], f[18], f[19]), (1.0, 1.0, 4.0));
        assert_eq!(g.edges.len(), 12);
        assert!(g.edge_features.iter().all(|e| e[0] == 1.0 && e[4] == 1.0 && e[3] == 0.0));

        let m = parse_smiles("CC").unwrap();
        let g = build_2d_graph(&m, &props(&m));
        assert_eq!(g.edges, vec![(0, 1), (1, 0)]);
        assert_eq!(g.edge_features[0][3], 1.0);
        let m = parse_smiles("C").unwrap();
        assert!(build_2d_graph(&m, &props(&m)).edges.is_empty());
    }

    fn placed(xs: &[f64]) -> Molecule {
        let atoms = xs.iter().map(|&x| Atom::new(6).at([x, 0.0, 0.0])).collect();
        Molecule::new(atoms, Vec::new()).unwrap()
    }

    #[test]
    fn cutoff_edges() {
        for (xs, want) in [
            (vec![0.0, 3.0], vec![(0, 1), (1, 0)]),
            (vec![0.0, 7.0], vec![]),
            (vec![0.0, 4.0, 8.0], vec![(0, 1), (1, 0), (1, 2), (2, 1)]),
            (vec![0.0, 6.0], vec![]),
        ] {
            let m = placed(&xs);
            let g = build_3d_graph(&m, &props(&m)).unwrap();
            assert_eq!(g.edges, want);
            assert!(g.edge_features.is_empty());
        }
        let m = parse_smiles("CC").unwrap();
        assert!(matches!(build_3d_graph(&m, &props(&m)), Err(ChemError::MissingCoordinates)));
    }

    #[test]
    fn container_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = aromatize(&parse_smiles("c1ccncc1O").unwrap());
        let b = parse_smiles("CC(=O)[O-]").unwrap();
        let graphs = vec![(7u64, build_2d_graph(&a, &props(&a))), (3u64, build_2d_graph(&b, &props(&b)))];
        write_dataset(dir.path(), GraphKind::TwoD, HydrogenMode::Implicit, &graphs).unwrap();
        let ds = GraphDataset::open(dir.path()).unwrap();
        assert_eq!(ds.cids(), &[7, 3]);
        assert_eq!(ds.meta.hydrogens, HydrogenMode::Implicit);
        assert_eq!(ds.get(3).unwrap(), graphs[1].1);
        assert_eq!(ds.get(7).unwrap(), graphs[0].1);
        assert!(ds.get(8).is_err());

        let c = placed(&[0.0, 1.5, 9.0]);
        let g3 = build_3d_graph(&c, &props(&c)).unwrap();
        assert_eq!(decode_graph(&encode_graph(&g3)).unwrap(), g3);
    }
}
