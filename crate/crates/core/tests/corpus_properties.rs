use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use screenkit::mol::{self, BondOrder, Molecule};
use screenkit::smarts::matches_smarts;

fn corpus(limit: usize) -> Vec<(String, Molecule)> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus/nci_first_5k.smi");
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_whitespace().next())
        .filter_map(|s| mol::parse_smiles(s).ok().map(|m| (s.to_string(), mol::aromatize(&m))))
        .take(limit)
        .collect()
}

#[test]
fn canonical_form_is_idempotent_and_order_free() {
    let mols = corpus(1000);
    assert_eq!(mols.len(), 1000);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (src, m) in &mols {
        let c = mol::canonical_form(m);
        let again = mol::aromatize(&mol::parse_smiles(&c).unwrap_or_else(|e| panic!("{src} -> {c}: {e}")));
        assert_eq!(mol::canonical_form(&again), c, "{src}");
        let mut order: Vec<usize> = (0..m.atom_count()).collect();
        order.shuffle(&mut rng);
        assert_eq!(mol::canonical_form(&m.permuted(&order)), c, "{src} permuted");
    }
}

#[derive(Clone, Copy, Debug)]
enum QAtom {
    Aliphatic(u8),
    Aromatic(u8),
    AnyOf(u8),
}

#[derive(Clone, Copy, Debug)]
enum QBond {
    Single,
    Double,
    Aromatic,
    Any,
    Implicit,
}

struct Query {
    atoms: Vec<QAtom>,
    /// (parent, child, bond); atom 0 is the root.
    edges: Vec<(usize, usize, QBond)>,
}

fn atom_text(a: QAtom) -> String {
    let sym = |z: u8| match z {
        6 => "C",
        7 => "N",
        8 => "O",
        16 => "S",
        17 => "Cl",
        _ => unreachable!(),
    };
    match a {
        QAtom::Aliphatic(z) => sym(z).to_string(),
        QAtom::Aromatic(z) => sym(z).to_lowercase(),
        QAtom::AnyOf(z) => format!("[#{z}]"),
    }
}

fn bond_text(b: QBond) -> &'static str {
    match b {
        QBond::Single => "-",
        QBond::Double => "=",
        QBond::Aromatic => ":",
        QBond::Any => "~",
        QBond::Implicit => "",
    }
}

fn render(q: &Query, at: usize) -> String {
    let mut s = atom_text(q.atoms[at]);
    let kids: Vec<&(usize, usize, QBond)> = q.edges.iter().filter(|e| e.0 == at).collect();
    for (i, e) in kids.iter().enumerate() {
        let part = format!("{}{}", bond_text(e.2), render(q, e.1));
        if i + 1 < kids.len() {
            s.push_str(&format!("({part})"));
        } else {
            s.push_str(&part);
        }
    }
    s
}

fn random_query(rng: &mut ChaCha8Rng) -> Query {
    let n = rng.gen_range(1..=4);
    let elements = [6u8, 6, 6, 7, 8, 16, 17];
    let atoms = (0..n)
        .map(|_| {
            let z = *elements.choose(rng).unwrap();
            match (rng.gen_range(0..3), z) {
                (0, 6 | 7 | 8 | 16) => QAtom::Aromatic(z),
                (1, _) => QAtom::AnyOf(z),
                _ => QAtom::Aliphatic(z),
            }
        })
        .collect();
    let bonds = [QBond::Single, QBond::Double, QBond::Aromatic, QBond::Any, QBond::Implicit];
    let edges = (1..n).map(|c| (rng.gen_range(0..c), c, *bonds.choose(rng).unwrap())).collect();
    Query { atoms, edges }
}

fn atom_ok(q: QAtom, m: &Molecule, i: usize) -> bool {
    let a = m.atom(i);
    match q {
        QAtom::Aliphatic(z) => a.element == z && !a.is_aromatic,
        QAtom::Aromatic(z) => a.element == z && a.is_aromatic,
        QAtom::AnyOf(z) => a.element == z,
    }
}

fn bond_ok(q: QBond, order: BondOrder) -> bool {
    match q {
        QBond::Single => order == BondOrder::Single,
        QBond::Double => order == BondOrder::Double,
        QBond::Aromatic => order == BondOrder::Aromatic,
        QBond::Any => true,
        QBond::Implicit => matches!(order, BondOrder::Single | BondOrder::Aromatic),
    }
}

/// Every injective assignment of query atoms to molecule atoms, checked in full.
fn brute_force(q: &Query, m: &Molecule) -> bool {
    fn assign(q: &Query, m: &Molecule, map: &mut Vec<usize>) -> bool {
        if map.len() == q.atoms.len() {
            return q.atoms.iter().enumerate().all(|(k, &a)| atom_ok(a, m, map[k]))
                && q.edges.iter().all(|&(p, c, b)| {
                    m.bond_between(map[p], map[c])
                        .is_some_and(|bi| bond_ok(b, m.bond(bi).order))
                });
        }
        for i in 0..m.atom_count() {
            if !map.contains(&i) {
                map.push(i);
                if assign(q, m, map) {
                    return true;
                }
                map.pop();
            }
        }
        false
    }
    assign(q, m, &mut Vec::new())
}

#[test]
fn smarts_matches_brute_force_oracle() {
    let mols: Vec<Molecule> = corpus(5000)
        .into_iter()
        .map(|(_, m)| m)
        .filter(|m| m.atom_count() <= 12 && m.atoms().iter().all(|a| !a.is_hydrogen()))
        .take(150)
        .collect();
    assert!(mols.len() >= 100);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut hits, mut total) = (0, 0);
    for _ in 0..300 {
        let q = random_query(&mut rng);
        let text = render(&q, 0);
        for m in &mols {
            let want = brute_force(&q, m);
            let got = matches_smarts(m, &text).unwrap();
            assert_eq!(got, want, "{text} on {}", mol::write_smiles(m));
            hits += want as usize;
            total += 1;
        }
    }
    assert!(hits > total / 20 && hits < total * 19 / 20, "{hits}/{total} matches");
}
