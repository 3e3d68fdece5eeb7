//! The ten acceptance criteria. Each runs in turn and prints one
//! `criterion N: PASS|FAIL` line; the test fails if any criterion fails.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use screenkit::bench::{loss_and_gradient, train_baseline, BaselineConfig, LinearModel};
use screenkit::curation::{self, CompoundRecord, CurationConfig, Label, Step};
use screenkit::descriptors::{self, DESCRIPTOR_LEN, LEN_2D, LEN_3D, LEN_SCALARS};
use screenkit::featurize::{self, CUTOFF, EDGE_DIM, NODE_DIM};
use screenkit::metrics::{self, Entry, RankedList};
use screenkit::mol::{self, Molecule};
use screenkit::physchem::native_properties;
use screenkit::splits::{self, ScaffoldOptions, Split};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run_criterion(id: usize, title: &str, limit: Option<Duration>, f: fn() -> Check) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let outcome = match (outcome, limit) {
        (Ok(_), Some(l)) if elapsed > l => Err(format!("took {:.1}s, limit {:.0}s", elapsed.as_secs_f64(), l.as_secs_f64())),
        (o, _) => o,
    };
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d.clone()),
        Err(d) => ("FAIL", d.clone()),
    };
    println!("criterion {id}: {tag}: {title} [{:.2}s] {detail}", elapsed.as_secs_f64());
    outcome.is_ok()
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, Option<u64>, fn() -> Check); 10] = [
        ("metric exactness (BEDROC bounds and exact oracle)", Some(10), c1_bedroc),
        ("logAUC random baseline and perfect score", Some(30), c2_log_auc),
        ("EF and DCG against brute-force top-k", Some(5), c3_ef_dcg),
        ("descriptor shape, pair oracle, rigid-motion invariance", None, c4_descriptor),
        ("AID1798 hierarchy fixture counts", None, c5_hierarchy),
        ("curation telescoping on the adversarial fixture", None, c6_curation),
        ("scaffold and adapted-CV split guarantees", None, c7_splits),
        ("graph featurization shapes and 6 A radius edges", None, c8_graphs),
        ("baseline ranker sanity", None, c9_baseline),
        ("100k-molecule pipeline time and determinism", None, c10_pipeline),
    ];
    let mut failed = Vec::new();
    for (i, (title, limit, f)) in criteria.into_iter().enumerate() {
        if !run_criterion(i + 1, title, limit.map(Duration::from_secs), f) {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

// ---------------------------------------------------------------- metrics

fn ranked(labels: &[bool]) -> RankedList {
    let entries: Vec<Entry> = labels
        .iter()
        .enumerate()
        .map(|(i, &active)| Entry {
            cid: i as u64,
            score: -(i as f64),
            active,
        })
        .collect();
    RankedList::new(&entries, 0).unwrap()
}

fn c1_bedroc() -> Check {
    let grid = [10usize, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000];
    let mut cases = 0;
    let mut worst_err: f64 = 0.0;
    for &n_total in &grid {
        let half = n_total / 2;
        let ns: Vec<usize> = if n_total <= 2000 {
            (1..=half).collect()
        } else {
            let mut v: BTreeSet<usize> = (1..=100).collect();
            v.extend((100..=half).step_by(37));
            v.insert(half);
            v.into_iter().collect()
        };
        for n in ns {
            let mut labels = vec![false; n_total];
            labels[..n].iter_mut().for_each(|l| *l = true);
            let best = metrics::bedroc(&ranked(&labels), 20.0).map_err(|e| e.to_string())?;
            labels.reverse();
            let worst = metrics::bedroc(&ranked(&labels), 20.0).map_err(|e| e.to_string())?;
            worst_err = worst_err.max((best - 1.0).abs()).max(worst.abs());
            ensure!(
                (best - 1.0).abs() < 1e-9 && worst.abs() < 1e-9,
                "N={n_total} n={n}: perfect {best}, worst {worst}"
            );
            cases += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut max_diff: f64 = 0.0;
    for _ in 0..200 {
        let n_total = rng.gen_range(2..=400usize);
        let n = rng.gen_range(1..n_total);
        let mut labels = vec![false; n_total];
        labels[..n].iter_mut().for_each(|l| *l = true);
        labels.shuffle(&mut rng);
        let got = metrics::bedroc(&ranked(&labels), 20.0).map_err(|e| e.to_string())?;
        let ranks: Vec<i64> = (0..n_total).filter(|&i| labels[i]).map(|i| i as i64 + 1).collect();
        let want = bedroc_exact(&ranks, n_total as i64, 20);
        max_diff = max_diff.max((got - want).abs());
        ensure!((got - want).abs() < 1e-12, "N={n_total} n={n}: {got} vs exact {want}");
    }
    Ok(format!(
        "{cases} grid cases, max bound error {worst_err:.1e}; 200 random instances, max |diff| {max_diff:.1e}"
    ))
}

const PRECISION: u32 = 80;

fn scale() -> BigInt {
    BigInt::from(10).pow(PRECISION)
}

/// exp(p/q) as a fixed-point integer scaled by 10^80, by Taylor series in
/// exact integer arithmetic; negative arguments go through 1/exp(|x|).
fn exp_fixed(p: i64, q: i64) -> BigInt {
    let s = scale();
    let a = BigInt::from(p.abs());
    let q = BigInt::from(q);
    let mut term = s.clone();
    let mut sum = s.clone();
    let mut k = 1i64;
    while !term.is_zero() {
        term = term * &a / (&q * BigInt::from(k));
        sum += &term;
        k += 1;
    }
    if p < 0 {
        &s * &s / sum
    } else {
        sum
    }
}

fn exp_rat(p: i64, q: i64) -> BigRational {
    BigRational::new(exp_fixed(p, q), scale())
}

/// RIE, RIE_max and RIE_min evaluated term by term in rational arithmetic,
/// then combined into BEDROC.
fn bedroc_exact(ranks: &[i64], n_total: i64, alpha: i64) -> f64 {
    let one = BigRational::one();
    let n = ranks.len() as i64;
    let big_n = BigRational::from_integer(n_total.into());
    let n_r = BigRational::from_integer(n.into());
    let ra = BigRational::new(n.into(), n_total.into());
    let sum = ranks
        .iter()
        .fold(BigRational::zero(), |acc, &r| acc + exp_rat(-alpha * r, n_total));
    let e_neg_a = exp_rat(-alpha, 1);
    let e_pos_a = exp_rat(alpha, 1);
    let rie = (sum / &n_r) / ((&one / &big_n) * ((&one - &e_neg_a) / (exp_rat(alpha, n_total) - &one)));
    let rie_max = (&one - exp_rat(-alpha * n, n_total)) / (&ra * (&one - &e_neg_a));
    let rie_min = (&one - exp_rat(alpha * n, n_total)) / (&ra * (&one - &e_pos_a));
    let b = (&rie - &rie_min) / (&rie_max - &rie_min);
    assert!(!b.is_negative() || b.abs() < BigRational::new(1.into(), BigInt::from(10).pow(30)));
    b.to_f64().unwrap()
}

fn c2_log_auc() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (n_total, n) = (10_000usize, 100usize);
    let mut values = Vec::new();
    for _ in 0..100 {
        let mut labels = vec![false; n_total];
        labels[..n].iter_mut().for_each(|l| *l = true);
        labels.shuffle(&mut rng);
        values.push(metrics::log_auc(&ranked(&labels)).map_err(|e| e.to_string())?);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    ensure!((mean - 0.0215).abs() <= 0.005, "random mean {mean}");
    let mut labels = vec![false; n_total];
    labels[..n].iter_mut().for_each(|l| *l = true);
    let perfect = metrics::log_auc(&ranked(&labels)).map_err(|e| e.to_string())?;
    ensure!(perfect == 1.0, "perfect classifier scored {perfect:?}");
    Ok(format!("random mean {mean:.5} over 100 rankings; perfect = {perfect}"))
}

fn c3_ef_dcg() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..1000 {
        let n_total = rng.gen_range(100..=3000usize);
        let p = rng.gen_range(0.002..0.2);
        let mut labels: Vec<bool> = (0..n_total).map(|_| rng.gen_bool(p)).collect();
        if !labels.contains(&true) {
            labels[rng.gen_range(0..n_total)] = true;
        }
        let scores: Vec<f64> = (0..n_total).map(|_| rng.gen::<f64>()).collect();
        let entries: Vec<Entry> = (0..n_total)
            .map(|i| Entry {
                cid: i as u64,
                score: scores[i],
                active: labels[i],
            })
            .collect();
        let list = RankedList::new(&entries, 9).map_err(|e| e.to_string())?;

        // brute force: sort indices by score, walk the top 100
        let mut order: Vec<usize> = (0..n_total).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let k = 100;
        let hits = order[..k].iter().filter(|&&i| labels[i]).count();
        let n_act = labels.iter().filter(|&&l| l).count();
        let ef = (hits as f64 / k as f64) / (n_act as f64 / n_total as f64);
        let mut dcg = 0.0;
        for (pos, &i) in order[..k].iter().enumerate() {
            if labels[i] {
                dcg += 1.0 / ((pos + 2) as f64).log2();
            }
        }
        let got_ef = metrics::enrichment_factor(&list, k).map_err(|e| e.to_string())?;
        let got_cg = metrics::cumulative_gain(&list, k);
        let got_dcg = metrics::dcg(&list, k);
        ensure!(got_cg == hits, "case {case}: CG {got_cg} vs {hits}");
        ensure!(got_ef == ef, "case {case}: EF {got_ef} vs {ef}");
        ensure!(got_dcg == dcg, "case {case}: DCG {got_dcg} vs {dcg}");
    }
    Ok("1000 instances agree exactly".into())
}

// ------------------------------------------------------------ descriptors

fn load_sdf(path: &Path) -> Vec<Molecule> {
    let (records, errors) = mol::parse_sdf(BufReader::new(File::open(path).unwrap()));
    assert!(errors.is_empty(), "{errors:?}");
    records.into_iter().map(|r| mol::aromatize(&r.molecule)).collect()
}

fn bond_distances(mol: &Molecule) -> Vec<Vec<usize>> {
    let n = mol.atom_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for b in mol.bonds() {
        d[b.begin][b.end] = 1;
        d[b.end][b.begin] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn class(a: f64, b: f64) -> usize {
    match (a < 0.0, b < 0.0) {
        (false, false) => 0,
        (true, true) => 2,
        _ => 1,
    }
}

/// Ordered-pair oracle for one property: 32 bond-distance slots, 60 spatial
/// slots. Bin 0 drops the mixed slot, so the layout is (pp, nn) then
/// (pp, pn, nn) for distances 1..=10.
fn pair_oracle(mol: &Molecule, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = bond_distances(mol);
    let xyz: Vec<[f64; 3]> = mol.atoms().iter().map(|a| a.coordinates.unwrap()).collect();
    let mut a2 = vec![0.0; 32];
    let mut a3 = vec![0.0; 60];
    for i in 0..p.len() {
        for j in 0..p.len() {
            let v = (p[i] * p[j]).abs();
            let c = class(p[i], p[j]);
            if d[i][j] == 0 {
                a2[if c == 0 { 0 } else { 1 }] += v;
            } else if d[i][j] <= 10 {
                a2[2 + 3 * (d[i][j] - 1) + c] += v;
            }
            if i != j {
                let r = ((xyz[i][0] - xyz[j][0]).powi(2) + (xyz[i][1] - xyz[j][1]).powi(2) + (xyz[i][2] - xyz[j][2]).powi(2)).sqrt();
                for bin in 0..20 {
                    let lo = 1.0 + 0.25 * bin as f64;
                    if r >= lo && r < lo + 0.25 {
                        a3[3 * bin + c] += v;
                    }
                }
            }
        }
    }
    (a2, a3)
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    // unit quaternion
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let tau = std::f64::consts::TAU;
    let (a, b, c, d) = (
        (1.0 - u1).sqrt() * (tau * u2).sin(),
        (1.0 - u1).sqrt() * (tau * u2).cos(),
        u1.sqrt() * (tau * u3).sin(),
        u1.sqrt() * (tau * u3).cos(),
    );
    [
        [a * a + b * b - c * c - d * d, 2.0 * (b * c - a * d), 2.0 * (b * d + a * c)],
        [2.0 * (b * c + a * d), a * a - b * b + c * c - d * d, 2.0 * (c * d - a * b)],
        [2.0 * (b * d - a * c), 2.0 * (c * d + a * b), a * a - b * b - c * c + d * d],
    ]
}

fn moved(mol: &Molecule, rot: &[[f64; 3]; 3], shift: [f64; 3]) -> Molecule {
    let atoms = mol
        .atoms()
        .iter()
        .map(|a| {
            let mut a = a.clone();
            let p = a.coordinates.unwrap();
            let q: Vec<f64> = (0..3)
                .map(|r| rot[r][0] * p[0] + rot[r][1] * p[1] + rot[r][2] * p[2] + shift[r])
                .collect();
            a.coordinates = Some([q[0], q[1], q[2]]);
            a
        })
        .collect();
    Molecule::new(atoms, mol.bonds().to_vec()).unwrap()
}

fn c4_descriptor() -> Check {
    let mols = load_sdf(&repo().join("fixtures/corpus/nci_small_3d.sdf"));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checked, mut skipped, mut max_err, mut max_motion) = (0, 0, 0.0f64, 0.0f64);
    for (idx, m) in mols.iter().enumerate() {
        if m.heavy_atom_count() > 15 {
            continue;
        }
        let props = match native_properties(m) {
            Ok(p) => p,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let d = descriptors::full_descriptor(m, &props).map_err(|e| format!("molecule {idx}: {e}"))?;
        let v = d.to_vec();
        ensure!(
            v.len() == 391 && DESCRIPTOR_LEN == 391 && d.scalars.len() == 23 && d.ac2d.len() == 128 && d.ac3d.len() == 240,
            "molecule {idx}: lengths {} / {} / {} / {}",
            v.len(),
            d.scalars.len(),
            d.ac2d.len(),
            d.ac3d.len()
        );
        ensure!(LEN_SCALARS + 4 * LEN_2D + 4 * LEN_3D == 391, "block constants");
        let sign = |b: bool| if b { 1.0 } else { -1.0 };
        let ps = [
            props.sigma_charge.clone(),
            props.v_charge.clone(),
            m.atoms().iter().map(|a| sign(a.element == 1)).collect::<Vec<_>>(),
            m.atoms().iter().map(|a| sign(a.is_aromatic)).collect::<Vec<_>>(),
        ];
        for (k, p) in ps.iter().enumerate() {
            let (a2, a3) = pair_oracle(m, p);
            for s in 0..32 {
                let e = (d.ac2d[32 * k + s] - a2[s]).abs();
                max_err = max_err.max(e);
                ensure!(e < 1e-9, "molecule {idx} property {k} 2D slot {s}: {} vs {}", d.ac2d[32 * k + s], a2[s]);
            }
            for s in 0..60 {
                let e = (d.ac3d[60 * k + s] - a3[s]).abs();
                max_err = max_err.max(e);
                ensure!(e < 1e-9, "molecule {idx} property {k} 3D slot {s}: {} vs {}", d.ac3d[60 * k + s], a3[s]);
            }
        }
        let rot = random_rotation(&mut rng);
        let shift = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
        let m2 = moved(m, &rot, shift);
        let d2 = descriptors::full_descriptor(&m2, &native_properties(&m2).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for s in 0..240 {
            let e = (d.ac3d[s] - d2.ac3d[s]).abs();
            max_motion = max_motion.max(e);
            ensure!(e < 1e-6, "molecule {idx} 3D slot {s} moved: {} vs {}", d.ac3d[s], d2.ac3d[s]);
        }
        checked += 1;
    }
    ensure!(checked >= 300, "only {checked} molecules checked");
    Ok(format!(
        "{checked} corpus molecules (skipped {skipped} without parameters); max oracle error {max_err:.1e}, max motion change {max_motion:.1e}"
    ))
}

// --------------------------------------------------------- curation data

fn c5_hierarchy() -> Check {
    let h = curation::load_hierarchy(&repo().join("fixtures/pubchem/aid1798.toml")).map_err(|e| e.to_string())?;
    let primary = &h.screens[&626].outcomes;
    let tested = primary.len();
    let primary_actives = primary.with_outcome(curation::Outcome::Active).len();
    ensure!(tested == 63_676 && primary_actives == 1_665, "fixture has {tested} tested, {primary_actives} primary actives");
    let labels = curation::evaluate_hierarchy(&h).map_err(|e| e.to_string())?;
    let actives = labels.values().filter(|l| l.is_active()).count();
    let inactives = labels.len() - actives;
    ensure!(actives == 164, "{actives} actives");
    ensure!(inactives == 62_011, "{inactives} inactives");
    Ok(format!("{tested} tested, {primary_actives} primary actives -> {actives} actives, {inactives} inactives"))
}

fn c6_curation() -> Check {
    let path = repo().join("fixtures/curation/adversarial.csv");
    let records = curation::read_records(File::open(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure!(records.len() == 10, "fixture has {} records", records.len());
    let (kept, report) = curation::run_pipeline(records, &CurationConfig::default()).map_err(|e| e.to_string())?;
    let expected: HashMap<Step, usize> = [
        (Step::Dedupe, 1),
        (Step::Parser, 1),
        (Step::Inorganic, 1),
        (Step::Mixture, 1),
        (Step::PainsCatalog, 1),
        (Step::Druglike, 1),
    ]
    .into_iter()
    .collect();
    let mut carried = 10;
    let mut removed = 0;
    for s in &report.steps {
        ensure!(s.input == carried, "{} input {} but previous output {carried}", s.step.name(), s.input);
        ensure!(s.output + s.removed == s.input, "{} does not add up", s.step.name());
        let want = expected.get(&s.step).copied().unwrap_or(0);
        ensure!(s.removed == want, "{} removed {} (want {want})", s.step.name(), s.removed);
        carried = s.output;
        removed += s.removed;
    }
    ensure!(kept.len() == 4 && removed + kept.len() == 10, "{removed} removed + {} kept", kept.len());
    let survivors: BTreeSet<u64> = kept.iter().map(|r| r.cid).collect();
    ensure!(survivors == BTreeSet::from([2244, 9005, 2519, 1983]), "survivors {survivors:?}");
    ensure!(report.removals.len() == removed, "trail has {} entries", report.removals.len());
    Ok(format!("removed {removed} (one each in dedupe, parser, inorganic, mixture, pains_catalog, druglike), {} survive", kept.len()))
}

// ------------------------------------------------------- synthetic corpus

const RINGS: [&str; 16] = [
    "c1ccccc1",
    "c1ccncc1",
    "C1CCCCC1",
    "C1CCNCC1",
    "c1ccsc1",
    "c1ccoc1",
    "C1CCOC1",
    "c1cnc2ccccc2c1",
    "C1CC1",
    "c1ccc2[nH]ccc2c1",
    "C1CCC2CCCCC2C1",
    "c1cn[nH]c1",
    "C1CCC(=O)N1",
    "c1ncncc1",
    "C1CCOCC1",
    "c1ccc2occc2c1",
];
const LINKERS: [&str; 9] = ["", "C", "CC", "C(=O)N", "O", "N", "CO", "S(=O)(=O)N", "C=C"];
const LEADS: [&str; 10] = ["", "C", "O", "N", "F", "Cl", "OC(=O)", "CO", "N#C", "FC(F)(F)"];
const CAPS: [&str; 10] = ["", "C", "O", "N", "F", "Cl", "C(=O)O", "OC", "C#N", "C(F)(F)F"];

/// Random drug-like SMILES: capped chains of one to three ring systems, with
/// a few acyclic molecules mixed in.
fn random_smiles(rng: &mut impl Rng) -> String {
    if rng.gen_bool(0.03) {
        let len = rng.gen_range(3..10);
        let mut s: String = (0..len).map(|_| if rng.gen_bool(0.8) { 'C' } else { 'O' }).collect();
        s.insert(0, 'C');
        s.push('N');
        return s;
    }
    let mut s = String::from(*LEADS.choose(rng).unwrap());
    let rings = rng.gen_range(1..=3);
    for k in 0..rings {
        if k > 0 {
            s.push_str(LINKERS.choose(rng).unwrap());
        }
        s.push_str(RINGS.choose(rng).unwrap());
    }
    s.push_str(CAPS.choose(rng).unwrap());
    s
}

fn random_records(n: usize, active_rate: f64, seed: u64) -> Vec<CompoundRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = if rng.gen_bool(active_rate) { Label::Active } else { Label::Inactive };
            CompoundRecord::new(i as u64 + 1, random_smiles(&mut rng)).with_label(label)
        })
        .collect()
}

fn c7_splits() -> Check {
    let records = random_records(10_000, 0.01, 7);
    let plan = splits::scaffold_split(&records, [3, 1, 1], 7).map_err(|e| e.to_string())?;
    let keys = splits::scaffold_keys(&records, ScaffoldOptions::default()).map_err(|e| e.to_string())?;
    let mut seen: HashMap<&str, Split> = HashMap::new();
    let mut crossing = BTreeSet::new();
    for (r, key) in records.iter().zip(&keys) {
        let s = plan.assignments[&r.cid];
        if let Some(prev) = seen.insert(key, s) {
            if prev != s {
                crossing.insert(key.clone());
            }
        }
    }
    ensure!(crossing.is_empty(), "{} scaffold keys cross splits", crossing.len());
    ensure!(plan.assignments.len() == records.len(), "scaffold split lost records");
    let c = plan.counts();
    let n_keys = seen.len();

    let k = 5;
    let plans = splits::make_cv_folds(&records, k, 7).map_err(|e| e.to_string())?;
    ensure!(plans.len() == k, "{} plans", plans.len());
    let all: BTreeSet<u64> = records.iter().map(|r| r.cid).collect();
    let tests: Vec<BTreeSet<u64>> = plans.iter().map(|p| p.members(Split::Test).into_iter().collect()).collect();
    let mut union = BTreeSet::new();
    for t in &tests {
        ensure!(t.is_disjoint(&union), "test folds overlap");
        union.extend(t.iter().copied());
    }
    ensure!(union == all, "test folds do not cover the dataset");
    let total_actives = records.iter().filter(|r| r.is_active()).count();
    let per_fold = total_actives as f64 / k as f64;
    let active: BTreeSet<u64> = records.iter().filter(|r| r.is_active()).map(|r| r.cid).collect();
    for (i, p) in plans.iter().enumerate() {
        let valid: BTreeSet<u64> = p.members(Split::Valid).into_iter().collect();
        ensure!(valid == tests[(i + k - 1) % k], "plan {i}: validation is not the predecessor fold");
        let train: BTreeSet<u64> = p.members(Split::Train).into_iter().collect();
        let rest: BTreeSet<u64> = all.difference(&tests[i]).copied().filter(|c| !valid.contains(c)).collect();
        ensure!(train == rest, "plan {i}: train is not the remaining folds");
        let a = tests[i].intersection(&active).count();
        ensure!((a as f64 - per_fold).abs() <= 1.0, "fold {i}: {a} actives, expected {per_fold}");
    }
    Ok(format!(
        "{n_keys} scaffold keys, none crossing (train {} / valid {} / test {}); {k} CV folds partition {} records, {total_actives} actives spread within +-1",
        c.train,
        c.valid,
        c.test,
        all.len()
    ))
}

// ----------------------------------------------------------------- graphs

fn c8_graphs() -> Check {
    let mols = load_sdf(&repo().join("fixtures/corpus/nci_small_3d.sdf"));
    let mut shapes = 0;
    let mut graphs_3d = 0;
    for m in mols.iter().take(200) {
        let Ok(props) = native_properties(m) else { continue };
        let g = featurize::build_2d_graph(m, &props);
        ensure!(g.node_features.len() == m.atom_count(), "node rows");
        ensure!(g.node_features.iter().all(|r| r.len() == 28) && NODE_DIM == 28, "node width");
        ensure!(g.edges.len() == 2 * m.bond_count() && g.edge_features.len() == g.edges.len(), "edge rows");
        ensure!(g.edge_features.iter().all(|r| r.len() == 7) && EDGE_DIM == 7, "edge width");
        let g3 = featurize::build_3d_graph(m, &props).map_err(|e| e.to_string())?;
        let pos: Vec<[f64; 3]> = m.atoms().iter().map(|a| a.coordinates.unwrap()).collect();
        let got: BTreeSet<(usize, usize)> = g3.edges.iter().copied().collect();
        ensure!(got == brute_radius(&pos, 6.0), "3D graph edges differ from brute force");
        shapes += 1;
        graphs_3d += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut total_edges = 0;
    for set in 0..200 {
        let n = rng.gen_range(1..80);
        let side = rng.gen_range(3.0..25.0);
        let mut pos: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.gen_range(0.0..side), rng.gen_range(0.0..side), rng.gen_range(0.0..side)])
            .collect();
        // a pair at exactly the cutoff, which must stay out
        if n >= 2 && set % 4 == 0 {
            pos[1] = [pos[0][0] + 6.0, pos[0][1], pos[0][2]];
        }
        let got: Vec<(usize, usize)> = featurize::radius_edges(&pos, CUTOFF);
        let got_set: BTreeSet<(usize, usize)> = got.iter().copied().collect();
        ensure!(got.len() == got_set.len(), "set {set}: duplicate edges");
        ensure!(got_set == brute_radius(&pos, 6.0), "set {set}: edges differ from brute force");
        total_edges += got.len();
    }
    Ok(format!(
        "{shapes} corpus molecules N x 28 / E x 7, {graphs_3d} 3D graphs; 200 random sets, {total_edges} edges match"
    ))
}

fn brute_radius(pos: &[[f64; 3]], cutoff: f64) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for i in 0..pos.len() {
        for j in 0..pos.len() {
            let d2: f64 = (0..3).map(|k| (pos[i][k] - pos[j][k]).powi(2)).sum();
            if i != j && d2 < cutoff * cutoff {
                out.insert((i, j));
            }
        }
    }
    out
}

// --------------------------------------------------------------- baseline

fn separable_dataset(seed: u64) -> (Vec<CompoundRecord>, HashMap<u64, Vec<f64>>, HashMap<u64, bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 16;
    let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let xs: Vec<Vec<f64>> = (0..2000)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0) * 3.0 + 1.0).collect())
        .collect();
    let mut score: Vec<(f64, usize)> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| (x.iter().zip(&w).map(|(a, b)| a * b).sum(), i))
        .collect();
    score.sort_by(|a, b| b.0.total_cmp(&a.0));
    let actives: BTreeSet<usize> = score[..20].iter().map(|s| s.1).collect();
    let mut records = Vec::new();
    let mut features = HashMap::new();
    let mut labels = HashMap::new();
    for (i, x) in xs.into_iter().enumerate() {
        let cid = i as u64 + 1;
        let a = actives.contains(&i);
        records.push(CompoundRecord::new(cid, "C").with_label(if a { Label::Active } else { Label::Inactive }));
        features.insert(cid, x);
        labels.insert(cid, a);
    }
    (records, features, labels)
}

fn pooled_list(folds: &[screenkit::bench::FoldScores], labels: &HashMap<u64, bool>) -> RankedList {
    let entries: Vec<Entry> = folds
        .iter()
        .flat_map(|f| f.test.iter())
        .map(|&(cid, score)| Entry {
            cid,
            score,
            active: labels[&cid],
        })
        .collect();
    RankedList::new(&entries, 0).unwrap()
}

fn c9_baseline() -> Check {
    let cfg = BaselineConfig::default();
    let (records, features, labels) = separable_dataset(9);
    let plans = splits::make_cv_folds(&records, 5, 9).map_err(|e| e.to_string())?;
    let folds = train_baseline(&features, &labels, &plans, &cfg).map_err(|e| e.to_string())?;
    let pooled = pooled_list(&folds, &labels);
    ensure!(pooled.len() == 2000, "pooled {} predictions", pooled.len());
    let ef = metrics::enrichment_factor(&pooled, 100).map_err(|e| e.to_string())?;
    ensure!(ef >= 10.0, "EF100 {ef} on separable data");

    // label-shuffled: mean test logAUC over repeated shuffles
    let shuffles = 40;
    let null: Vec<f64> = (0..shuffles)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + s);
            let mut ys: Vec<bool> = (1..=2000u64).map(|c| labels[&c]).collect();
            ys.shuffle(&mut rng);
            let shuffled: HashMap<u64, bool> = (1..=2000u64).zip(ys).collect();
            let recs: Vec<CompoundRecord> = records
                .iter()
                .map(|r| {
                    CompoundRecord::new(r.cid, "C").with_label(if shuffled[&r.cid] { Label::Active } else { Label::Inactive })
                })
                .collect();
            let plans = splits::make_cv_folds(&recs, 5, s).unwrap();
            let folds = train_baseline(&features, &shuffled, &plans, &cfg).unwrap();
            metrics::log_auc(&pooled_list(&folds, &shuffled)).unwrap()
        })
        .collect();
    let mean = null.iter().sum::<f64>() / shuffles as f64;
    let sd = (null.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (shuffles - 1) as f64).sqrt();
    ensure!((mean - 0.0215).abs() <= 0.01, "label-shuffled logAUC mean {mean}");

    // analytic gradient against central differences
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let dim = 8;
    let xs: Vec<Vec<f64>> = (0..50).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let ys: Vec<bool> = (0..50).map(|_| rng.gen_bool(0.3)).collect();
    let rows: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
    let model = LinearModel {
        weights: (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        bias: rng.gen_range(-1.0..1.0),
    };
    let l2 = 0.01;
    let (_, gw, gb) = loss_and_gradient(&model, &rows, &ys, l2);
    let h = 1e-6;
    let loss_at = |m: &LinearModel| loss_and_gradient(m, &rows, &ys, l2).0;
    let mut num = Vec::new();
    for j in 0..=dim {
        let (mut up, mut down) = (model.clone(), model.clone());
        if j < dim {
            up.weights[j] += h;
            down.weights[j] -= h;
        } else {
            up.bias += h;
            down.bias -= h;
        }
        num.push((loss_at(&up) - loss_at(&down)) / (2.0 * h));
    }
    let ana: Vec<f64> = gw.iter().copied().chain([gb]).collect();
    let diff: f64 = ana.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = ana.iter().map(|a| a * a).sum::<f64>().sqrt() + num.iter().map(|a| a * a).sum::<f64>().sqrt();
    let rel = diff / norm;
    ensure!(rel < 1e-5, "gradient relative error {rel}");

    Ok(format!(
        "pooled out-of-fold EF100 {ef:.1} (max {:.0}); shuffled logAUC mean {mean:.4} (sd {sd:.4}, {shuffles} shuffles); gradient rel. error {rel:.1e}",
        2000.0 / 100.0
    ))
}

// ------------------------------------------------------------ performance

/// Coordinates by a seeded random walk from each atom's BFS parent, 1.5 A
/// steps; hydrogens are then added as explicit nodes.
fn with_walk_coordinates(m: &Molecule, seed: u64) -> Molecule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m.atom_count();
    let mut pos: Vec<Option<[f64; 3]>> = vec![None; n];
    for start in 0..n {
        if pos[start].is_some() {
            continue;
        }
        pos[start] = Some([10.0 * start as f64, 0.0, 0.0]);
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for nb in m.neighbors(a) {
                if pos[nb.atom].is_none() {
                    let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-6);
                    let p = pos[a].unwrap();
                    pos[nb.atom] = Some([p[0] + 1.5 * v[0] / len, p[1] + 1.5 * v[1] / len, p[2] + 1.5 * v[2] / len]);
                    queue.push_back(nb.atom);
                }
            }
        }
    }
    let atoms = m
        .atoms()
        .iter()
        .zip(pos)
        .map(|(a, p)| {
            let mut a = a.clone();
            a.coordinates = p;
            a
        })
        .collect();
    Molecule::new(atoms, m.bonds().to_vec()).unwrap().with_explicit_hydrogens()
}

fn fnv(hash: &mut u64, bytes: &[u8]) {
    for b in bytes {
        *hash ^= *b as u64;
        *hash = hash.wrapping_mul(0x100000001b3);
    }
}

struct PipelineRun {
    curated: usize,
    graphs: usize,
    descriptors: usize,
    failures: usize,
    digest: u64,
}

fn full_pipeline(records: Vec<CompoundRecord>) -> Result<PipelineRun, String> {
    let cfg = CurationConfig::default();
    let (kept, report) = curation::run_pipeline(records, &cfg).map_err(|e| e.to_string())?;
    let results: Vec<Result<(Vec<u8>, Vec<f64>), String>> = kept
        .par_iter()
        .map(|r| {
            let m = mol::aromatize(&mol::parse_smiles(&r.smiles).map_err(|e| e.to_string())?).with_cid(Some(r.cid));
            let props = native_properties(&m).map_err(|e| e.to_string())?;
            let g = featurize::encode_graph(&featurize::build_2d_graph(&m, &props));
            let m3 = with_walk_coordinates(&m, r.cid);
            let p3 = native_properties(&m3).map_err(|e| e.to_string())?;
            let d = descriptors::full_descriptor(&m3, &p3).map_err(|e| e.to_string())?;
            Ok((g, d.to_vec()))
        })
        .collect();
    let mut digest = 0xcbf29ce484222325u64;
    fnv(&mut digest, report.to_json().as_bytes());
    let (mut graphs, mut failures) = (0, 0);
    for (r, res) in kept.iter().zip(&results) {
        fnv(&mut digest, &r.cid.to_le_bytes());
        fnv(&mut digest, r.smiles.as_bytes());
        match res {
            Ok((g, d)) => {
                graphs += 1;
                fnv(&mut digest, g);
                for v in d {
                    fnv(&mut digest, &v.to_bits().to_le_bytes());
                }
            }
            Err(e) => {
                failures += 1;
                fnv(&mut digest, e.as_bytes());
            }
        }
    }
    Ok(PipelineRun {
        curated: kept.len(),
        graphs,
        descriptors: graphs,
        failures,
        digest,
    })
}

fn c10_pipeline() -> Check {
    let threads = rayon::current_num_threads();
    let t0 = Instant::now();
    let first = full_pipeline(random_records(100_000, 0.01, 10))?;
    let one_run = t0.elapsed();
    ensure!(one_run < Duration::from_secs(600), "one run took {:.0}s", one_run.as_secs_f64());
    let second = full_pipeline(random_records(100_000, 0.01, 10))?;
    ensure!(first.digest == second.digest, "outputs differ between runs");
    ensure!(first.failures * 100 < first.curated, "{} of {} molecules failed", first.failures, first.curated);
    Ok(format!(
        "100000 -> {} curated, {} graphs, {} descriptors, {} failures; one run {:.1}s on {threads} thread(s); digests equal",
        first.curated,
        first.graphs,
        first.descriptors,
        first.failures,
        one_run.as_secs_f64()
    ))
}
