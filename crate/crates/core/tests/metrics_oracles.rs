use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use screenkit::metrics::*;

fn entries(scores: &[f64], labels: &[bool]) -> Vec<Entry> {
    scores
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (&score, &active))| Entry { cid: i as u64, score, active })
        .collect()
}

fn ranked(labels: &[bool]) -> RankedList {
    let scores: Vec<f64> = (0..labels.len()).map(|i| -(i as f64)).collect();
    RankedList::new(&entries(&scores, labels), 0).unwrap()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// exp(x) for rational x by its Taylor series, exact arithmetic; 150 terms
/// leave a remainder far below 1e-30 for |x| <= 20.
fn exp_rat(x: &BigRational) -> BigRational {
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for k in 1..150 {
        term = term * x / BigRational::from_integer(BigInt::from(k));
        sum += &term;
    }
    sum
}

#[test]
fn bedroc_matches_exact_formula_evaluation() {
    // N = 4, n = 1, active at rank 2, alpha = 20
    let alpha = rat(20, 1);
    let (n, big_n) = (rat(1, 1), rat(4, 1));
    let ra = &n / &big_n;
    let one = BigRational::one();
    let e = |x: BigRational| exp_rat(&x);
    let rie = (e(-(&alpha) * rat(2, 4)) / &n)
        / ((&one - e(-alpha.clone())) / (e(&alpha / &big_n) - &one) / &big_n);
    let rie_max = (&one - e(-(&alpha) * &ra)) / (&ra * (&one - e(-alpha.clone())));
    let rie_min = (&one - e(&alpha * &ra)) / (&ra * (&one - e(alpha.clone())));
    let want = ((&rie - &rie_min) / (&rie_max - &rie_min)).to_f64().unwrap();
    let got = bedroc(&ranked(&[false, true, false, false]), 20.0).unwrap();
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    assert!(!BigRational::is_zero(&rie));
}

/// Fine-grid trapezoid in log10(FPR) over a step-free ROC polyline.
fn log_auc_numeric(list: &RankedList) -> f64 {
    let pts = roc_points(list);
    let tpr_at = |x: f64| {
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x >= x0 && x <= x1 && x1 > x0 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        pts.iter().filter(|p| p.0 <= x).map(|p| p.1).fold(0.0, f64::max)
    };
    let steps = 200_000;
    let mut area = 0.0;
    for s in 0..steps {
        let u0 = -3.0 + 2.0 * s as f64 / steps as f64;
        let u1 = -3.0 + 2.0 * (s + 1) as f64 / steps as f64;
        area += 0.5 * (tpr_at(10f64.powf(u0)) + tpr_at(10f64.powf(u1))) * (u1 - u0);
    }
    area / 2.0
}

#[test]
fn log_auc_matches_numeric_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..5 {
        let n = 3000;
        let labels: Vec<bool> = (0..n).map(|i| i % 37 == 0).collect();
        // coarse scores force tie groups
        let scores: Vec<f64> = labels
            .iter()
            .map(|&a| {
                let base: f64 = rand::Rng::gen(&mut rng);
                ((base + if a { 0.4 } else { 0.0 }) * (10 + trial * 40) as f64).floor()
            })
            .collect();
        let l = RankedList::new(&entries(&scores, &labels), 1).unwrap();
        let exact = log_auc(&l).unwrap();
        let numeric = log_auc_numeric(&l);
        assert!((exact - numeric).abs() < 1e-6, "{exact} vs {numeric}");
    }
}

#[test]
fn random_ranking_log_auc_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut labels: Vec<bool> = (0..10_000).map(|i| i < 100).collect();
    let mut sum = 0.0;
    for _ in 0..100 {
        labels.shuffle(&mut rng);
        sum += log_auc(&ranked(&labels)).unwrap();
    }
    let mean = sum / 100.0;
    assert!((mean - 0.0215).abs() <= 0.005, "mean {mean}");
}

#[test]
fn enrichment_examples() {
    let mut labels = vec![false; 1000];
    for i in 0..10 {
        labels[i * 3] = true;
    }
    assert_eq!(enrichment_factor(&ranked(&labels), 100).unwrap(), 10.0);
    let mut late = vec![false; 1000];
    late[999] = true;
    assert_eq!(enrichment_factor(&ranked(&late), 100).unwrap(), 0.0);
    assert!(enrichment_factor(&ranked(&late), 1001).is_err());
}

fn label_vec() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 2..300)
        .prop_filter("needs both classes", |v| v.iter().any(|&b| b) && v.iter().any(|&b| !b))
}

proptest! {
    #[test]
    fn metrics_depend_only_on_rank(labels in label_vec(), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores: Vec<f64> = (0..labels.len()).map(|_| rand::Rng::gen_range(&mut rng, -5.0..5.0)).collect();
        let moved: Vec<f64> = scores.iter().map(|s| 3.0 * s.exp() + 1.0).collect();
        let a = RankedList::new(&entries(&scores, &labels), seed).unwrap();
        let b = RankedList::new(&entries(&moved, &labels), seed).unwrap();
        let k = labels.len().min(100);
        prop_assert_eq!(a.active_ranks(), b.active_ranks());
        prop_assert_eq!(log_auc(&a).unwrap(), log_auc(&b).unwrap());
        prop_assert_eq!(bedroc(&a, 20.0).unwrap(), bedroc(&b, 20.0).unwrap());
        prop_assert_eq!(enrichment_factor(&a, k).unwrap(), enrichment_factor(&b, k).unwrap());
        prop_assert_eq!(dcg(&a, k), dcg(&b, k));
    }

    #[test]
    fn promoting_an_active_never_hurts(labels in label_vec(), pick in 0usize..300) {
        let pos: Vec<usize> = (1..labels.len()).filter(|&i| labels[i] && !labels[i - 1]).collect();
        prop_assume!(!pos.is_empty());
        let i = pos[pick % pos.len()];
        let mut better = labels.clone();
        better.swap(i, i - 1);
        let (a, b) = (ranked(&labels), ranked(&better));
        let k = labels.len().min(100);
        prop_assert!(bedroc(&b, 20.0).unwrap() >= bedroc(&a, 20.0).unwrap() - 1e-12);
        prop_assert!(enrichment_factor(&b, k).unwrap() >= enrichment_factor(&a, k).unwrap());
        prop_assert!(dcg(&b, k) >= dcg(&a, k));
    }

    #[test]
    fn bounds(labels in label_vec()) {
        let l = ranked(&labels);
        let k = labels.len().min(100);
        let b = bedroc(&l, 20.0).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&b));
        let ef = enrichment_factor(&l, k).unwrap();
        let n = labels.iter().filter(|&&x| x).count() as f64;
        prop_assert!(ef >= 0.0 && ef <= labels.len() as f64 / n + 1e-9);
        let d = dcg(&l, k);
        let cg = cumulative_gain(&l, k) as f64;
        prop_assert!(d <= cg + 1e-12);
        prop_assert_eq!(d == cg, cg == 0.0 || (cg == 1.0 && labels[0]));
        let la = log_auc(&l).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&la));
    }
}
