//! Early-recognition metrics over ranked prediction lists.

use std::collections::HashMap;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub const LOG_AUC_LO: f64 = 0.001;
pub const LOG_AUC_HI: f64 = 0.1;
pub const BEDROC_ALPHA: f64 = 20.0;
pub const TOP_K: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("no actives in the list")]
    NoActives,
    #[error("no inactives in the list")]
    NoInactives,
    #[error("cutoff k = {k} exceeds list size {n}")]
    CutoffTooLarge { k: usize, n: usize },
    #[error("empty list")]
    Empty,
    #[error("non-finite score for cid {0}")]
    NonFinite(u64),
    #[error("predictions without labels for {} cids: {}", .0.len(), preview(.0))]
    MissingLabels(Vec<u64>),
    #[error("prediction file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

fn preview(cids: &[u64]) -> String {
    let shown: Vec<String> = cids.iter().take(20).map(u64::to_string).collect();
    let more = if cids.len() > 20 { ", ..." } else { "" };
    format!("{}{more}", shown.join(", "))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub cid: u64,
    pub score: f64,
    pub active: bool,
}

/// Entries sorted by descending score. Equal scores are ordered by a seeded
/// shuffle, so rank-based metrics are deterministic for a given seed.
#[derive(Debug, Clone)]
pub struct RankedList {
    entries: Vec<Entry>,
    actives: usize,
}

impl RankedList {
    pub fn new(entries: &[Entry], tie_seed: u64) -> Result<Self, MetricError> {
        if entries.is_empty() {
            return Err(MetricError::Empty);
        }
        if let Some(e) = entries.iter().find(|e| !e.score.is_finite()) {
            return Err(MetricError::NonFinite(e.cid));
        }
        let mut sorted = entries.to_vec();
        sorted.shuffle(&mut ChaCha8Rng::seed_from_u64(tie_seed));
        // stable sort keeps the shuffled order inside tie groups
        sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
        let actives = sorted.iter().filter(|e| e.active).count();
        Ok(RankedList { entries: sorted, actives })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn actives(&self) -> usize {
        self.actives
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// 1-based ranks of the actives, ascending.
    pub fn active_ranks(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.active)
            .map(|(i, _)| i + 1)
            .collect()
    }

    fn top_k_actives(&self, k: usize) -> usize {
        self.entries.iter().take(k).filter(|e| e.active).count()
    }
}

/// ROC vertices (FPR, TPR) from a descending sweep; each group of equal
/// scores contributes one vertex, so ties become diagonal segments.
pub fn roc_points(list: &RankedList) -> Vec<(f64, f64)> {
    let n_pos = list.actives() as f64;
    let n_neg = (list.len() - list.actives()) as f64;
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let e = list.entries();
    let mut i = 0;
    while i < e.len() {
        let mut j = i;
        while j < e.len() && e[j].score == e[i].score {
            if e[j].active {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        let p = (fp as f64 / n_neg, tp as f64 / n_pos);
        // a vertex in the middle of a horizontal or vertical run adds
        // nothing to the curve and only round-off to the integral
        if let [.., a, b] = points[..] {
            if (a.1 == b.1 && b.1 == p.1) || (a.0 == b.0 && b.0 == p.0) {
                points.pop();
            }
        }
        points.push(p);
        i = j;
    }
    points
}

/// Area under TPR(FPR) against log10(FPR) over `[lo, hi]`, normalized by
/// log10(hi / lo). TPR is linear in FPR between ROC vertices and the
/// integral of each segment is taken in closed form, so TPR = FPR gives the
/// random-classifier value (hi - lo) / ln(hi / lo).
pub fn log_auc_range(list: &RankedList, lo: f64, hi: f64) -> Result<f64, MetricError> {
    if list.actives() == 0 {
        return Err(MetricError::NoActives);
    }
    if list.actives() == list.len() {
        return Err(MetricError::NoInactives);
    }
    let pts = roc_points(list);
    let mut area = 0.0;
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let (a, b) = (x0.max(lo), x1.min(hi));
        if b <= a {
            continue;
        }
        // TPR = c + m * FPR on this segment; x1 > x0 here
        let m = (y1 - y0) / (x1 - x0);
        let c = y0 - m * x0;
        area += c * (b / a).ln() + m * (b - a);
    }
    Ok(area / (hi / lo).ln())
}

pub fn log_auc(list: &RankedList) -> Result<f64, MetricError> {
    log_auc_range(list, LOG_AUC_LO, LOG_AUC_HI)
}

pub fn bedroc(list: &RankedList, alpha: f64) -> Result<f64, MetricError> {
    let n = list.actives() as f64;
    let big_n = list.len() as f64;
    if list.actives() == 0 {
        return Err(MetricError::NoActives);
    }
    if list.actives() == list.len() {
        return Err(MetricError::NoInactives);
    }
    let ra = n / big_n;
    let sum: f64 = list
        .active_ranks()
        .iter()
        .map(|&r| (-alpha * r as f64 / big_n).exp())
        .sum();
    let rie = (sum / n) / ((1.0 - (-alpha).exp()) / ((alpha / big_n).exp() - 1.0) / big_n);
    let rie_max = (1.0 - (-alpha * ra).exp()) / (ra * (1.0 - (-alpha).exp()));
    let rie_min = (1.0 - (alpha * ra).exp()) / (ra * (1.0 - alpha.exp()));
    Ok((rie - rie_min) / (rie_max - rie_min))
}

pub fn enrichment_factor(list: &RankedList, k: usize) -> Result<f64, MetricError> {
    if k == 0 || k > list.len() {
        return Err(MetricError::CutoffTooLarge { k, n: list.len() });
    }
    if list.actives() == 0 {
        return Err(MetricError::NoActives);
    }
    let hits = list.top_k_actives(k) as f64;
    Ok((hits / k as f64) / (list.actives() as f64 / list.len() as f64))
}

pub fn dcg(list: &RankedList, k: usize) -> f64 {
    list.entries()
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, e)| e.active)
        .map(|(i, _)| 1.0 / ((i + 2) as f64).log2())
        .sum()
}

/// Actives in the top `k`.
pub fn cumulative_gain(list: &RankedList, k: usize) -> usize {
    list.top_k_actives(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanSd { mean, sd: var.sqrt() }
    }
}

/// The headline metrics. Rank-based ones are averaged over `tie_shuffles`
/// seeded tie-breaking orders; logAUC does not depend on tie order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub n: usize,
    pub actives: usize,
    pub log_auc: f64,
    pub bedroc: MeanSd,
    pub ef100: MeanSd,
    pub dcg100: MeanSd,
    pub cg100: MeanSd,
}

pub fn evaluate(entries: &[Entry], tie_shuffles: usize, seed: u64) -> Result<MetricReport, MetricError> {
    let shuffles = tie_shuffles.max(1);
    let first = RankedList::new(entries, seed)?;
    let log_auc = log_auc(&first)?;
    let k = TOP_K.min(first.len());
    let (mut b, mut ef, mut d, mut cg) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for s in 0..shuffles {
        let list = if s == 0 {
            first.clone()
        } else {
            RankedList::new(entries, seed.wrapping_add(s as u64))?
        };
        b.push(bedroc(&list, BEDROC_ALPHA)?);
        ef.push(enrichment_factor(&list, k)?);
        d.push(dcg(&list, k));
        cg.push(cumulative_gain(&list, k) as f64);
    }
    Ok(MetricReport {
        n: first.len(),
        actives: first.actives(),
        log_auc,
        bedroc: MeanSd::of(&b),
        ef100: MeanSd::of(&ef),
        dcg100: MeanSd::of(&d),
        cg100: MeanSd::of(&cg),
    })
}

/// Reads `cid<TAB>score` lines; a non-numeric first line is taken as a header.
pub fn read_predictions<R: BufRead>(input: R) -> Result<Vec<(u64, f64)>, MetricError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| MetricError::Parse { line: i + 1, reason: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (c, s) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
        match (c.trim().parse::<u64>(), s.trim().parse::<f64>()) {
            (Ok(cid), Ok(score)) => out.push((cid, score)),
            _ if i == 0 => continue,
            _ => {
                return Err(MetricError::Parse {
                    line: i + 1,
                    reason: format!("expected cid<TAB>score, got {line:?}"),
                })
            }
        }
    }
    Ok(out)
}

/// Attaches labels by cid; every predicted cid must be labeled.
pub fn join_labels(
    predictions: &[(u64, f64)],
    labels: &HashMap<u64, bool>,
) -> Result<Vec<Entry>, MetricError> {
    let missing: Vec<u64> = predictions
        .iter()
        .filter(|(c, _)| !labels.contains_key(c))
        .map(|(c, _)| *c)
        .collect();
    if !missing.is_empty() {
        return Err(MetricError::MissingLabels(missing));
    }
    Ok(predictions
        .iter()
        .map(|&(cid, score)| Entry { cid, score, active: labels[&cid] })
        .collect())
}
