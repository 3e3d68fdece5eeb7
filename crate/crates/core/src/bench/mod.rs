//! Benchmark harness: per-fold evaluation of prediction files and a small
//! linear baseline ranker.

mod baseline;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{self, Entry, MetricError, RankedList, BEDROC_ALPHA, TOP_K};
use crate::splits::{Split, SplitPlan};

pub use baseline::{
    loss_and_gradient, oversample_batches, train_baseline, BaselineConfig, BatchSampler, FoldScores, LinearModel,
    Standardizer,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("fold {fold}: {} test cids have no score: {}", .cids.len(), preview(.cids))]
    MissingScores { fold: usize, cids: Vec<u64> },
    #[error("fold {fold}: {source}")]
    Metric { fold: usize, source: MetricError },
    #[error("{0} prediction sets for {1} split plans")]
    FoldCount(usize, usize),
    #[error("cid {0} has no label")]
    Unlabeled(u64),
    #[error("cid {0} has no descriptor row")]
    MissingFeatures(u64),
    #[error("both classes are needed for oversampling")]
    SingleClass,
    #[error("fold {fold}: non-finite loss at epoch {epoch}; feature column {column} is the likely source")]
    NanLoss { fold: usize, epoch: usize, column: usize },
    #[error("fold {fold}: validation split needs at least one active and one inactive")]
    DegenerateValidation { fold: usize },
    #[error("{0}")]
    Io(String),
}

fn preview(cids: &[u64]) -> String {
    let shown: Vec<String> = cids.iter().take(10).map(u64::to_string).collect();
    let more = if cids.len() > 10 { ", ..." } else { "" };
    format!("{}{more}", shown.join(", "))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n: usize,
    pub actives: usize,
    pub log_auc: f64,
    pub bedroc: f64,
    pub ef100: f64,
    pub dcg100: f64,
    /// Scored cids outside the fold's test set; ignored.
    pub extra: Vec<u64>,
}

/// Mean and standard error (sample SD / sqrt(folds)); zero error for one fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub stderr: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stderr = if values.len() < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            var.sqrt() / n.sqrt()
        };
        Aggregate { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub version: String,
    pub split: String,
    pub tie_seed: u64,
    pub folds: Vec<FoldMetrics>,
    pub log_auc: Aggregate,
    pub bedroc: Aggregate,
    pub ef100: Aggregate,
    pub dcg100: Aggregate,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dataset {}  split {}", self.version, self.split);
        let _ = writeln!(s, "{:<8} {:>7} {:>7} {:>9} {:>9} {:>9} {:>9}", "fold", "n", "actives", "logAUC", "BEDROC", "EF100", "DCG100");
        for f in &self.folds {
            let _ = writeln!(
                s,
                "{:<8} {:>7} {:>7} {:>9.4} {:>9.4} {:>9.3} {:>9.4}",
                f.fold, f.n, f.actives, f.log_auc, f.bedroc, f.ef100, f.dcg100
            );
        }
        let row = |a: Aggregate| format!("{:.4}±{:.4}", a.mean, a.stderr);
        let _ = writeln!(
            s,
            "{:<24} {:>9} {:>9} {:>9} {:>9}",
            "mean±se",
            row(self.log_auc),
            row(self.bedroc),
            row(self.ef100),
            row(self.dcg100)
        );
        s
    }
}

/// Scores each plan's test split with its prediction set. Tie-broken
/// metrics use a single shuffle seeded by `tie_seed`.
pub fn evaluate_predictions(
    predictions: &[Vec<(u64, f64)>],
    plans: &[SplitPlan],
    labels: &HashMap<u64, bool>,
    version: &str,
    tie_seed: u64,
) -> Result<BenchReport, BenchError> {
    if predictions.len() != plans.len() {
        return Err(BenchError::FoldCount(predictions.len(), plans.len()));
    }
    let mut folds = Vec::new();
    for (fold, (preds, plan)) in predictions.iter().zip(plans).enumerate() {
        let test: BTreeSet<u64> = plan.members(Split::Test).into_iter().collect();
        let scores: HashMap<u64, f64> = preds.iter().copied().collect();
        let missing: Vec<u64> = test.iter().filter(|c| !scores.contains_key(c)).copied().collect();
        if !missing.is_empty() {
            return Err(BenchError::MissingScores { fold, cids: missing });
        }
        let mut extra: Vec<u64> = scores.keys().filter(|c| !test.contains(c)).copied().collect();
        extra.sort_unstable();
        let mut entries = Vec::with_capacity(test.len());
        for &cid in &test {
            let active = *labels.get(&cid).ok_or(BenchError::Unlabeled(cid))?;
            entries.push(Entry {
                cid,
                score: scores[&cid],
                active,
            });
        }
        let m = |source| BenchError::Metric { fold, source };
        let list = RankedList::new(&entries, tie_seed).map_err(m)?;
        let k = TOP_K.min(list.len());
        folds.push(FoldMetrics {
            fold,
            n: list.len(),
            actives: list.actives(),
            log_auc: metrics::log_auc(&list).map_err(m)?,
            bedroc: metrics::bedroc(&list, BEDROC_ALPHA).map_err(m)?,
            ef100: metrics::enrichment_factor(&list, k).map_err(m)?,
            dcg100: metrics::dcg(&list, k),
            extra,
        });
    }
    let agg = |f: fn(&FoldMetrics) -> f64| Aggregate::of(&folds.iter().map(f).collect::<Vec<_>>());
    Ok(BenchReport {
        version: version.to_string(),
        split: plans.first().map(split_name).unwrap_or_default(),
        tie_seed,
        log_auc: agg(|f| f.log_auc),
        bedroc: agg(|f| f.bedroc),
        ef100: agg(|f| f.ef100),
        dcg100: agg(|f| f.dcg100),
        folds,
    })
}

fn split_name(plan: &SplitPlan) -> String {
    match &plan.scheme {
        crate::splits::Scheme::AdaptedCv { k, .. } => format!("cv{k}-seed{}", plan.seed),
        crate::splits::Scheme::Scaffold { ratio } => {
            format!("scaffold{}:{}:{}-seed{}", ratio[0], ratio[1], ratio[2], plan.seed)
        }
    }
}

/// `cid<TAB>score` with a header line, the format `read_predictions` takes.
pub fn write_scores(path: &Path, scores: &[(u64, f64)]) -> Result<(), BenchError> {
    let io = |e: std::io::Error| BenchError::Io(format!("{}: {e}", path.display()));
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(f, "cid\tscore").map_err(io)?;
    for (cid, s) in scores {
        writeln!(f, "{cid}\t{s:?}").map_err(io)?;
    }
    f.flush().map_err(io)
}

/// Bar chart of fold-mean metrics with standard-error whiskers. Each metric
/// gets its own panel scaled to its largest mean + error.
pub fn report_svg(reports: &[(&str, &BenchReport)]) -> String {
    let metrics: [(&str, fn(&BenchReport) -> Aggregate); 4] = [
        ("logAUC", |r| r.log_auc),
        ("BEDROC", |r| r.bedroc),
        ("EF100", |r| r.ef100),
        ("DCG100", |r| r.dcg100),
    ];
    let (panel_w, panel_h, pad) = (220.0, 200.0, 30.0);
    let width = metrics.len() as f64 * (panel_w + pad) + pad;
    let height = panel_h + 3.0 * pad;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let n = reports.len().max(1) as f64;
    for (p, (name, get)) in metrics.iter().enumerate() {
        let x0 = pad + p as f64 * (panel_w + pad);
        let top = reports
            .iter()
            .map(|(_, r)| get(r).mean + get(r).stderr)
            .fold(0.0f64, f64::max)
            .max(1e-12);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{name}</text>"#, x0, pad - 10.0);
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.1}" y="{pad:.1}" width="{panel_w:.1}" height="{panel_h:.1}" fill="none" stroke="#999"/>"##
        );
        let bw = panel_w / n;
        for (i, (label, r)) in reports.iter().enumerate() {
            let a = get(r);
            let h = a.mean / top * panel_h;
            let bx = x0 + i as f64 * bw + bw * 0.15;
            let base = pad + panel_h;
            let _ = writeln!(
                s,
                r##"<rect x="{bx:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="#4a7ab5"/>"##,
                base - h,
                bw * 0.7
            );
            let cx = bx + bw * 0.35;
            let (hi, lo) = (base - (a.mean + a.stderr) / top * panel_h, base - (a.mean - a.stderr).max(0.0) / top * panel_h);
            let _ = writeln!(s, r#"<line x1="{cx:.1}" y1="{hi:.1}" x2="{cx:.1}" y2="{lo:.1}" stroke="black"/>"#);
            let _ = writeln!(
                s,
                r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
                base + 14.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curation::{CompoundRecord, Label};
    use crate::splits::make_cv_folds;

    fn dataset() -> (Vec<CompoundRecord>, HashMap<u64, bool>) {
        let recs: Vec<CompoundRecord> = (0..200u64)
            .map(|i| {
                let l = if i % 20 == 0 { Label::Active } else { Label::Inactive };
                CompoundRecord::new(i, "C").with_label(l)
            })
            .collect();
        let labels = recs.iter().map(|r| (r.cid, r.is_active())).collect();
        (recs, labels)
    }

    #[test]
    fn oracle_and_constant_scores() {
        let (recs, labels) = dataset();
        let plans = make_cv_folds(&recs, 5, 3).unwrap();
        let oracle: Vec<Vec<(u64, f64)>> = plans
            .iter()
            .map(|p| {
                p.members(Split::Test)
                    .into_iter()
                    .map(|c| (c, if labels[&c] { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        let r = evaluate_predictions(&oracle, &plans, &labels, "v1", 0).unwrap();
        for f in &r.folds {
            assert!((f.log_auc - 1.0).abs() < 1e-12);
            assert!((f.bedroc - 1.0).abs() < 1e-9);
        }
        let flat: Vec<Vec<(u64, f64)>> = plans
            .iter()
            .map(|p| p.members(Split::Test).into_iter().map(|c| (c, 0.0)).collect())
            .collect();
        let r = evaluate_predictions(&flat, &plans, &labels, "v1", 0).unwrap();
        assert!((r.log_auc.mean - 0.0215).abs() < 1e-4);
        assert_eq!(r.log_auc.stderr, 0.0);

        let mut short = oracle.clone();
        short[2].pop();
        assert!(matches!(
            evaluate_predictions(&short, &plans, &labels, "v1", 0),
            Err(BenchError::MissingScores { fold: 2, .. })
        ));
        assert!(r.to_table().contains("mean±se"));
        assert!(report_svg(&[("flat", &r)]).starts_with("<svg"));
    }

    #[test]
    fn aggregate_arithmetic() {
        let a = Aggregate::of(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(a.mean, 3.0);
        assert!((a.stderr - (2.5f64).sqrt() / 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(Aggregate::of(&[0.7]).stderr, 0.0);
    }
}
