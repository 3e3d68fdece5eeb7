use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use screenkit::bench::{self, BenchReport};
use screenkit::curation::{self, CompoundRecord, Label};
use screenkit::descriptors;
use screenkit::featurize::{self, GraphKind, GraphTensor, HydrogenMode};
use screenkit::metrics::read_predictions;
use screenkit::mol::{self, Molecule};
use screenkit::physchem::{atom_properties, PropertyProvider, PropertyTable};
use screenkit::splits::{self, read_split_csv, Scheme, SplitMeta, SplitPlan};
use screenkit_pubchem::{AssayFetchSpec, Client, ClientConfig, HttpTransport};

use crate::{CliError, Context, CurateArgs, DescribeArgs, EvaluateArgs, FeaturizeArgs, FetchArgs, HierarchyArgs,
    ReportArgs, SplitArgs, TrainArgs};

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::new("io", format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

/// Flag value, else the config entry, else a usage error naming both.
fn pick(flag: &Option<PathBuf>, ctx: &Context, from_config: &Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    flag.clone()
        .or_else(|| ctx.config.path(from_config))
        .ok_or_else(|| CliError::new("usage", format!("no {what} given (flag or config)")))
}

fn load_records(path: &Path) -> Result<Vec<CompoundRecord>, CliError> {
    curation::read_records(open(path)?).map_err(|e| CliError::new("data", format!("{}: {e}", path.display())))
}

fn labels_of(records: &[CompoundRecord]) -> HashMap<u64, bool> {
    records
        .iter()
        .filter_map(|r| r.label.map(|l| (r.cid, l.is_active())))
        .collect()
}

fn property_provider(path: &Option<PathBuf>) -> Result<PropertyProvider, CliError> {
    match path {
        None => Ok(PropertyProvider::Native),
        Some(p) => PropertyTable::load(p)
            .map(PropertyProvider::File)
            .map_err(|e| CliError::new("data", format!("{}: {e}", p.display()))),
    }
}

fn write_failures(path: &Path, failures: &[(String, String)]) -> Result<(), CliError> {
    let mut f = create(path)?;
    writeln!(f, "id,reason").map_err(io_err(path))?;
    for (id, reason) in failures {
        writeln!(f, "{id},\"{}\"", reason.replace('"', "'")).map_err(io_err(path))?;
    }
    f.flush().map_err(io_err(path))
}

pub fn fetch(ctx: &Context, args: &FetchArgs) -> Result<(), CliError> {
    let mut cfg = ClientConfig::from_env();
    if let Some(c) = &args.cache {
        cfg.cache_root = c.clone();
    }
    if let Some(r) = args.rate {
        if !(r > 0.0) {
            return Err(CliError::new("usage", "--rate must be positive"));
        }
        cfg.requests_per_second = r;
    }
    let client = match &args.fixtures {
        Some(dir) => Client::offline(dir, cfg),
        None => Client::new(HttpTransport::new(std::time::Duration::from_secs(60)), cfg),
    };
    let net = |e: screenkit_pubchem::PubchemError| CliError::new("fetch", e.to_string());
    for &aid in &args.aids {
        let table = client.fetch_assay(&AssayFetchSpec::new(aid).map_err(net)?).map_err(net)?;
        let path = ctx.output(&format!("assay/{aid}.csv"));
        let mut f = create(&path)?;
        table.write(&mut f).map_err(io_err(&path))?;
        f.flush().map_err(io_err(&path))?;
        println!("aid {aid}: {} rows -> {}", table.len(), path.display());
    }
    if let Some(list) = &args.cids {
        let text = fs::read_to_string(list).map_err(io_err(list))?;
        let cids = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && *l != "cid")
            .map(|l| {
                l.parse::<u64>()
                    .map_err(|_| CliError::new("data", format!("{}: bad cid {l:?}", list.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ex = client.exchange_identifiers(&cids).map_err(net)?;
        let records: Vec<CompoundRecord> = ex
            .found
            .iter()
            .map(|(&cid, (smiles, inchi))| {
                let mut r = CompoundRecord::new(cid, smiles.clone());
                r.inchi = Some(inchi.clone());
                r
            })
            .collect();
        let path = ctx.output("compounds.csv");
        curation::write_records(create(&path)?, &records)
            .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
        let missing: String = ex.missing.iter().map(|c| format!("{c}\n")).collect();
        write_text(&ctx.output("missing_cids.txt"), &missing)?;
        println!("{} identifiers, {} missing", records.len(), ex.missing.len());
    }
    Ok(())
}

pub fn curate(ctx: &Context, args: &CurateArgs) -> Result<(), CliError> {
    let records_path = pick(&args.records, ctx, &ctx.config.data.records, "records")?;
    let records = load_records(&records_path)?;
    let mut settings = ctx.config.curation.clone();
    if settings.hierarchy.is_none() {
        settings.hierarchy = ctx.config.data.hierarchy.clone();
    }
    let cfg = settings
        .resolve(&ctx.config.base_dir)
        .map_err(|e| CliError::new("curation", e.to_string()))?;
    let (kept, report) =
        curation::run_pipeline(records, &cfg).map_err(|e| CliError::new("curation", e.to_string()))?;
    let path = ctx.output("curated.csv");
    curation::write_records(create(&path)?, &kept).map_err(|e| CliError::new("io", e.to_string()))?;
    write_text(&ctx.output("report.json"), &(report.to_json() + "\n"))?;
    let table = report.to_table();
    write_text(&ctx.output("report.txt"), &table)?;
    let qpath = ctx.output("expert_queue.csv");
    let mut q = create(&qpath)?;
    writeln!(q, "cid,step,reason").map_err(io_err(&qpath))?;
    for e in &report.expert_queue {
        writeln!(q, "{},{},\"{}\"", e.cid, e.step.name(), e.reason.replace('"', "'")).map_err(io_err(&qpath))?;
    }
    q.flush().map_err(io_err(&qpath))?;
    print!("{table}");
    Ok(())
}

pub fn hierarchy(ctx: &Context, args: &HierarchyArgs) -> Result<(), CliError> {
    let spec = pick(&args.spec, ctx, &ctx.config.data.hierarchy, "hierarchy spec")?;
    let h = curation::load_hierarchy(&spec).map_err(|e| CliError::new("hierarchy", e.to_string()))?;
    let labels = curation::evaluate_hierarchy(&h).map_err(|e| CliError::new("hierarchy", e.to_string()))?;
    let path = ctx.output("labels.csv");
    let mut f = create(&path)?;
    writeln!(f, "cid,label,activity_value").map_err(io_err(&path))?;
    let mut actives = 0;
    for (cid, label) in &labels {
        let name = match label {
            Label::Active => {
                actives += 1;
                "active"
            }
            Label::Inactive => "inactive",
        };
        let value = h.activity_value(*cid).map(|v| format!("{v:?}")).unwrap_or_default();
        writeln!(f, "{cid},{name},{value}").map_err(io_err(&path))?;
    }
    f.flush().map_err(io_err(&path))?;
    println!("{}: {} actives, {} inactives", h.name, actives, labels.len() - actives);
    Ok(())
}

fn parse_ratio(text: &str) -> Result<[u32; 3], CliError> {
    let bad = || CliError::new("usage", format!("ratio {text:?} is not train:valid:test"));
    let parts: Vec<u32> = text
        .split(':')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, c] if a + b + c > 0 => Ok([a, b, c]),
        _ => Err(bad()),
    }
}

fn write_plan(ctx: &Context, stem: &str, plan: &SplitPlan) -> Result<(), CliError> {
    let path = ctx.output(&format!("{stem}.csv"));
    let mut f = create(&path)?;
    plan.write_csv(&mut f).map_err(io_err(&path))?;
    f.flush().map_err(io_err(&path))?;
    write_text(&ctx.output(&format!("{stem}.json")), &(plan.metadata_json() + "\n"))?;
    let c = plan.counts();
    println!("{stem}: train {} valid {} test {}", c.train, c.valid, c.test);
    for w in &plan.warnings {
        log::warn!("{stem}: {w}");
    }
    Ok(())
}

pub fn split(ctx: &Context, args: &SplitArgs) -> Result<(), CliError> {
    let path = pick(&args.dataset, ctx, &ctx.config.data.records, "dataset")?;
    let records = load_records(&path)?;
    let sc = &ctx.config.split;
    let scheme = args.scheme.clone().unwrap_or_else(|| sc.scheme.clone());
    let err = |e: splits::SplitError| CliError::new("split", e.to_string());
    match scheme.as_str() {
        "cv" => {
            let k = args.k.unwrap_or(sc.k);
            let plans = splits::make_cv_folds(&records, k, ctx.seed).map_err(err)?;
            for (i, plan) in plans.iter().enumerate() {
                write_plan(ctx, &format!("fold{i}"), plan)?;
            }
        }
        "scaffold" => {
            let ratio = match &args.ratio {
                Some(r) => parse_ratio(r)?,
                None => sc.ratio,
            };
            let plan = splits::scaffold_split(&records, ratio, ctx.seed).map_err(err)?;
            write_plan(ctx, "split", &plan)?;
        }
        other => return Err(CliError::new("usage", format!("unknown split scheme {other:?}"))),
    }
    Ok(())
}

/// Plans from `cid,split` CSVs; scheme and seed come from the `.json`
/// sidecar when present.
fn load_plans(paths: &[PathBuf]) -> Result<Vec<SplitPlan>, CliError> {
    paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let assignments = read_split_csv(open(p)?).map_err(|e| CliError::new("data", format!("{}: {e}", p.display())))?;
            let sidecar = p.with_extension("json");
            let (scheme, seed) = if sidecar.is_file() {
                let text = fs::read_to_string(&sidecar).map_err(io_err(&sidecar))?;
                let meta: SplitMeta = serde_json::from_str(&text)
                    .map_err(|e| CliError::new("data", format!("{}: {e}", sidecar.display())))?;
                (meta.scheme, meta.seed)
            } else {
                (
                    Scheme::AdaptedCv {
                        k: paths.len(),
                        test_fold: i,
                    },
                    0,
                )
            };
            Ok(SplitPlan {
                scheme,
                seed,
                assignments,
                warnings: Vec::new(),
            })
        })
        .collect()
}

enum Input {
    Records(Vec<CompoundRecord>),
    Sdf(PathBuf),
}

/// Molecules keyed by cid, plus per-item failures. SMILES input is parsed
/// and aromatized; SDF input keeps its hydrogens and coordinates.
fn load_molecules(input: Input) -> Result<(Vec<(u64, Molecule)>, Vec<(String, String)>, bool), CliError> {
    let mut failures = Vec::new();
    let (mols, explicit_h) = match input {
        Input::Records(records) => {
            let parsed: Vec<_> = records
                .par_iter()
                .map(|r| {
                    mol::parse_smiles(&r.smiles)
                        .map(|m| (r.cid, mol::aromatize(&m).with_cid(Some(r.cid))))
                        .map_err(|e| (r.cid.to_string(), e.to_string()))
                })
                .collect();
            let mut ok = Vec::new();
            for p in parsed {
                match p {
                    Ok(m) => ok.push(m),
                    Err(f) => failures.push(f),
                }
            }
            (ok, false)
        }
        Input::Sdf(path) => {
            let (records, errors) = mol::parse_sdf(open(&path)?);
            for e in errors {
                failures.push((format!("block{}", e.block), e.to_string()));
            }
            let mut ok = Vec::new();
            for r in records {
                match r.molecule.source_cid {
                    Some(cid) => ok.push((cid, mol::aromatize(&r.molecule))),
                    None => failures.push((format!("line{}", r.line), "record has no cid".into())),
                }
            }
            let explicit = ok.iter().any(|(_, m)| m.atoms().iter().any(|a| a.is_hydrogen()));
            (ok, explicit)
        }
    };
    Ok((mols, failures, explicit_h))
}

pub fn featurize(ctx: &Context, args: &FeaturizeArgs) -> Result<(), CliError> {
    let kind = match args.kind.as_deref().unwrap_or(ctx.config.features.kind.as_str()) {
        "2d" => GraphKind::TwoD,
        "3d" => GraphKind::ThreeD,
        other => return Err(CliError::new("usage", format!("unknown graph kind {other:?}"))),
    };
    let input = match (&args.sdf, &args.dataset) {
        (Some(s), _) => Input::Sdf(s.clone()),
        (None, Some(d)) => Input::Records(load_records(d)?),
        (None, None) => match (ctx.config.path(&ctx.config.data.sdf), ctx.config.path(&ctx.config.data.records)) {
            (Some(s), _) => Input::Sdf(s),
            (None, Some(d)) => Input::Records(load_records(&d)?),
            _ => return Err(CliError::new("usage", "featurize needs --dataset or --sdf")),
        },
    };
    if kind == GraphKind::ThreeD && matches!(input, Input::Records(_)) {
        return Err(CliError::new("usage", "3D graphs need coordinates; pass --sdf"));
    }
    let provider = property_provider(&args.props.clone().or_else(|| ctx.config.path(&ctx.config.data.properties)))?;
    let (mols, mut failures, explicit) = load_molecules(input)?;
    let built: Vec<Result<(u64, GraphTensor), (String, String)>> = mols
        .par_iter()
        .map(|(cid, m)| {
            let props = atom_properties(m, &provider).map_err(|e| (cid.to_string(), e.to_string()))?;
            let g = match kind {
                GraphKind::TwoD => Ok(featurize::build_2d_graph(m, &props)),
                GraphKind::ThreeD => featurize::build_3d_graph(m, &props),
            };
            g.map(|g| (*cid, g)).map_err(|e| (cid.to_string(), e.to_string()))
        })
        .collect();
    let mut graphs = Vec::new();
    for b in built {
        match b {
            Ok(g) => graphs.push(g),
            Err(f) => failures.push(f),
        }
    }
    let hydrogens = if explicit { HydrogenMode::Explicit } else { HydrogenMode::Implicit };
    featurize::write_dataset(&ctx.output("graphs"), kind, hydrogens, &graphs)
        .map_err(|e| CliError::new("io", e.to_string()))?;
    write_failures(&ctx.output("featurize_errors.csv"), &failures)?;
    println!("{} graphs, {} failures", graphs.len(), failures.len());
    Ok(())
}

pub fn describe(ctx: &Context, args: &DescribeArgs) -> Result<(), CliError> {
    let sdf = pick(&args.sdf, ctx, &ctx.config.data.sdf, "SDF (descriptors need 3D coordinates)")?;
    let provider = property_provider(&args.props.clone().or_else(|| ctx.config.path(&ctx.config.data.properties)))?;
    let (mols, mut failures, _) = load_molecules(Input::Sdf(sdf))?;
    let computed: Vec<_> = mols
        .par_iter()
        .map(|(cid, m)| {
            atom_properties(m, &provider)
                .and_then(|p| descriptors::full_descriptor(m, &p))
                .map(|d| (*cid, d))
                .map_err(|e| (cid.to_string(), e.to_string()))
        })
        .collect();
    let mut rows = Vec::new();
    for c in computed {
        match c {
            Ok(r) => rows.push(r),
            Err(f) => failures.push(f),
        }
    }
    let path = ctx.output("descriptors.csv");
    descriptors::write_csv(create(&path)?, &rows).map_err(|e| CliError::new("io", e.to_string()))?;
    let lpath = ctx.output("layout.txt");
    let mut l = create(&lpath)?;
    descriptors::write_layout(&mut l).map_err(io_err(&lpath))?;
    l.flush().map_err(io_err(&lpath))?;
    write_failures(&ctx.output("describe_errors.csv"), &failures)?;
    println!("{} descriptors, {} failures", rows.len(), failures.len());
    Ok(())
}

pub fn train_baseline(ctx: &Context, args: &TrainArgs) -> Result<(), CliError> {
    let dpath = pick(&args.descriptors, ctx, &ctx.config.data.descriptors, "descriptors")?;
    let rows = descriptors::read_csv(open(&dpath)?).map_err(|e| CliError::new("data", format!("{}: {e}", dpath.display())))?;
    let features: HashMap<u64, Vec<f64>> = rows.into_iter().collect();
    let records = load_records(&pick(&args.dataset, ctx, &ctx.config.data.records, "dataset")?)?;
    let labels = labels_of(&records);
    let plans = load_plans(&args.splits)?;
    let mut cfg = ctx.config.baseline.clone();
    cfg.seed = ctx.seed;
    let folds = bench::train_baseline(&features, &labels, &plans, &cfg).map_err(|e| CliError::new("train", e.to_string()))?;
    let mut summary = BTreeMap::new();
    for f in &folds {
        let path = ctx.output(&format!("scores/fold{}.tsv", f.fold));
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        bench::write_scores(&path, &f.test).map_err(|e| CliError::new("io", e.to_string()))?;
        summary.insert(
            format!("fold{}", f.fold),
            serde_json::json!({
                "best_epoch": f.best_epoch,
                "epochs_run": f.epochs_run,
                "best_valid_log_auc": f.best_valid_log_auc,
                "model": f.model,
                "standardizer": f.standardizer,
            }),
        );
        println!(
            "fold {}: best epoch {} of {}, valid logAUC {:.4}",
            f.fold, f.best_epoch, f.epochs_run, f.best_valid_log_auc
        );
    }
    write_text(&ctx.output("baseline.json"), &(serde_json::to_string_pretty(&summary).unwrap() + "\n"))
}

pub fn evaluate(ctx: &Context, args: &EvaluateArgs) -> Result<(), CliError> {
    let records = load_records(&pick(&args.dataset, ctx, &ctx.config.data.records, "dataset")?)?;
    let labels = labels_of(&records);
    let plans = load_plans(&args.splits)?;
    let preds = args
        .preds
        .iter()
        .map(|p| read_predictions(open(p)?).map_err(|e| CliError::new("data", format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    let tie_seed = args.tie_seed.unwrap_or(ctx.config.metrics.tie_seed);
    let report = bench::evaluate_predictions(&preds, &plans, &labels, &ctx.version_tag, tie_seed)
        .map_err(|e| CliError::new("evaluate", e.to_string()))?;
    for f in &report.folds {
        if !f.extra.is_empty() {
            log::warn!("fold {}: {} scored cids are outside the test split", f.fold, f.extra.len());
        }
    }
    let table = report.to_table();
    write_text(&ctx.output("bench_report.json"), &(report.to_json() + "\n"))?;
    write_text(&ctx.output("bench_report.txt"), &table)?;
    print!("{table}");
    Ok(())
}

pub fn report(ctx: &Context, args: &ReportArgs) -> Result<(), CliError> {
    let mut loaded = Vec::new();
    for p in &args.inputs {
        let text = fs::read_to_string(p).map_err(io_err(p))?;
        let r: BenchReport =
            serde_json::from_str(&text).map_err(|e| CliError::new("data", format!("{}: {e}", p.display())))?;
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        loaded.push((name, r));
    }
    let mut table = String::new();
    for (name, r) in &loaded {
        table.push_str(&format!("== {name}\n"));
        table.push_str(&r.to_table());
    }
    let refs: Vec<(&str, &BenchReport)> = loaded.iter().map(|(n, r)| (n.as_str(), r)).collect();
    write_text(&ctx.output("summary.txt"), &table)?;
    write_text(&ctx.output("summary.svg"), &bench::report_svg(&refs))?;
    print!("{table}");
    Ok(())
}
