//! PubChem client: bioassay outcome tables and CID to SMILES/InChI
//! exchange over PUG REST, with a local cache and an offline fixture mode.
//!
//! Cache layout under the cache root: `assay/<aid>.csv` holds normalized
//! outcome tables, `cid/<batch-hash>.csv` holds identifier batches and
//! `raw/` keeps payloads that failed to parse.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use thiserror::Error;

use screenkit::curation::{AssayOutcome, Outcome, OutcomeTable};

pub const PUG_REST: &str = "https://pubchem.ncbi.nlm.nih.gov/rest/pug";
pub const CACHE_ENV: &str = "SCREENKIT_CACHE";
pub const FIXTURE_ENV: &str = "SCREENKIT_FIXTURES";
pub const DEFAULT_RATE: f64 = 5.0;
pub const EXCHANGE_BATCH: usize = 100;

#[derive(Debug, Error)]
pub enum PubchemError {
    #[error("assay id must be positive")]
    BadAid,
    #[error("not found: {0}")]
    NotFound(String),
    #[error("request to {url} failed after {attempts} attempts: {reason}")]
    Http { url: String, attempts: u32, reason: String },
    #[error("malformed response for {what} ({reason}); raw payload kept at {}", raw.display())]
    Malformed { what: String, reason: String, raw: PathBuf },
    #[error("cache {}: {reason}", path.display())]
    Cache { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, PubchemError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: Vec<u8>,
}

/// Error a transport could not turn into a response (DNS, TLS, refused).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError(pub String);

pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> std::result::Result<Response, TransportError>;
}

/// Live HTTPS transport.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        HttpTransport {
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(60))
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> std::result::Result<Response, TransportError> {
        let read = |r: ureq::Response| {
            let status = r.status();
            let mut body = Vec::new();
            std::io::Read::read_to_end(&mut r.into_reader(), &mut body).map_err(|e| TransportError(e.to_string()))?;
            Ok(Response { status, body })
        };
        match self.agent.get(url).call() {
            Ok(r) => read(r),
            Err(ureq::Error::Status(_, r)) => read(r),
            Err(e) => Err(TransportError(e.to_string())),
        }
    }
}

/// Serves PUG REST paths from a fixture directory and never touches the
/// network: `assay/<aid>.csv` and `cid.csv` (`cid,smiles,inchi`).
pub struct FixtureTransport {
    dir: PathBuf,
}

impl FixtureTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureTransport { dir: dir.into() }
    }

    fn not_found() -> Response {
        Response {
            status: 404,
            body: b"Status: 404\nCode: PUGREST.NotFound\n".to_vec(),
        }
    }

    fn assay(&self, aid: &str) -> Response {
        match std::fs::read(self.dir.join("assay").join(format!("{aid}.csv"))) {
            Ok(body) => Response { status: 200, body },
            Err(_) => Self::not_found(),
        }
    }

    fn compounds(&self, list: &str) -> std::result::Result<Response, TransportError> {
        let wanted: BTreeSet<u64> = list.split(',').filter_map(|c| c.parse().ok()).collect();
        let text = std::fs::read_to_string(self.dir.join("cid.csv")).map_err(|e| TransportError(e.to_string()))?;
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut out = csv::WriterBuilder::new().from_writer(Vec::new());
        out.write_record(["CID", "IsomericSMILES", "InChI"]).unwrap();
        let mut hits = 0;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| TransportError(e.to_string()))?;
            if rec.get(0).and_then(|c| c.parse().ok()).is_some_and(|c: u64| wanted.contains(&c)) {
                out.write_record(&rec).unwrap();
                hits += 1;
            }
        }
        if hits == 0 {
            return Ok(Self::not_found());
        }
        Ok(Response {
            status: 200,
            body: out.into_inner().unwrap(),
        })
    }
}

impl Transport for FixtureTransport {
    fn get(&self, url: &str) -> std::result::Result<Response, TransportError> {
        let path = url.strip_prefix(PUG_REST).unwrap_or(url);
        let parts: Vec<&str> = path.trim_matches('/').split('/').collect();
        match parts.as_slice() {
            ["assay", "aid", aid, "CSV"] => Ok(self.assay(aid)),
            ["compound", "cid", list, "property", _, "CSV"] => self.compounds(list),
            _ => Ok(Self::not_found()),
        }
    }
}

/// Wraps a transport and counts requests.
pub struct CountingTransport<T> {
    pub inner: T,
    count: AtomicUsize,
}

impl<T> CountingTransport<T> {
    pub fn new(inner: T) -> Self {
        CountingTransport {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    pub fn count(&self) -> usize {
        self.count.load(Ordering::SeqCst)
    }
}

impl<T: Transport> Transport for CountingTransport<T> {
    fn get(&self, url: &str) -> std::result::Result<Response, TransportError> {
        self.count.fetch_add(1, Ordering::SeqCst);
        self.inner.get(url)
    }
}

impl<T: Transport + ?Sized> Transport for Arc<T> {
    fn get(&self, url: &str) -> std::result::Result<Response, TransportError> {
        (**self).get(url)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssayFetchSpec {
    pub aid: u64,
}

impl AssayFetchSpec {
    pub fn new(aid: u64) -> Result<Self> {
        if aid == 0 {
            return Err(PubchemError::BadAid);
        }
        Ok(AssayFetchSpec { aid })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Exchange {
    /// cid -> (isomeric SMILES, InChI)
    pub found: BTreeMap<u64, (String, String)>,
    pub missing: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub cache_root: PathBuf,
    pub requests_per_second: f64,
    pub retries: u32,
    pub backoff: Duration,
}

impl ClientConfig {
    pub fn new(cache_root: impl Into<PathBuf>) -> Self {
        ClientConfig {
            cache_root: cache_root.into(),
            requests_per_second: DEFAULT_RATE,
            retries: 3,
            backoff: Duration::from_millis(500),
        }
    }

    /// Cache root from `SCREENKIT_CACHE`, else `./cache`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| "cache".into()))
    }
}

pub struct Client {
    transport: Box<dyn Transport>,
    config: ClientConfig,
    last_request: Mutex<Option<Instant>>,
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |e: std::io::Error| PubchemError::Cache {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(err)?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().unwrap_or_default().to_string_lossy(),
        std::process::id()
    ));
    let mut f = std::fs::File::create(&tmp).map_err(err)?;
    f.write_all(bytes).map_err(err)?;
    f.sync_all().map_err(err)?;
    std::fs::rename(&tmp, path).map_err(err)
}

fn find_column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

/// Normalizes a PUG REST assay CSV (or an already normalized table).
/// Rows whose cid is not an integer (PubChem's RESULT_* preamble) are
/// skipped; an unrecognized outcome header or value is an error.
pub fn normalize_assay_csv(body: &[u8]) -> std::result::Result<OutcomeTable, String> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(body);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let cid_col = find_column(&headers, &["cid", "PUBCHEM_CID"]).ok_or("no cid column")?;
    let outcome_col = find_column(&headers, &["outcome", "PUBCHEM_ACTIVITY_OUTCOME", "activity_outcome"])
        .ok_or("no outcome column (known: outcome, PUBCHEM_ACTIVITY_OUTCOME, activity_outcome)")?;
    let value_col = find_column(&headers, &["activity_value", "Potency", "AC50", "IC50", "EC50"]);
    let mut table = OutcomeTable::default();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let Some(cid) = rec.get(cid_col).and_then(|c| c.trim().parse::<u64>().ok()) else {
            continue;
        };
        let raw = rec.get(outcome_col).unwrap_or("");
        let outcome = Outcome::parse(raw).ok_or_else(|| format!("row {}: unknown outcome {raw:?}", i + 2))?;
        let value = value_col
            .and_then(|c| rec.get(c))
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|v| *v > 0.0);
        table.rows.insert(cid, AssayOutcome { outcome, value });
    }
    Ok(table)
}

fn parse_exchange(body: &[u8]) -> std::result::Result<BTreeMap<u64, (String, String)>, String> {
    let mut rdr = csv::Reader::from_reader(body);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let cid = find_column(&headers, &["CID", "cid"]).ok_or("no CID column")?;
    let smi = find_column(&headers, &["IsomericSMILES", "SMILES", "smiles"]).ok_or("no SMILES column")?;
    let inchi = find_column(&headers, &["InChI", "inchi"]).ok_or("no InChI column")?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let c: u64 = rec.get(cid).unwrap_or("").parse().map_err(|_| "bad CID".to_string())?;
        out.insert(c, (rec.get(smi).unwrap_or("").to_string(), rec.get(inchi).unwrap_or("").to_string()));
    }
    Ok(out)
}

fn batch_hash(cids: &[u64]) -> String {
    let text: Vec<String> = cids.iter().map(u64::to_string).collect();
    hex::encode(&Sha256::digest(text.join(",").as_bytes())[..8])
}

impl Client {
    pub fn new(transport: impl Transport + 'static, config: ClientConfig) -> Self {
        Client {
            transport: Box::new(transport),
            config,
            last_request: Mutex::new(None),
        }
    }

    /// Fixture-backed client; no network access is possible through it.
    pub fn offline(fixture_dir: impl Into<PathBuf>, config: ClientConfig) -> Self {
        Self::new(FixtureTransport::new(fixture_dir), config)
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    fn throttle(&self) {
        if self.config.requests_per_second <= 0.0 {
            return;
        }
        let gap = Duration::from_secs_f64(1.0 / self.config.requests_per_second);
        let mut last = self.last_request.lock().unwrap();
        if let Some(t) = *last {
            let since = t.elapsed();
            if since < gap {
                std::thread::sleep(gap - since);
            }
        }
        *last = Some(Instant::now());
    }

    /// GET with rate limiting and retries on transport errors and 5xx/429.
    /// `Ok(None)` is a 404.
    fn get(&self, url: &str) -> Result<Option<Vec<u8>>> {
        let attempts = self.config.retries + 1;
        let mut reason = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.config.backoff * 2u32.pow(attempt - 1));
            }
            self.throttle();
            match self.transport.get(url) {
                Ok(r) if r.status == 200 => return Ok(Some(r.body)),
                Ok(r) if r.status == 404 => return Ok(None),
                Ok(r) if r.status == 429 || r.status >= 500 => reason = format!("HTTP {}", r.status),
                Ok(r) => {
                    return Err(PubchemError::Http {
                        url: url.into(),
                        attempts: attempt + 1,
                        reason: format!("HTTP {}", r.status),
                    })
                }
                Err(e) => reason = e.0,
            }
            log::warn!("{url}: {reason} (attempt {})", attempt + 1);
        }
        Err(PubchemError::Http {
            url: url.into(),
            attempts,
            reason,
        })
    }

    pub fn assay_cache_path(&self, aid: u64) -> PathBuf {
        self.config.cache_root.join("assay").join(format!("{aid}.csv"))
    }

    fn keep_raw(&self, name: &str, body: &[u8]) -> PathBuf {
        let p = self.config.cache_root.join("raw").join(name);
        if let Err(e) = atomic_write(&p, body) {
            log::warn!("could not keep raw payload: {e}");
        }
        p
    }

    /// Outcome table for an assay; served from cache when present.
    pub fn fetch_assay(&self, spec: &AssayFetchSpec) -> Result<OutcomeTable> {
        if spec.aid == 0 {
            return Err(PubchemError::BadAid);
        }
        let path = self.assay_cache_path(spec.aid);
        if path.is_file() {
            return OutcomeTable::load(&path).map_err(|e| PubchemError::Cache {
                path: path.clone(),
                reason: e.to_string(),
            });
        }
        let url = format!("{PUG_REST}/assay/aid/{}/CSV", spec.aid);
        let body = self
            .get(&url)?
            .ok_or_else(|| PubchemError::NotFound(format!("assay {}", spec.aid)))?;
        let table = normalize_assay_csv(&body).map_err(|reason| PubchemError::Malformed {
            what: format!("assay {}", spec.aid),
            reason,
            raw: self.keep_raw(&format!("assay-{}.csv", spec.aid), &body),
        })?;
        let mut bytes = Vec::new();
        table.write(&mut bytes).expect("in-memory write");
        atomic_write(&path, &bytes)?;
        Ok(table)
    }

    /// Isomeric SMILES and InChI for each cid, in batches; unknown cids
    /// are listed in `missing`.
    pub fn exchange_identifiers(&self, cids: &[u64]) -> Result<Exchange> {
        let unique: Vec<u64> = cids.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let mut out = Exchange::default();
        for batch in unique.chunks(EXCHANGE_BATCH) {
            let path = self
                .config
                .cache_root
                .join("cid")
                .join(format!("{}.csv", batch_hash(batch)));
            let cached = path.is_file();
            let body = if cached {
                std::fs::read(&path).map_err(|e| PubchemError::Cache {
                    path: path.clone(),
                    reason: e.to_string(),
                })?
            } else {
                let list: Vec<String> = batch.iter().map(u64::to_string).collect();
                let url = format!("{PUG_REST}/compound/cid/{}/property/IsomericSMILES,InChI/CSV", list.join(","));
                self.get(&url)?.unwrap_or_else(|| b"CID,IsomericSMILES,InChI\n".to_vec())
            };
            let found = parse_exchange(&body).map_err(|reason| PubchemError::Malformed {
                what: "identifier exchange".into(),
                reason,
                raw: if cached {
                    path.clone()
                } else {
                    self.keep_raw(&format!("cid-{}.csv", batch_hash(batch)), &body)
                },
            })?;
            if !cached {
                atomic_write(&path, &body)?;
            }
            for &c in batch {
                match found.get(&c) {
                    Some(v) => {
                        out.found.insert(c, v.clone());
                    }
                    None => out.missing.push(c),
                }
            }
        }
        Ok(out)
    }
}
