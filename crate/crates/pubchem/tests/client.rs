use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use screenkit::curation::{Outcome, OutcomeTable};
use screenkit_pubchem::*;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/pubchem")
}

fn fast(cache: &std::path::Path) -> ClientConfig {
    ClientConfig {
        requests_per_second: 0.0,
        backoff: Duration::from_millis(1),
        ..ClientConfig::new(cache)
    }
}

#[test]
fn fixture_assay_and_cache_hit() {
    let cache = tempfile::tempdir().unwrap();
    let transport = Arc::new(CountingTransport::new(FixtureTransport::new(fixtures())));
    let client = Client::new(transport.clone(), fast(cache.path()));
    let spec = AssayFetchSpec::new(626).unwrap();
    let table = client.fetch_assay(&spec).unwrap();
    assert_eq!(table.len(), 63_676);
    assert_eq!(table.with_outcome(Outcome::Active).len(), 1_665);
    assert_eq!(transport.count(), 1);

    let first_bytes = std::fs::read(client.assay_cache_path(626)).unwrap();
    let again = client.fetch_assay(&spec).unwrap();
    assert_eq!(transport.count(), 1);
    assert_eq!(again, table);
    let mut rewritten = Vec::new();
    again.write(&mut rewritten).unwrap();
    assert_eq!(rewritten, first_bytes);

    assert!(matches!(
        client.fetch_assay(&AssayFetchSpec::new(999_999).unwrap()),
        Err(PubchemError::NotFound(_))
    ));
    assert!(AssayFetchSpec::new(0).is_err());
}

#[test]
fn identifier_exchange() {
    let cache = tempfile::tempdir().unwrap();
    let client = Client::offline(fixtures(), fast(cache.path()));
    let ex = client.exchange_identifiers(&[2244, 2519, 1983]).unwrap();
    assert_eq!(ex.found.len(), 3);
    assert!(ex.missing.is_empty());
    assert!(ex.found[&2244].1.starts_with("InChI=1S/C9H8O4"));

    let ex = client.exchange_identifiers(&[702, 3672, 123_456_789]).unwrap();
    assert_eq!(ex.found.len(), 2);
    assert_eq!(ex.missing, vec![123_456_789]);

    assert_eq!(client.exchange_identifiers(&[]).unwrap(), Exchange::default());
}

struct Flaky {
    failures: usize,
    calls: AtomicUsize,
    body: &'static str,
}

impl Transport for Flaky {
    fn get(&self, _url: &str) -> std::result::Result<Response, TransportError> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        if n < self.failures {
            Ok(Response { status: 503, body: Vec::new() })
        } else {
            Ok(Response { status: 200, body: self.body.as_bytes().to_vec() })
        }
    }
}

const RAW: &str = "PUBCHEM_RESULT_TAG,PUBCHEM_SID,PUBCHEM_CID,PUBCHEM_ACTIVITY_OUTCOME,PUBCHEM_ACTIVITY_SCORE,Potency\n\
RESULT_TYPE,,,,INTEGER,FLOAT\n\
1,100,11,Active,80,2.5\n\
2,101,12,Inactive,0,\n\
3,102,13,Inconclusive,20,\n";

#[test]
fn retries_then_normalizes_raw_csv() {
    let cache = tempfile::tempdir().unwrap();
    let flaky = Arc::new(Flaky { failures: 2, calls: AtomicUsize::new(0), body: RAW });
    let client = Client::new(flaky.clone(), fast(cache.path()));
    let t = client.fetch_assay(&AssayFetchSpec::new(5).unwrap()).unwrap();
    assert_eq!(flaky.calls.load(Ordering::SeqCst), 3);
    assert_eq!(t.len(), 3);
    assert_eq!(t.rows[&11].value, Some(2.5));
    assert_eq!(t.rows[&13].outcome, Outcome::Inconclusive);

    let dead = Arc::new(Flaky { failures: 100, calls: AtomicUsize::new(0), body: RAW });
    let client = Client::new(dead.clone(), fast(cache.path()));
    assert!(matches!(
        client.fetch_assay(&AssayFetchSpec::new(6).unwrap()),
        Err(PubchemError::Http { attempts: 4, .. })
    ));
}

#[test]
fn malformed_payload_is_kept() {
    let cache = tempfile::tempdir().unwrap();
    let bad = Flaky { failures: 0, calls: AtomicUsize::new(0), body: "PUBCHEM_CID,Result\n1,yes\n" };
    let client = Client::new(bad, fast(cache.path()));
    match client.fetch_assay(&AssayFetchSpec::new(7).unwrap()) {
        Err(PubchemError::Malformed { raw, .. }) => {
            assert_eq!(std::fs::read_to_string(raw).unwrap(), "PUBCHEM_CID,Result\n1,yes\n")
        }
        other => panic!("{other:?}"),
    }
    assert!(!client.assay_cache_path(7).exists());
}

#[test]
fn rate_limit_spaces_requests() {
    let cache = tempfile::tempdir().unwrap();
    let cfg = ClientConfig {
        requests_per_second: 20.0,
        ..fast(cache.path())
    };
    let client = Client::new(Flaky { failures: 0, calls: AtomicUsize::new(0), body: RAW }, cfg);
    let start = std::time::Instant::now();
    for aid in 1..=4 {
        client.fetch_assay(&AssayFetchSpec::new(aid).unwrap()).unwrap();
    }
    assert!(start.elapsed() >= Duration::from_millis(150));
}

#[test]
fn live_assay_fetch() {
    if std::env::var("SCREENKIT_LIVE_TESTS").is_err() {
        return;
    }
    let cache = tempfile::tempdir().unwrap();
    let client = Client::new(HttpTransport::default(), ClientConfig::new(cache.path()));
    let t: OutcomeTable = client.fetch_assay(&AssayFetchSpec::new(1741).unwrap()).unwrap();
    assert!(!t.is_empty());
}
