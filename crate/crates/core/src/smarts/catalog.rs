//! Pattern catalogs: one `pattern<TAB>name` per line, `#` comments.

use std::path::Path;

use super::matcher::MatchTarget;
use super::{compile_with, CompileOptions, Pattern, SmartsError};
use crate::error::{ChemError, Result};
use crate::mol::Molecule;

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub pattern: Pattern,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPattern {
    pub line: usize,
    pub name: String,
    pub smarts: String,
    pub error: SmartsError,
}

/// Load-time audit of which catalog lines compiled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoverageReport {
    pub total: usize,
    pub compiled: usize,
    pub skipped: Vec<SkippedPattern>,
}

impl CoverageReport {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.compiled as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    coverage: CoverageReport,
}

impl Catalog {
    pub fn empty() -> Self {
        Catalog::default()
    }

    pub fn parse(text: &str, options: CompileOptions) -> Result<Catalog> {
        let mut catalog = Catalog::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(2, '\t');
            let smarts = parts.next().unwrap().trim().to_string();
            let name = parts
                .next()
                .map(|s| s.trim().to_string())
                .ok_or_else(|| {
                    ChemError::Invalid(format!("catalog line {} has no name column", i + 1))
                })?;
            catalog.coverage.total += 1;
            match compile_with(&smarts, options) {
                Ok(pattern) => {
                    catalog.coverage.compiled += 1;
                    catalog.entries.push(CatalogEntry { name, pattern });
                }
                Err(error) => {
                    log::warn!("skipping catalog pattern {name} (line {}): {error}", i + 1);
                    catalog.coverage.skipped.push(SkippedPattern {
                        line: i + 1,
                        name,
                        smarts,
                        error,
                    });
                }
            }
        }
        Ok(catalog)
    }

    pub fn load(path: &Path, options: CompileOptions) -> Result<Catalog> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ChemError::Invalid(format!("{}: {e}", path.display())))?;
        Catalog::parse(&text, options)
    }

    /// The PAINS A/B/C families shipped with the crate.
    pub fn pains() -> Catalog {
        Catalog::parse(PAINS_TEXT, CompileOptions::default()).expect("shipped catalog parses")
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn coverage(&self) -> &CoverageReport {
        &self.coverage
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Name of the first pattern (in file order) that matches.
    pub fn first_match(&self, mol: &Molecule) -> Option<&str> {
        let target = MatchTarget::new(mol);
        self.entries
            .iter()
            .find(|e| e.pattern.matches(&target))
            .map(|e| e.name.as_str())
    }
}

const PAINS_TEXT: &str = include_str!("../../data/pains.txt");
