//! Hierarchical screen labeling: primary, confirmatory and counter screens
//! combined by set expressions into final active and inactive sets.
//!
//! Expressions use the terms `active(AID)`, `inactive(AID)` and
//! `tested(AID)`, the operators `|` (or `union`), `&` (`intersect`) and
//! `-` (`subtract`), and parentheses. `&` binds tighter than `|` and `-`,
//! which associate left to right.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::records::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HierarchyError {
    #[error("expression syntax error at {position}: {reason}")]
    Syntax { position: usize, reason: String },
    #[error("expression references undeclared screen {0}")]
    UndeclaredScreen(u64),
    #[error("{} cids are both active and inactive: {}", .0.len(), preview(.0))]
    Overlap(Vec<u64>),
    #[error("outcome table {path}: {reason}")]
    Table { path: String, reason: String },
    #[error("hierarchy spec: {0}")]
    Spec(String),
}

fn preview(cids: &[u64]) -> String {
    let shown: Vec<String> = cids.iter().take(20).map(u64::to_string).collect();
    let more = if cids.len() > 20 { ", ..." } else { "" };
    format!("{}{more}", shown.join(", "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Active,
    Inactive,
    Inconclusive,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Active => "active",
            Outcome::Inactive => "inactive",
            Outcome::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(text: &str) -> Option<Outcome> {
        match text.trim().to_ascii_lowercase().as_str() {
            "active" | "2" => Some(Outcome::Active),
            "inactive" | "1" => Some(Outcome::Inactive),
            "inconclusive" | "unspecified" | "3" | "4" | "5" => Some(Outcome::Inconclusive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssayOutcome {
    pub outcome: Outcome,
    /// uM
    pub value: Option<f64>,
}

/// Normalized per-assay outcomes, CSV `cid,outcome,activity_value`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutcomeTable {
    pub rows: BTreeMap<u64, AssayOutcome>,
}

impl OutcomeTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn with_outcome(&self, o: Outcome) -> BTreeSet<u64> {
        self.rows
            .iter()
            .filter(|(_, r)| r.outcome == o)
            .map(|(&c, _)| c)
            .collect()
    }

    pub fn read<R: Read>(input: R) -> Result<Self, String> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut rows = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let line = i + 2;
            let cid: u64 = rec
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| format!("line {line}: bad cid"))?;
            let outcome = rec
                .get(1)
                .and_then(Outcome::parse)
                .ok_or_else(|| format!("line {line}: unknown outcome"))?;
            let value = match rec.get(2).map(str::trim) {
                None | Some("") => None,
                Some(s) => Some(s.parse::<f64>().map_err(|_| format!("line {line}: bad activity value"))?),
            };
            rows.insert(cid, AssayOutcome { outcome, value });
        }
        Ok(OutcomeTable { rows })
    }

    pub fn write<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cid", "outcome", "activity_value"])?;
        for (cid, r) in &self.rows {
            let v = r.value.map(|v| format!("{v:?}")).unwrap_or_default();
            w.write_record([cid.to_string().as_str(), r.outcome.name(), v.as_str()])?;
        }
        w.flush()
    }

    pub fn load(path: &Path) -> Result<Self, HierarchyError> {
        let err = |reason: String| HierarchyError::Table {
            path: path.display().to_string(),
            reason,
        };
        let f = std::fs::File::open(path).map_err(|e| err(e.to_string()))?;
        Self::read(std::io::BufReader::new(f)).map_err(err)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Primary,
    Confirmatory,
    Counter,
    Extra,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Screen {
    pub role: Role,
    pub outcomes: OutcomeTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Active(u64),
    Inactive(u64),
    Tested(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetExpr {
    Term(Term),
    Union(Box<SetExpr>, Box<SetExpr>),
    Intersect(Box<SetExpr>, Box<SetExpr>),
    Subtract(Box<SetExpr>, Box<SetExpr>),
}

impl SetExpr {
    pub fn parse(text: &str) -> Result<SetExpr, HierarchyError> {
        let mut p = ExprParser { text, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn screens(&self, out: &mut BTreeSet<u64>) {
        match self {
            SetExpr::Term(Term::Active(a) | Term::Inactive(a) | Term::Tested(a)) => {
                out.insert(*a);
            }
            SetExpr::Union(a, b) | SetExpr::Intersect(a, b) | SetExpr::Subtract(a, b) => {
                a.screens(out);
                b.screens(out);
            }
        }
    }

    fn eval(&self, screens: &BTreeMap<u64, Screen>) -> BTreeSet<u64> {
        match self {
            SetExpr::Term(t) => {
                let (aid, want) = match *t {
                    Term::Active(a) => (a, Some(Outcome::Active)),
                    Term::Inactive(a) => (a, Some(Outcome::Inactive)),
                    Term::Tested(a) => (a, None),
                };
                let table = &screens[&aid].outcomes;
                match want {
                    Some(o) => table.with_outcome(o),
                    None => table.rows.keys().copied().collect(),
                }
            }
            SetExpr::Union(a, b) => &a.eval(screens) | &b.eval(screens),
            SetExpr::Intersect(a, b) => &a.eval(screens) & &b.eval(screens),
            SetExpr::Subtract(a, b) => &a.eval(screens) - &b.eval(screens),
        }
    }
}

struct ExprParser<'a> {
    text: &'a str,
    pos: usize,
}

#[derive(PartialEq)]
enum Op {
    Union,
    Intersect,
    Subtract,
}

impl ExprParser<'_> {
    fn error(&self, reason: &str) -> HierarchyError {
        HierarchyError::Syntax {
            position: self.pos,
            reason: reason.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn op(&mut self) -> Option<Op> {
        for (tok, op) in [
            ("|", Op::Union),
            ("union", Op::Union),
            ("&", Op::Intersect),
            ("intersect", Op::Intersect),
            ("-", Op::Subtract),
            ("subtract", Op::Subtract),
        ] {
            let save = self.pos;
            if self.eat(tok) {
                return Some(op);
            }
            self.pos = save;
        }
        None
    }

    fn expr(&mut self) -> Result<SetExpr, HierarchyError> {
        let mut lhs = self.conj()?;
        loop {
            let save = self.pos;
            match self.op() {
                Some(Op::Union) => lhs = SetExpr::Union(Box::new(lhs), Box::new(self.conj()?)),
                Some(Op::Subtract) => lhs = SetExpr::Subtract(Box::new(lhs), Box::new(self.conj()?)),
                _ => {
                    self.pos = save;
                    return Ok(lhs);
                }
            }
        }
    }

    fn conj(&mut self) -> Result<SetExpr, HierarchyError> {
        let mut lhs = self.atom()?;
        loop {
            let save = self.pos;
            if self.op() == Some(Op::Intersect) {
                lhs = SetExpr::Intersect(Box::new(lhs), Box::new(self.atom()?));
            } else {
                self.pos = save;
                return Ok(lhs);
            }
        }
    }

    fn atom(&mut self) -> Result<SetExpr, HierarchyError> {
        if self.eat("(") {
            let e = self.expr()?;
            if !self.eat(")") {
                return Err(self.error("expected ')'"));
            }
            return Ok(e);
        }
        let make: fn(u64) -> Term = if self.eat("active") {
            Term::Active
        } else if self.eat("inactive") {
            Term::Inactive
        } else if self.eat("tested") {
            Term::Tested
        } else {
            return Err(self.error("expected active(AID), inactive(AID), tested(AID) or '('"));
        };
        if !self.eat("(") {
            return Err(self.error("expected '('"));
        }
        self.skip_ws();
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        let aid: u64 = self.rest()[..digits]
            .parse()
            .map_err(|_| self.error("expected assay id"))?;
        self.pos += digits;
        if !self.eat(")") {
            return Err(self.error("expected ')'"));
        }
        Ok(SetExpr::Term(make(aid)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenHierarchy {
    pub name: String,
    pub screens: BTreeMap<u64, Screen>,
    pub actives_expr: SetExpr,
    pub inactives_expr: SetExpr,
}

impl ScreenHierarchy {
    pub fn new(
        name: impl Into<String>,
        screens: BTreeMap<u64, Screen>,
        actives_expr: SetExpr,
        inactives_expr: SetExpr,
    ) -> Result<Self, HierarchyError> {
        let mut used = BTreeSet::new();
        actives_expr.screens(&mut used);
        inactives_expr.screens(&mut used);
        if let Some(&aid) = used.iter().find(|a| !screens.contains_key(a)) {
            return Err(HierarchyError::UndeclaredScreen(aid));
        }
        Ok(ScreenHierarchy {
            name: name.into(),
            screens,
            actives_expr,
            inactives_expr,
        })
    }

    /// Screen activity values for a cid, preferring the most downstream
    /// screen (confirmatory over primary) that reports one.
    pub fn activity_value(&self, cid: u64) -> Option<f64> {
        let rank = |r: Role| match r {
            Role::Confirmatory => 0,
            Role::Primary => 1,
            Role::Counter | Role::Extra => 2,
        };
        let mut screens: Vec<(&u64, &Screen)> = self.screens.iter().collect();
        screens.sort_by_key(|(aid, s)| (rank(s.role), **aid));
        screens.into_iter().find_map(|(_, s)| {
            s.outcomes
                .rows
                .get(&cid)
                .filter(|o| o.outcome == Outcome::Active)
                .and_then(|o| o.value)
        })
    }
}

/// Every cid in exactly one of the two evaluated sets.
pub fn evaluate_hierarchy(h: &ScreenHierarchy) -> Result<BTreeMap<u64, Label>, HierarchyError> {
    let actives = h.actives_expr.eval(&h.screens);
    let inactives = h.inactives_expr.eval(&h.screens);
    let overlap: Vec<u64> = actives.intersection(&inactives).copied().collect();
    if !overlap.is_empty() {
        return Err(HierarchyError::Overlap(overlap));
    }
    let mut out: BTreeMap<u64, Label> = actives.into_iter().map(|c| (c, Label::Active)).collect();
    out.extend(inactives.into_iter().map(|c| (c, Label::Inactive)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenSpec {
    pub aid: u64,
    pub role: Role,
    /// Outcome CSV, relative to the spec file. Defaults to `<aid>.csv`.
    #[serde(default)]
    pub table: Option<PathBuf>,
}

/// TOML form of a hierarchy:
///
/// ```toml
/// name = "AID1798"
/// actives = "active(1488) - active(1741)"
/// inactives = "inactive(626)"
///
/// [[screen]]
/// aid = 626
/// role = "primary"
/// table = "assay/626.csv"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySpec {
    pub name: String,
    pub actives: String,
    pub inactives: String,
    #[serde(rename = "screen")]
    pub screens: Vec<ScreenSpec>,
}

impl HierarchySpec {
    pub fn parse(text: &str) -> Result<Self, HierarchyError> {
        toml::from_str(text).map_err(|e| HierarchyError::Spec(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf), HierarchyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HierarchyError::Spec(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::parse(&text)?, base))
    }

    /// Builds the hierarchy, fetching each screen's table through `tables`.
    pub fn build_with(
        &self,
        mut tables: impl FnMut(&ScreenSpec) -> Result<OutcomeTable, HierarchyError>,
    ) -> Result<ScreenHierarchy, HierarchyError> {
        let actives = SetExpr::parse(&self.actives)?;
        let inactives = SetExpr::parse(&self.inactives)?;
        let mut screens = BTreeMap::new();
        for s in &self.screens {
            if screens.contains_key(&s.aid) {
                return Err(HierarchyError::Spec(format!("screen {} declared twice", s.aid)));
            }
            screens.insert(
                s.aid,
                Screen {
                    role: s.role,
                    outcomes: tables(s)?,
                },
            );
        }
        ScreenHierarchy::new(self.name.clone(), screens, actives, inactives)
    }

    /// Reads tables from files next to the spec.
    pub fn build_from_dir(&self, base: &Path) -> Result<ScreenHierarchy, HierarchyError> {
        self.build_with(|s| {
            let rel = s.table.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", s.aid)));
            OutcomeTable::load(&base.join(rel))
        })
    }
}

pub fn load_hierarchy(path: &Path) -> Result<ScreenHierarchy, HierarchyError> {
    let (spec, base) = HierarchySpec::load(path)?;
    spec.build_from_dir(&base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(u64, Outcome)]) -> OutcomeTable {
        OutcomeTable {
            rows: rows
                .iter()
                .map(|&(c, outcome)| (c, AssayOutcome { outcome, value: None }))
                .collect(),
        }
    }

    fn screen(role: Role, rows: &[(u64, Outcome)]) -> Screen {
        Screen {
            role,
            outcomes: table(rows),
        }
    }

    use Outcome::*;

    #[test]
    fn parses_expressions() {
        let e = SetExpr::parse("active(1) - active(2) & tested(3) | inactive(4)").unwrap();
        let t = |x| Box::new(SetExpr::Term(x));
        assert_eq!(
            e,
            SetExpr::Union(
                Box::new(SetExpr::Subtract(
                    t(Term::Active(1)),
                    Box::new(SetExpr::Intersect(t(Term::Active(2)), t(Term::Tested(3))))
                )),
                t(Term::Inactive(4))
            )
        );
        assert_eq!(
            SetExpr::parse("(active(1) union active(2)) subtract active(3)").unwrap(),
            SetExpr::parse("(active(1)|active(2))-active(3)").unwrap()
        );
        assert!(SetExpr::parse("active(1) -").is_err());
        assert!(SetExpr::parse("actve(1)").is_err());
        assert!(SetExpr::parse("active(1) active(2)").is_err());
    }

    #[test]
    fn identity_and_errors() {
        let screens: BTreeMap<u64, Screen> =
            [(5, screen(Role::Primary, &[(1, Active), (2, Inactive), (3, Inconclusive)]))].into();
        let h = ScreenHierarchy::new(
            "s",
            screens.clone(),
            SetExpr::parse("active(5)").unwrap(),
            SetExpr::parse("inactive(5)").unwrap(),
        )
        .unwrap();
        let labels = evaluate_hierarchy(&h).unwrap();
        assert_eq!(labels, [(1, Label::Active), (2, Label::Inactive)].into());

        let err = ScreenHierarchy::new("s", screens.clone(), SetExpr::parse("active(6)").unwrap(), SetExpr::parse("inactive(5)").unwrap());
        assert_eq!(err.unwrap_err(), HierarchyError::UndeclaredScreen(6));

        let h = ScreenHierarchy::new(
            "s",
            screens,
            SetExpr::parse("active(5) | inactive(5)").unwrap(),
            SetExpr::parse("inactive(5)").unwrap(),
        )
        .unwrap();
        assert_eq!(evaluate_hierarchy(&h).unwrap_err(), HierarchyError::Overlap(vec![2]));
    }

    #[test]
    fn spec_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut buf = Vec::new();
        table(&[(10, Active), (11, Inactive), (12, Active)]).write(&mut buf).unwrap();
        std::fs::write(dir.path().join("1.csv"), &buf).unwrap();
        let mut buf = Vec::new();
        table(&[(12, Active)]).write(&mut buf).unwrap();
        std::fs::write(dir.path().join("counter.csv"), &buf).unwrap();
        let spec = r#"
name = "toy"
actives = "active(1) - active(2)"
inactives = "inactive(1)"
[[screen]]
aid = 1
role = "primary"
[[screen]]
aid = 2
role = "counter"
table = "counter.csv"
"#;
        std::fs::write(dir.path().join("h.toml"), spec).unwrap();
        let h = load_hierarchy(&dir.path().join("h.toml")).unwrap();
        let labels = evaluate_hierarchy(&h).unwrap();
        assert_eq!(labels, [(10, Label::Active), (11, Label::Inactive)].into());
        assert!(HierarchySpec::parse("name = \"x\"\nbogus = 1").is_err());
    }
}
