use std::collections::BTreeMap;

use super::{AtomPrim, BondPrim, CompileOptions, Expr, Pattern, QueryBond, SmartsError};
use crate::elements;

type PResult<T> = Result<T, SmartsError>;

fn syntax(position: usize, reason: impl Into<String>) -> SmartsError {
    SmartsError::Syntax {
        position,
        reason: reason.into(),
    }
}

fn unsupported(position: usize, token: impl Into<String>) -> SmartsError {
    SmartsError::Unsupported {
        position,
        token: token.into(),
    }
}

pub(super) fn parse(text: &str, options: CompileOptions) -> PResult<Pattern> {
    parse_at_depth(text, 0, options, 0)
}

fn parse_at_depth(
    text: &str,
    offset: usize,
    options: CompileOptions,
    depth: usize,
) -> PResult<Pattern> {
    if text.trim().is_empty() {
        return Err(syntax(offset, "empty pattern"));
    }
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
        offset,
        options,
        depth,
        atoms: Vec::new(),
        bonds: Vec::new(),
    };
    p.run()?;
    Ok(Pattern::build(text, p.atoms, p.bonds))
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    offset: usize,
    options: CompileOptions,
    depth: usize,
    atoms: Vec<Expr<AtomPrim>>,
    bonds: Vec<QueryBond>,
}

fn default_bond() -> Expr<BondPrim> {
    Expr::Or(vec![
        Expr::Prim(BondPrim::Single),
        Expr::Prim(BondPrim::Aromatic),
    ])
}

fn is_bond_char(c: u8) -> bool {
    matches!(
        c,
        b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'/' | b'\\' | b'!' | b'&' | b',' | b';'
    )
}

impl<'a> Parser<'a> {
    fn at(&self) -> usize {
        self.offset + self.pos
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<u8> {
        self.s.get(self.pos + k).copied()
    }

    fn add_bond(&mut self, a: usize, b: usize, expr: Expr<BondPrim>) -> PResult<()> {
        if a == b {
            return Err(syntax(self.at(), "atom bonded to itself"));
        }
        if self
            .bonds
            .iter()
            .any(|q| (q.begin == a && q.end == b) || (q.begin == b && q.end == a))
        {
            return Err(syntax(self.at(), "duplicate bond"));
        }
        self.bonds.push(QueryBond {
            begin: a,
            end: b,
            expr,
        });
        Ok(())
    }

    fn run(&mut self) -> PResult<()> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<(usize, Expr<BondPrim>)> = None;
        let mut branches: Vec<Option<usize>> = Vec::new();
        let mut rings: BTreeMap<u32, (usize, Option<Expr<BondPrim>>)> = BTreeMap::new();
        while let Some(c) = self.peek() {
            let start = self.at();
            match c {
                b'(' => {
                    if prev.is_none() {
                        return Err(unsupported(start, "component-level grouping"));
                    }
                    if pending.is_some() {
                        return Err(syntax(start, "bond before branch"));
                    }
                    branches.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(syntax(start, "bond without a following atom"));
                    }
                    prev = branches
                        .pop()
                        .ok_or_else(|| syntax(start, "unbalanced ')'"))?;
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() || !branches.is_empty() {
                        return Err(syntax(start, "misplaced '.'"));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'>' => return Err(unsupported(start, ">")),
                b'0'..=b'9' | b'%' => {
                    let atom = prev.ok_or_else(|| syntax(start, "ring closure before any atom"))?;
                    let digit = self.ring_digit()?;
                    let here = pending.take().map(|(_, e)| e);
                    match rings.remove(&digit) {
                        Some((other, there)) => {
                            let expr = match (here, there) {
                                (Some(a), Some(b)) if a != b => {
                                    return Err(syntax(start, "conflicting ring-closure bonds"))
                                }
                                (Some(a), _) => a,
                                (None, Some(b)) => b,
                                (None, None) => default_bond(),
                            };
                            self.add_bond(other, atom, expr)?;
                        }
                        None => {
                            rings.insert(digit, (atom, here));
                        }
                    }
                }
                c if is_bond_char(c) => {
                    if prev.is_none() {
                        return Err(syntax(start, "bond without a preceding atom"));
                    }
                    if pending.is_some() {
                        return Err(syntax(start, "consecutive bonds"));
                    }
                    let from = self.pos;
                    while self.peek().is_some_and(is_bond_char) {
                        self.pos += 1;
                    }
                    let text = std::str::from_utf8(&self.s[from..self.pos]).unwrap();
                    let expr = parse_bond_expr(text, self.offset + from)?;
                    pending = Some((start, expr));
                }
                _ => {
                    let expr = self.atom()?;
                    let idx = self.atoms.len();
                    self.atoms.push(expr);
                    if let Some(p) = prev {
                        let e = pending.take().map(|(_, e)| e).unwrap_or_else(default_bond);
                        self.add_bond(p, idx, e)?;
                    } else if let Some((pos, _)) = pending {
                        return Err(syntax(pos, "bond without a preceding atom"));
                    }
                    prev = Some(idx);
                }
            }
        }
        if let Some((pos, _)) = pending {
            return Err(syntax(pos, "pattern ends with a bond"));
        }
        if !branches.is_empty() {
            return Err(syntax(self.at(), "unclosed branch"));
        }
        if let Some((&d, _)) = rings.iter().next() {
            return Err(syntax(self.at(), format!("unclosed ring bond {d}")));
        }
        if self.atoms.is_empty() {
            return Err(syntax(self.offset, "pattern has no atoms"));
        }
        Ok(())
    }

    fn ring_digit(&mut self) -> PResult<u32> {
        let start = self.at();
        if self.peek() == Some(b'%') {
            let d = (self.peek_at(1), self.peek_at(2));
            match d {
                (Some(a @ b'0'..=b'9'), Some(b @ b'0'..=b'9')) => {
                    self.pos += 3;
                    Ok(((a - b'0') * 10 + (b - b'0')) as u32)
                }
                _ => Err(syntax(start, "'%' must be followed by two digits")),
            }
        } else {
            let d = self.peek().unwrap() - b'0';
            self.pos += 1;
            Ok(d as u32)
        }
    }

    fn atom(&mut self) -> PResult<Expr<AtomPrim>> {
        let start = self.at();
        let c = self.peek().unwrap();
        if c == b'[' {
            return self.bracket_atom();
        }
        let two = self.peek_at(1);
        let (prim, len) = match (c, two) {
            (b'C', Some(b'l')) => (elem(17, Some(false)), 2),
            (b'B', Some(b'r')) => (elem(35, Some(false)), 2),
            (b'*', _) => (AtomPrim::Any, 1),
            (b'a', _) => (AtomPrim::Aromatic(true), 1),
            (b'A', _) => (AtomPrim::Aromatic(false), 1),
            (b'B', _) => (elem(5, Some(false)), 1),
            (b'C', _) => (elem(6, Some(false)), 1),
            (b'N', _) => (elem(7, Some(false)), 1),
            (b'O', _) => (elem(8, Some(false)), 1),
            (b'F', _) => (elem(9, Some(false)), 1),
            (b'P', _) => (elem(15, Some(false)), 1),
            (b'S', _) => (elem(16, Some(false)), 1),
            (b'I', _) => (elem(53, Some(false)), 1),
            (b'b', _) => (elem(5, Some(true)), 1),
            (b'c', _) => (elem(6, Some(true)), 1),
            (b'n', _) => (elem(7, Some(true)), 1),
            (b'o', _) => (elem(8, Some(true)), 1),
            (b'p', _) => (elem(15, Some(true)), 1),
            (b's', _) => (elem(16, Some(true)), 1),
            _ => {
                return Err(syntax(
                    start,
                    format!("unexpected character {:?}", c as char),
                ))
            }
        };
        self.pos += len;
        Ok(Expr::Prim(prim))
    }

    fn bracket_atom(&mut self) -> PResult<Expr<AtomPrim>> {
        let open = self.at();
        self.pos += 1;
        let body_start = self.pos;
        // find the matching ']' while skipping recursive sub-patterns
        let mut depth_paren = 0usize;
        let mut depth_bracket = 0usize;
        let mut end = None;
        let mut k = self.pos;
        while k < self.s.len() {
            match self.s[k] {
                b'(' => depth_paren += 1,
                b')' => depth_paren = depth_paren.saturating_sub(1),
                b'[' => depth_bracket += 1,
                b']' if depth_paren == 0 && depth_bracket == 0 => {
                    end = Some(k);
                    break;
                }
                b']' => depth_bracket = depth_bracket.saturating_sub(1),
                _ => {}
            }
            k += 1;
        }
        let end = end.ok_or_else(|| syntax(open, "unclosed '['"))?;
        if end == body_start {
            return Err(syntax(open, "empty bracket atom"));
        }
        let mut ap = AtomExprParser {
            s: &self.s[..end],
            pos: body_start,
            start: body_start,
            offset: self.offset,
            options: self.options,
            depth: self.depth,
        };
        let expr = ap.low()?;
        if ap.pos != end {
            return Err(syntax(
                self.offset + ap.pos,
                format!("unexpected {:?} in bracket atom", self.s[ap.pos] as char),
            ));
        }
        self.pos = end + 1;
        Ok(expr)
    }
}

fn elem(z: u8, aromatic: Option<bool>) -> AtomPrim {
    AtomPrim::Element { z, aromatic }
}

struct AtomExprParser<'a> {
    s: &'a [u8],
    pos: usize,
    start: usize,
    offset: usize,
    options: CompileOptions,
    depth: usize,
}

fn flatten<P>(mut v: Vec<Expr<P>>, and: bool) -> Expr<P> {
    if v.len() == 1 {
        v.pop().unwrap()
    } else if and {
        Expr::And(v)
    } else {
        Expr::Or(v)
    }
}

impl<'a> AtomExprParser<'a> {
    fn at(&self) -> usize {
        self.offset + self.pos
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<u8> {
        self.s.get(self.pos + k).copied()
    }

    fn low(&mut self) -> PResult<Expr<AtomPrim>> {
        let mut parts = vec![self.or()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            parts.push(self.or()?);
        }
        Ok(flatten(parts, true))
    }

    fn or(&mut self) -> PResult<Expr<AtomPrim>> {
        let mut parts = vec![self.high()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            parts.push(self.high()?);
        }
        Ok(flatten(parts, false))
    }

    fn high(&mut self) -> PResult<Expr<AtomPrim>> {
        let mut parts = vec![self.unary()?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    parts.push(self.unary()?);
                }
                Some(b';') | Some(b',') | None => break,
                Some(_) => parts.push(self.unary()?),
            }
        }
        Ok(flatten(parts, true))
    }

    fn unary(&mut self) -> PResult<Expr<AtomPrim>> {
        if self.peek() == Some(b'!') {
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.primitive()
    }

    fn number(&mut self) -> Option<u32> {
        let from = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if from == self.pos {
            None
        } else {
            std::str::from_utf8(&self.s[from..self.pos])
                .ok()?
                .parse()
                .ok()
        }
    }

    fn small(&mut self, what: &str) -> PResult<Option<u8>> {
        let at = self.at();
        match self.number() {
            None => Ok(None),
            Some(n) if n <= u8::MAX as u32 => Ok(Some(n as u8)),
            Some(_) => Err(syntax(at, format!("{what} out of range"))),
        }
    }

    /// `H` is the hydrogen element only as the first primitive of an atom
    /// (optionally after an isotope) followed by the end, a charge or a map.
    fn h_is_element(&self) -> bool {
        let before = &self.s[self.start..self.pos];
        let first = before.iter().all(|c| c.is_ascii_digit());
        first && matches!(self.peek_at(1), None | Some(b'+') | Some(b'-') | Some(b':'))
    }

    fn primitive(&mut self) -> PResult<Expr<AtomPrim>> {
        let start = self.at();
        let c = self
            .peek()
            .ok_or_else(|| syntax(start, "missing atom primitive"))?;
        let prim = match c {
            b'*' => {
                self.pos += 1;
                AtomPrim::Any
            }
            b'#' => {
                self.pos += 1;
                let z = self
                    .number()
                    .ok_or_else(|| syntax(start, "'#' needs an atomic number"))?;
                if z == 0 || z > 118 {
                    return Err(syntax(start, format!("atomic number {z} out of range")));
                }
                elem(z as u8, None)
            }
            b'0'..=b'9' => {
                let iso = self.number().unwrap();
                if iso > u16::MAX as u32 {
                    return Err(syntax(start, "isotope out of range"));
                }
                AtomPrim::Isotope(iso as u16)
            }
            b'+' | b'-' => {
                self.pos += 1;
                let sign: i32 = if c == b'+' { 1 } else { -1 };
                let mut mag = 1i32;
                if let Some(n) = self.number() {
                    mag = n as i32;
                } else {
                    while self.peek() == Some(c) {
                        self.pos += 1;
                        mag += 1;
                    }
                }
                if mag > 15 {
                    return Err(syntax(start, "charge out of range"));
                }
                AtomPrim::Charge((sign * mag) as i8)
            }
            b'@' => {
                // chirality is accepted but not matched
                while self.peek() == Some(b'@') {
                    self.pos += 1;
                }
                for tag in [&b"TH"[..], b"AL", b"SP", b"TB", b"OH"] {
                    if self.s[self.pos..].starts_with(tag) {
                        self.pos += 2;
                        self.number();
                        break;
                    }
                }
                if self.peek() == Some(b'?') {
                    self.pos += 1;
                }
                return Ok(Expr::Prim(AtomPrim::Any));
            }
            b':' => {
                self.pos += 1;
                if self.number().is_none() {
                    return Err(syntax(start, "atom map needs a number"));
                }
                return Ok(Expr::Prim(AtomPrim::Any));
            }
            b'$' => return self.recursive(),
            _ => return self.lettered(),
        };
        Ok(Expr::Prim(prim))
    }

    fn recursive(&mut self) -> PResult<Expr<AtomPrim>> {
        let start = self.at();
        if self.peek_at(1) != Some(b'(') {
            return Err(syntax(start, "'$' must be followed by '('"));
        }
        if self.depth + 1 > self.options.max_recursion_depth {
            return Err(unsupported(start, "$("));
        }
        let body = self.pos + 2;
        let mut depth = 1usize;
        let mut k = body;
        while k < self.s.len() {
            match self.s[k] {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                _ => {}
            }
            k += 1;
        }
        if depth != 0 {
            return Err(syntax(start, "unclosed recursive SMARTS"));
        }
        let text = std::str::from_utf8(&self.s[body..k])
            .map_err(|_| syntax(start, "invalid UTF-8"))?;
        let sub = parse_at_depth(text, self.offset + body, self.options, self.depth + 1)?;
        self.pos = k + 1;
        Ok(Expr::Prim(AtomPrim::Recursive(Box::new(sub))))
    }

    fn lettered(&mut self) -> PResult<Expr<AtomPrim>> {
        let start = self.at();
        let c = self.peek().unwrap();
        let next = self.peek_at(1);
        // two-letter element symbols take precedence
        if c.is_ascii_uppercase() {
            if let Some(n) = next.filter(|n| n.is_ascii_lowercase()) {
                let sym = [c, n];
                let sym = std::str::from_utf8(&sym).unwrap();
                if let Some(z) = elements::atomic_number(sym) {
                    self.pos += 2;
                    return Ok(Expr::Prim(elem(z, Some(false))));
                }
            }
        }
        if c.is_ascii_lowercase() {
            if let Some(n) = next.filter(|n| n.is_ascii_lowercase()) {
                let z = match [c, n] {
                    [b's', b'e'] => Some(34),
                    [b'a', b's'] => Some(33),
                    [b't', b'e'] => Some(52),
                    _ => None,
                };
                if let Some(z) = z {
                    self.pos += 2;
                    return Ok(Expr::Prim(elem(z, Some(true))));
                }
            }
        }
        self.pos += 1;
        let prim = match c {
            b'H' if self.h_is_element_at(start) => elem(1, None),
            b'H' => AtomPrim::TotalH(self.small("H count")?.unwrap_or(1)),
            b'h' => AtomPrim::ImplicitH(self.small("h count")?),
            b'D' => AtomPrim::Degree(self.small("degree")?.unwrap_or(1)),
            b'X' => AtomPrim::TotalDegree(self.small("connectivity")?.unwrap_or(1)),
            b'v' => AtomPrim::Valence(self.small("valence")?.unwrap_or(1)),
            b'R' => AtomPrim::RingCount(self.small("ring count")?),
            b'r' => AtomPrim::RingSize(self.small("ring size")?),
            b'x' => AtomPrim::RingConnectivity(self.small("ring connectivity")?),
            b'a' => AtomPrim::Aromatic(true),
            b'A' => AtomPrim::Aromatic(false),
            b'b' => elem(5, Some(true)),
            b'c' => elem(6, Some(true)),
            b'n' => elem(7, Some(true)),
            b'o' => elem(8, Some(true)),
            b'p' => elem(15, Some(true)),
            b's' => elem(16, Some(true)),
            c if c.is_ascii_uppercase() => {
                let sym = (c as char).to_string();
                match elements::atomic_number(&sym) {
                    Some(z) => elem(z, Some(false)),
                    None => return Err(unsupported(start, sym)),
                }
            }
            c => return Err(unsupported(start, (c as char).to_string())),
        };
        Ok(Expr::Prim(prim))
    }

    fn h_is_element_at(&mut self, start_abs: usize) -> bool {
        let saved = self.pos;
        self.pos = start_abs - self.offset;
        let r = self.h_is_element();
        self.pos = saved;
        r
    }
}

fn parse_bond_expr(text: &str, offset: usize) -> PResult<Expr<BondPrim>> {
    let mut p = BondExprParser {
        s: text.as_bytes(),
        pos: 0,
        offset,
    };
    let e = p.low()?;
    if p.pos != p.s.len() {
        return Err(syntax(offset + p.pos, "malformed bond expression"));
    }
    Ok(e)
}

struct BondExprParser<'a> {
    s: &'a [u8],
    pos: usize,
    offset: usize,
}

impl<'a> BondExprParser<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn low(&mut self) -> PResult<Expr<BondPrim>> {
        let mut parts = vec![self.or()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            parts.push(self.or()?);
        }
        Ok(flatten(parts, true))
    }

    fn or(&mut self) -> PResult<Expr<BondPrim>> {
        let mut parts = vec![self.high()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            parts.push(self.high()?);
        }
        Ok(flatten(parts, false))
    }

    fn high(&mut self) -> PResult<Expr<BondPrim>> {
        let mut parts = vec![self.unary()?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    parts.push(self.unary()?);
                }
                Some(b';') | Some(b',') | None => break,
                Some(_) => parts.push(self.unary()?),
            }
        }
        Ok(flatten(parts, true))
    }

    fn unary(&mut self) -> PResult<Expr<BondPrim>> {
        let at = self.offset + self.pos;
        let c = self
            .peek()
            .ok_or_else(|| syntax(at, "missing bond primitive"))?;
        self.pos += 1;
        let prim = match c {
            b'!' => return Ok(Expr::Not(Box::new(self.unary()?))),
            b'-' | b'/' | b'\\' => BondPrim::Single,
            b'=' => BondPrim::Double,
            b'#' => BondPrim::Triple,
            b':' => BondPrim::Aromatic,
            b'~' => BondPrim::Any,
            b'@' => BondPrim::Ring,
            c => return Err(syntax(at, format!("unexpected {:?} in bond", c as char))),
        };
        Ok(Expr::Prim(prim))
    }
}
