//! SMARTS subset: compilation, substructure matching and pattern catalogs.
//!
//! Supported atom primitives: `*`, `a`, `A`, element symbols (aliphatic,
//! aromatic, `#n`), isotope, charge, `H`, `h`, `D`, `X`, `v`, `R`, `r`, `x`,
//! chirality (ignored), atom maps (ignored) and recursive `$(...)` up to a
//! configurable depth. Bond primitives: `-`, `=`, `#`, `:`, `~`, `@`, `/`, `\`.
//! Logical operators `!`, `&`, `,`, `;` work in both atom and bond expressions.

mod catalog;
mod matcher;
mod parse;

pub use catalog::{Catalog, CatalogEntry, CoverageReport, SkippedPattern};
pub use matcher::{find_match, has_match, MatchTarget};

use crate::mol::Molecule;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmartsError {
    #[error("SMARTS syntax error at {position}: {reason}")]
    Syntax { position: usize, reason: String },
    #[error("unsupported SMARTS feature {token:?} at {position}")]
    Unsupported { position: usize, token: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    /// Maximum nesting of `$(...)`; 0 disables recursive SMARTS.
    pub max_recursion_depth: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            max_recursion_depth: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<P> {
    Prim(P),
    Not(Box<Expr<P>>),
    And(Vec<Expr<P>>),
    Or(Vec<Expr<P>>),
}

impl<P> Expr<P> {
    pub fn eval(&self, test: &mut impl FnMut(&P) -> bool) -> bool {
        match self {
            Expr::Prim(p) => test(p),
            Expr::Not(e) => !e.eval(test),
            Expr::And(v) => v.iter().all(|e| e.eval(test)),
            Expr::Or(v) => v.iter().any(|e| e.eval(test)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AtomPrim {
    Any,
    /// `a` (true) or `A` (false)
    Aromatic(bool),
    Element { z: u8, aromatic: Option<bool> },
    Isotope(u16),
    Charge(i8),
    TotalH(u8),
    /// `h` without a count means at least one
    ImplicitH(Option<u8>),
    Degree(u8),
    TotalDegree(u8),
    Valence(u8),
    /// number of smallest rings containing the atom; `None` = any ring
    RingCount(Option<u8>),
    /// `r0` = not in a ring, `r` = in some ring
    RingSize(Option<u8>),
    RingConnectivity(Option<u8>),
    Recursive(Box<Pattern>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondPrim {
    Single,
    Double,
    Triple,
    Aromatic,
    Ring,
    Any,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryBond {
    pub begin: usize,
    pub end: usize,
    pub expr: Expr<BondPrim>,
}

/// Compiled pattern. Immutable and shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    text: String,
    atoms: Vec<Expr<AtomPrim>>,
    bonds: Vec<QueryBond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    /// search order: BFS per component
    order: Vec<usize>,
    /// already-placed neighbor used to generate candidates
    anchor: Vec<Option<usize>>,
}

impl Pattern {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn atoms(&self) -> &[Expr<AtomPrim>] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[QueryBond] {
        &self.bonds
    }

    pub(crate) fn neighbors(&self, q: usize) -> &[(usize, usize)] {
        &self.adjacency[q]
    }

    fn build(text: &str, atoms: Vec<Expr<AtomPrim>>, bonds: Vec<QueryBond>) -> Pattern {
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        for (bi, b) in bonds.iter().enumerate() {
            adjacency[b.begin].push((b.end, bi));
            adjacency[b.end].push((b.begin, bi));
        }
        let mut order = Vec::with_capacity(n);
        let mut anchor = vec![None; n];
        let mut seen = vec![false; n];
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(q) = queue.pop_front() {
                order.push(q);
                for &(nb, _) in &adjacency[q] {
                    if !seen[nb] {
                        seen[nb] = true;
                        anchor[nb] = Some(q);
                        queue.push_back(nb);
                    }
                }
            }
        }
        Pattern {
            text: text.to_string(),
            atoms,
            bonds,
            adjacency,
            order,
            anchor,
        }
    }
}

/// Compiles with default options.
pub fn compile_pattern(text: &str) -> Result<Pattern, SmartsError> {
    compile_with(text, CompileOptions::default())
}

pub fn compile_with(text: &str, options: CompileOptions) -> Result<Pattern, SmartsError> {
    parse::parse(text, options)
}

/// Convenience: compile and match in one call.
pub fn matches_smarts(mol: &Molecule, smarts: &str) -> Result<bool, SmartsError> {
    Ok(has_match(mol, &compile_pattern(smarts)?))
}
