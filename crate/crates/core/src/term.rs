//! Multi-sorted terms, positions and term-tuple morphisms.
//!
//! Variables are de Bruijn-style indices into a context. A [`Morphism`] is a
//! context (list of sorts) together with a tuple of terms over it; the
//! canonical representative of a renaming class uses each context variable,
//! in first-occurrence order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SortId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpDecl {
    pub name: String,
    pub args: Vec<SortId>,
    pub result: SortId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    sorts: Vec<String>,
    ops: Vec<OpDecl>,
    sort_index: HashMap<String, SortId>,
    op_index: HashMap<String, OpId>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sort(&mut self, name: &str) -> Result<SortId> {
        if self.sort_index.contains_key(name) {
            return Err(Error::DuplicateName { line: 0, name: name.to_string() });
        }
        let id = SortId(self.sorts.len() as u32);
        self.sorts.push(name.to_string());
        self.sort_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_op(&mut self, name: &str, args: Vec<SortId>, result: SortId) -> Result<OpId> {
        if self.op_index.contains_key(name) {
            return Err(Error::DuplicateName { line: 0, name: name.to_string() });
        }
        for s in args.iter().chain(std::iter::once(&result)) {
            if s.0 as usize >= self.sorts.len() {
                return Err(Error::UndeclaredName { line: 0, name: format!("sort #{}", s.0) });
            }
        }
        let id = OpId(self.ops.len() as u32);
        self.ops.push(OpDecl { name: name.to_string(), args, result });
        self.op_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn sort_count(&self) -> usize {
        self.sorts.len()
    }

    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    pub fn sort_ids(&self) -> impl Iterator<Item = SortId> {
        (0..self.sorts.len() as u32).map(SortId)
    }

    pub fn op_ids(&self) -> impl Iterator<Item = OpId> {
        (0..self.ops.len() as u32).map(OpId)
    }

    pub fn sort_name(&self, s: SortId) -> &str {
        &self.sorts[s.0 as usize]
    }

    pub fn op(&self, f: OpId) -> &OpDecl {
        &self.ops[f.0 as usize]
    }

    pub fn sort(&self, name: &str) -> Option<SortId> {
        self.sort_index.get(name).copied()
    }

    pub fn op_id(&self, name: &str) -> Option<OpId> {
        self.op_index.get(name).copied()
    }

    /// Builds `f(t1, ..., tn)` after checking arity and argument sorts.
    pub fn app(&self, f: OpId, args: Vec<Term>) -> Result<Term> {
        let decl = self.op(f);
        if decl.args.len() != args.len() {
            return Err(Error::ArityMismatch {
                op: decl.name.clone(),
                expected: decl.args.len(),
                found: args.len(),
            });
        }
        for (expected, a) in decl.args.iter().zip(&args) {
            let found = a.sort(self);
            if found != *expected {
                return Err(self.mismatch(*expected, found));
            }
        }
        Ok(Term::App(f, args))
    }

    pub(crate) fn mismatch(&self, expected: SortId, found: SortId) -> Error {
        Error::SortMismatch {
            expected: self.sort_name(expected).to_string(),
            found: self.sort_name(found).to_string(),
        }
    }

    /// The generic term `f(x1, ..., xk)` as a morphism.
    pub fn generator(&self, f: OpId) -> Morphism {
        let decl = self.op(f);
        let args = decl
            .args
            .iter()
            .enumerate()
            .map(|(i, s)| Term::var(i as u32, *s))
            .collect();
        Morphism { domain: decl.args.clone(), terms: vec![Term::App(f, args)] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub index: u32,
    pub sort: SortId,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(OpId, Vec<Term>),
}

/// Substitution keyed by variable index.
pub type Substitution = BTreeMap<u32, Term>;

impl Term {
    pub fn var(index: u32, sort: SortId) -> Term {
        Term::Var(Var { index, sort })
    }

    pub fn constant(f: OpId) -> Term {
        Term::App(f, Vec::new())
    }

    pub fn sort(&self, sig: &Signature) -> SortId {
        match self {
            Term::Var(v) => v.sort,
            Term::App(f, _) => sig.op(*f).result,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::App(..) => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn has_op(&self) -> bool {
        !self.is_var()
    }

    /// Checks that every application matches its declared arity and sorts.
    pub fn check(&self, sig: &Signature) -> Result<SortId> {
        match self {
            Term::Var(v) => Ok(v.sort),
            Term::App(f, args) => {
                let decl = sig.op(*f);
                if decl.args.len() != args.len() {
                    return Err(Error::ArityMismatch {
                        op: decl.name.clone(),
                        expected: decl.args.len(),
                        found: args.len(),
                    });
                }
                for (expected, a) in decl.args.iter().zip(args) {
                    let found = a.check(sig)?;
                    if found != *expected {
                        return Err(sig.mismatch(*expected, found));
                    }
                }
                Ok(decl.result)
            }
        }
    }

    pub fn max_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(v.index),
            Term::App(_, args) => args.iter().filter_map(Term::max_var).max(),
        }
    }

    /// Variables in first-occurrence order, without repetition.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn var_count(&self, index: u32) -> usize {
        match self {
            Term::Var(v) => usize::from(v.index == index),
            Term::App(_, args) => args.iter().map(|a| a.var_count(index)).sum(),
        }
    }

    pub fn contains_var(&self, index: u32) -> bool {
        match self {
            Term::Var(v) => v.index == index,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(index)),
        }
    }

    /// Depth-first preorder list of positions, root first.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out, false);
        out
    }

    /// Positions whose subterm is not a variable.
    pub fn op_positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out, true);
        out
    }

    fn collect_positions(&self, path: &mut Vec<u32>, out: &mut Vec<Position>, ops_only: bool) {
        match self {
            Term::Var(_) => {
                if !ops_only {
                    out.push(Position(path.clone()));
                }
            }
            Term::App(_, args) => {
                out.push(Position(path.clone()));
                for (i, a) in args.iter().enumerate() {
                    path.push(i as u32 + 1);
                    a.collect_positions(path, out, ops_only);
                    path.pop();
                }
            }
        }
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term> {
        let mut t = self;
        for &i in &p.0 {
            match t {
                Term::App(_, args) if i >= 1 && (i as usize) <= args.len() => {
                    t = &args[i as usize - 1];
                }
                _ => return Err(Error::InvalidPosition(p.to_string())),
            }
        }
        Ok(t)
    }

    /// `self[p <- s]`.
    pub fn replace_at(&self, p: &Position, s: Term) -> Result<Term> {
        fn go(t: &Term, path: &[u32], s: Term, p: &Position) -> Result<Term> {
            match path.split_first() {
                None => Ok(s),
                Some((&i, rest)) => match t {
                    Term::App(f, args) if i >= 1 && (i as usize) <= args.len() => {
                        let mut args = args.clone();
                        let k = i as usize - 1;
                        args[k] = go(&args[k], rest, s, p)?;
                        Ok(Term::App(*f, args))
                    }
                    _ => Err(Error::InvalidPosition(p.to_string())),
                },
            }
        }
        go(self, &p.0, s, p)
    }

    /// Simultaneous substitution with sort checking.
    pub fn substitute(&self, sigma: &Substitution) -> Result<Term> {
        match self {
            Term::Var(v) => match sigma.get(&v.index) {
                None => Err(Error::UnboundVariable(format!("x{}", v.index + 1))),
                Some(t) => Ok(t.clone()),
            },
            Term::App(f, args) => Ok(Term::App(
                *f,
                args.iter().map(|a| a.substitute(sigma)).collect::<Result<_>>()?,
            )),
        }
    }

    /// Like [`Term::substitute`] but checks sorts of the assigned terms.
    pub fn substitute_checked(&self, sigma: &Substitution, sig: &Signature) -> Result<Term> {
        for v in self.vars() {
            if let Some(t) = sigma.get(&v.index) {
                let s = t.check(sig)?;
                if s != v.sort {
                    return Err(sig.mismatch(v.sort, s));
                }
            }
        }
        self.substitute(sigma)
    }

    /// Substitution `x_i ↦ terms[i]`. Panics on an out-of-range variable.
    pub fn apply(&self, terms: &[Term]) -> Term {
        match self {
            Term::Var(v) => terms[v.index as usize].clone(),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| a.apply(terms)).collect()),
        }
    }

    /// Renames variable indices through `f`.
    pub fn rename(&self, f: &impl Fn(u32) -> u32) -> Term {
        match self {
            Term::Var(v) => Term::var(f(v.index), v.sort),
            Term::App(g, args) => Term::App(*g, args.iter().map(|a| a.rename(f)).collect()),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig, names: None }
    }

    pub fn display_named<'a>(&'a self, sig: &'a Signature, names: &'a [String]) -> TermDisplay<'a> {
        TermDisplay { term: self, sig, names: Some(names) }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
    names: Option<&'a [String]>,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(v) => match self.names.and_then(|n| n.get(v.index as usize)) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "x{}", v.index + 1),
            },
            Term::App(op, args) => {
                write!(f, "{}", self.sig.op(*op).name)?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", TermDisplay { term: a, sig: self.sig, names: self.names })?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// A path of 1-based argument indices. The derived order puts a prefix
/// before its extensions and compares siblings by index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position(pub Vec<u32>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn child(&self, i: u32) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// A tuple of terms over a context: the morphism `domain -> codomain`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Morphism {
    pub domain: Vec<SortId>,
    pub terms: Vec<Term>,
}

impl Morphism {
    pub fn new(domain: Vec<SortId>, terms: Vec<Term>) -> Self {
        Morphism { domain, terms }
    }

    pub fn identity(domain: &[SortId]) -> Self {
        let terms = domain.iter().enumerate().map(|(i, s)| Term::var(i as u32, *s)).collect();
        Morphism { domain: domain.to_vec(), terms }
    }

    pub fn single(domain: Vec<SortId>, t: Term) -> Self {
        Morphism { domain, terms: vec![t] }
    }

    pub fn codomain(&self, sig: &Signature) -> Vec<SortId> {
        self.terms.iter().map(|t| t.sort(sig)).collect()
    }

    /// Checks every term against the signature and the context.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        for t in &self.terms {
            t.check(sig)?;
            for v in t.vars() {
                match self.domain.get(v.index as usize) {
                    None => return Err(Error::UnboundVariable(format!("x{}", v.index + 1))),
                    Some(s) if *s != v.sort => return Err(sig.mismatch(*s, v.sort)),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// `self ∘ g`: substitutes the terms of `g` for the context of `self`.
    /// No rewriting is performed.
    pub fn compose(&self, g: &Morphism, sig: &Signature) -> Result<Morphism> {
        if g.terms.len() != self.domain.len() {
            return Err(Error::ObjectMismatch(format!(
                "cannot compose: {} terms into a context of length {}",
                g.terms.len(),
                self.domain.len()
            )));
        }
        for (s, t) in self.domain.iter().zip(&g.terms) {
            let found = t.sort(sig);
            if found != *s {
                return Err(sig.mismatch(*s, found));
            }
        }
        Ok(self.compose_unchecked(g))
    }

    pub fn compose_unchecked(&self, g: &Morphism) -> Morphism {
        Morphism {
            domain: g.domain.clone(),
            terms: self.terms.iter().map(|t| t.apply(&g.terms)).collect(),
        }
    }

    /// Variables of the tuple in first-occurrence order.
    pub fn first_occurrence(&self) -> Vec<u32> {
        let mut seen = vec![false; self.domain.len()];
        let mut order = Vec::new();
        fn go(t: &Term, seen: &mut Vec<bool>, order: &mut Vec<u32>) {
            match t {
                Term::Var(v) => {
                    let i = v.index as usize;
                    if i >= seen.len() {
                        seen.resize(i + 1, false);
                    }
                    if !seen[i] {
                        seen[i] = true;
                        order.push(v.index);
                    }
                }
                Term::App(_, args) => args.iter().for_each(|a| go(a, seen, order)),
            }
        }
        for t in &self.terms {
            go(t, &mut seen, &mut order);
        }
        order
    }

    /// Decomposes `self = essential ∘ π` with `essential` canonical.
    pub fn canonicalize(&self) -> (Morphism, PartialPermutation) {
        let order = self.first_occurrence();
        let mut rename = vec![u32::MAX; self.domain.len().max(order.iter().map(|&i| i as usize + 1).max().unwrap_or(0))];
        for (k, &i) in order.iter().enumerate() {
            rename[i as usize] = k as u32;
        }
        let domain = order.iter().map(|&i| self.domain[i as usize]).collect();
        let terms = self.terms.iter().map(|t| t.rename(&|i| rename[i as usize])).collect();
        let pi = PartialPermutation { source: self.domain.clone(), selection: order };
        (Morphism { domain, terms }, pi)
    }

    pub fn essential(&self) -> Morphism {
        self.canonicalize().0
    }

    /// Uses every context variable, in first-occurrence order.
    pub fn is_essential(&self) -> bool {
        let order = self.first_occurrence();
        order.len() == self.domain.len() && order.iter().enumerate().all(|(k, &i)| k as u32 == i)
    }

    /// Every entry is a variable and the entries are pairwise distinct.
    pub fn is_partial_permutation(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.terms.iter().all(|t| match t {
            Term::Var(v) => seen.insert(v.index),
            Term::App(..) => false,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.terms.len() == self.domain.len()
            && self.terms.iter().enumerate().all(|(i, t)| matches!(t, Term::Var(v) if v.index == i as u32))
    }

    pub fn has_op(&self) -> bool {
        self.terms.iter().any(Term::has_op)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> MorphismDisplay<'a> {
        MorphismDisplay { m: self, sig }
    }
}

pub struct MorphismDisplay<'a> {
    m: &'a Morphism,
    sig: &'a Signature,
}

impl fmt::Display for MorphismDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, t) in self.m.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", t.display(self.sig))?;
        }
        write!(f, "⟩")
    }
}

/// An injection from target indices into the source context.
/// As a morphism it is `source -> (source[selection[0]], ...)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialPermutation {
    pub source: Vec<SortId>,
    pub selection: Vec<u32>,
}

impl PartialPermutation {
    pub fn is_identity(&self) -> bool {
        self.selection.len() == self.source.len()
            && self.selection.iter().enumerate().all(|(k, &i)| k as u32 == i)
    }

    pub fn is_permutation(&self) -> bool {
        self.selection.len() == self.source.len()
    }

    pub fn to_morphism(&self) -> Morphism {
        Morphism {
            domain: self.source.clone(),
            terms: self
                .selection
                .iter()
                .map(|&i| Term::var(i, self.source[i as usize]))
                .collect(),
        }
    }
}
