//! Normalized bar cells, their boundary, the matching M and the Morse
//! differential obtained by path expansion.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::chains::{chain_prefix, pmax, Cell, ChainSet, RedexIndex};
use crate::coeff::Ring;
use crate::error::{Error, Result};
use crate::rewrite::Trs;
use crate::term::{Morphism, Term};
use crate::unify::{match_into, mgu_morphisms};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryTerm<E> {
    pub coeff: E,
    pub target: Cell,
}

/// Position of a cell relative to the matching, without the sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Match {
    Critical,
    /// Matched with a cell one dimension up.
    Redundant(Cell),
    /// Matched with a cell one dimension down.
    Collapsible(Cell),
}

/// A [`Match`] together with the matched coefficient `ε = ±1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellClass {
    Critical,
    Redundant { partner: Cell, sign: i64 },
    Collapsible { partner: Cell, sign: i64 },
}

/// Applies Φ to a face: `None` if some entry is a partial permutation,
/// otherwise the essential entries and the partial permutation left over
/// at the tail (as a morphism), if any.
pub fn phi(mut entries: Vec<Morphism>) -> Option<(Vec<Morphism>, Option<Morphism>)> {
    loop {
        if entries.iter().any(Morphism::is_partial_permutation) {
            return None;
        }
        let Some(k) = entries.iter().position(|m| !m.is_essential()) else {
            return Some((entries, None));
        };
        let (e, pi) = entries[k].canonicalize();
        entries[k] = e;
        let pi = pi.to_morphism();
        if k + 1 < entries.len() {
            entries[k + 1] = pi.compose_unchecked(&entries[k + 1]);
        } else {
            if entries.iter().any(Morphism::is_partial_permutation) {
                return None;
            }
            return Some((entries, Some(pi)));
        }
    }
}

/// `Φ δᵘ` of a normalized cell, combined by target and sorted.
pub fn normalized_boundary<R: Ring>(trs: &Trs, ring: &R, cell: &Cell) -> Result<Vec<BoundaryTerm<R::Elem>>> {
    let n = cell.dim();
    let mut acc: HashMap<Cell, R::Elem> = HashMap::new();
    let mut push = |coeff: R::Elem, target: Cell| {
        if ring.is_zero(&coeff) {
            return;
        }
        match acc.get_mut(&target) {
            Some(c) => *c = ring.add(c, &coeff),
            None => {
                acc.insert(target, coeff);
            }
        }
    };
    if n == 0 {
        return Ok(Vec::new());
    }
    let sig = &trs.sig;
    let t1 = &cell.entries[0];
    if n == 1 {
        let x = &t1.domain;
        let id = Morphism::identity(x);
        for (i, s) in x.iter().enumerate() {
            let k = ring.kappa(i, &t1.terms[0], &id)?;
            let pi = Morphism::new(x.clone(), vec![Term::var(i as u32, *s)]);
            push(ring.mul(&k, &ring.tail(&pi))?, Cell::empty(*s));
        }
        push(ring.scale(&ring.tail(t1), -1), Cell::empty(cell.sort));
    } else {
        let base = cell.domain();
        let mut faces: Vec<(R::Elem, Vec<Morphism>)> = Vec::new();
        let mut sigma = cell.entries[1].clone();
        for e in &cell.entries[2..] {
            sigma = sigma.compose_unchecked(e);
        }
        let sigma = trs.normal_form_morphism(&sigma)?;
        let t2 = &cell.entries[1];
        for (i, s) in t2.terms.iter().enumerate() {
            let k = ring.kappa(i, &t1.terms[0], &sigma)?;
            if ring.is_zero(&k) {
                continue;
            }
            let mut entries = vec![Morphism::single(t2.domain.clone(), s.clone())];
            entries.extend_from_slice(&cell.entries[2..]);
            faces.push((k, entries));
        }
        for j in 1..n {
            let merged = trs.star(&cell.entries[j - 1], &cell.entries[j])?;
            let mut entries = cell.entries[..j - 1].to_vec();
            entries.push(merged);
            entries.extend_from_slice(&cell.entries[j + 1..]);
            let sign = if j % 2 == 0 { 1 } else { -1 };
            faces.push((ring.scale(&ring.one(&base), sign), entries));
        }
        let sign = if n % 2 == 0 { 1 } else { -1 };
        faces.push((ring.scale(&ring.tail(&cell.entries[n - 1]), sign), cell.entries[..n - 1].to_vec()));
        for (coeff, entries) in faces {
            let Some((entries, pi)) = phi(entries) else { continue };
            let coeff = match pi {
                Some(pi) => ring.mul(&coeff, &ring.tail(&pi))?,
                None => coeff,
            };
            push(coeff, Cell::new(sig, entries));
        }
    }
    let mut out: Vec<BoundaryTerm<R::Elem>> = acc
        .into_iter()
        .filter(|(_, c)| !ring.is_zero(c))
        .map(|(target, coeff)| BoundaryTerm { coeff, target })
        .collect();
    out.sort_by(|a, b| a.target.cmp(&b.target));
    Ok(out)
}

/// The matching M, with memoized classification.
pub struct Matching<'a> {
    pub trs: &'a Trs,
    cache: RwLock<HashMap<Cell, Match>>,
}

impl<'a> Matching<'a> {
    pub fn new(trs: &'a Trs) -> Self {
        Matching { trs, cache: RwLock::new(HashMap::new()) }
    }

    /// Largest `L` such that `(t1, ..., t_{L-1})` is a chain.
    pub fn chain_prefix_length(&self, cell: &Cell) -> usize {
        crate::chains::chain_prefix_length(cell, self.trs)
    }

    /// The split partner of `cell`, if `cell` is redundant.
    pub fn redundant_partner(&self, cell: &Cell) -> Option<Cell> {
        let trs = self.trs;
        let n = cell.dim();
        if n == 0 {
            return None;
        }
        let (k, chain) = chain_prefix(cell, trs);
        if k == n {
            return None;
        }
        if k == 0 {
            let t1 = &cell.entries[0];
            let Term::App(f, args) = &t1.terms[0] else { return None };
            let mut entries = vec![trs.sig.generator(*f), Morphism::new(t1.domain.clone(), args.clone())];
            entries.extend_from_slice(&cell.entries[1..]);
            let partner = Cell { sort: cell.sort, entries };
            return partner.is_valid(trs).then_some(partner);
        }
        let tl = &cell.entries[k];
        let composite = chain.composite.apply(&tl.terms);
        let pm = pmax(&composite, trs);
        let RedexIndex::At(p, rank) = &pm else { return None };
        if pm <= chain.pmax {
            return None;
        }
        let sub = chain.composite.subterm_at(p).ok()?;
        if sub.is_var() {
            return None;
        }
        let sub = Morphism::single(chain.cell.domain(), sub.clone());
        let u = mgu_morphisms(&sub, &trs.rule(*rank).lhs_morphism())?.left.essential();
        let mut sigma = crate::term::Substitution::new();
        for (a, b) in u.terms.iter().zip(&tl.terms) {
            if !match_into(a, b, &mut sigma) {
                return None;
            }
        }
        let w = Morphism::new(tl.domain.clone(), (0..u.domain.len() as u32).map(|i| sigma[&i].clone()).collect());
        if w.is_identity() {
            return None;
        }
        let mut entries = cell.entries[..k].to_vec();
        entries.push(u);
        entries.push(w);
        entries.extend_from_slice(&cell.entries[k + 1..]);
        let partner = Cell { sort: cell.sort, entries };
        partner.is_valid(trs).then_some(partner)
    }

    /// The merge partner of `cell`, if `cell` is collapsible.
    pub fn collapsible_partner(&self, cell: &Cell) -> Option<Cell> {
        let trs = self.trs;
        let n = cell.dim();
        let (k, _) = chain_prefix(cell, trs);
        if n == 0 || k == n || k == 0 {
            return None;
        }
        let merged = cell.entries[k - 1].compose_unchecked(&cell.entries[k]);
        if !trs.is_normal_morphism(&merged) {
            return None;
        }
        let mut entries = cell.entries[..k - 1].to_vec();
        entries.push(merged);
        entries.extend_from_slice(&cell.entries[k + 1..]);
        let partner = Cell { sort: cell.sort, entries };
        (self.redundant_partner(&partner).as_ref() == Some(cell)).then_some(partner)
    }

    pub fn classify(&self, cell: &Cell) -> Result<Match> {
        if let Some(hit) = self.cache.read().expect("cache lock").get(cell) {
            return Ok(hit.clone());
        }
        let m = self.classify_uncached(cell)?;
        self.cache.write().expect("cache lock").insert(cell.clone(), m.clone());
        Ok(m)
    }

    fn classify_uncached(&self, cell: &Cell) -> Result<Match> {
        let (k, _) = chain_prefix(cell, self.trs);
        if k == cell.dim() {
            return Ok(Match::Critical);
        }
        let violation = |why: &str| Error::TrichotomyViolation(format!("{}: {why}", cell.display(&self.trs.sig)));
        match (self.redundant_partner(cell), self.collapsible_partner(cell)) {
            (Some(p), None) => {
                if self.collapsible_partner(&p).as_ref() != Some(cell) {
                    return Err(violation("split partner does not merge back"));
                }
                Ok(Match::Redundant(p))
            }
            (None, Some(p)) => Ok(Match::Collapsible(p)),
            (None, None) => Err(violation("neither critical, redundant nor collapsible")),
            (Some(_), Some(_)) => Err(violation("both redundant and collapsible")),
        }
    }
}

/// Default number of expansion steps before a differential gives up.
pub const DEFAULT_EXPANSION_BUDGET: usize = 5_000_000;

type Expansion<E> = Arc<Vec<(E, Cell)>>;

/// The Morse complex over a coefficient ring, with memoized boundaries
/// and expansions of non-critical cells into critical ones.
pub struct MorseComplex<'a, R: Ring> {
    pub trs: &'a Trs,
    pub ring: R,
    pub matching: &'a Matching<'a>,
    boundaries: RwLock<HashMap<Cell, Arc<Vec<BoundaryTerm<R::Elem>>>>>,
    expansions: RwLock<HashMap<Cell, Expansion<R::Elem>>>,
    steps: AtomicUsize,
    pub budget: usize,
}

impl<'a, R: Ring> MorseComplex<'a, R> {
    pub fn new(matching: &'a Matching<'a>, ring: R) -> Self {
        MorseComplex {
            trs: matching.trs,
            ring,
            matching,
            boundaries: RwLock::new(HashMap::new()),
            expansions: RwLock::new(HashMap::new()),
            steps: AtomicUsize::new(0),
            budget: DEFAULT_EXPANSION_BUDGET,
        }
    }

    pub fn boundary(&self, cell: &Cell) -> Result<Arc<Vec<BoundaryTerm<R::Elem>>>> {
        if let Some(hit) = self.boundaries.read().expect("cache lock").get(cell) {
            return Ok(hit.clone());
        }
        let b = Arc::new(normalized_boundary(self.trs, &self.ring, cell)?);
        self.boundaries.write().expect("cache lock").insert(cell.clone(), b.clone());
        Ok(b)
    }

    /// The coefficient of `cell` in the boundary of its partner.
    fn matched_sign(&self, cell: &Cell, partner: &Cell) -> Result<i64> {
        let b = self.boundary(partner)?;
        let coeff = b.iter().find(|t| t.target == *cell).map(|t| &t.coeff);
        coeff.and_then(|c| self.ring.unit_sign(c)).ok_or_else(|| {
            Error::TrichotomyViolation(format!(
                "{}: matched coefficient is not ±1",
                cell.display(&self.trs.sig)
            ))
        })
    }

    pub fn classify(&self, cell: &Cell) -> Result<CellClass> {
        Ok(match self.matching.classify(cell)? {
            Match::Critical => CellClass::Critical,
            Match::Redundant(p) => {
                let sign = self.matched_sign(cell, &p)?;
                CellClass::Redundant { partner: p, sign }
            }
            Match::Collapsible(p) => {
                let sign = self.matched_sign(&p, cell)?;
                CellClass::Collapsible { partner: p, sign }
            }
        })
    }

    /// Writes `cell` as a combination of critical cells along zig-zag paths.
    fn expand(&self, cell: &Cell, in_progress: &mut HashSet<Cell>) -> Result<Expansion<R::Elem>> {
        if let Some(hit) = self.expansions.read().expect("cache lock").get(cell) {
            return Ok(hit.clone());
        }
        let used = self.steps.fetch_add(1, Ordering::Relaxed);
        if used > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget, context: "Morse path expansion".into() });
        }
        let out = match self.matching.classify(cell)? {
            Match::Critical => vec![(self.ring.one(&cell.domain()), cell.clone())],
            Match::Collapsible(_) => Vec::new(),
            Match::Redundant(mu) => {
                if !in_progress.insert(cell.clone()) {
                    return Err(Error::BudgetExceeded {
                        budget: self.budget,
                        context: format!("cyclic path through {}", cell.display(&self.trs.sig)),
                    });
                }
                let eps = self.matched_sign(cell, &mu)?;
                let mut acc: Vec<(R::Elem, Cell)> = Vec::new();
                for term in self.boundary(&mu)?.iter() {
                    if term.target == *cell {
                        continue;
                    }
                    let c = self.ring.scale(&term.coeff, -eps);
                    for (e, crit) in self.expand(&term.target, in_progress)?.iter() {
                        acc.push((self.ring.mul(&c, e)?, crit.clone()));
                    }
                }
                in_progress.remove(cell);
                self.combine(acc)
            }
        };
        let out = Arc::new(out);
        self.expansions.write().expect("cache lock").insert(cell.clone(), out.clone());
        Ok(out)
    }

    fn combine(&self, terms: Vec<(R::Elem, Cell)>) -> Vec<(R::Elem, Cell)> {
        let mut map: HashMap<Cell, R::Elem> = HashMap::new();
        for (c, cell) in terms {
            match map.get_mut(&cell) {
                Some(x) => *x = self.ring.add(x, &c),
                None => {
                    map.insert(cell, c);
                }
            }
        }
        let mut out: Vec<(R::Elem, Cell)> = map.into_iter().filter(|(_, c)| !self.ring.is_zero(c)).map(|(k, c)| (c, k)).collect();
        out.sort_by(|a, b| a.1.cmp(&b.1));
        out
    }

    /// `δ^M` of a critical cell as a combination of critical cells.
    pub fn morse_differential(&self, cell: &Cell) -> Result<Vec<BoundaryTerm<R::Elem>>> {
        let mut acc = Vec::new();
        let mut in_progress = HashSet::new();
        for term in self.boundary(cell)?.iter() {
            for (e, crit) in self.expand(&term.target, &mut in_progress)?.iter() {
                acc.push((self.ring.mul(&term.coeff, e)?, crit.clone()));
            }
        }
        Ok(self.combine(acc).into_iter().map(|(coeff, target)| BoundaryTerm { coeff, target }).collect())
    }

    /// Morse differentials of every chain of dimension `n`, in chain order.
    pub fn differentials(&self, chains: &ChainSet, n: usize) -> Result<Vec<Vec<BoundaryTerm<R::Elem>>>> {
        chains.dims[n].par_iter().map(|c| self.morse_differential(&c.cell)).collect()
    }

    /// The coefficients of `δ^M δ^M (τ)` not shown to vanish modulo the rule
    /// relations; empty when the complex axiom is certified at `τ`.
    pub fn square(&self, cell: &Cell) -> Result<Vec<BoundaryTerm<R::Elem>>> {
        let mut acc = Vec::new();
        for term in self.morse_differential(cell)? {
            for inner in self.morse_differential(&term.target)? {
                acc.push((self.ring.mul(&term.coeff, &inner.coeff)?, inner.target));
            }
        }
        let mut out = Vec::new();
        for (coeff, target) in self.combine(acc) {
            if !self.ring.vanishes(&coeff)? {
                out.push(BoundaryTerm { coeff, target });
            }
        }
        Ok(out)
    }

    /// Every cell reachable from the boundaries of chains through
    /// dimension `max_dim` by boundary steps and matching partners.
    pub fn reachable_cells(&self, chains: &ChainSet) -> Result<Vec<Cell>> {
        let mut seen: HashSet<Cell> = HashSet::new();
        let mut stack: Vec<Cell> = Vec::new();
        for n in 1..=chains.max_dim() {
            for c in chains.cells(n) {
                for t in self.boundary(c)?.iter() {
                    stack.push(t.target.clone());
                }
            }
        }
        while let Some(cell) = stack.pop() {
            if !seen.insert(cell.clone()) {
                continue;
            }
            if let Match::Redundant(mu) = self.matching.classify(&cell)? {
                for t in self.boundary(&mu)?.iter() {
                    stack.push(t.target.clone());
                }
                stack.push(mu);
            }
        }
        let mut out: Vec<Cell> = seen.into_iter().collect();
        out.sort();
        Ok(out)
    }
}
