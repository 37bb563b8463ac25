//! Redex indices and the enumeration of n-chains.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;

use crate::error::Result;
use crate::rewrite::Trs;
use crate::term::{Morphism, Position, Signature, SortId, Term};
use crate::unify::mgu_morphisms;

/// `−∞` or a position paired with a rule rank. The derived order is the
/// lexicographic order on (position, rank) with `−∞` minimal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RedexIndex {
    NegInf,
    At(Position, usize),
}

impl RedexIndex {
    pub fn display<'a>(&'a self, trs: &'a Trs) -> impl fmt::Display + 'a {
        struct D<'a>(&'a RedexIndex, &'a Trs);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self.0 {
                    RedexIndex::NegInf => write!(f, "-inf"),
                    RedexIndex::At(p, k) => write!(f, "({p}, {})", self.1.rule(*k).name),
                }
            }
        }
        D(self, trs)
    }
}

pub fn redex_set(t: &Term, trs: &Trs) -> BTreeSet<RedexIndex> {
    let mut out = BTreeSet::new();
    for p in t.op_positions() {
        let sub = t.subterm_at(&p).expect("own position");
        for (k, _) in trs.root_matches(sub) {
            out.insert(RedexIndex::At(p.clone(), k));
        }
    }
    out
}

pub fn pmax(t: &Term, trs: &Trs) -> RedexIndex {
    let mut best = RedexIndex::NegInf;
    for p in t.op_positions() {
        let sub = t.subterm_at(&p).expect("own position");
        if let Some(k) = trs.root_matches(sub).map(|(k, _)| k).max() {
            let cand = RedexIndex::At(p, k);
            if cand > best {
                best = cand;
            }
        }
    }
    best
}

/// A normalized cell `(t1, ..., tn)` of the bar resolution: entries are
/// essential, non-identity and R-irreducible; `t1` has codomain `sort`.
/// The 0-cell of a sort has no entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub sort: SortId,
    pub entries: Vec<Morphism>,
}

impl Cell {
    pub fn empty(sort: SortId) -> Cell {
        Cell { sort, entries: Vec::new() }
    }

    pub fn new(sig: &Signature, entries: Vec<Morphism>) -> Cell {
        let sort = entries[0].terms[0].sort(sig);
        Cell { sort, entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Domain of the composite `t1 ⋯ tn`.
    pub fn domain(&self) -> Vec<SortId> {
        match self.entries.last() {
            Some(m) => m.domain.clone(),
            None => vec![self.sort],
        }
    }

    /// Raw composite `t1 ∘ ⋯ ∘ tn` as a single term.
    pub fn raw_composite(&self) -> Term {
        let mut it = self.entries.iter();
        let Some(first) = it.next() else { return Term::var(0, self.sort) };
        let mut t = first.terms[0].clone();
        for m in it {
            t = t.apply(&m.terms);
        }
        t
    }

    pub fn is_valid(&self, trs: &Trs) -> bool {
        let sig = &trs.sig;
        let mut expected = vec![self.sort];
        for (i, m) in self.entries.iter().enumerate() {
            if (i == 0 && m.terms.len() != 1)
                || m.codomain(sig) != expected
                || m.check(sig).is_err()
                || !m.is_essential()
                || m.is_identity()
                || !trs.is_normal_morphism(m)
            {
                return false;
            }
            expected = m.domain.clone();
        }
        true
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> CellDisplay<'a> {
        CellDisplay { cell: self, sig }
    }
}

pub struct CellDisplay<'a> {
    cell: &'a Cell,
    sig: &'a Signature,
}

impl fmt::Display for CellDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cell.entries.is_empty() {
            return write!(f, "()_{}", self.sig.sort_name(self.cell.sort));
        }
        write!(f, "(")?;
        for (i, m) in self.cell.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if i == 0 {
                write!(f, "{}", m.terms[0].display(self.sig))?;
            } else {
                write!(f, "{}", m.display(self.sig))?;
            }
        }
        write!(f, ")")
    }
}

/// An enumerated chain with its raw composite and `pmax` of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub cell: Cell,
    pub composite: Term,
    pub pmax: RedexIndex,
}

/// Chains of every dimension `0..=max_dim`, canonically sorted, with an
/// index from cells to positions.
#[derive(Debug, Clone)]
pub struct ChainSet {
    pub dims: Vec<Vec<Chain>>,
    index: Vec<HashMap<Cell, usize>>,
}

impl ChainSet {
    pub fn max_dim(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn counts(&self) -> Vec<usize> {
        self.dims.iter().map(Vec::len).collect()
    }

    pub fn cells(&self, n: usize) -> impl Iterator<Item = &Cell> {
        self.dims[n].iter().map(|c| &c.cell)
    }

    pub fn position(&self, cell: &Cell) -> Option<usize> {
        self.index.get(cell.dim())?.get(cell).copied()
    }

    pub fn contains(&self, cell: &Cell) -> bool {
        self.position(cell).is_some()
    }
}

pub fn generator_chain(trs: &Trs, f: crate::term::OpId) -> Chain {
    let m = trs.sig.generator(f);
    let composite = m.terms[0].clone();
    let pmax = pmax(&composite, trs);
    Chain { cell: Cell::new(&trs.sig, vec![m]), composite, pmax }
}

/// All chains one dimension above `chain`.
pub fn extensions(chain: &Chain, trs: &Trs) -> Vec<Chain> {
    let t = &chain.composite;
    let domain = chain.cell.domain();
    let mut out = Vec::new();
    for p in t.op_positions() {
        let sub = Morphism::single(domain.clone(), t.subterm_at(&p).expect("own position").clone());
        for (k, rule) in trs.rules().iter().enumerate() {
            let cand = RedexIndex::At(p.clone(), k);
            if cand <= chain.pmax {
                continue;
            }
            if let Some(next) = extend_with(chain, &sub, rule, trs) {
                if next.pmax == cand {
                    out.push(next);
                }
            }
        }
    }
    out.sort_by(|a, b| a.cell.cmp(&b.cell));
    out.dedup_by(|a, b| a.cell == b.cell);
    out
}

fn extend_with(chain: &Chain, sub: &Morphism, rule: &crate::rewrite::Rule, trs: &Trs) -> Option<Chain> {
    let u = mgu_morphisms(sub, &rule.lhs_morphism())?;
    let tn = u.left.essential();
    if tn.is_identity() || !trs.is_normal_morphism(&tn) {
        return None;
    }
    let composite = chain.composite.apply(&tn.terms);
    let pmax = pmax(&composite, trs);
    let mut entries = chain.cell.entries.clone();
    entries.push(tn);
    Some(Chain { cell: Cell { sort: chain.cell.sort, entries }, composite, pmax })
}

/// Chains of dimensions `0..=max_dim`.
pub fn enumerate_chains(trs: &Trs, max_dim: usize) -> Result<ChainSet> {
    let sig = &trs.sig;
    let mut dims: Vec<Vec<Chain>> = Vec::new();
    dims.push(
        sig.sort_ids()
            .map(|s| Chain { cell: Cell::empty(s), composite: Term::var(0, s), pmax: RedexIndex::NegInf })
            .collect(),
    );
    if max_dim >= 1 {
        let mut ones: Vec<Chain> = sig.op_ids().map(|f| generator_chain(trs, f)).collect();
        ones.sort_by(|a, b| a.cell.cmp(&b.cell));
        dims.push(ones);
    }
    for _ in 2..=max_dim {
        let prev = dims.last().expect("nonempty");
        let mut next: Vec<Chain> = prev.par_iter().flat_map_iter(|c| extensions(c, trs)).collect();
        next.sort_by(|a, b| a.cell.cmp(&b.cell));
        next.dedup_by(|a, b| a.cell == b.cell);
        dims.push(next);
    }
    let index = dims
        .iter()
        .map(|d| d.iter().enumerate().map(|(i, c)| (c.cell.clone(), i)).collect())
        .collect();
    Ok(ChainSet { dims, index })
}

/// Number of leading entries of `cell` that form a chain, with the chain
/// data of that prefix.
pub fn chain_prefix(cell: &Cell, trs: &Trs) -> (usize, Chain) {
    let empty = Chain { cell: Cell::empty(cell.sort), composite: Term::var(0, cell.sort), pmax: RedexIndex::NegInf };
    let Some(first) = cell.entries.first() else { return (0, empty) };
    let t = &first.terms[0];
    let is_generator = match t {
        Term::App(f, _) => trs.sig.generator(*f) == *first,
        Term::Var(_) => false,
    };
    if !is_generator {
        return (0, empty);
    }
    let Term::App(f, _) = t else { unreachable!() };
    let mut chain = generator_chain(trs, *f);
    for (i, next) in cell.entries.iter().enumerate().skip(1) {
        match extends_by(&chain, next, trs) {
            Some(c) => chain = c,
            None => return (i, chain),
        }
    }
    (cell.entries.len(), chain)
}

/// `(chain, t)` as a chain, if it is one.
pub fn extends_by(chain: &Chain, t: &Morphism, trs: &Trs) -> Option<Chain> {
    if t.terms.len() != chain.cell.domain().len() {
        return None;
    }
    let composite = chain.composite.apply(&t.terms);
    let pm = pmax(&composite, trs);
    let RedexIndex::At(p, k) = &pm else { return None };
    if pm <= chain.pmax {
        return None;
    }
    let sub = chain.composite.subterm_at(p).ok()?;
    if sub.is_var() {
        return None;
    }
    let sub = Morphism::single(chain.cell.domain(), sub.clone());
    let u = mgu_morphisms(&sub, &trs.rule(*k).lhs_morphism())?;
    if u.left.essential() != *t {
        return None;
    }
    let mut entries = chain.cell.entries.clone();
    entries.push(t.clone());
    Some(Chain { cell: Cell { sort: chain.cell.sort, entries }, composite, pmax: pm })
}

pub fn is_chain(cell: &Cell, trs: &Trs) -> bool {
    cell.entries.is_empty() || chain_prefix(cell, trs).0 == cell.dim()
}

/// Largest `L ≤ n` such that `(t1, ..., t_{L-1})` is a chain.
pub fn chain_prefix_length(cell: &Cell, trs: &Trs) -> usize {
    let (k, _) = chain_prefix(cell, trs);
    k.min(cell.dim().saturating_sub(1)) + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::tests::abelian;

    fn parts(trs: &Trs) -> (SortId, Term, Term, crate::term::OpId) {
        let x = SortId(0);
        let plus = trs.sig.op_id("plus").unwrap();
        (x, Term::var(0, x), Term::constant(trs.sig.op_id("zero").unwrap()), plus)
    }

    #[test]
    fn redex_sets() {
        let r = abelian();
        let (_, v, z, plus) = parts(&r);
        let zz = Term::App(plus, vec![z.clone(), z.clone()]);
        let set = redex_set(&zz, &r);
        assert_eq!(set.into_iter().collect::<Vec<_>>(), vec![RedexIndex::At(Position::root(), 0), RedexIndex::At(Position::root(), 1)]);
        assert!(redex_set(&v, &r).is_empty());
        let x0 = Term::App(plus, vec![v.clone(), z.clone()]);
        let t = Term::App(plus, vec![x0.clone(), z.clone()]);
        assert_eq!(
            redex_set(&t, &r).into_iter().collect::<Vec<_>>(),
            vec![RedexIndex::At(Position::root(), 0), RedexIndex::At(Position(vec![1]), 0)]
        );
        let zx = Term::App(plus, vec![z.clone(), v.clone()]);
        assert!(pmax(&x0, &r) < pmax(&zz, &r));
        assert_eq!(pmax(&zx, &r), pmax(&zz, &r));
        assert_eq!(pmax(&v, &r), RedexIndex::NegInf);
        assert_eq!(pmax(&t, &r), RedexIndex::At(Position(vec![1]), 0));
    }

    #[test]
    fn abelian_chains() {
        let r = abelian();
        let (x, v, z, plus) = parts(&r);
        let cs = enumerate_chains(&r, 4).unwrap();
        assert_eq!(cs.counts(), vec![1, 2, 2, 1, 0]);
        let gen = r.sig.generator(plus);
        let tau1 = Cell::new(&r.sig, vec![gen.clone(), Morphism::new(vec![x], vec![v.clone(), z.clone()]), Morphism::new(vec![], vec![z.clone()])]);
        let tau2 = Cell::new(&r.sig, vec![gen.clone(), Morphism::new(vec![x], vec![z.clone(), v.clone()]), Morphism::new(vec![], vec![z.clone()])]);
        assert!(cs.contains(&tau1));
        assert!(!cs.contains(&tau2));
        assert!(is_chain(&tau1, &r));
        assert!(!is_chain(&tau2, &r));
        for n in 0..=4 {
            for c in cs.cells(n) {
                assert!(c.is_valid(&r));
                assert_eq!(chain_prefix_length(c, &r), n.max(1));
                for k in 0..n {
                    let prefix = Cell { sort: c.sort, entries: c.entries[..k].to_vec() };
                    assert!(is_chain(&prefix, &r));
                }
            }
        }
        let zz = Cell::new(&r.sig, vec![gen.clone(), Morphism::new(vec![], vec![z.clone(), z.clone()])]);
        assert_eq!(chain_prefix_length(&zz, &r), 2);
        let nested = Cell::new(&r.sig, vec![Morphism::new(vec![x, x, x], vec![Term::App(plus, vec![Term::App(plus, vec![Term::var(0, x), Term::var(1, x)]), Term::var(2, x)])])]);
        assert_eq!(chain_prefix_length(&nested, &r), 1);
    }

    #[test]
    fn monotone_pmax() {
        let r = abelian();
        let (x, v, z, plus) = parts(&r);
        let t = Term::App(plus, vec![v.clone(), Term::var(1, x)]);
        for s in [z.clone(), v.clone(), Term::App(plus, vec![z.clone(), v.clone()])] {
            for s2 in [z.clone(), v.clone()] {
                let composed = t.apply(&[s.clone(), s2.clone()]);
                assert!(pmax(&t, &r) <= pmax(&composed, &r));
            }
        }
    }
}
