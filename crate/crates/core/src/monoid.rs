//! Anick chains and the Morse matching on the normalized bar resolution
//! of a monoid presented by a complete string rewriting system.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::RwLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::homology::{homology, HomologyGroup, TensoredComplex, BoundaryMatrix};
use crate::rewrite::{CheckOptions, CompletenessReport};

pub type Word = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordRule {
    pub name: String,
    pub lhs: Word,
    pub rhs: Word,
}

/// A string rewriting system; rules are tried in order at each position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Srs {
    pub letters: Vec<String>,
    pub rules: Vec<WordRule>,
    pub max_steps: usize,
}

impl Srs {
    pub fn new(letters: Vec<String>, rules: Vec<WordRule>) -> Srs {
        Srs { letters, rules, max_steps: 10_000 }
    }

    /// Leftmost position and rule of a redex.
    fn find_redex(&self, w: &[u32]) -> Option<(usize, usize)> {
        (0..w.len()).find_map(|p| self.rules.iter().position(|r| w[p..].starts_with(&r.lhs)).map(|k| (p, k)))
    }

    pub fn is_reducible(&self, w: &[u32]) -> bool {
        self.find_redex(w).is_some()
    }

    pub fn normal_form(&self, w: &[u32]) -> Result<Word> {
        self.normal_form_budget(w, self.max_steps)
    }

    pub fn normal_form_budget(&self, w: &[u32], budget: usize) -> Result<Word> {
        let mut w = w.to_vec();
        for _ in 0..budget {
            match self.find_redex(&w) {
                None => return Ok(w),
                Some((p, k)) => {
                    let r = &self.rules[k];
                    w.splice(p..p + r.lhs.len(), r.rhs.iter().copied());
                }
            }
        }
        if self.is_reducible(&w) {
            Err(Error::BudgetExceeded { budget, context: format!("normal form of {}", self.show(&w)) })
        } else {
            Ok(w)
        }
    }

    pub fn show(&self, w: &[u32]) -> String {
        if w.is_empty() {
            return "ε".into();
        }
        let sep = if self.letters.iter().all(|l| l.chars().count() == 1) { "" } else { " " };
        w.iter().map(|&a| self.letters[a as usize].as_str()).collect::<Vec<_>>().join(sep)
    }

    /// Peaks with their two one-step reducts: overlaps of a proper suffix
    /// of one left-hand side with a proper prefix of another, and
    /// inclusions of one left-hand side in another.
    pub fn critical_pairs(&self) -> Vec<(Word, Word, Word)> {
        let mut out = Vec::new();
        for (i, a) in self.rules.iter().enumerate() {
            for (j, b) in self.rules.iter().enumerate() {
                for k in 1..a.lhs.len().min(b.lhs.len()) {
                    if a.lhs[a.lhs.len() - k..] == b.lhs[..k] {
                        let peak = [&a.lhs[..], &b.lhs[k..]].concat();
                        let left = [&a.rhs[..], &b.lhs[k..]].concat();
                        let right = [&a.lhs[..a.lhs.len() - k], &b.rhs[..]].concat();
                        out.push((peak, left, right));
                    }
                }
                if i != j && b.lhs.len() <= a.lhs.len() {
                    for p in 0..=a.lhs.len() - b.lhs.len() {
                        if a.lhs[p..].starts_with(&b.lhs) {
                            let right = [&a.lhs[..p], &b.rhs[..], &a.lhs[p + b.lhs.len()..]].concat();
                            out.push((a.lhs.clone(), a.rhs.clone(), right));
                        }
                    }
                }
            }
        }
        out
    }

    /// Budgeted completeness certification, as for term rewriting.
    pub fn check_complete(&self, opts: &CheckOptions) -> CompletenessReport {
        let mut report = CompletenessReport { assumed_terminating: opts.assume_terminating, ..Default::default() };
        for (k, r) in self.rules.iter().enumerate() {
            if r.lhs.is_empty() {
                report.reducedness_failures.push(format!("{}: empty left-hand side", r.name));
                continue;
            }
            let others = Srs::new(self.letters.clone(), self.rules.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, r)| r.clone()).collect());
            if others.is_reducible(&r.lhs) {
                report.reducedness_failures.push(format!("{}: left-hand side reducible by another rule", r.name));
            }
            if self.is_reducible(&r.rhs) {
                report.reducedness_failures.push(format!("{}: right-hand side not in normal form", r.name));
            }
        }
        let pairs = self.critical_pairs();
        report.critical_pairs = pairs.len();
        for (peak, left, right) in pairs.into_iter().take(opts.cp_budget) {
            if left == right {
                continue;
            }
            report.nontrivial_pairs += 1;
            match (self.normal_form_budget(&left, opts.term_budget), self.normal_form_budget(&right, opts.term_budget)) {
                (Ok(a), Ok(b)) if a == b => {}
                (Ok(a), Ok(b)) => report.unjoinable.push(format!("{}: {} ≠ {}", self.show(&peak), self.show(&a), self.show(&b))),
                _ => report.termination_failures.push(format!("{}: no normal form within budget", self.show(&peak))),
            }
        }
        if !opts.assume_terminating && !self.letters.is_empty() {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            for _ in 0..opts.samples {
                let len = rng.gen_range(0..=opts.sample_depth * 2);
                let w: Word = (0..len).map(|_| rng.gen_range(0..self.letters.len() as u32)).collect();
                report.probed_terms += 1;
                if self.normal_form_budget(&w, opts.term_budget).is_err() {
                    report.termination_failures.push(format!("{}: no normal form within budget", self.show(&w)));
                    break;
                }
            }
        }
        report
    }

    /// Reducible, with every proper prefix irreducible.
    fn is_minimal_reducible(&self, w: &[u32]) -> bool {
        self.is_reducible(w) && !self.is_reducible(&w[..w.len() - 1])
    }
}

/// A cell of the normalized bar resolution: nonempty normal words.
pub type WordCell = Vec<Word>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordMatch {
    Critical,
    /// Matched with a cell one dimension up.
    Redundant(WordCell),
    /// Matched with a cell one dimension down.
    Collapsible(WordCell),
}

#[derive(Debug, Clone)]
pub struct WordChains {
    pub dims: Vec<Vec<WordCell>>,
    index: Vec<HashMap<WordCell, usize>>,
}

impl WordChains {
    pub fn max_dim(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn counts(&self) -> Vec<usize> {
        self.dims.iter().map(Vec::len).collect()
    }

    pub fn position(&self, cell: &WordCell) -> Option<usize> {
        self.index.get(cell.len())?.get(cell).copied()
    }
}

/// `u_n` with `(u_1, …, u_{n-1}, u_n)` a chain, given `u_{n-1} = last`.
fn chain_tails(srs: &Srs, last: &[u32]) -> Vec<Word> {
    let mut out = Vec::new();
    for r in &srs.rules {
        for k in 1..r.lhs.len() {
            if last.len() >= k && last[last.len() - k..] == r.lhs[..k] {
                let tail = r.lhs[k..].to_vec();
                let whole = [last, &tail[..]].concat();
                if !srs.is_reducible(&tail) && srs.is_minimal_reducible(&whole) {
                    out.push(tail);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn is_word_chain(srs: &Srs, cell: &[Word]) -> bool {
    match cell.len() {
        0 => true,
        1 => cell[0].len() == 1,
        n => is_word_chain(srs, &cell[..n - 1]) && chain_tails(srs, &cell[n - 2]).contains(&cell[n - 1]),
    }
}

pub fn enumerate_word_chains(srs: &Srs, max_dim: usize) -> Result<WordChains> {
    let mut dims: Vec<Vec<WordCell>> = vec![vec![Vec::new()]];
    if max_dim >= 1 {
        dims.push((0..srs.letters.len() as u32).map(|a| vec![vec![a]]).collect());
    }
    for _ in 2..=max_dim {
        let prev = dims.last().expect("nonempty");
        let mut next: Vec<WordCell> = prev
            .iter()
            .flat_map(|c| {
                chain_tails(srs, c.last().expect("positive dimension")).into_iter().map(move |t| {
                    let mut c = c.clone();
                    c.push(t);
                    c
                })
            })
            .collect();
        next.sort();
        next.dedup();
        dims.push(next);
    }
    let index = dims.iter().map(|d| d.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect()).collect();
    Ok(WordChains { dims, index })
}

/// Coefficients in the monoid ring, or their augmentation.
pub trait WordRing: Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    /// The monoid element represented by a normal word.
    fn word(&self, w: &[u32]) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, k: i64) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn unit_sign(&self, a: &Self::Elem) -> Option<i64>;
    /// Image under the augmentation `N -> 1`.
    fn count(&self, a: &Self::Elem) -> i64;
}

/// Every monoid element maps to 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordCount;

impl WordRing for WordCount {
    type Elem = i64;

    fn zero(&self) -> i64 {
        0
    }
    fn word(&self, _: &[u32]) -> i64 {
        1
    }
    fn add(&self, a: &i64, b: &i64) -> i64 {
        a + b
    }
    fn scale(&self, a: &i64, k: i64) -> i64 {
        a * k
    }
    fn mul(&self, a: &i64, b: &i64) -> Result<i64> {
        Ok(a * b)
    }
    fn is_zero(&self, a: &i64) -> bool {
        *a == 0
    }
    fn unit_sign(&self, a: &i64) -> Option<i64> {
        (a.abs() == 1).then_some(*a)
    }
    fn count(&self, a: &i64) -> i64 {
        *a
    }
}

/// Formal sums of normal words.
#[derive(Debug, Clone, Copy)]
pub struct MonoidRing<'a> {
    pub srs: &'a Srs,
}

impl WordRing for MonoidRing<'_> {
    type Elem = BTreeMap<Word, i64>;

    fn zero(&self) -> Self::Elem {
        BTreeMap::new()
    }
    fn word(&self, w: &[u32]) -> Self::Elem {
        BTreeMap::from([(w.to_vec(), 1)])
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let mut out = a.clone();
        for (w, k) in b {
            *out.entry(w.clone()).or_insert(0) += k;
        }
        out.retain(|_, k| *k != 0);
        out
    }
    fn scale(&self, a: &Self::Elem, k: i64) -> Self::Elem {
        a.iter().map(|(w, c)| (w.clone(), c * k)).filter(|(_, c)| *c != 0).collect()
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        let mut out = BTreeMap::new();
        for (u, j) in a {
            for (v, k) in b {
                let w = self.srs.normal_form(&[&u[..], &v[..]].concat())?;
                *out.entry(w).or_insert(0) += j * k;
            }
        }
        out.retain(|_, k| *k != 0);
        Ok(out)
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_empty()
    }
    fn unit_sign(&self, a: &Self::Elem) -> Option<i64> {
        match a.iter().next() {
            Some((w, k)) if a.len() == 1 && w.is_empty() && k.abs() == 1 => Some(*k),
            _ => None,
        }
    }
    fn count(&self, a: &Self::Elem) -> i64 {
        a.values().sum()
    }
}

/// `δ(u_1, …, u_n) = u_1 (u_2, …, u_n) + Σ (-1)^i (…, u_i u_{i+1}, …)
/// + (-1)^n (u_1, …, u_{n-1})`, dropping cells with an empty entry.
pub fn bar_boundary<R: WordRing>(srs: &Srs, ring: &R, cell: &[Word]) -> Result<Vec<(R::Elem, WordCell)>> {
    let n = cell.len();
    let mut terms: Vec<(R::Elem, WordCell)> = Vec::new();
    if n == 0 {
        return Ok(terms);
    }
    terms.push((ring.word(&cell[0]), cell[1..].to_vec()));
    for i in 1..n {
        let merged = srs.normal_form(&[&cell[i - 1][..], &cell[i][..]].concat())?;
        if merged.is_empty() {
            continue;
        }
        let mut c: WordCell = cell[..i - 1].to_vec();
        c.push(merged);
        c.extend_from_slice(&cell[i + 1..]);
        terms.push((ring.scale(&ring.word(&[]), sign(i)), c));
    }
    terms.push((ring.scale(&ring.word(&[]), sign(n)), cell[..n - 1].to_vec()));
    Ok(combine(ring, terms))
}

fn sign(i: usize) -> i64 {
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

fn combine<R: WordRing>(ring: &R, terms: Vec<(R::Elem, WordCell)>) -> Vec<(R::Elem, WordCell)> {
    let mut map: BTreeMap<WordCell, R::Elem> = BTreeMap::new();
    for (c, cell) in terms {
        match map.get_mut(&cell) {
            Some(x) => *x = ring.add(x, &c),
            None => {
                map.insert(cell, c);
            }
        }
    }
    map.into_iter().filter(|(_, c)| !ring.is_zero(c)).map(|(k, c)| (c, k)).collect()
}

/// Length of the longest proper prefix of `cell` that is a chain.
fn chain_prefix_length(srs: &Srs, cell: &[Word]) -> usize {
    let mut i = 0;
    while i + 1 < cell.len() && is_word_chain(srs, &cell[..i + 1]) {
        i += 1;
    }
    i
}

/// The Anick matching on the normalized bar resolution.
pub fn classify(srs: &Srs, cell: &[Word]) -> WordMatch {
    if is_word_chain(srs, cell) {
        return WordMatch::Critical;
    }
    let i = chain_prefix_length(srs, cell);
    let next = &cell[i];
    let split = if i == 0 {
        Some(1)
    } else {
        let last = &cell[i - 1];
        (1..=next.len()).find(|&k| srs.is_reducible(&[&last[..], &next[..k]].concat()))
    };
    match split {
        Some(k) => {
            let mut up: WordCell = cell[..i].to_vec();
            up.push(next[..k].to_vec());
            up.push(next[k..].to_vec());
            up.extend_from_slice(&cell[i + 1..]);
            WordMatch::Redundant(up)
        }
        None => {
            let mut down: WordCell = cell[..i - 1].to_vec();
            down.push([&cell[i - 1][..], &next[..]].concat());
            down.extend_from_slice(&cell[i + 1..]);
            WordMatch::Collapsible(down)
        }
    }
}

pub const DEFAULT_WORD_BUDGET: usize = 1_000_000;

type WordExpansion<E> = Vec<(E, WordCell)>;

/// The Morse complex of the normalized bar resolution under the Anick
/// matching.
pub struct MonoidComplex<'a, R: WordRing> {
    pub srs: &'a Srs,
    pub ring: R,
    expansions: RwLock<HashMap<WordCell, WordExpansion<R::Elem>>>,
    pub budget: usize,
}

impl<'a, R: WordRing> MonoidComplex<'a, R> {
    pub fn new(srs: &'a Srs, ring: R) -> Self {
        MonoidComplex { srs, ring, expansions: RwLock::new(HashMap::new()), budget: DEFAULT_WORD_BUDGET }
    }

    fn matched_sign(&self, cell: &WordCell, partner: &WordCell) -> Result<i64> {
        let b = bar_boundary(self.srs, &self.ring, partner)?;
        b.iter()
            .find(|(_, t)| t == cell)
            .and_then(|(c, _)| self.ring.unit_sign(c))
            .ok_or_else(|| Error::TrichotomyViolation(format!("{cell:?}: matched coefficient is not ±1")))
    }

    /// `Some(ε)` for a redundant cell, the coefficient of the cell in the
    /// boundary of its partner.
    pub fn redundant_sign(&self, cell: &WordCell) -> Result<Option<i64>> {
        match classify(self.srs, cell) {
            WordMatch::Redundant(up) => self.matched_sign(cell, &up).map(Some),
            _ => Ok(None),
        }
    }

    fn expand(&self, cell: &WordCell, steps: &mut usize, in_progress: &mut HashSet<WordCell>) -> Result<WordExpansion<R::Elem>> {
        if let Some(hit) = self.expansions.read().expect("cache lock").get(cell) {
            return Ok(hit.clone());
        }
        *steps += 1;
        if *steps > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget, context: "monoid path expansion".into() });
        }
        let out = match classify(self.srs, cell) {
            WordMatch::Critical => vec![(self.ring.word(&[]), cell.clone())],
            WordMatch::Collapsible(_) => Vec::new(),
            WordMatch::Redundant(up) => {
                if !in_progress.insert(cell.clone()) {
                    return Err(Error::BudgetExceeded { budget: self.budget, context: format!("cyclic path through {cell:?}") });
                }
                let eps = self.matched_sign(cell, &up)?;
                let mut acc = Vec::new();
                for (c, target) in bar_boundary(self.srs, &self.ring, &up)? {
                    if target == *cell {
                        continue;
                    }
                    let c = self.ring.scale(&c, -eps);
                    for (e, crit) in self.expand(&target, steps, in_progress)? {
                        acc.push((self.ring.mul(&c, &e)?, crit));
                    }
                }
                in_progress.remove(cell);
                combine(&self.ring, acc)
            }
        };
        self.expansions.write().expect("cache lock").insert(cell.clone(), out.clone());
        Ok(out)
    }

    pub fn morse_differential(&self, cell: &WordCell) -> Result<Vec<(R::Elem, WordCell)>> {
        let mut acc = Vec::new();
        let mut steps = 0;
        let mut in_progress = HashSet::new();
        for (c, target) in bar_boundary(self.srs, &self.ring, cell)? {
            for (e, crit) in self.expand(&target, &mut steps, &mut in_progress)? {
                acc.push((self.ring.mul(&c, &e)?, crit));
            }
        }
        Ok(combine(&self.ring, acc))
    }

    pub fn square(&self, cell: &WordCell) -> Result<Vec<(R::Elem, WordCell)>> {
        let mut acc = Vec::new();
        for (c, target) in self.morse_differential(cell)? {
            for (e, crit) in self.morse_differential(&target)? {
                acc.push((self.ring.mul(&c, &e)?, crit));
            }
        }
        Ok(combine(&self.ring, acc))
    }

    /// Boundary matrices of `Z ⊗_{ZN} F` through dimension `top`.
    pub fn tensor(&self, chains: &WordChains, top: usize) -> Result<TensoredComplex> {
        if top > chains.max_dim() {
            return Err(Error::InsufficientDimension(top));
        }
        let ranks: Vec<usize> = (0..=top).map(|n| chains.dims[n].len()).collect();
        let mut matrices = Vec::new();
        for n in 1..=top {
            let entries: Vec<Vec<i64>> = chains.dims[n]
                .par_iter()
                .map(|cell| {
                    let mut row = vec![0i64; ranks[n - 1]];
                    for (c, target) in self.morse_differential(cell)? {
                        let j = chains.position(&target).expect("Morse differential lands on a chain");
                        row[j] += self.ring.count(&c);
                    }
                    Ok(row)
                })
                .collect::<Result<_>>()?;
            matrices.push(BoundaryMatrix { dim: n, rows: ranks[n], cols: ranks[n - 1], modulus: 0, entries });
        }
        Ok(TensoredComplex { modulus: 0, ranks, matrices })
    }
}

/// `H_0, …, H_{max_dim}` of the monoid with trivial integer coefficients.
pub fn monoid_homology(srs: &Srs, max_dim: usize) -> Result<(WordChains, Vec<HomologyGroup>)> {
    let chains = enumerate_word_chains(srs, max_dim + 1)?;
    let complex = MonoidComplex::new(srs, WordCount);
    let tensored = complex.tensor(&chains, max_dim + 1)?;
    Ok((chains, homology(&tensored)?))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::homology::smith_normal_form;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    pub fn srs(letters: &[&str], rules: &[(&str, &str)]) -> Srs {
        let letters: Vec<String> = letters.iter().map(|s| s.to_string()).collect();
        let word = |s: &str| s.chars().map(|c| letters.iter().position(|l| l == &c.to_string()).unwrap() as u32).collect();
        let rules = rules
            .iter()
            .enumerate()
            .map(|(k, (l, r))| WordRule { name: format!("s{}", k + 1), lhs: word(l), rhs: word(r) })
            .collect();
        Srs::new(letters, rules)
    }

    pub fn z2() -> Srs {
        srs(&["a"], &[("aa", "")])
    }

    /// Elements and multiplication table of a finite monoid, by closing
    /// the letters under multiplication of normal forms.
    fn table(s: &Srs) -> Option<(Vec<Word>, Vec<Vec<usize>>)> {
        let mut elems: Vec<Word> = vec![vec![]];
        let mut k = 0;
        while k < elems.len() {
            for a in 0..s.letters.len() as u32 {
                let w = s.normal_form(&[&elems[k][..], &[a]].concat()).unwrap();
                if !elems.contains(&w) {
                    elems.push(w);
                }
            }
            k += 1;
            if elems.len() > 12 {
                return None;
            }
        }
        let mul = elems
            .iter()
            .map(|u| elems.iter().map(|v| elems.iter().position(|w| *w == s.normal_form(&[&u[..], &v[..]].concat()).unwrap()).unwrap()).collect())
            .collect();
        Some((elems, mul))
    }

    /// Homology of the full normalized bar complex with trivial
    /// coefficients, straight from the multiplication table.
    fn bar_oracle(s: &Srs, max_dim: usize) -> Vec<HomologyGroup> {
        let (elems, mul) = table(s).expect("finite monoid");
        let nonunit: Vec<usize> = (1..elems.len()).collect();
        let mut cells: Vec<Vec<Vec<usize>>> = vec![vec![vec![]]];
        for n in 1..=max_dim + 1 {
            let prev = &cells[n - 1];
            cells.push(prev.iter().flat_map(|c| nonunit.iter().map(move |&x| [&c[..], &[x]].concat())).collect());
        }
        let index = |c: &Vec<usize>, n: usize| cells[n].iter().position(|d| d == c).unwrap();
        let mut matrices = Vec::new();
        for n in 1..=max_dim + 1 {
            let entries = cells[n]
                .iter()
                .map(|c| {
                    let mut row = vec![0i64; cells[n - 1].len()];
                    row[index(&c[1..].to_vec(), n - 1)] += 1;
                    for i in 1..n {
                        let m = mul[c[i - 1]][c[i]];
                        if m != 0 {
                            let mut d = c[..i - 1].to_vec();
                            d.push(m);
                            d.extend_from_slice(&c[i + 1..]);
                            row[index(&d, n - 1)] += sign(i);
                        }
                    }
                    row[index(&c[..n - 1].to_vec(), n - 1)] += sign(n);
                    row
                })
                .collect();
            matrices.push(BoundaryMatrix { dim: n, rows: cells[n].len(), cols: cells[n - 1].len(), modulus: 0, entries });
        }
        let ranks = cells.iter().map(Vec::len).collect();
        homology(&TensoredComplex { modulus: 0, ranks, matrices }).unwrap()
    }

    fn z(rank: usize, torsion: &[i64]) -> HomologyGroup {
        HomologyGroup { rank, torsion: torsion.iter().map(|&t| BigInt::from(t)).collect() }
    }

    #[test]
    fn z2_has_one_chain_per_dimension() {
        let chains = enumerate_word_chains(&z2(), 6).unwrap();
        assert_eq!(chains.counts(), vec![1; 7]);
        assert_eq!(chains.dims[3], vec![vec![vec![0], vec![0], vec![0]]]);
    }

    #[test]
    fn z2_homology() {
        let (_, h) = monoid_homology(&z2(), 4).unwrap();
        assert_eq!(h, vec![z(1, &[]), z(0, &[2]), z(0, &[]), z(0, &[2]), z(0, &[])]);
        assert_eq!(h, bar_oracle(&z2(), 4));
    }

    #[test]
    fn z2_low_boundaries() {
        let s = z2();
        let c = MonoidComplex::new(&s, MonoidRing { srs: &s });
        let d1 = c.morse_differential(&vec![vec![0]]).unwrap();
        assert_eq!(d1, vec![(BTreeMap::from([(vec![], -1), (vec![0], 1)]), vec![])]);
        assert_eq!(MonoidComplex::new(&s, WordCount).morse_differential(&vec![vec![0]]).unwrap(), vec![]);
        let d2 = c.morse_differential(&vec![vec![0], vec![0]]).unwrap();
        assert_eq!(d2, vec![(BTreeMap::from([(vec![], 1), (vec![0], 1)]), vec![vec![0]])]);
    }

    #[test]
    fn free_monoid_has_no_higher_homology() {
        let s = srs(&["a"], &[]);
        let chains = enumerate_word_chains(&s, 3).unwrap();
        assert_eq!(chains.counts(), vec![1, 1, 0, 0]);
        let (_, h) = monoid_homology(&s, 2).unwrap();
        assert_eq!(h, vec![z(1, &[]), z(1, &[]), z(0, &[])]);
    }

    fn fixtures() -> Vec<Srs> {
        vec![
            z2(),
            srs(&["a"], &[("aaa", "")]),
            srs(&["a"], &[("aa", "a")]),
            srs(&["a", "b"], &[("aa", ""), ("bb", ""), ("ba", "ab")]),
            srs(&["a", "b"], &[("aa", "a"), ("bb", "b"), ("ba", "ab")]),
            srs(&["a", "b"], &[("ab", "")]),
        ]
    }

    #[test]
    fn fixtures_are_complete() {
        for s in fixtures() {
            assert!(s.check_complete(&CheckOptions::default()).certified(), "{s:?}");
        }
    }

    #[test]
    fn second_chains_are_rules() {
        for s in fixtures() {
            let chains = enumerate_word_chains(&s, 2).unwrap();
            assert_eq!(chains.counts()[..3], [1, s.letters.len(), s.rules.len()]);
        }
    }

    #[test]
    fn homology_matches_bar_oracle() {
        for s in fixtures() {
            let Some((elems, _)) = table(&s) else { continue };
            let top = if elems.len() <= 3 { 3 } else { 2 };
            let (_, h) = monoid_homology(&s, top).unwrap();
            assert_eq!(h, bar_oracle(&s, top), "{s:?}");
        }
    }

    #[test]
    fn complex_squares_to_zero() {
        for s in fixtures() {
            let chains = enumerate_word_chains(&s, 5).unwrap();
            let ring = MonoidComplex::new(&s, MonoidRing { srs: &s });
            for n in 2..=5 {
                for c in &chains.dims[n] {
                    assert!(ring.square(c).unwrap().is_empty(), "{s:?} {c:?}");
                }
            }
        }
    }

    /// Cells with entries among the nonempty normal words of length ≤ 3.
    fn bar_cells(s: &Srs, max_dim: usize) -> Vec<WordCell> {
        let mut elems: Vec<Word> = vec![vec![]];
        for w in (1..=3).flat_map(|len| all_words(s.letters.len() as u32, len)) {
            let w = s.normal_form(&w).unwrap();
            if !elems.contains(&w) {
                elems.push(w);
            }
        }
        let mut out = vec![vec![]];
        let mut layer: Vec<WordCell> = vec![vec![]];
        for _ in 0..max_dim {
            layer = layer.iter().flat_map(|c| elems[1..].iter().map(move |w| [&c[..], &[w.clone()]].concat())).collect();
            out.extend(layer.iter().cloned());
        }
        out
    }

    fn all_words(letters: u32, len: usize) -> Vec<Word> {
        (0..len).fold(vec![vec![]], |acc, _| acc.iter().flat_map(|w| (0..letters).map(move |a| [&w[..], &[a]].concat())).collect())
    }

    #[test]
    fn matching_is_an_involution_with_unit_signs() {
        for s in fixtures() {
            let c = MonoidComplex::new(&s, MonoidRing { srs: &s });
            for cell in bar_cells(&s, 3) {
                match classify(&s, &cell) {
                    WordMatch::Critical => assert!(is_word_chain(&s, &cell)),
                    WordMatch::Redundant(up) => {
                        assert_eq!(classify(&s, &up), WordMatch::Collapsible(cell.clone()));
                        assert!(c.redundant_sign(&cell).unwrap().is_some());
                    }
                    WordMatch::Collapsible(down) => assert_eq!(classify(&s, &down), WordMatch::Redundant(cell.clone())),
                }
            }
        }
    }

    proptest! {
        #[test]
        fn ring_and_count_modes_agree(k in 0usize..6, n in 1usize..5) {
            let s = &fixtures()[k];
            let chains = enumerate_word_chains(s, n).unwrap();
            let ring = MonoidComplex::new(s, MonoidRing { srs: s });
            let count = MonoidComplex::new(s, WordCount);
            for c in &chains.dims[n] {
                let a: Vec<(i64, WordCell)> = ring.morse_differential(c).unwrap().into_iter().map(|(e, t)| (ring.ring.count(&e), t)).filter(|(k, _)| *k != 0).collect();
                prop_assert_eq!(a, count.morse_differential(c).unwrap());
            }
        }
    }

    #[test]
    fn smith_of_z2_boundaries() {
        let s = z2();
        let chains = enumerate_word_chains(&s, 4).unwrap();
        let t = MonoidComplex::new(&s, WordCount).tensor(&chains, 4).unwrap();
        let diag: Vec<Vec<BigInt>> = t.matrices.iter().map(|m| smith_normal_form(&m.entries)).collect();
        assert_eq!(diag, vec![vec![], vec![BigInt::from(2)], vec![], vec![BigInt::from(2)]]);
    }
}
