//! Syntactic matching and most general unifiers.

use crate::term::{Morphism, Position, SortId, Substitution, Term};

/// Finds `σ` with `pattern σ = subject`. Repeated pattern variables must
/// bind syntactically equal subterms.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    match_into(pattern, subject, &mut sigma).then_some(sigma)
}

pub(crate) fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::Var(v), _) => {
            if let Term::Var(w) = subject {
                if w.sort != v.sort {
                    return false;
                }
            }
            match sigma.get(&v.index) {
                Some(bound) => bound == subject,
                None => {
                    sigma.insert(v.index, subject.clone());
                    true
                }
            }
        }
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.iter().zip(ys).all(|(x, y)| match_into(x, y, sigma))
        }
        (Term::App(..), Term::Var(_)) => false,
    }
}

/// A most general unifier of two morphisms with equal codomain.
///
/// `left` and `right` share the domain `Z`, ordered by first occurrence
/// across `left` then `right`; `unified` is `t ∘ left = s ∘ right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unifier {
    pub left: Morphism,
    pub right: Morphism,
    pub unified: Morphism,
}

/// Unifies `t : A -> Y` and `s : B -> Y` after renaming their contexts apart.
pub fn mgu_morphisms(t: &Morphism, s: &Morphism) -> Option<Unifier> {
    if t.terms.len() != s.terms.len() {
        return None;
    }
    let offset = t.domain.len() as u32;
    let mut sorts: Vec<SortId> = t.domain.clone();
    sorts.extend_from_slice(&s.domain);
    let eqs = t
        .terms
        .iter()
        .cloned()
        .zip(s.terms.iter().map(|u| u.rename(&|i| i + offset)))
        .collect();
    let resolved = solve(eqs, &sorts)?;
    let (canon, _) = Morphism::new(sorts, resolved).canonicalize();
    let left = Morphism::new(canon.domain.clone(), canon.terms[..offset as usize].to_vec());
    let right = Morphism::new(canon.domain.clone(), canon.terms[offset as usize..].to_vec());
    let unified = t.compose_unchecked(&left);
    Some(Unifier { left, right, unified })
}

/// Unifies two terms whose variables live in one shared namespace.
pub fn unify_shared(t: &Term, s: &Term) -> Option<Substitution> {
    let n = t.max_var().max(s.max_var()).map_or(0, |m| m as usize + 1);
    let mut sorts = vec![SortId(0); n];
    for v in t.vars().into_iter().chain(s.vars()) {
        sorts[v.index as usize] = v.sort;
    }
    let resolved = solve(vec![(t.clone(), s.clone())], &sorts)?;
    let used: Vec<u32> = t.vars().into_iter().chain(s.vars()).map(|v| v.index).collect();
    Some(
        resolved
            .into_iter()
            .enumerate()
            .filter(|(i, _)| used.contains(&(*i as u32)))
            .map(|(i, t)| (i as u32, t))
            .collect(),
    )
}

/// Robinson unification with occurs check; returns the fully resolved
/// image of every variable.
fn solve(mut eqs: Vec<(Term, Term)>, sorts: &[SortId]) -> Option<Vec<Term>> {
    let mut bindings: Vec<Option<Term>> = vec![None; sorts.len()];
    while let Some((a, b)) = eqs.pop() {
        let a = walk(&a, &bindings);
        let b = walk(&b, &bindings);
        match (&a, &b) {
            (Term::Var(v), Term::Var(w)) if v.index == w.index => {}
            (Term::Var(v), other) | (other, Term::Var(v)) => {
                if v.sort != other_sort(other, sorts, v.sort) {
                    return None;
                }
                if occurs(v.index, other, &bindings) {
                    return None;
                }
                bindings[v.index as usize] = Some(other.clone());
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                eqs.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
        }
    }
    Some(
        (0..sorts.len() as u32)
            .map(|i| resolve(&Term::var(i, sorts[i as usize]), &bindings))
            .collect(),
    )
}

/// Unifies two terms over their own (canonicalized) contexts.
pub fn mgu(t: &Term, s: &Term) -> Option<Unifier> {
    mgu_morphisms(&context_of(t), &context_of(s))
}

/// The term as an essential morphism over its variables.
pub fn context_of(t: &Term) -> Morphism {
    let n = t.max_var().map_or(0, |m| m as usize + 1);
    let mut domain = vec![SortId(0); n];
    for v in t.vars() {
        domain[v.index as usize] = v.sort;
    }
    Morphism::single(domain, t.clone()).essential()
}

/// All `(p, σ)` with `pattern σ = t|_p`.
pub fn generalized_subterm_occurrences(pattern: &Term, t: &Term) -> Vec<(Position, Substitution)> {
    t.positions()
        .into_iter()
        .filter_map(|p| {
            let sub = t.subterm_at(&p).expect("own position");
            match_term(pattern, sub).map(|s| (p, s))
        })
        .collect()
}

fn other_sort(t: &Term, sorts: &[SortId], fallback: SortId) -> SortId {
    match t {
        Term::Var(w) => sorts[w.index as usize],
        // Applications are sort-checked by the caller's signature; the
        // head symbol already fixes the sort, so accept.
        Term::App(..) => fallback,
    }
}

fn walk(t: &Term, bindings: &[Option<Term>]) -> Term {
    let mut cur = t.clone();
    while let Term::Var(v) = &cur {
        match &bindings[v.index as usize] {
            Some(next) => cur = next.clone(),
            None => break,
        }
    }
    cur
}

fn occurs(index: u32, t: &Term, bindings: &[Option<Term>]) -> bool {
    match walk(t, bindings) {
        Term::Var(v) => v.index == index,
        Term::App(_, args) => args.iter().any(|a| occurs(index, a, bindings)),
    }
}

fn resolve(t: &Term, bindings: &[Option<Term>]) -> Term {
    match walk(t, bindings) {
        Term::Var(v) => Term::Var(v),
        Term::App(f, args) => Term::App(f, args.iter().map(|a| resolve(a, bindings)).collect()),
    }
}
