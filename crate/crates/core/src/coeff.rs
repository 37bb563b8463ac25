//! Coefficients of the resolution: monomials in the generators
//! `∂_i(f)_σ` with a tail `α*`, the κ expansion, and the Z_d count.
//!
//! A monomial `∂_{i1}(f1)_{σ1} ⋯ ∂_{ik}(fk)_{σk} α*` with `α : A -> B`
//! has all subscripts defined on `A`. Products push tails to the right:
//! `(D1 α1*)(D2 α2*) = D1 D2[σ ↦ σα1] (α2 α1)*`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::Result;
use crate::rewrite::Trs;
use crate::term::{Morphism, OpId, Signature, SortId, Term};

/// Operations the differential needs from a coefficient ring.
pub trait Ring: Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    /// The identity coefficient on objects with domain `base`.
    fn one(&self, base: &[SortId]) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, k: i64) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    /// `∂_i(f)_σ` for a generator `f`.
    fn generator(&self, f: OpId, i: usize, sigma: &Morphism) -> Self::Elem;
    /// `α*`.
    fn tail(&self, alpha: &Morphism) -> Self::Elem;
    /// `κ_i(t)_σ`; `σ` must be in normal form.
    fn kappa(&self, i: usize, t: &Term, sigma: &Morphism) -> Result<Self::Elem>;
    /// `Some(±1)` if `a` is plus or minus an identity.
    fn unit_sign(&self, a: &Self::Elem) -> Option<i64>;
    /// Image in Z/dZ (exact integer for `d = 0`).
    fn count(&self, a: &Self::Elem, d: u64) -> i64;
    /// Whether `a` is provably zero modulo the rule relations. Sound but
    /// not complete for the symbolic ringoid.
    fn vanishes(&self, a: &Self::Elem) -> Result<bool> {
        Ok(self.is_zero(a))
    }
}

/// Reduces `k` into `[0, d)`, or returns it unchanged when `d = 0`.
pub fn reduce_mod(k: i64, d: u64) -> i64 {
    if d == 0 {
        k
    } else {
        k.rem_euclid(d as i64)
    }
}

/// Z_d counts: every monomial maps to 1.
#[derive(Debug, Clone, Copy)]
pub struct CountRing {
    pub modulus: u64,
}

impl Ring for CountRing {
    type Elem = i64;

    fn zero(&self) -> i64 {
        0
    }
    fn one(&self, _: &[SortId]) -> i64 {
        reduce_mod(1, self.modulus)
    }
    fn is_zero(&self, a: &i64) -> bool {
        reduce_mod(*a, self.modulus) == 0
    }
    fn add(&self, a: &i64, b: &i64) -> i64 {
        reduce_mod(a + b, self.modulus)
    }
    fn scale(&self, a: &i64, k: i64) -> i64 {
        reduce_mod(a * k, self.modulus)
    }
    fn mul(&self, a: &i64, b: &i64) -> Result<i64> {
        Ok(reduce_mod(a * b, self.modulus))
    }
    fn generator(&self, _: OpId, _: usize, _: &Morphism) -> i64 {
        self.one(&[])
    }
    fn tail(&self, _: &Morphism) -> i64 {
        self.one(&[])
    }
    fn kappa(&self, i: usize, t: &Term, _: &Morphism) -> Result<i64> {
        Ok(reduce_mod(t.var_count(i as u32) as i64, self.modulus))
    }
    fn unit_sign(&self, a: &i64) -> Option<i64> {
        let a = reduce_mod(*a, self.modulus);
        if a == reduce_mod(1, self.modulus) {
            Some(1)
        } else if a == reduce_mod(-1, self.modulus) {
            Some(-1)
        } else {
            None
        }
    }
    fn count(&self, a: &i64, d: u64) -> i64 {
        reduce_mod(*a, d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub op: OpId,
    /// 0-based argument index.
    pub arg: usize,
    pub subscript: Morphism,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub factors: Vec<Factor>,
    pub tail: Morphism,
}

impl Monomial {
    pub fn identity(base: &[SortId]) -> Monomial {
        Monomial { factors: Vec::new(), tail: Morphism::identity(base) }
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty() && self.tail.is_identity()
    }
}

/// Integer combination of monomials with no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default, PartialOrd, Ord, Hash)]
pub struct RingoidElement {
    pub terms: BTreeMap<Monomial, i64>,
}

impl RingoidElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: Monomial, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        if k != 0 {
            terms.insert(m, k);
        }
        RingoidElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, k: i64) {
        if k == 0 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(k);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += k;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, k) in &other.terms {
            out.add_term(m.clone(), *k);
        }
        out
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::zero();
        }
        RingoidElement { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    /// Sum of coefficients mod `d`.
    pub fn zd_count(&self, d: u64) -> i64 {
        reduce_mod(self.terms.values().sum(), d)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> ElementDisplay<'a> {
        ElementDisplay { e: self, sig }
    }
}

pub struct ElementDisplay<'a> {
    e: &'a RingoidElement,
    sig: &'a Signature,
}

impl fmt::Display for ElementDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, k)) in self.e.terms.iter().enumerate() {
            let (sign, mag) = if *k < 0 { ("-", -k) } else { ("+", *k) };
            if n > 0 {
                write!(f, " {sign} ")?;
            } else if sign == "-" {
                write!(f, "-")?;
            }
            if mag != 1 {
                write!(f, "{mag}·")?;
            }
            for fa in &m.factors {
                write!(f, "∂{}({})_{{{}}}", fa.arg + 1, self.sig.op(fa.op).name, fa.subscript.display(self.sig))?;
            }
            if m.factors.is_empty() || !m.tail.is_identity() {
                if m.tail.is_identity() {
                    write!(f, "id")?;
                } else {
                    write!(f, "{}*", m.tail.display(self.sig))?;
                }
            }
        }
        Ok(())
    }
}

/// The presented enveloping ringoid, with subscripts and tails kept in
/// R-normal form.
pub struct SymbolicRing<'a> {
    pub trs: &'a Trs,
}

impl<'a> SymbolicRing<'a> {
    pub fn new(trs: &'a Trs) -> Self {
        SymbolicRing { trs }
    }

    fn mul_monomial(&self, a: &Monomial, b: &Monomial) -> Result<Monomial> {
        let mut factors = a.factors.clone();
        for fa in &b.factors {
            let subscript = self.trs.normal_form_morphism(&fa.subscript.compose(&a.tail, &self.trs.sig)?)?;
            factors.push(Factor { op: fa.op, arg: fa.arg, subscript });
        }
        let tail = self.trs.normal_form_morphism(&b.tail.compose(&a.tail, &self.trs.sig)?)?;
        Ok(Monomial { factors, tail })
    }

    /// Factor lists of `κ_i(t)_σ`, one per occurrence of `x_i` in `t`.
    pub fn kappa_factors(&self, i: usize, t: &Term, sigma: &Morphism) -> Result<Vec<Vec<Factor>>> {
        match t {
            Term::Var(v) => Ok(if v.index as usize == i { vec![Vec::new()] } else { Vec::new() }),
            Term::App(f, args) => {
                let mut out = Vec::new();
                let mut subscript: Option<Morphism> = None;
                for (j, a) in args.iter().enumerate() {
                    if !a.contains_var(i as u32) {
                        continue;
                    }
                    if subscript.is_none() {
                        let m = Morphism::new(sigma.domain.clone(), args.iter().map(|s| s.apply(&sigma.terms)).collect());
                        subscript = Some(self.trs.normal_form_morphism(&m)?);
                    }
                    let head = Factor { op: *f, arg: j, subscript: subscript.clone().expect("set above") };
                    for rest in self.kappa_factors(i, a, sigma)? {
                        let mut fs = Vec::with_capacity(rest.len() + 1);
                        fs.push(head.clone());
                        fs.extend(rest);
                        out.push(fs);
                    }
                }
                Ok(out)
            }
        }
    }
}

impl Ring for SymbolicRing<'_> {
    type Elem = RingoidElement;

    fn zero(&self) -> RingoidElement {
        RingoidElement::zero()
    }
    fn one(&self, base: &[SortId]) -> RingoidElement {
        RingoidElement::monomial(Monomial::identity(base), 1)
    }
    fn is_zero(&self, a: &RingoidElement) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &RingoidElement, b: &RingoidElement) -> RingoidElement {
        a.add(b)
    }
    fn scale(&self, a: &RingoidElement, k: i64) -> RingoidElement {
        a.scale(k)
    }
    fn mul(&self, a: &RingoidElement, b: &RingoidElement) -> Result<RingoidElement> {
        let mut out = RingoidElement::zero();
        for (ma, ka) in &a.terms {
            for (mb, kb) in &b.terms {
                out.add_term(self.mul_monomial(ma, mb)?, ka * kb);
            }
        }
        Ok(out)
    }
    fn generator(&self, f: OpId, i: usize, sigma: &Morphism) -> RingoidElement {
        let m = Monomial {
            factors: vec![Factor { op: f, arg: i, subscript: sigma.clone() }],
            tail: Morphism::identity(&sigma.domain),
        };
        RingoidElement::monomial(m, 1)
    }
    fn tail(&self, alpha: &Morphism) -> RingoidElement {
        RingoidElement::monomial(Monomial { factors: Vec::new(), tail: alpha.clone() }, 1)
    }
    fn kappa(&self, i: usize, t: &Term, sigma: &Morphism) -> Result<RingoidElement> {
        let mut out = RingoidElement::zero();
        for factors in self.kappa_factors(i, t, sigma)? {
            out.add_term(Monomial { factors, tail: Morphism::identity(&sigma.domain) }, 1);
        }
        Ok(out)
    }
    fn unit_sign(&self, a: &RingoidElement) -> Option<i64> {
        match a.terms.iter().next() {
            Some((m, k)) if a.terms.len() == 1 && m.is_identity() && k.abs() == 1 => Some(*k),
            _ => None,
        }
    }
    fn count(&self, a: &RingoidElement, d: u64) -> i64 {
        a.zd_count(d)
    }
    fn vanishes(&self, a: &RingoidElement) -> Result<bool> {
        crate::relations::vanishes(self, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::tests::abelian;
    use crate::rewrite::Rule;
    use crate::sample::random_term;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn group() -> Trs {
        let mut sig = Signature::new();
        let g = sig.add_sort("G").unwrap();
        let mul = sig.add_op("mul", vec![g, g], g).unwrap();
        let inv = sig.add_op("inv", vec![g], g).unwrap();
        let e = sig.add_op("e", vec![], g).unwrap();
        let x = Term::var(0, g);
        let ex = Term::App(mul, vec![Term::constant(e), x.clone()]);
        let ix = Term::App(inv, vec![x.clone()]);
        let r1 = Rule::new("l", ex, x.clone(), vec![], &sig).unwrap();
        let r2 = Rule::new("i", Term::App(mul, vec![ix, x.clone()]), Term::constant(e), vec![], &sig).unwrap();
        Trs::new(sig, vec![r1, r2])
    }

    #[test]
    fn kappa_base_cases() {
        let r = abelian();
        let ring = SymbolicRing::new(&r);
        let x = SortId(0);
        let id = Morphism::identity(&[x, x]);
        assert_eq!(ring.kappa(0, &Term::var(0, x), &id).unwrap(), ring.one(&[x, x]));
        assert!(ring.kappa(1, &Term::var(0, x), &id).unwrap().is_zero());
    }

    #[test]
    fn kappa_counts_occurrences() {
        let r = abelian();
        let ring = SymbolicRing::new(&r);
        let x = SortId(0);
        let plus = r.sig.op_id("plus").unwrap();
        let zero = Term::constant(r.sig.op_id("zero").unwrap());
        let xx = Term::App(plus, vec![Term::var(0, x), Term::var(0, x)]);
        let id = Morphism::identity(&[x]);
        let k = ring.kappa(0, &xx, &id).unwrap();
        assert_eq!(k.len(), 2);
        let sub = Morphism::new(vec![x], vec![Term::var(0, x), Term::var(0, x)]);
        let expected = ring.generator(plus, 0, &sub).add(&ring.generator(plus, 1, &sub));
        assert_eq!(k, expected);
        assert_eq!(k.zd_count(0), 2);
        let zx = Term::App(plus, vec![zero.clone(), Term::var(0, x)]);
        let k = ring.kappa(0, &zx, &id).unwrap();
        let sub = Morphism::new(vec![x], vec![zero, Term::var(0, x)]);
        assert_eq!(k, ring.generator(plus, 1, &sub));
    }

    #[test]
    fn products() {
        let r = abelian();
        let ring = SymbolicRing::new(&r);
        let x = SortId(0);
        let plus = r.sig.op_id("plus").unwrap();
        let zero = Term::constant(r.sig.op_id("zero").unwrap());
        let sigma = Morphism::identity(&[x, x]);
        let d = ring.generator(plus, 0, &sigma);
        let one = ring.one(&[x, x]);
        assert_eq!(ring.mul(&one, &d).unwrap(), d);
        assert_eq!(ring.mul(&d, &one).unwrap(), d);
        // α* ∂_1(+)_σ = ∂_1(+)_{σα} α*
        let alpha = Morphism::new(vec![x], vec![Term::var(0, x), zero.clone()]);
        let lhs = ring.mul(&ring.tail(&alpha), &d).unwrap();
        let sa = r.normal_form_morphism(&sigma.compose(&alpha, &r.sig).unwrap()).unwrap();
        let rhs = ring.mul(&ring.generator(plus, 0, &sa), &ring.tail(&alpha)).unwrap();
        assert_eq!(lhs, rhs);
        // Distinct subscripts do not cancel: 2 × 3 monomials give 6.
        let a = ring.generator(plus, 0, &sigma).add(&ring.generator(plus, 1, &sigma));
        let s2 = Morphism::new(vec![x, x], vec![Term::var(1, x), Term::var(0, x)]);
        let s3 = Morphism::new(vec![x, x], vec![Term::var(0, x), Term::var(0, x)]);
        let b = ring.generator(plus, 0, &sigma).add(&ring.generator(plus, 0, &s2)).add(&ring.generator(plus, 0, &s3));
        assert_eq!(ring.mul(&a, &b).unwrap().len(), 6);
        let c = ring.generator(plus, 0, &sigma).add(&ring.generator(plus, 1, &s2).scale(-1));
        assert_eq!(c.zd_count(0), 0);
        assert_eq!(RingoidElement::zero().zd_count(5), 0);
    }

    #[test]
    fn kappa_count_law_on_group_terms() {
        let r = group();
        let ring = SymbolicRing::new(&r);
        let g = SortId(0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let ctx = vec![g, g, g];
        for _ in 0..100 {
            let t = random_term(&r.sig, g, 4, &ctx, &mut rng).unwrap();
            let id = Morphism::identity(&ctx);
            for i in 0..3 {
                let k = ring.kappa(i, &t, &id).unwrap();
                assert_eq!(k.zd_count(0), t.var_count(i as u32) as i64);
            }
        }
    }

    fn arb_sub(sorts: Vec<SortId>, dom: Vec<SortId>) -> impl Strategy<Value = Morphism> {
        let r = abelian();
        let sig = r.sig.clone();
        any::<u64>().prop_map(move |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let terms = sorts.iter().map(|s| random_term(&sig, *s, 2, &dom, &mut rng).unwrap()).collect();
            Morphism::new(dom.clone(), terms)
        })
    }

    proptest! {
        #[test]
        fn tail_push_through_kappa(t_seed in any::<u64>(), sigma in arb_sub(vec![SortId(0); 2], vec![SortId(0); 2]), alpha in arb_sub(vec![SortId(0); 2], vec![SortId(0); 3])) {
            let r = abelian();
            let ring = SymbolicRing::new(&r);
            let x = SortId(0);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(t_seed);
            let t = random_term(&r.sig, x, 3, &[x, x], &mut rng).unwrap();
            let sigma = r.normal_form_morphism(&sigma).unwrap();
            let sa = r.normal_form_morphism(&sigma.compose(&alpha, &r.sig).unwrap()).unwrap();
            for i in 0..2 {
                let lhs = ring.mul(&ring.tail(&alpha), &ring.kappa(i, &t, &sigma).unwrap()).unwrap();
                let rhs = ring.mul(&ring.kappa(i, &t, &sa).unwrap(), &ring.tail(&alpha)).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn products_associate_and_count_multiplicatively(a in arb_sub(vec![SortId(0); 2], vec![SortId(0); 2]), b in arb_sub(vec![SortId(0); 2], vec![SortId(0); 2]), c in arb_sub(vec![SortId(0); 1], vec![SortId(0); 2]), d in 2u64..7) {
            let r = abelian();
            let ring = SymbolicRing::new(&r);
            let x = SortId(0);
            let plus = r.sig.op_id("plus").unwrap();
            let a = r.normal_form_morphism(&a).unwrap();
            let b = r.normal_form_morphism(&b).unwrap();
            // Elements with matching objects: tails b, c and generator factors.
            let e1 = ring.generator(plus, 0, &a).add(&ring.tail(&b));
            let e2 = ring.kappa(0, &Term::App(plus, vec![Term::var(0, x), Term::var(0, x)]), &b).unwrap().add(&ring.tail(&Morphism::identity(&[x, x])));
            let e3 = ring.tail(&c).add(&ring.tail(&c).scale(2));
            let left = ring.mul(&ring.mul(&e1, &e2).unwrap(), &e3).unwrap();
            let right = ring.mul(&e1, &ring.mul(&e2, &e3).unwrap()).unwrap();
            prop_assert_eq!(&left, &right);
            let p = ring.mul(&e1, &e2).unwrap();
            prop_assert_eq!(p.zd_count(d), reduce_mod(e1.zd_count(d) * e2.zd_count(d), d));
        }
    }
}
