//! Term rewriting: steps, normal forms, critical pairs, completeness
//! checks, reduced systems and the degree.

use std::collections::HashMap;
use std::sync::RwLock;

use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sample::random_term;
use crate::term::{Morphism, OpId, Position, Signature, SortId, Term};
use crate::unify::{match_into, match_term, mgu_morphisms};

/// An oriented equation. Variables are numbered by first occurrence in
/// the left-hand side, so the context is `lhs.vars()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
    /// User-facing variable names, by index.
    pub var_names: Vec<String>,
}

impl Rule {
    /// Validates and renumbers variables by first occurrence in `lhs`.
    pub fn new(name: &str, lhs: Term, rhs: Term, var_names: Vec<String>, sig: &Signature) -> Result<Rule> {
        let ls = lhs.check(sig)?;
        let rs = rhs.check(sig)?;
        if ls != rs {
            return Err(sig.mismatch(ls, rs));
        }
        if lhs.is_var() {
            return Err(Error::VariableOnLhsRoot(name.to_string()));
        }
        let lvars = lhs.vars();
        for v in rhs.vars() {
            if !lvars.contains(&v) {
                let var = var_names.get(v.index as usize).cloned().unwrap_or_else(|| format!("x{}", v.index + 1));
                return Err(Error::RhsVariableNotInLhs { rule: name.to_string(), var });
            }
        }
        let rename = |i: u32| lvars.iter().position(|v| v.index == i).unwrap() as u32;
        let names = lvars
            .iter()
            .map(|v| var_names.get(v.index as usize).cloned().unwrap_or_else(|| format!("x{}", v.index + 1)))
            .collect();
        Ok(Rule { name: name.to_string(), lhs: lhs.rename(&rename), rhs: rhs.rename(&rename), var_names: names })
    }

    pub fn context(&self) -> Vec<SortId> {
        self.lhs.vars().iter().map(|v| v.sort).collect()
    }

    pub fn lhs_morphism(&self) -> Morphism {
        Morphism::single(self.context(), self.lhs.clone())
    }

    pub fn rhs_morphism(&self) -> Morphism {
        Morphism::single(self.context(), self.rhs.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Rewrite steps allowed for one normal-form computation.
    pub max_steps: usize,
    /// Rewrite steps allowed per side when joining a critical pair.
    pub join_steps: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { max_steps: 10_000, join_steps: 1_000 }
    }
}

#[derive(Debug)]
pub struct Trs {
    pub sig: Signature,
    rules: Vec<Rule>,
    by_root: HashMap<OpId, Vec<usize>>,
    pub budgets: Budgets,
    cache: RwLock<HashMap<Term, Term>>,
}

impl Clone for Trs {
    fn clone(&self) -> Self {
        Trs::with_budgets(self.sig.clone(), self.rules.clone(), self.budgets)
    }
}

impl PartialEq for Trs {
    fn eq(&self, other: &Self) -> bool {
        self.sig == other.sig && self.rules == other.rules
    }
}

const CACHE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: usize,
    pub position: Position,
    pub result: Term,
}

impl Trs {
    /// Rules are ranked by their position in `rules`.
    pub fn new(sig: Signature, rules: Vec<Rule>) -> Trs {
        Trs::with_budgets(sig, rules, Budgets::default())
    }

    pub fn with_budgets(sig: Signature, rules: Vec<Rule>, budgets: Budgets) -> Trs {
        let mut by_root: HashMap<OpId, Vec<usize>> = HashMap::new();
        for (k, r) in rules.iter().enumerate() {
            if let Term::App(f, _) = &r.lhs {
                by_root.entry(*f).or_default().push(k);
            }
        }
        Trs { sig, rules, by_root, budgets, cache: RwLock::new(HashMap::new()) }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, k: usize) -> &Rule {
        &self.rules[k]
    }

    pub fn rule_index(&self, name: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.name == name)
    }

    /// Same rules in a different rank order (`order[k]` is the old index).
    pub fn reordered(&self, order: &[usize]) -> Trs {
        let rules = order.iter().map(|&k| self.rules[k].clone()).collect();
        Trs::with_budgets(self.sig.clone(), rules, self.budgets)
    }

    fn root_rules(&self, t: &Term) -> &[usize] {
        match t {
            Term::App(f, _) => self.by_root.get(f).map_or(&[], Vec::as_slice),
            Term::Var(_) => &[],
        }
    }

    /// Rules whose left-hand side matches `t` at the root, in rank order.
    pub fn root_matches<'a>(&'a self, t: &'a Term) -> impl Iterator<Item = (usize, crate::term::Substitution)> + 'a {
        self.root_rules(t).iter().filter_map(move |&k| match_term(&self.rules[k].lhs, t).map(|s| (k, s)))
    }

    pub fn is_root_redex(&self, t: &Term) -> bool {
        let mut s = crate::term::Substitution::new();
        self.root_rules(t).iter().any(|&k| {
            s.clear();
            match_into(&self.rules[k].lhs, t, &mut s)
        })
    }

    pub fn is_normal(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) => true,
            Term::App(_, args) => args.iter().all(|a| self.is_normal(a)) && !self.is_root_redex(t),
        }
    }

    pub fn is_normal_morphism(&self, m: &Morphism) -> bool {
        m.terms.iter().all(|t| self.is_normal(t))
    }

    /// All one-step reducts, by position then rule rank.
    pub fn rewrite_steps(&self, t: &Term) -> Vec<RewriteStep> {
        let mut out = Vec::new();
        for p in t.op_positions() {
            let sub = t.subterm_at(&p).expect("own position");
            for (k, sigma) in self.root_matches(sub) {
                let reduct = self.rules[k].rhs.substitute(&sigma).expect("rhs vars bound by lhs");
                out.push(RewriteStep { rule: k, position: p.clone(), result: t.replace_at(&p, reduct).expect("own position") });
            }
        }
        out
    }

    /// Leftmost-innermost normal form within the step budget.
    pub fn normal_form(&self, t: &Term) -> Result<Term> {
        self.normal_form_budget(t, self.budgets.max_steps)
    }

    pub fn normal_form_budget(&self, t: &Term, budget: usize) -> Result<Term> {
        let mut steps = 0;
        self.nf(t, &mut steps, budget)
    }

    fn nf(&self, t: &Term, steps: &mut usize, budget: usize) -> Result<Term> {
        let Term::App(f, args) = t else { return Ok(t.clone()) };
        if let Some(hit) = self.cache.read().expect("cache lock").get(t) {
            return Ok(hit.clone());
        }
        let args = args.iter().map(|a| self.nf(a, steps, budget)).collect::<Result<Vec<_>>>()?;
        let t1 = Term::App(*f, args);
        let hit = self.root_matches(&t1).next();
        let result = match hit {
            None => t1,
            Some((k, sigma)) => {
                *steps += 1;
                if *steps > budget {
                    return Err(Error::BudgetExceeded {
                        budget,
                        context: format!("normalizing {}", t.display(&self.sig)),
                    });
                }
                let reduct = self.rules[k].rhs.substitute(&sigma).expect("rhs vars bound by lhs");
                self.nf(&reduct, steps, budget)?
            }
        };
        let mut cache = self.cache.write().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(t.clone(), result.clone());
        Ok(result)
    }

    pub fn normal_form_morphism(&self, m: &Morphism) -> Result<Morphism> {
        Ok(Morphism::new(m.domain.clone(), m.terms.iter().map(|t| self.normal_form(t)).collect::<Result<_>>()?))
    }

    /// `f ⋆ g`: raw composition followed by normalization.
    pub fn star(&self, f: &Morphism, g: &Morphism) -> Result<Morphism> {
        self.normal_form_morphism(&f.compose(g, &self.sig)?)
    }

    pub fn critical_pairs(&self) -> Vec<CriticalPair> {
        let mut out = Vec::new();
        for (i, r1) in self.rules.iter().enumerate() {
            let ctx1 = r1.context();
            for p in r1.lhs.op_positions() {
                let sub = Morphism::single(ctx1.clone(), r1.lhs.subterm_at(&p).expect("own position").clone());
                for (j, r2) in self.rules.iter().enumerate() {
                    if i == j && p.0.is_empty() {
                        continue;
                    }
                    let Some(u) = mgu_morphisms(&sub, &r2.lhs_morphism()) else { continue };
                    let peak = r1.lhs.apply(&u.left.terms);
                    let left = r1.rhs.apply(&u.left.terms);
                    let right = peak.replace_at(&p, r2.rhs.apply(&u.right.terms)).expect("own position");
                    out.push(CriticalPair { outer: i, inner: j, position: p.clone(), domain: u.left.domain.clone(), peak, left, right });
                }
            }
        }
        out
    }

    pub fn check_complete(&self, opts: &CheckOptions) -> CompletenessReport {
        let mut report = CompletenessReport { assumed_terminating: opts.assume_terminating, ..Default::default() };
        for (k, r) in self.rules.iter().enumerate() {
            let others: Vec<Rule> = self.rules.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, r)| r.clone()).collect();
            let rest = Trs::new(self.sig.clone(), others);
            if !rest.is_normal(&r.lhs) {
                report.reducedness_failures.push(format!("left-hand side of {} is reducible by another rule", r.name));
            }
            if !self.is_normal(&r.rhs) {
                report.reducedness_failures.push(format!("right-hand side of {} is reducible", r.name));
            }
        }
        let pairs = self.critical_pairs();
        report.critical_pairs = pairs.len();
        let mut sample: Vec<Term> = Vec::new();
        for cp in &pairs {
            if cp.left != cp.right {
                report.nontrivial_pairs += 1;
            }
            let a = self.normal_form_budget(&cp.left, opts.cp_budget);
            let b = self.normal_form_budget(&cp.right, opts.cp_budget);
            match (a, b) {
                (Ok(a), Ok(b)) if a == b => {}
                (Ok(a), Ok(b)) => report.unjoinable.push(format!(
                    "{} / {} at {}: {} and {} have distinct normal forms {} and {}",
                    self.rules[cp.outer].name,
                    self.rules[cp.inner].name,
                    cp.position,
                    cp.left.display(&self.sig),
                    cp.right.display(&self.sig),
                    a.display(&self.sig),
                    b.display(&self.sig)
                )),
                (Err(e), _) | (_, Err(e)) => report.unjoinable.push(format!(
                    "{} / {} at {}: {e}",
                    self.rules[cp.outer].name, self.rules[cp.inner].name, cp.position
                )),
            }
            sample.push(cp.peak.clone());
        }
        for r in &self.rules {
            sample.push(r.lhs.clone());
            sample.push(r.rhs.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for s in self.sig.sort_ids() {
            let vars: Vec<SortId> = self.sig.sort_ids().flat_map(|s| [s, s]).collect();
            for _ in 0..opts.samples {
                if let Some(t) = random_term(&self.sig, s, opts.sample_depth, &vars, &mut rng) {
                    sample.push(t);
                }
            }
        }
        report.probed_terms = sample.len();
        for t in &sample {
            if let Err(e) = self.normal_form_budget(t, opts.term_budget) {
                report.termination_failures.push(e.to_string());
                break;
            }
        }
        report
    }

    /// Normalizes right-hand sides, drops duplicates, then drops rules
    /// whose left-hand side is reducible by the remaining ones.
    pub fn reduce(&self) -> Result<Trs> {
        let mut normalized: Vec<Rule> = Vec::new();
        for r in &self.rules {
            let rhs = self.normal_form(&r.rhs)?;
            let rule = Rule { rhs, ..r.clone() };
            if !normalized.iter().any(|q| q.lhs == rule.lhs && q.rhs == rule.rhs) {
                normalized.push(rule);
            }
        }
        let kept: Vec<Rule> = (0..normalized.len())
            .filter(|&k| {
                let others = normalized.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, r)| r.clone()).collect();
                Trs::new(self.sig.clone(), others).is_normal(&normalized[k].lhs)
            })
            .map(|k| normalized[k].clone())
            .collect();
        Ok(Trs::with_budgets(self.sig.clone(), kept, self.budgets))
    }

    /// gcd of `|#x l − #x r|` over rules and variables of the left side.
    pub fn degree(&self) -> u64 {
        let mut d: u64 = 0;
        for r in &self.rules {
            for v in r.lhs.vars() {
                let a = r.lhs.var_count(v.index) as i64;
                let b = r.rhs.var_count(v.index) as i64;
                d = d.gcd(&(a - b).unsigned_abs());
            }
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPair {
    /// Rule whose left-hand side hosts the overlap.
    pub outer: usize,
    /// Rule applied at `position` inside the outer left-hand side.
    pub inner: usize,
    pub position: Position,
    pub domain: Vec<SortId>,
    pub peak: Term,
    pub left: Term,
    pub right: Term,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub cp_budget: usize,
    pub term_budget: usize,
    pub assume_terminating: bool,
    pub samples: usize,
    pub sample_depth: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { cp_budget: 1_000, term_budget: 10_000, assume_terminating: false, samples: 200, sample_depth: 4, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CompletenessReport {
    pub reducedness_failures: Vec<String>,
    pub critical_pairs: usize,
    pub nontrivial_pairs: usize,
    pub unjoinable: Vec<String>,
    pub probed_terms: usize,
    pub termination_failures: Vec<String>,
    pub assumed_terminating: bool,
}

impl CompletenessReport {
    pub fn reduced(&self) -> bool {
        self.reducedness_failures.is_empty()
    }

    pub fn locally_confluent(&self) -> bool {
        self.unjoinable.is_empty()
    }

    pub fn termination_probe_passed(&self) -> bool {
        self.termination_failures.is_empty()
    }

    /// Reduced, locally confluent and the termination probe passed.
    pub fn certified(&self) -> bool {
        self.reduced() && self.locally_confluent() && self.termination_probe_passed()
    }

    pub fn first_failure(&self) -> Option<String> {
        self.reducedness_failures
            .first()
            .or(self.unjoinable.first())
            .or(self.termination_failures.first())
            .cloned()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::term::tests::abelian_sig;
    use proptest::prelude::*;

    pub fn abelian() -> Trs {
        let (sig, x, plus, zero) = abelian_sig();
        let v = Term::var(0, x);
        let z = Term::constant(zero);
        let r1 = Rule::new("r1", Term::App(plus, vec![v.clone(), z.clone()]), v.clone(), vec!["x".into()], &sig).unwrap();
        let r2 = Rule::new("r2", Term::App(plus, vec![z, v.clone()]), v, vec!["x".into()], &sig).unwrap();
        Trs::new(sig, vec![r1, r2])
    }

    pub fn unary(rules: &[(&str, &str)]) -> Trs {
        // Terms over unary f, g and a constant c, written as strings like "ffx".
        let mut sig = Signature::new();
        let s = sig.add_sort("S").unwrap();
        let f = sig.add_op("f", vec![s], s).unwrap();
        let g = sig.add_op("g", vec![s], s).unwrap();
        let c = sig.add_op("c", vec![], s).unwrap();
        let parse = |w: &str| {
            let mut t = match w.chars().last() {
                Some('x') => Term::var(0, s),
                Some('c') => Term::constant(c),
                _ => panic!("bad word"),
            };
            for ch in w.chars().rev().skip(1) {
                t = Term::App(if ch == 'f' { f } else { g }, vec![t]);
            }
            t
        };
        let rules = rules
            .iter()
            .enumerate()
            .map(|(k, (l, r))| Rule::new(&format!("u{k}"), parse(l), parse(r), vec!["x".into()], &sig).unwrap())
            .collect();
        Trs::new(sig, rules)
    }

    #[test]
    fn steps_and_normal_forms() {
        let r = abelian();
        let plus = r.sig.op_id("plus").unwrap();
        let z = Term::constant(r.sig.op_id("zero").unwrap());
        let zz = Term::App(plus, vec![z.clone(), z.clone()]);
        let steps = r.rewrite_steps(&zz);
        assert_eq!(steps.len(), 2);
        assert!(steps.iter().all(|s| s.result == z));
        assert!(r.rewrite_steps(&Term::var(0, SortId(0))).is_empty());
        let x0 = Term::App(plus, vec![Term::var(0, SortId(0)), z.clone()]);
        let t = Term::App(plus, vec![x0, z.clone()]);
        let positions: Vec<_> = r.rewrite_steps(&t).into_iter().map(|s| s.position).collect();
        assert_eq!(positions, vec![Position::root(), Position(vec![1])]);
        assert_eq!(r.normal_form(&zz).unwrap(), z);
        let zzz = Term::App(plus, vec![zz.clone(), z.clone()]);
        assert_eq!(r.normal_form(&zzz).unwrap(), z);
        assert_eq!(r.normal_form(&Term::var(3, SortId(0))).unwrap(), Term::var(3, SortId(0)));
    }

    #[test]
    fn abelian_critical_pairs() {
        let r = abelian();
        let cps = r.critical_pairs();
        // r1 / r2 and r2 / r1 at the root, both with peak 0+0.
        assert_eq!(cps.len(), 2);
        let z = Term::constant(r.sig.op_id("zero").unwrap());
        assert!(cps.iter().all(|cp| cp.left == z && cp.right == z));
        let report = r.check_complete(&CheckOptions::default());
        assert!(report.certified(), "{report:?}");
    }

    #[test]
    fn single_rule_has_no_overlap() {
        let r = unary(&[("fx", "x")]);
        assert!(r.critical_pairs().is_empty());
    }

    #[test]
    fn self_loop_fails_probe() {
        let r = unary(&[("fx", "fx")]);
        let report = r.check_complete(&CheckOptions { term_budget: 100, ..Default::default() });
        assert!(!report.termination_probe_passed());
        assert!(!report.certified());
    }

    #[test]
    fn reduce_examples() {
        let r = abelian();
        assert_eq!(r.reduce().unwrap(), r);
        let r = unary(&[("fx", "gx"), ("gx", "x")]);
        let red = r.reduce().unwrap();
        let want = unary(&[("fx", "x"), ("gx", "x")]);
        assert_eq!(red.rules().iter().map(|q| (&q.lhs, &q.rhs)).collect::<Vec<_>>(), want.rules().iter().map(|q| (&q.lhs, &q.rhs)).collect::<Vec<_>>());
        let r = unary(&[("fx", "x"), ("ffx", "x")]);
        let red = r.reduce().unwrap();
        assert_eq!(red.rules().len(), 1);
        assert_eq!(red.rules()[0].name, "u0");
    }

    #[test]
    fn degrees() {
        assert_eq!(abelian().degree(), 0);
        let mut sig = Signature::new();
        let s = sig.add_sort("S").unwrap();
        let f = sig.add_op("f", vec![s], s).unwrap();
        let g = sig.add_op("g", vec![s, s, s], s).unwrap();
        let x = Term::var(0, s);
        let r = Rule::new("r", Term::App(f, vec![x.clone()]), Term::App(g, vec![x.clone(), x.clone(), x]), vec![], &sig).unwrap();
        assert_eq!(Trs::new(sig, vec![r]).degree(), 2);
    }

    #[test]
    fn rule_validation() {
        let (sig, x, plus, _) = abelian_sig();
        let v = Term::var(0, x);
        assert!(matches!(Rule::new("bad", v.clone(), v.clone(), vec![], &sig), Err(Error::VariableOnLhsRoot(_))));
        let l = Term::App(plus, vec![v.clone(), v.clone()]);
        assert!(matches!(
            Rule::new("bad", l, Term::var(1, x), vec!["x".into(), "y".into()], &sig),
            Err(Error::RhsVariableNotInLhs { .. })
        ));
    }

    proptest! {
        #[test]
        fn degree_divides_differences(shapes in proptest::collection::vec((1usize..4, 0usize..4), 1..4)) {
            let mut sig = Signature::new();
            let s = sig.add_sort("S").unwrap();
            let ops: Vec<OpId> = (0..5).map(|k| sig.add_op(&format!("h{k}"), vec![s; k], s).unwrap()).collect();
            let x = Term::var(0, s);
            let rules: Vec<Rule> = shapes.iter().enumerate().map(|(k, (a, b))| {
                let lhs = Term::App(ops[*a], vec![x.clone(); *a]);
                let rhs = if *b == 0 { Term::App(ops[0], vec![]) } else { Term::App(ops[*b], vec![x.clone(); *b]) };
                Rule::new(&format!("r{k}"), lhs, rhs, vec![], &sig).unwrap()
            }).collect();
            let trs = Trs::new(sig, rules);
            let d = trs.degree() as i64;
            for r in trs.rules() {
                for v in r.lhs.vars() {
                    let diff = r.lhs.var_count(v.index) as i64 - r.rhs.var_count(v.index) as i64;
                    if d == 0 { prop_assert_eq!(diff, 0); } else { prop_assert_eq!(diff % d, 0); }
                }
            }
        }
    }
}
