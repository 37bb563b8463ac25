//! Seeded random terms for probes and tests.

use rand::Rng;

use crate::term::{Signature, SortId, Term};

/// A random term of the given sort and depth at most `depth` over the
/// context `vars`. Returns `None` when the sort has no inhabitant.
pub fn random_term<R: Rng>(
    sig: &Signature,
    sort: SortId,
    depth: usize,
    vars: &[SortId],
    rng: &mut R,
) -> Option<Term> {
    let var_choices: Vec<u32> = vars
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == sort)
        .map(|(i, _)| i as u32)
        .collect();
    let ops: Vec<_> = sig.op_ids().filter(|f| sig.op(*f).result == sort).collect();
    let constants: Vec<_> = ops.iter().copied().filter(|f| sig.op(*f).args.is_empty()).collect();
    let leaf_count = var_choices.len() + constants.len();
    let stop = depth == 0 || ops.is_empty() || (leaf_count > 0 && rng.gen_bool(0.3));
    if stop {
        if leaf_count == 0 {
            return if depth == 0 || ops.is_empty() { None } else { build(sig, depth, vars, rng, &ops) };
        }
        let k = rng.gen_range(0..leaf_count);
        return Some(if k < var_choices.len() {
            Term::var(var_choices[k], sort)
        } else {
            Term::constant(constants[k - var_choices.len()])
        });
    }
    build(sig, depth, vars, rng, &ops)
}

fn build<R: Rng>(
    sig: &Signature,
    depth: usize,
    vars: &[SortId],
    rng: &mut R,
    ops: &[crate::term::OpId],
) -> Option<Term> {
    for _ in 0..8 {
        let f = ops[rng.gen_range(0..ops.len())];
        let args: Option<Vec<Term>> = sig
            .op(f)
            .args
            .clone()
            .into_iter()
            .map(|s| random_term(sig, s, depth - 1, vars, rng))
            .collect();
        if let Some(args) = args {
            return Some(Term::App(f, args));
        }
    }
    None
}
