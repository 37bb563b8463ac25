//! JSON and plain-text renderings of pipeline results. Object keys are
//! sorted, so output is byte-for-byte deterministic.

use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::chains::{Cell, ChainSet};
use crate::homology::{HomologyGroup, InequalityReport, TensoredComplex};
use crate::monoid::{Srs, WordChains};
use crate::rewrite::Trs;
use crate::term::Signature;

pub const FORMAT_VERSION: u32 = 1;

pub fn cell_json(sig: &Signature, cell: &Cell) -> Value {
    let entries: Vec<Value> = cell
        .entries
        .iter()
        .map(|m| {
            json!({
                "context": m.domain.iter().map(|s| sig.sort_name(*s)).collect::<Vec<_>>(),
                "terms": m.terms.iter().map(|t| t.display(sig).to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "sort": sig.sort_name(cell.sort), "entries": entries })
}

pub fn chains_json(trs: &Trs, chains: &ChainSet) -> Value {
    let dims: Vec<Value> = chains
        .dims
        .iter()
        .enumerate()
        .map(|(n, d)| json!({ "dim": n, "cells": d.iter().map(|c| cell_json(&trs.sig, &c.cell)).collect::<Vec<_>>() }))
        .collect();
    json!({ "version": FORMAT_VERSION, "counts": chains.counts(), "chains": dims })
}

pub fn group_json(h: &HomologyGroup) -> Value {
    let torsion: Vec<Value> = h.torsion.iter().map(|t| t.to_u64().map_or_else(|| Value::String(t.to_string()), Value::from)).collect();
    json!({ "rank": h.rank, "torsion": torsion })
}

pub fn homology_records(complex: &TensoredComplex, homology: &[HomologyGroup]) -> Vec<Value> {
    homology
        .iter()
        .enumerate()
        .map(|(n, h)| json!({ "dim": n, "chains": complex.ranks[n], "H": group_json(h) }))
        .collect()
}

pub fn homology_json(complex: &TensoredComplex, homology: &[HomologyGroup], inequality: Option<&InequalityReport>) -> Value {
    let matrices: Vec<Value> = complex.matrices.iter().map(|m| json!({ "dim": m.dim, "entries": m.entries })).collect();
    let mut out = json!({
        "version": FORMAT_VERSION,
        "modulus": complex.modulus,
        "homology": homology_records(complex, homology),
        "matrices": matrices,
    });
    if let Some(r) = inequality {
        out["inequality"] = inequality_json(r);
    }
    out
}

pub fn inequality_json(r: &InequalityReport) -> Value {
    json!({
        "dim": r.dim,
        "modulus": r.modulus,
        "critical": r.critical,
        "weak": { "lhs": r.weak.lhs, "rhs": r.weak.rhs, "holds": r.weak.holds() },
        "strong": { "lhs": r.strong.lhs, "rhs": r.strong.rhs, "holds": r.strong.holds() },
        "axiom_bound": r.axiom_bound(),
    })
}

pub fn word_chains_json(srs: &Srs, chains: &WordChains) -> Value {
    let dims: Vec<Value> = chains
        .dims
        .iter()
        .enumerate()
        .map(|(n, d)| {
            let cells: Vec<Vec<String>> = d.iter().map(|c| c.iter().map(|w| srs.show(w)).collect()).collect();
            json!({ "dim": n, "cells": cells })
        })
        .collect();
    json!({ "version": FORMAT_VERSION, "counts": chains.counts(), "chains": dims })
}

pub fn chains_table(trs: &Trs, chains: &ChainSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dim  count");
    for (n, d) in chains.dims.iter().enumerate() {
        let _ = writeln!(out, "{n:>3}  {:>5}", d.len());
    }
    for (n, d) in chains.dims.iter().enumerate() {
        let _ = writeln!(out, "\n{n}-chains:");
        for c in d {
            let _ = writeln!(out, "  {}", c.cell.display(&trs.sig));
        }
    }
    out
}

pub fn homology_table(complex: &TensoredComplex, homology: &[HomologyGroup]) -> String {
    let mut out = String::new();
    let field = if complex.modulus == 0 { "Z".to_string() } else { format!("F_{}", complex.modulus) };
    let _ = writeln!(out, "coefficients {field}");
    let _ = writeln!(out, "dim  chains  H");
    for (n, h) in homology.iter().enumerate() {
        let shown = if complex.modulus == 0 {
            h.to_string()
        } else if h.rank == 0 {
            "0".to_string()
        } else {
            format!("{field}^{}", h.rank)
        };
        let _ = writeln!(out, "{n:>3}  {:>6}  {shown}", complex.ranks[n]);
    }
    out
}

pub fn inequality_text(r: &InequalityReport) -> String {
    let n = r.dim;
    let verdict = |b: bool| if b { "holds" } else { "VIOLATED" };
    let mut out = String::new();
    let _ = writeln!(out, "weak   #Cr_{n} = {} >= s(H_{n}) = {}  {}", r.weak.lhs, r.weak.rhs, verdict(r.weak.holds()));
    let _ = writeln!(
        out,
        "strong sum (-1)^({n}-i) #Cr_i = {} >= s(H_{n}) + sum (-1)^({n}-i) rank H_i = {}  {}",
        r.strong.lhs,
        r.strong.rhs,
        verdict(r.strong.holds())
    );
    if let Some(b) = r.axiom_bound() {
        let _ = writeln!(out, "any equivalent presentation has #axioms >= #ops - #sorts + {} = {b}", r.strong.rhs);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::enumerate_chains;
    use crate::homology::{count_complex, homology};
    use crate::rewrite::tests::abelian;

    #[test]
    fn rule_cell_serialization() {
        let trs = abelian();
        let chains = enumerate_chains(&trs, 2).unwrap();
        let r1 = chains.dims[2].iter().find(|c| c.cell.entries[1].terms[1].has_op()).unwrap();
        assert_eq!(
            serde_json::to_string(&cell_json(&trs.sig, &r1.cell)).unwrap(),
            r#"{"entries":[{"context":["X","X"],"terms":["plus(x1,x2)"]},{"context":["X"],"terms":["x1","zero"]}],"sort":"X"}"#
        );
    }

    #[test]
    fn homology_records_match_contract() {
        let (_, c) = count_complex(&abelian(), 3, 0).unwrap();
        let h = homology(&c).unwrap();
        let rec = homology_records(&c, &h);
        assert_eq!(serde_json::to_string(&rec[2]["H"]).unwrap(), r#"{"rank":0,"torsion":[]}"#);
        assert_eq!(rec[2]["dim"], 2);
        assert_eq!(serde_json::to_string(&Value::Array(vec![])).unwrap(), "[]");
    }
}
