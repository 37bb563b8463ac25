//! The `.lwv` presentation format.
//!
//! ```text
//! # abelian group unit laws
//! sorts X
//! op plus : X X -> X
//! op zero : -> X
//! var x : X
//! rule r1 : plus(x, zero) -> x
//! rule r2 : plus(zero, x) -> x
//! order r1 r2
//! ```
//!
//! `budget steps N` and `budget join N` set the rewriting budgets.
//!
//! The `.srs` string rewriting format lists letters and rules between
//! space-separated words; an empty side is the empty word:
//!
//! ```text
//! letters a
//! rule s1 : a a ->
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::monoid::{Srs, Word, WordRule};
use crate::rewrite::{Budgets, Rule, Trs};
use crate::term::{Signature, SortId, Term};

pub(crate) struct Cursor<'a> {
    pub line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(line: usize, text: &'a str) -> Self {
        Cursor { line, text, pos: 0 }
    }

    pub fn col(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, col: self.col(), msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    pub fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    pub fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{tok}`")))
        }
    }

    pub fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .char_indices()
            .find(|&(i, c)| !(c.is_alphanumeric() || c == '_' || (i > 0 && c == '\'')))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return Err(self.error("expected a name"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    pub fn try_ident(&mut self) -> Option<&'a str> {
        let save = self.pos;
        match self.ident() {
            Ok(s) => Some(s),
            Err(_) => {
                self.pos = save;
                None
            }
        }
    }

    pub fn number(&mut self) -> Result<usize> {
        let col_err = self.error("expected a number");
        self.ident()?.parse().map_err(|_| col_err)
    }
}

/// Strips a `#` comment.
pub(crate) fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a)
}

/// A parsed presentation: the ranked rewriting system plus the variable
/// declarations, kept for printing.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub trs: Trs,
    pub vars: Vec<(String, SortId)>,
    /// Rule names in file order, before any `order` directive.
    pub file_order: Vec<String>,
}

struct RuleText<'a> {
    line: usize,
    name: String,
    body: Cursor<'a>,
}

pub fn parse_presentation(text: &str) -> Result<Presentation> {
    let mut sig = Signature::new();
    let mut vars: HashMap<String, SortId> = HashMap::new();
    let mut var_list = Vec::new();
    let mut rule_texts: Vec<RuleText> = Vec::new();
    let mut order: Option<(usize, Vec<String>)> = None;
    let mut budgets = Budgets::default();
    let mut names: HashSet<String> = HashSet::new();
    let mut declare = |line: usize, name: &str| -> Result<()> {
        if names.insert(name.to_string()) {
            Ok(())
        } else {
            Err(Error::DuplicateName { line, name: name.to_string() })
        }
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut c = Cursor::new(line, strip_comment(raw));
        if c.at_end() {
            continue;
        }
        let kw = c.ident()?;
        match kw {
            "sorts" | "sort" => {
                while let Some(name) = c.try_ident() {
                    declare(line, name)?;
                    sig.add_sort(name)?;
                }
            }
            "op" => {
                let name = c.ident()?;
                c.expect(":")?;
                let mut args = Vec::new();
                while !c.eat("->") {
                    if c.at_end() {
                        return Err(c.error("expected `->`"));
                    }
                    args.push(sort_ref(&mut c, &sig)?);
                }
                let result = sort_ref(&mut c, &sig)?;
                declare(line, name)?;
                sig.add_op(name, args, result)?;
            }
            "var" | "vars" => {
                let mut list = vec![c.ident()?];
                loop {
                    c.eat(",");
                    match c.try_ident() {
                        Some(name) => list.push(name),
                        None => break,
                    }
                }
                c.expect(":")?;
                let s = sort_ref(&mut c, &sig)?;
                for name in list {
                    declare(line, name)?;
                    vars.insert(name.to_string(), s);
                    var_list.push((name.to_string(), s));
                }
            }
            "rule" => {
                let name = c.ident()?.to_string();
                c.expect(":")?;
                declare(line, &name)?;
                rule_texts.push(RuleText { line, name, body: c });
                continue;
            }
            "order" => {
                let mut list = Vec::new();
                while let Some(name) = c.try_ident() {
                    list.push(name.to_string());
                }
                order = Some((line, list));
            }
            "budget" => {
                let which = c.ident()?;
                let n = c.number()?;
                match which {
                    "steps" => budgets.max_steps = n,
                    "join" => budgets.join_steps = n,
                    _ => return Err(c.error(format!("unknown budget `{which}`"))),
                }
            }
            _ => return Err(Error::Syntax { line, col: 1, msg: format!("unknown directive `{kw}`") }),
        }
        if !c.at_end() {
            return Err(c.error("unexpected trailing input"));
        }
    }

    let mut rules = Vec::new();
    for RuleText { line, name, mut body } in rule_texts {
        let mut local: Vec<String> = Vec::new();
        let lhs = parse_term(&mut body, &sig, &vars, &mut local)?;
        body.expect("->")?;
        let rhs = parse_term(&mut body, &sig, &vars, &mut local)?;
        if !body.at_end() {
            return Err(body.error("unexpected trailing input"));
        }
        rules.push(Rule::new(&name, lhs, rhs, local, &sig).map_err(|e| at_line(line, e))?);
    }
    let file_order: Vec<String> = rules.iter().map(|r| r.name.clone()).collect();
    if let Some((line, list)) = order {
        let mut ranked = Vec::new();
        for name in &list {
            let k = rules
                .iter()
                .position(|r| &r.name == name)
                .ok_or_else(|| Error::UndeclaredName { line, name: name.clone() })?;
            if ranked.contains(&k) {
                return Err(Error::DuplicateName { line, name: name.clone() });
            }
            ranked.push(k);
        }
        for k in 0..rules.len() {
            if !ranked.contains(&k) {
                ranked.push(k);
            }
        }
        rules = ranked.into_iter().map(|k| rules[k].clone()).collect();
    }
    Ok(Presentation { trs: Trs::with_budgets(sig, rules, budgets), vars: var_list, file_order })
}

fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Syntax { .. } | Error::UndeclaredName { .. } | Error::DuplicateName { .. } | Error::AtLine { .. } => e,
        e => Error::AtLine { line, inner: Box::new(e) },
    }
}

fn sort_ref(c: &mut Cursor, sig: &Signature) -> Result<SortId> {
    let line = c.line;
    let name = c.ident()?;
    sig.sort(name).ok_or_else(|| Error::UndeclaredName { line, name: name.to_string() })
}

fn parse_term(c: &mut Cursor, sig: &Signature, vars: &HashMap<String, SortId>, local: &mut Vec<String>) -> Result<Term> {
    let col = c.col();
    let line = c.line;
    let name = c.ident()?;
    let args = if c.eat("(") {
        let mut args = Vec::new();
        if !c.eat(")") {
            loop {
                args.push(parse_term(c, sig, vars, local)?);
                if c.eat(")") {
                    break;
                }
                c.expect(",")?;
            }
        }
        Some(args)
    } else {
        None
    };
    if let Some(f) = sig.op_id(name) {
        return sig.app(f, args.unwrap_or_default()).map_err(|e| at_line(line, e));
    }
    if let Some(&s) = vars.get(name) {
        if args.is_some() {
            return Err(Error::Syntax { line, col, msg: format!("variable `{name}` applied to arguments") });
        }
        let index = match local.iter().position(|v| v == name) {
            Some(i) => i,
            None => {
                local.push(name.to_string());
                local.len() - 1
            }
        };
        return Ok(Term::var(index as u32, s));
    }
    Err(Error::UndeclaredName { line, name: name.to_string() })
}

/// Prints a rewriting system in `.lwv` syntax, rules in rank order.
pub fn print_presentation(trs: &Trs) -> String {
    let sig = &trs.sig;
    let mut out = String::new();
    let sorts: Vec<&str> = sig.sort_ids().map(|s| sig.sort_name(s)).collect();
    let _ = writeln!(out, "sorts {}", sorts.join(" "));
    for f in sig.op_ids() {
        let op = sig.op(f);
        let mut args: Vec<&str> = op.args.iter().map(|s| sig.sort_name(*s)).collect();
        args.push("->");
        let _ = writeln!(out, "op {} : {} {}", op.name, args.join(" "), sig.sort_name(op.result));
    }
    let mut seen: Vec<(String, SortId)> = Vec::new();
    for r in trs.rules() {
        for v in r.lhs.vars() {
            let name = r.var_names[v.index as usize].clone();
            if !seen.iter().any(|(n, _)| *n == name) {
                seen.push((name, v.sort));
            }
        }
    }
    for (name, s) in &seen {
        let _ = writeln!(out, "var {name} : {}", sig.sort_name(*s));
    }
    let b = trs.budgets;
    if b != Budgets::default() {
        let _ = writeln!(out, "budget steps {}", b.max_steps);
        let _ = writeln!(out, "budget join {}", b.join_steps);
    }
    for r in trs.rules() {
        let _ = writeln!(
            out,
            "rule {} : {} -> {}",
            r.name,
            r.lhs.display_named(sig, &r.var_names),
            r.rhs.display_named(sig, &r.var_names)
        );
    }
    out
}

pub fn parse_srs(text: &str) -> Result<Srs> {
    let mut letters: Vec<String> = Vec::new();
    let mut rules: Vec<WordRule> = Vec::new();
    let mut max_steps = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut c = Cursor::new(line, strip_comment(raw));
        if c.at_end() {
            continue;
        }
        match c.ident()? {
            "letters" | "letter" => {
                while let Some(name) = c.try_ident() {
                    if letters.iter().any(|l| l == name) {
                        return Err(Error::DuplicateName { line, name: name.to_string() });
                    }
                    letters.push(name.to_string());
                }
            }
            "rule" => {
                let name = c.ident()?.to_string();
                if rules.iter().any(|r| r.name == name) || letters.contains(&name) {
                    return Err(Error::DuplicateName { line, name });
                }
                c.expect(":")?;
                let word = |c: &mut Cursor| -> Result<Word> {
                    let mut w = Vec::new();
                    while let Some(l) = c.try_ident() {
                        let k = letters.iter().position(|x| x == l).ok_or_else(|| Error::UndeclaredName { line, name: l.to_string() })?;
                        w.push(k as u32);
                    }
                    Ok(w)
                };
                let lhs = word(&mut c)?;
                c.expect("->")?;
                let rhs = word(&mut c)?;
                if lhs.is_empty() {
                    return Err(c.error("empty left-hand side"));
                }
                rules.push(WordRule { name, lhs, rhs });
            }
            "budget" => {
                if c.ident()? != "steps" {
                    return Err(c.error("expected `steps`"));
                }
                max_steps = Some(c.number()?);
            }
            kw => return Err(Error::Syntax { line, col: 1, msg: format!("unknown directive `{kw}`") }),
        }
        if !c.at_end() {
            return Err(c.error("unexpected trailing input"));
        }
    }
    let mut srs = Srs::new(letters, rules);
    if let Some(n) = max_steps {
        srs.max_steps = n;
    }
    Ok(srs)
}

pub fn print_srs(srs: &Srs) -> String {
    let mut out = format!("letters {}\n", srs.letters.join(" "));
    let word = |w: &Word| w.iter().map(|&a| format!(" {}", srs.letters[a as usize])).collect::<String>();
    for r in &srs.rules {
        let _ = writeln!(out, "rule {} :{} ->{}", r.name, word(&r.lhs), word(&r.rhs));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ABELIAN: &str = "sorts X\nop plus : X X -> X\nop zero : -> X\nvar x : X\nrule r1 : plus(x, zero) -> x\nrule r2 : plus(zero, x) -> x\n";

    fn err(text: &str) -> Error {
        parse_presentation(text).unwrap_err()
    }

    #[test]
    fn abelian_counts() {
        let p = parse_presentation(ABELIAN).unwrap();
        assert_eq!(p.trs.sig.sort_count(), 1);
        assert_eq!(p.trs.sig.op_count(), 2);
        assert_eq!(p.trs.rules().len(), 2);
        assert_eq!(p.trs, crate::rewrite::tests::abelian());
    }

    #[test]
    fn variable_lhs_rejected() {
        let e = err("sorts X\nop f : X -> X\nvar x : X\nrule bad : x -> x\n");
        assert!(matches!(e.root(), Error::VariableOnLhsRoot(_)), "{e}");
    }

    #[test]
    fn rhs_variable_rejected() {
        let e = err("sorts X\nop f : X -> X\nop g : X -> X\nvar x y : X\nrule bad : f(x) -> g(y)\n");
        assert!(matches!(e.root(), Error::RhsVariableNotInLhs { .. }), "{e}");
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(err("sorts X\nop f : X -> Y\n"), Error::UndeclaredName { line: 2, .. }));
        assert!(matches!(err("sorts X\nop f : X X\n"), Error::Syntax { line: 2, .. }));
        assert!(matches!(err("sorts X\nop f : X -> X\nrule r : f(q) -> q\n"), Error::UndeclaredName { line: 3, .. }));
        assert!(matches!(err("sorts X Y\nop f : X -> X\nop c : -> Y\nrule r : f(c) -> c\n").root(), Error::SortMismatch { .. }));
        assert!(matches!(err("sorts X\nsorts X\n"), Error::DuplicateName { line: 2, .. }));
        let e = err("sorts X\nop f : X -> X\nvar x : X\nrule r : f(x -> x\n");
        assert!(matches!(e, Error::Syntax { line: 4, col: 14, .. }), "{e}");
    }

    #[test]
    fn order_directive_ranks_rules() {
        let p = parse_presentation(&format!("{ABELIAN}order r2 r1\n")).unwrap();
        let names: Vec<&str> = p.trs.rules().iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["r2", "r1"]);
        assert_eq!(p.file_order, ["r1", "r2"]);
    }

    #[test]
    fn round_trip() {
        let p = parse_presentation(ABELIAN).unwrap();
        let text = print_presentation(&p.trs);
        assert_eq!(parse_presentation(&text).unwrap().trs, p.trs);
        assert_eq!(print_presentation(&parse_presentation(&text).unwrap().trs), text);
    }

    #[test]
    fn srs_format() {
        let s = parse_srs("# Z/2\nletters a b\nrule s1 : a a ->\nrule s2 : b a -> a b\n").unwrap();
        assert_eq!(s.letters, ["a", "b"]);
        assert_eq!(s.rules[0].lhs, vec![0, 0]);
        assert!(s.rules[0].rhs.is_empty());
        assert_eq!(s.rules[1].rhs, vec![0, 1]);
        assert_eq!(parse_srs(&print_srs(&s)).unwrap(), s);
        assert!(matches!(parse_srs("letters a\nrule s : a c ->\n"), Err(Error::UndeclaredName { line: 2, .. })));
        assert!(matches!(parse_srs("letters a\nrule s : -> a\n"), Err(Error::Syntax { line: 2, .. })));
    }
}
