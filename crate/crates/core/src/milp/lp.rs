//! CPLEX-style LP text.
//!
//! Grammar written and accepted (keywords are case-insensitive, tokens are separated by
//! whitespace, `\` starts a comment line):
//!
//! ```text
//! Maximize
//!  obj: c1 x1 + c2 x2 - ...
//! Subject To
//!  name: c x + c y ... (<= | >= | =) rhs     (a row may continue on following lines)
//! Bounds
//!  lo <= x <= up | x <= up | x >= lo | x = v | x free     (one per line; ±inf allowed)
//! Binary
//!  x y ...
//! End
//! ```
//!
//! The writer emits every variable in the Bounds section in id order, so parsing an
//! exported model restores the original variable ids.

use std::collections::HashMap;
use std::fmt::Write;

use super::{Constraint, MilpModel, Relation, VarId, VarKind, Variable};
use crate::error::{Error, Result};

const TERMS_PER_LINE: usize = 8;

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v != 0.0 && (v.abs() < 1e-6 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, terms: &[(VarId, f64)], vars: &[Variable]) {
    for (k, (v, c)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &vars[v.0].name;
        if k == 0 {
            let _ = write!(out, " {} {name}", num(*c));
        } else if *c < 0.0 {
            let _ = write!(out, " - {} {name}", num(-c));
        } else {
            let _ = write!(out, " + {} {name}", num(*c));
        }
    }
}

/// Deterministic LP text for a model; the WDP layout is not part of the format.
pub fn export_lp(model: &MilpModel) -> String {
    let vars = &model.variables;
    let mut out = String::from("Maximize\n obj:");
    write_terms(&mut out, &model.objective, vars);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        write_terms(&mut out, &c.terms, vars);
        let _ = writeln!(out, " {} {}", c.relation.symbol(), num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in vars {
        let _ = writeln!(out, " {} <= {} <= {}", num(v.lower), v.name, num(v.upper));
    }
    out.push_str("Binary\n");
    let binaries: Vec<&str> = vars
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    for chunk in binaries.chunks(TERMS_PER_LINE * 2) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Objective,
    Rows,
    Bounds,
    Binary,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    let l = l.split_whitespace().collect::<Vec<_>>().join(" ");
    Some(match l.as_str() {
        "maximize" | "maximise" | "maximum" | "max" => Section::Objective,
        "subject to" | "such that" | "st" | "s.t." | "st." => Section::Rows,
        "bounds" | "bound" => Section::Bounds,
        "binary" | "binaries" | "bin" => Section::Binary,
        "end" => Section::End,
        _ => return None,
    })
}

fn parse_number(tok: &str) -> Option<f64> {
    let lower = tok.to_ascii_lowercase();
    match lower.as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => return Some(f64::INFINITY),
        "-inf" | "-infinity" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let first = tok.chars().next()?;
    if first.is_ascii_digit() || first == '.' || ((first == '-' || first == '+') && tok.len() > 1) {
        tok.parse().ok()
    } else {
        None
    }
}

fn parse_relation(tok: &str) -> Option<Relation> {
    match tok {
        "<=" | "=<" | "<" => Some(Relation::Le),
        ">=" | "=>" | ">" => Some(Relation::Ge),
        "=" => Some(Relation::Eq),
        _ => None,
    }
}

struct Parser {
    vars: Vec<Variable>,
    index: HashMap<String, VarId>,
    bounded: Vec<bool>,
}

impl Parser {
    fn var(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let id = VarId(self.vars.len());
        self.vars.push(Variable {
            name: name.to_string(),
            kind: VarKind::Continuous,
            lower: 0.0,
            upper: f64::INFINITY,
        });
        self.bounded.push(false);
        self.index.insert(name.to_string(), id);
        id
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::LpParse {
        line,
        message: message.into(),
    }
}

fn valid_name(tok: &str) -> bool {
    tok.chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || "_!\"#$%&()/,;?@`'{}|~".contains(c))
}

/// Parses `tokens` as `[sign] [coef] var (sign [coef] var)*`, stopping at a relation or the end.
fn parse_terms(
    p: &mut Parser,
    tokens: &[(usize, &str)],
    pos: &mut usize,
) -> Result<Vec<(VarId, f64)>> {
    let mut terms: Vec<(VarId, f64)> = Vec::new();
    while *pos < tokens.len() && parse_relation(tokens[*pos].1).is_none() {
        let mut sign = 1.0;
        let mut line = tokens[*pos].0;
        while *pos < tokens.len() && matches!(tokens[*pos].1, "+" | "-") {
            if tokens[*pos].1 == "-" {
                sign = -sign;
            }
            *pos += 1;
        }
        let mut coef = 1.0;
        if let Some(&(l, tok)) = tokens.get(*pos) {
            line = l;
            if let Some(c) = parse_number(tok) {
                coef = c;
                *pos += 1;
            }
        }
        let Some(&(l, name)) = tokens.get(*pos) else {
            return Err(err(line, "expected a variable name"));
        };
        if !valid_name(name) || parse_relation(name).is_some() {
            return Err(err(l, format!("expected a variable name, found {name:?}")));
        }
        *pos += 1;
        let c = sign * coef;
        if c != 0.0 {
            let v = p.var(name);
            match terms.iter_mut().find(|(u, _)| *u == v) {
                Some(t) => t.1 += c,
                None => terms.push((v, c)),
            }
        }
    }
    Ok(terms)
}

fn split_name(tokens: &[(usize, &str)], pos: &mut usize) -> Option<String> {
    let (_, tok) = *tokens.get(*pos)?;
    if let Some(name) = tok.strip_suffix(':') {
        *pos += 1;
        return Some(name.to_string());
    }
    if tokens.get(*pos + 1).is_some_and(|t| t.1 == ":") {
        *pos += 2;
        return Some(tok.to_string());
    }
    None
}

/// Parses LP text. Only maximization models over continuous and binary variables are accepted.
pub fn parse_lp(text: &str) -> Result<MilpModel> {
    let mut sections: Vec<(Section, Vec<(usize, &str)>)> = Vec::new();
    let mut current = Section::None;
    let mut bound_lines: Vec<(usize, Vec<&str>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_of(line) {
            if s == Section::Objective && !sections.is_empty() {
                return Err(err(line_no, "objective section must come first"));
            }
            current = s;
            sections.push((s, Vec::new()));
            continue;
        }
        let lower = line.trim().to_ascii_lowercase();
        if lower.starts_with("minimize") || lower.starts_with("minimise") || lower == "min" {
            return Err(err(line_no, "only maximization models are supported"));
        }
        if lower.starts_with("general") || lower == "gen" || lower.starts_with("semi") {
            return Err(err(line_no, "only continuous and binary variables are supported"));
        }
        match current {
            Section::None => return Err(err(line_no, "expected a section keyword")),
            Section::End => return Err(err(line_no, "content after End")),
            Section::Bounds => bound_lines.push((line_no, line.split_whitespace().collect())),
            _ => {
                let toks = &mut sections.last_mut().expect("section").1;
                for tok in line.split_whitespace() {
                    // a sign glued to a variable name, as in `-x`
                    match tok.split_at_checked(1) {
                        Some((sign @ ("+" | "-"), rest)) if valid_name(rest) => {
                            toks.push((line_no, sign));
                            toks.push((line_no, rest));
                        }
                        _ => toks.push((line_no, tok)),
                    }
                }
            }
        }
    }
    if !sections.iter().any(|s| s.0 == Section::Objective) {
        return Err(err(1, "missing Maximize section"));
    }

    let mut p = Parser {
        vars: Vec::new(),
        index: HashMap::new(),
        bounded: Vec::new(),
    };

    for (line, toks) in &bound_lines {
        parse_bound(&mut p, *line, toks)?;
    }

    let mut model = MilpModel::new();
    for (section, tokens) in &sections {
        match section {
            Section::Objective => {
                let mut pos = 0;
                split_name(tokens, &mut pos);
                model.objective = parse_terms(&mut p, tokens, &mut pos)?;
                if let Some(&(l, t)) = tokens.get(pos) {
                    return Err(err(l, format!("unexpected {t:?} in objective")));
                }
            }
            Section::Rows => {
                let mut pos = 0;
                while pos < tokens.len() {
                    let line = tokens[pos].0;
                    let name = split_name(tokens, &mut pos)
                        .unwrap_or_else(|| format!("r{}", model.constraints.len()));
                    let terms = parse_terms(&mut p, tokens, &mut pos)?;
                    let Some(relation) = tokens.get(pos).and_then(|t| parse_relation(t.1)) else {
                        return Err(err(line, format!("row {name} has no relation")));
                    };
                    pos += 1;
                    let Some(rhs) = tokens.get(pos).and_then(|t| parse_number(t.1)) else {
                        return Err(err(line, format!("row {name} has no numeric right-hand side")));
                    };
                    pos += 1;
                    model.constraints.push(Constraint {
                        name,
                        terms,
                        relation,
                        rhs,
                    });
                }
            }
            Section::Binary => {
                for &(l, name) in tokens {
                    if !valid_name(name) {
                        return Err(err(l, format!("invalid variable name {name:?}")));
                    }
                    let v = p.var(name);
                    let var = &mut p.vars[v.0];
                    var.kind = VarKind::Binary;
                    if !p.bounded[v.0] {
                        var.lower = 0.0;
                        var.upper = 1.0;
                    }
                }
            }
            _ => {}
        }
    }
    model.variables = p.vars;
    Ok(model)
}

fn parse_bound(p: &mut Parser, line: usize, toks: &[&str]) -> Result<()> {
    let bad = || err(line, format!("cannot parse bound {:?}", toks.join(" ")));
    let set = |p: &mut Parser, name: &str, lo: Option<f64>, up: Option<f64>| -> Result<()> {
        if !valid_name(name) {
            return Err(bad());
        }
        let v = p.var(name);
        p.bounded[v.0] = true;
        if let Some(lo) = lo {
            p.vars[v.0].lower = lo;
        }
        if let Some(up) = up {
            p.vars[v.0].upper = up;
        }
        Ok(())
    };
    match toks {
        [name, free] if free.eq_ignore_ascii_case("free") => {
            set(p, name, Some(f64::NEG_INFINITY), Some(f64::INFINITY))
        }
        [a, r1, name, r2, b] => {
            let (lo, up) = (parse_number(a).ok_or_else(bad)?, parse_number(b).ok_or_else(bad)?);
            match (parse_relation(r1), parse_relation(r2)) {
                (Some(Relation::Le), Some(Relation::Le)) => set(p, name, Some(lo), Some(up)),
                (Some(Relation::Ge), Some(Relation::Ge)) => set(p, name, Some(up), Some(lo)),
                _ => Err(bad()),
            }
        }
        [a, r, b] => {
            let rel = parse_relation(r).ok_or_else(bad)?;
            if let Some(v) = parse_number(b) {
                match rel {
                    Relation::Le => set(p, a, None, Some(v)),
                    Relation::Ge => set(p, a, Some(v), None),
                    Relation::Eq => set(p, a, Some(v), Some(v)),
                }
            } else {
                let v = parse_number(a).ok_or_else(bad)?;
                match rel {
                    Relation::Le => set(p, b, Some(v), None),
                    Relation::Ge => set(p, b, None, Some(v)),
                    Relation::Eq => set(p, b, Some(v), Some(v)),
                }
            }
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::milp::{encode_wdp, EncodeOptions, LinExpr};

    fn strip_layout(mut m: MilpModel) -> MilpModel {
        m.layout = None;
        m
    }

    #[test]
    fn empty_model_has_only_headers() {
        let text = export_lp(&MilpModel::new());
        assert_eq!(text, "Maximize\n obj:\nSubject To\nBounds\nBinary\nEnd\n");
        assert_eq!(parse_lp(&text).unwrap(), MilpModel::new());
    }

    #[test]
    fn reference_objective_line() {
        let model = encode_wdp(&[fixtures::three_item_network()], 3, EncodeOptions::default()).unwrap();
        let text = export_lp(&model);
        let obj = text.lines().nth(1).unwrap();
        assert_eq!(obj, " obj: 1 z_0_1_0 + 4 z_0_1_1");
        assert!(text.contains(" item_0: 1 a_0_0 <= 1\n"));
        assert!(text.contains("Binary\n a_0_0 a_0_1 a_0_2"));
    }

    #[test]
    fn round_trip_is_exact() {
        let p = fixtures::three_item_network();
        for opts in [EncodeOptions::default(), EncodeOptions::unpruned()] {
            let model = encode_wdp(&[p.clone(), p.clone()], 3, opts).unwrap();
            let text = export_lp(&model);
            let parsed = parse_lp(&text).unwrap();
            assert_eq!(parsed, strip_layout(model));
            assert_eq!(export_lp(&parsed), text);
        }
    }

    #[test]
    fn long_rows_wrap_and_parse() {
        let mut m = MilpModel::new();
        let vars: Vec<VarId> = (0..20).map(|i| m.add_var(format!("x{i}"), VarKind::Continuous, -1.5, f64::INFINITY)).collect();
        let mut e = LinExpr::default();
        for (k, v) in vars.iter().enumerate() {
            e.add(*v, if k % 3 == 0 { -1e-7 } else { 2.5e15 });
        }
        m.add_row("long", e, Relation::Ge, -3.25);
        m.objective = vars.iter().map(|&v| (v, 0.1)).collect();
        let text = export_lp(&m);
        assert!(text.lines().count() > 8);
        assert_eq!(parse_lp(&text).unwrap(), m);
    }

    #[test]
    fn hand_written_file() {
        let text = "\\ comment\nMAXIMIZE\n obj: x + 2 y - z\nsubject to\n c1: x + y <= 1\n -x + z >= -0.5\nbounds\n x <= 4\n y free\n -1 <= z <= 1\nbinaries\n w\nend\n";
        let m = parse_lp(text).unwrap();
        assert_eq!(m.variables.len(), 4);
        assert_eq!(m.variables[0].name, "x");
        assert_eq!(m.variables[0].upper, 4.0);
        assert_eq!(m.variables[1].lower, f64::NEG_INFINITY);
        assert_eq!(m.variables[3].kind, VarKind::Binary);
        assert_eq!(m.constraints[0].name, "c1");
        assert_eq!(m.constraints[1].name, "r1");
        assert_eq!(m.constraints[1].terms.len(), 2);
        assert_eq!(m.constraints[1].rhs, -0.5);
        assert_eq!(m.objective.len(), 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_lp("Maximize\n obj: x\nSubject To\n c: x + <= 1\nEnd\n").unwrap_err();
        assert!(matches!(e, Error::LpParse { line: 4, .. }), "{e}");
        let e = parse_lp("Minimize\n obj: x\nEnd\n").unwrap_err();
        assert!(matches!(e, Error::LpParse { line: 1, .. }), "{e}");
        let e = parse_lp("Maximize\n obj: x\nSubject To\n c: x 1\nEnd\n").unwrap_err();
        assert!(matches!(e, Error::LpParse { .. }), "{e}");
    }
}
