//! Plain-text LP interchange format.
//!
//! ```text
//! \ comment lines start with a backslash
//! Maximize
//!  obj: + 3 x + 2 y
//! Subject To
//!  c1: + 1 x + 1 y <= 4
//!  c2: - 1 x >= -2
//! Bounds
//!  0 <= x <= inf
//!  -inf <= y <= 5
//! End
//! ```
//!
//! Tokens are whitespace separated. A linear form is a list of `sign coefficient name`
//! triples, or the single token `0` when empty. Relations are `<=`, `>=` and `=`. The
//! `Bounds` section lists every variable exactly once, in model order; `inf` and `-inf`
//! denote missing bounds. Names may not contain whitespace or `:`. Numbers use the
//! shortest representation that parses back to the same `f64`.

use std::fmt::Write as _;

use super::model::{LpModel, Relation};
use crate::error::{Error, Result};

fn push_form(out: &mut String, terms: &[(usize, f64)], model: &LpModel) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for &(j, a) in terms {
        let sign = if a.is_sign_negative() { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", a.abs(), model.variables()[j].name);
    }
}

pub fn write_lp(model: &LpModel) -> Result<String> {
    for v in model.variables() {
        if v.name.is_empty() || v.name.contains(':') || v.name.chars().any(char::is_whitespace) {
            return Err(Error::Config(format!("variable name {:?} cannot be written", v.name)));
        }
    }
    let mut out = String::new();
    out.push_str("Maximize\n obj:");
    let obj: Vec<(usize, f64)> = model
        .objective()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    push_form(&mut out, &obj, model);
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let _ = write!(out, " {}:", c.name);
        push_form(&mut out, &c.terms, model);
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {rel} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
    }
    out.push_str("End\n");
    Ok(out)
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("LP text line {line}: {msg}"))
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("expected a number, got {tok:?}")))
}

#[derive(PartialEq)]
enum Section {
    Start,
    Objective,
    Rows,
    Bounds,
    End,
}

pub fn parse_lp(text: &str) -> Result<LpModel> {
    // Variables are declared by the Bounds section, so read it first.
    let mut model = LpModel::new();
    let mut in_bounds = false;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        match line {
            "Bounds" => in_bounds = true,
            "End" | "Subject To" | "Maximize" => in_bounds = false,
            _ if in_bounds && !line.is_empty() && !line.starts_with('\\') => {
                let tok: Vec<&str> = line.split_whitespace().collect();
                if tok.len() != 5 || tok[1] != "<=" || tok[3] != "<=" {
                    return Err(parse_err(ln + 1, "expected `lo <= name <= hi`"));
                }
                let lo = parse_num(tok[0], ln + 1)?;
                let hi = parse_num(tok[4], ln + 1)?;
                model
                    .add_var(tok[2], lo, hi)
                    .map_err(|e| parse_err(ln + 1, e))?;
            }
            _ => {}
        }
    }

    let mut section = Section::Start;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line {
            "Maximize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "End" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Start | Section::End => {
                return Err(parse_err(ln + 1, "content outside a section"));
            }
            Section::Bounds => {}
            Section::Objective | Section::Rows => {
                let (name, body) = line
                    .split_once(':')
                    .ok_or_else(|| parse_err(ln + 1, "expected `name:`"))?;
                let tok: Vec<&str> = body.split_whitespace().collect();
                let (form, tail) = if section == Section::Rows {
                    if tok.len() < 3 {
                        return Err(parse_err(ln + 1, "row needs a relation and right-hand side"));
                    }
                    (&tok[..tok.len() - 2], Some((tok[tok.len() - 2], tok[tok.len() - 1])))
                } else {
                    (&tok[..], None)
                };
                let terms = parse_form(&model, form, ln + 1)?;
                match tail {
                    None => {
                        for (j, c) in terms {
                            model.set_objective(j, c);
                        }
                    }
                    Some((rel, rhs)) => {
                        let rel = match rel {
                            "<=" => Relation::Le,
                            ">=" => Relation::Ge,
                            "=" => Relation::Eq,
                            other => return Err(parse_err(ln + 1, format!("unknown relation {other}"))),
                        };
                        let rhs = parse_num(rhs, ln + 1)?;
                        model.add_constraint(name.trim(), terms, rel, rhs);
                    }
                }
            }
        }
    }
    if section != Section::End {
        return Err(Error::Config("LP text is missing `End`".into()));
    }
    Ok(model)
}

fn parse_form(model: &LpModel, tok: &[&str], line: usize) -> Result<Vec<(usize, f64)>> {
    if tok == ["0"] {
        return Ok(Vec::new());
    }
    if !tok.len().is_multiple_of(3) {
        return Err(parse_err(line, "linear form must be `sign coefficient name` triples"));
    }
    tok.chunks(3)
        .map(|c| {
            let sign = match c[0] {
                "+" => 1.0,
                "-" => -1.0,
                other => return Err(parse_err(line, format!("expected + or -, got {other:?}"))),
            };
            let a = parse_num(c[1], line)?;
            let j = model
                .var_index(c[2])
                .ok_or_else(|| parse_err(line, format!("undeclared variable {}", c[2])))?;
            Ok((j, sign * a))
        })
        .collect()
}
