//! Line-oriented LP text for [`IlpModel`]s.
//!
//! ```text
//! \ comment
//! MAXIMIZE
//!  obj: 2 x_a - 0.333333333333 x_b + 0.5 y
//! SUBJECT TO
//!  x_a_b: x_a + x_b <= 1
//! BINARY
//!  x_a x_b y
//! END
//! ```
//!
//! Coefficients are printed with twelve significant digits; a unit
//! coefficient is omitted. A non-zero objective constant is written as a
//! term on the pseudo-variable `one`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::{Comparison, Constraint, IlpModel, Objective, Terms, VarKind, Variable};
use crate::rational::{format_decimal, parse_rational, Rational, DECIMAL_DIGITS};

const CONSTANT_VAR: &str = "one";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct LpParseError {
    pub line: usize,
    pub message: String,
}

fn render_expr(out: &mut String, terms: &[(String, Rational)]) {
    if terms.is_empty() {
        out.push('0');
        return;
    }
    for (i, (name, coef)) in terms.iter().enumerate() {
        let negative = coef.is_negative();
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let magnitude = coef.abs();
        if !magnitude.is_one() {
            out.push_str(&format_decimal(&magnitude, DECIMAL_DIGITS));
            out.push(' ');
        } else if i == 0 && negative {
            out.push(' ');
        }
        out.push_str(name);
    }
}

fn named(model: &IlpModel, terms: &Terms) -> Vec<(String, Rational)> {
    terms.iter().map(|(v, c)| (model.variables[*v].name.clone(), c.clone())).collect()
}

pub fn export_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ norm selection 0/1 program: {} variables, {} constraints",
        model.variables.len(),
        model.constraints.len()
    );
    out.push_str("MAXIMIZE\n obj: ");
    let mut objective = named(model, &model.objective.terms);
    if !model.objective.constant.is_zero() {
        objective.push((CONSTANT_VAR.to_string(), model.objective.constant.clone()));
    }
    render_expr(&mut out, &objective);
    out.push('\n');

    if !model.constraints.is_empty() {
        out.push_str("SUBJECT TO\n");
        for c in &model.constraints {
            let _ = write!(out, " {}: ", c.name);
            render_expr(&mut out, &named(model, &c.terms));
            let op = match c.cmp {
                Comparison::LessEq => "<=",
                Comparison::Equal => "=",
            };
            let _ = writeln!(out, " {op} {}", format_decimal(&c.rhs, DECIMAL_DIGITS));
        }
    }

    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        let _ = writeln!(out, "BINARY\n {}", binaries.join(" "));
    }
    out.push_str("END\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Start,
    Objective,
    Constraints,
    Binary,
    End,
}

type RawExpr = Vec<(String, Rational)>;

fn parse_expr(text: &str, line: usize) -> Result<RawExpr, LpParseError> {
    let err = |message: String| LpParseError { line, message };
    let mut terms = Vec::new();
    let mut sign = Rational::one();
    let mut coef: Option<Rational> = None;
    let mut expect_term = true;
    for token in text.split_whitespace() {
        match token {
            "+" | "-" => {
                if coef.is_some() {
                    return Err(err(format!("dangling coefficient before `{token}`")));
                }
                if !expect_term {
                    expect_term = true;
                    sign = Rational::one();
                }
                if token == "-" {
                    sign = -sign;
                }
            }
            _ => {
                if !expect_term {
                    return Err(err(format!("missing operator before `{token}`")));
                }
                let starts_numeric = token.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == '-');
                if starts_numeric && coef.is_none() {
                    let value = parse_rational(token).map_err(|e| err(e.to_string()))?;
                    coef = Some(value);
                } else if starts_numeric {
                    return Err(err(format!("two coefficients in a row at `{token}`")));
                } else {
                    let c = coef.take().unwrap_or_else(Rational::one);
                    terms.push((token.to_string(), &sign * c));
                    expect_term = false;
                }
            }
        }
    }
    if let Some(c) = coef {
        // A bare number is a constant term.
        terms.push((CONSTANT_VAR.to_string(), sign * c));
        expect_term = false;
    }
    if expect_term && !terms.is_empty() {
        return Err(err("expression ends with an operator".to_string()));
    }
    Ok(terms)
}

/// Reads back text produced by [`export_lp`]. Variables not listed under
/// `BINARY` are returned as continuous.
pub fn parse_lp(text: &str) -> Result<IlpModel, LpParseError> {
    let mut section = Section::Start;
    let mut objective: Option<RawExpr> = None;
    let mut raw_constraints: Vec<(String, RawExpr, Comparison, Rational, usize)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let err = |message: String| LpParseError { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('\\') {
            continue;
        }
        match trimmed.to_ascii_uppercase().as_str() {
            "MAXIMIZE" => {
                section = Section::Objective;
                continue;
            }
            "SUBJECT TO" => {
                section = Section::Constraints;
                continue;
            }
            "BINARY" => {
                section = Section::Binary;
                continue;
            }
            "END" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Start => return Err(err("content before MAXIMIZE".into())),
            Section::End => return Err(err("content after END".into())),
            Section::Objective => {
                let body = trimmed.split_once(':').map(|(_, b)| b).unwrap_or(trimmed);
                if objective.is_some() {
                    return Err(err("second objective line".into()));
                }
                objective = Some(parse_expr(body, line)?);
            }
            Section::Constraints => {
                let (name, body) = trimmed.split_once(':').ok_or_else(|| err("constraint without a name".into()))?;
                let (lhs, cmp, rhs) = if let Some((l, r)) = body.split_once("<=") {
                    (l, Comparison::LessEq, r)
                } else if let Some((l, r)) = body.split_once('=') {
                    (l, Comparison::Equal, r)
                } else {
                    return Err(err("constraint without `<=` or `=`".into()));
                };
                let rhs = parse_rational(rhs.trim()).map_err(|e| err(e.to_string()))?;
                raw_constraints.push((name.trim().to_string(), parse_expr(lhs, line)?, cmp, rhs, line));
            }
            Section::Binary => binaries.extend(trimmed.split_whitespace().map(String::from)),
        }
    }
    if section != Section::End {
        return Err(LpParseError { line: text.lines().count(), message: "missing END".into() });
    }
    let objective = objective.ok_or(LpParseError { line: 0, message: "missing objective".into() })?;

    let binary_set: BTreeSet<&String> = binaries.iter().collect();
    let mut variables: Vec<Variable> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut declare = |name: &str, variables: &mut Vec<Variable>| -> usize {
        if let Some(&i) = index.get(name) {
            return i;
        }
        let kind = if binary_set.contains(&name.to_string()) { VarKind::Binary } else { VarKind::Continuous };
        variables.push(Variable { name: name.to_string(), kind });
        index.insert(name.to_string(), variables.len() - 1);
        variables.len() - 1
    };
    for name in &binaries {
        declare(name, &mut variables);
    }

    let mut constant = Rational::zero();
    let mut obj_terms = Terms::new();
    for (name, c) in objective {
        if name == CONSTANT_VAR {
            constant += c;
        } else {
            obj_terms.push((declare(&name, &mut variables), c));
        }
    }
    let mut constraints = Vec::new();
    for (name, expr, cmp, mut rhs, line) in raw_constraints {
        let mut terms = Terms::new();
        for (var, c) in expr {
            if var == CONSTANT_VAR {
                rhs -= c;
            } else {
                terms.push((declare(&var, &mut variables), c));
            }
        }
        if terms.is_empty() {
            return Err(LpParseError { line, message: format!("constraint `{name}` has no variables") });
        }
        constraints.push(Constraint { name, terms, cmp, rhs });
    }

    let norm_vars = variables
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.name.strip_prefix("x_").map(|id| (i, id.to_string())))
        .collect();
    let indicator = variables.iter().position(|v| v.name == "y");
    let big_m = indicator.and_then(|y| {
        constraints
            .iter()
            .find(|c| c.name == "ind_hi")
            .and_then(|c| c.terms.iter().find(|(v, _)| *v == y))
            .map(|(_, c)| -c.clone())
    });
    Ok(IlpModel {
        variables,
        objective: Objective { terms: obj_terms, constant },
        constraints,
        norm_vars,
        indicator,
        big_m,
    })
}
