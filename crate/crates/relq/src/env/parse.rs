//! The instance file format.
//!
//! Line-oriented text; each line is `section: content` or a `#` comment.
//! Sections:
//!
//! ```text
//! domain:  sysadmin | advising | life | wildfire        (required, once)
//! objects: name ...                                     (required)
//! static:  fact ...     e.g. link(c0,c1)                (optional)
//! init:    fact ...     dynamic facts true at the start (optional)
//! horizon: steps per episode                            (required, once)
//! seed:    base seed for episode RNG streams            (optional, once)
//! params:  key=value probability/reward overrides       (optional)
//! ```
//!
//! `objects`, `static`, `init` and `params` may repeat; their contents
//! accumulate. Facts are written `predicate(arg,...)` with no internal
//! whitespace. Unknown sections, unknown predicates or parameters, arity
//! mismatches, and undeclared objects are all rejected with the offending
//! line and column.

use std::collections::BTreeSet;

use super::{DomainKind, InstanceSpec, Params};
use crate::relational::{GroundFact, ObjectUniverse};
use crate::{Error, Result};

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<InstanceSpec> {
    let mut domain_line: Option<(usize, usize, String)> = None;
    let mut horizon_line: Option<(usize, usize, String)> = None;
    let mut seed_line: Option<(usize, usize, String)> = None;
    let mut objects: Vec<(usize, usize, String)> = Vec::new();
    let mut static_tokens: Vec<(usize, usize, String)> = Vec::new();
    let mut init_tokens: Vec<(usize, usize, String)> = Vec::new();
    let mut param_tokens: Vec<(usize, usize, String)> = Vec::new();
    let mut objects_line: Option<usize> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let colon = line.find(':').ok_or_else(|| {
            Error::parse(line_no, 1, "expected 'section: content'")
        })?;
        let section = line[..colon].trim();
        let content_col = colon + 2; // 1-based column of the content start
        let content = &line[colon + 1..];
        match section {
            "domain" => {
                set_once(&mut domain_line, line_no, content_col, content, "domain")?
            }
            "horizon" => {
                set_once(&mut horizon_line, line_no, content_col, content, "horizon")?
            }
            "seed" => set_once(&mut seed_line, line_no, content_col, content, "seed")?,
            "objects" => {
                objects_line.get_or_insert(line_no);
                tokens_into(&mut objects, line_no, content_col, content);
            }
            "static" => tokens_into(&mut static_tokens, line_no, content_col, content),
            "init" => tokens_into(&mut init_tokens, line_no, content_col, content),
            "params" => tokens_into(&mut param_tokens, line_no, content_col, content),
            _ => {
                return Err(Error::parse(
                    line_no,
                    1,
                    format!("unknown section '{section}'"),
                ));
            }
        }
    }

    let (dline, dcol, dname) =
        domain_line.ok_or_else(|| Error::parse(1, 1, "missing 'domain:' section"))?;
    let kind = DomainKind::from_name(&dname)
        .ok_or_else(|| Error::parse(dline, dcol, format!("unknown domain '{dname}'")))?;
    let domain = kind.domain();

    if objects.is_empty() {
        let line = objects_line.unwrap_or(1);
        return Err(Error::parse(line, 1, "universe must be non-empty"));
    }
    for (line, col, name) in &objects {
        if !is_ident(name) {
            return Err(Error::parse(*line, *col, format!("invalid object name '{name}'")));
        }
    }
    let universe = ObjectUniverse::new(objects.iter().map(|(_, _, o)| o.clone()).collect())
        .map_err(|e| {
            Error::parse(objects_line.unwrap_or(1), 1, e.to_string())
        })?;

    let mut static_facts = BTreeSet::new();
    for (line, col, token) in &static_tokens {
        let fact = parse_fact(token, *line, *col)?;
        fact.validate(&domain, &universe).map_err(|e| Error::parse(*line, *col, e.to_string()))?;
        static_facts.insert(fact);
    }
    let mut initial_facts = BTreeSet::new();
    for (line, col, token) in &init_tokens {
        let fact = parse_fact(token, *line, *col)?;
        fact.validate(&domain, &universe).map_err(|e| Error::parse(*line, *col, e.to_string()))?;
        initial_facts.insert(fact);
    }

    let (hline, hcol, htext) =
        horizon_line.ok_or_else(|| Error::parse(1, 1, "missing 'horizon:' section"))?;
    let horizon: u32 = htext
        .parse()
        .map_err(|_| Error::parse(hline, hcol, format!("invalid horizon '{htext}'")))?;
    if horizon == 0 {
        return Err(Error::parse(hline, hcol, "horizon must be at least 1"));
    }

    let seed: u64 = match &seed_line {
        Some((line, col, text)) => text
            .parse()
            .map_err(|_| Error::parse(*line, *col, format!("invalid seed '{text}'")))?,
        None => 0,
    };

    let mut params = Params::defaults(kind);
    for (line, col, token) in &param_tokens {
        let (key, value) = token.split_once('=').ok_or_else(|| {
            Error::parse(*line, *col, format!("expected key=value, got '{token}'"))
        })?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::parse(*line, *col, format!("invalid value '{value}'")))?;
        if !value.is_finite() {
            return Err(Error::parse(*line, *col, "parameter values must be finite"));
        }
        params
            .set(key, value)
            .map_err(|e| Error::parse(*line, *col, e.to_string()))?;
    }

    let spec =
        InstanceSpec { kind, domain, universe, static_facts, initial_facts, horizon, seed, params };
    spec.validate().map_err(|e| Error::parse(1, 1, e.to_string()))?;
    Ok(spec)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn set_once(
    slot: &mut Option<(usize, usize, String)>,
    line: usize,
    col: usize,
    content: &str,
    section: &str,
) -> Result<()> {
    if slot.is_some() {
        return Err(Error::parse(line, 1, format!("duplicate '{section}:' section")));
    }
    *slot = Some((line, col + leading_ws(content), content.trim().to_string()));
    Ok(())
}

fn leading_ws(s: &str) -> usize {
    s.len() - s.trim_start().len()
}

/// Splits whitespace-separated tokens, remembering each token's column.
fn tokens_into(out: &mut Vec<(usize, usize, String)>, line: usize, col_base: usize, content: &str) {
    let mut col = col_base;
    for piece in content.split(' ') {
        let trimmed = piece.trim();
        if !trimmed.is_empty() {
            let offset = piece.len() - piece.trim_start().len();
            out.push((line, col + offset, trimmed.to_string()));
        }
        col += piece.len() + 1;
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Parses `predicate(arg,...)` or a bare `predicate`.
fn parse_fact(token: &str, line: usize, col: usize) -> Result<GroundFact> {
    let err = |msg: String| Error::parse(line, col, msg);
    match token.split_once('(') {
        None => {
            if !is_ident(token) {
                return Err(err(format!("invalid fact '{token}'")));
            }
            Ok(GroundFact { predicate: token.to_string(), args: Vec::new() })
        }
        Some((name, rest)) => {
            if !is_ident(name) {
                return Err(err(format!("invalid predicate name '{name}'")));
            }
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| err(format!("missing ')' in fact '{token}'")))?;
            if inner.contains('(') || inner.contains(')') {
                return Err(err(format!("malformed fact '{token}'")));
            }
            let args: Vec<String> = if inner.is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|a| a.to_string()).collect()
            };
            for a in &args {
                if !is_ident(a) {
                    return Err(err(format!("invalid object name '{a}' in fact '{token}'")));
                }
            }
            Ok(GroundFact { predicate: name.to_string(), args })
        }
    }
}

/// Canonical text form of an instance; `parse_instance` inverts it.
pub fn instance_to_text(spec: &InstanceSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("domain: {}\n", spec.kind.name()));
    out.push_str(&format!("objects: {}\n", spec.universe.objects().join(" ")));
    for chunk in spec.static_facts.iter().collect::<Vec<_>>().chunks(8) {
        let rendered: Vec<String> = chunk.iter().map(|f| f.to_string()).collect();
        out.push_str(&format!("static: {}\n", rendered.join(" ")));
    }
    for chunk in spec.initial_facts.iter().collect::<Vec<_>>().chunks(8) {
        let rendered: Vec<String> = chunk.iter().map(|f| f.to_string()).collect();
        out.push_str(&format!("init: {}\n", rendered.join(" ")));
    }
    out.push_str(&format!("horizon: {}\n", spec.horizon));
    out.push_str(&format!("seed: {}\n", spec.seed));
    let rendered: Vec<String> =
        spec.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    out.push_str(&format!("params: {}\n", rendered.join(" ")));
    out
}
