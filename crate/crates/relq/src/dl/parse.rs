//! Parser for the serialized feature syntax.
//!
//! The grammar matches the output of serialization exactly, except that
//! argument order and double inversion are re-normalized on the way in:
//!
//! ```text
//! feature := "dist(" concept "," role "," concept ")" | concept
//! concept := "top" | "not(" concept ")" | "and(" concept "," concept ")"
//!          | "forall(" role "," concept ")" | "exists(" role "," concept ")"
//!          | "eq(" role "," role ")" | ident
//! role    := "inv(" role ")" | ident
//! ident   := [A-Za-z_][A-Za-z0-9_-]*
//! ```
//!
//! A feature-set file holds one `feature complexity` pair per line; blank
//! lines and `#` comments are allowed.

use super::{Concept, Feature, Role};
use crate::{Error, Result};

/// Hard cap on expression nesting; inputs deeper than this are rejected
/// rather than risking the parser's own stack.
const MAX_DEPTH: usize = 64;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col_base: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, line: usize) -> Parser<'a> {
        Parser { src: src.as_bytes(), pos: 0, line, col_base: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.col_base + self.pos, msg)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", ch as char)))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.pos += 1,
            _ => return Err(self.err("expected identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'-' {
                self.pos += 1;
            } else {
                break;
            }
        }
        // start..pos is ASCII, hence valid UTF-8
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii ident"))
    }

    /// True when the identifier just read is a constructor application,
    /// i.e. is followed by '('.
    fn at_open(&self) -> bool {
        self.peek() == Some(b'(')
    }

    fn role(&mut self, depth: usize) -> Result<Role> {
        if depth >= MAX_DEPTH {
            return Err(self.err("expression nested too deeply"));
        }
        let name = self.ident()?;
        if name == "inv" && self.at_open() {
            self.expect(b'(')?;
            let inner = self.role(depth + 1)?;
            self.expect(b')')?;
            Ok(Role::inverse(inner))
        } else {
            Ok(Role::primitive(name))
        }
    }

    fn concept(&mut self, depth: usize) -> Result<Concept> {
        if depth >= MAX_DEPTH {
            return Err(self.err("expression nested too deeply"));
        }
        let name = self.ident()?;
        if !self.at_open() {
            return Ok(if name == "top" {
                Concept::Top
            } else {
                Concept::primitive(name)
            });
        }
        match name {
            "not" => {
                self.expect(b'(')?;
                let c = self.concept(depth + 1)?;
                self.expect(b')')?;
                Ok(Concept::not(c))
            }
            "and" => {
                self.expect(b'(')?;
                let a = self.concept(depth + 1)?;
                self.expect(b',')?;
                let b = self.concept(depth + 1)?;
                self.expect(b')')?;
                Ok(Concept::and(a, b))
            }
            "forall" | "exists" => {
                self.expect(b'(')?;
                let r = self.role(depth + 1)?;
                self.expect(b',')?;
                let c = self.concept(depth + 1)?;
                self.expect(b')')?;
                Ok(if name == "forall" {
                    Concept::forall(r, c)
                } else {
                    Concept::exists(r, c)
                })
            }
            "eq" => {
                self.expect(b'(')?;
                let a = self.role(depth + 1)?;
                self.expect(b',')?;
                let b = self.role(depth + 1)?;
                self.expect(b')')?;
                Ok(Concept::role_eq(a, b))
            }
            _ => Err(self.err(format!("'{name}' is not a concept constructor"))),
        }
    }

    fn feature(&mut self) -> Result<Feature> {
        let checkpoint = self.pos;
        let name = self.ident()?;
        if name == "dist" && self.at_open() {
            self.expect(b'(')?;
            let c1 = self.concept(1)?;
            self.expect(b',')?;
            let r = self.role(1)?;
            self.expect(b',')?;
            let c2 = self.concept(1)?;
            self.expect(b')')?;
            Ok(Feature::distance(c1, r, c2))
        } else {
            self.pos = checkpoint;
            Ok(Feature::concept(self.concept(0)?))
        }
    }

    fn done(&self) -> bool {
        self.pos == self.src.len()
    }
}

/// Parses a single serialized feature expression.
pub fn parse_feature(text: &str) -> Result<Feature> {
    parse_feature_at(text.trim(), 1, 1)
}

fn parse_feature_at(text: &str, line: usize, col_base: usize) -> Result<Feature> {
    if !text.is_ascii() {
        return Err(Error::parse(line, col_base, "feature syntax is ASCII-only"));
    }
    let mut p = Parser::new(text, line);
    p.col_base = col_base;
    let f = p.feature()?;
    if !p.done() {
        return Err(p.err("trailing input after feature"));
    }
    Ok(f)
}

/// Parses one `feature complexity` line of a feature-set file, checking
/// the stated complexity against the expression.
pub fn parse_feature_line(text: &str, line_no: usize) -> Result<Feature> {
    let text = text.trim_end();
    let (expr, stated) = match text.rsplit_once(' ') {
        Some(pair) => pair,
        None => return Err(Error::parse(line_no, 1, "expected 'feature complexity'")),
    };
    let stated: usize = stated.parse().map_err(|_| {
        Error::parse(line_no, expr.len() + 2, format!("invalid complexity '{stated}'"))
    })?;
    let feature = parse_feature_at(expr, line_no, 1)?;
    if feature.complexity != stated {
        return Err(Error::parse(
            line_no,
            expr.len() + 2,
            format!(
                "stated complexity {stated} does not match expression complexity {}",
                feature.complexity
            ),
        ));
    }
    Ok(feature)
}

/// Parses a full feature-set file.
pub fn parse_feature_set(text: &str) -> Result<Vec<Feature>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_feature_line(line, i + 1)?);
    }
    Ok(out)
}
