//! Reader and writer for `.qbn` model files.
//!
//! The format is a small YAML-like document:
//!
//! ```text
//! # comment
//! variables: [X, Y, FA]
//!
//! X:
//!   cpt: {parents: [], rows: {"": 0.33}}
//! FA:
//!   cpt: {parents: [X, Y], rows: {"0,0": 0.5, "0,1": 0.97, "1,0": 0.4, "1,1": 0.95}}
//! ```
//!
//! Row keys list one bit per parent in the order the parents are listed.
//! Flow values (`[...]`, `{...}`) may span several lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::bayesnet::{is_identifier, BayesNet, Cpt, Violations};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {message}")]
    Model { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] Violations),
}

impl ParseError {
    fn syntax(line: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            message: message.into(),
        }
    }

    fn model(line: usize, message: impl Into<String>) -> Self {
        ParseError::Model {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    Quoted(String),
    List(Vec<Spanned>),
    Map(Vec<(Spanned, Spanned)>),
}

#[derive(Debug, Clone, PartialEq)]
struct Spanned {
    line: usize,
    value: Value,
}

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn skip_inline_space(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r')) {
            self.pos += 1;
        }
        if self.peek() == Some(b'#') {
            while !matches!(self.peek(), None | Some(b'\n')) {
                self.pos += 1;
            }
        }
    }

    /// Whitespace, comments and newlines (used inside flow collections).
    fn skip_space(&mut self) {
        loop {
            self.skip_inline_space();
            if self.peek() == Some(b'\n') {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, want: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(ParseError::syntax(
                self.line,
                format!("expected '{}', found '{}'", want as char, c as char),
            )),
            None => Err(ParseError::syntax(
                self.line,
                format!("expected '{}', found end of file", want as char),
            )),
        }
    }

    fn scalar(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || matches!(c, b'_' | b'.' | b'-' | b'+') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            let found = self
                .peek()
                .map_or("end of file".to_string(), |c| format!("'{}'", c as char));
            return Err(ParseError::syntax(
                self.line,
                format!("expected a value, found {found}"),
            ));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        let line = self.line;
        self.expect(b'"')?;
        let start = self.pos;
        loop {
            match self.peek() {
                Some(b'"') => break,
                Some(b'\n') | None => {
                    return Err(ParseError::syntax(line, "unterminated string"));
                }
                Some(b'\\') => {
                    return Err(ParseError::syntax(
                        line,
                        "escapes are not supported in strings",
                    ));
                }
                Some(_) => self.pos += 1,
            }
        }
        let text = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        self.bump();
        Ok(text)
    }

    fn value(&mut self) -> Result<Spanned, ParseError> {
        let line = self.line;
        let value = match self.peek() {
            Some(b'[') => {
                self.bump();
                let mut items = Vec::new();
                self.skip_space();
                if self.peek() == Some(b']') {
                    self.bump();
                } else {
                    loop {
                        self.skip_space();
                        items.push(self.value()?);
                        self.skip_space();
                        match self.bump() {
                            Some(b',') => continue,
                            Some(b']') => break,
                            _ => return Err(ParseError::syntax(self.line, "expected ',' or ']'")),
                        }
                    }
                }
                Value::List(items)
            }
            Some(b'{') => {
                self.bump();
                let mut entries = Vec::new();
                self.skip_space();
                if self.peek() == Some(b'}') {
                    self.bump();
                } else {
                    loop {
                        self.skip_space();
                        let key = self.key()?;
                        self.skip_space();
                        self.expect(b':')?;
                        self.skip_space();
                        let val = self.value()?;
                        entries.push((key, val));
                        self.skip_space();
                        match self.bump() {
                            Some(b',') => continue,
                            Some(b'}') => break,
                            _ => return Err(ParseError::syntax(self.line, "expected ',' or '}'")),
                        }
                    }
                }
                Value::Map(entries)
            }
            Some(b'"') => Value::Quoted(self.quoted()?),
            _ => Value::Scalar(self.scalar()?),
        };
        Ok(Spanned { line, value })
    }

    fn key(&mut self) -> Result<Spanned, ParseError> {
        let line = self.line;
        let value = if self.peek() == Some(b'"') {
            Value::Quoted(self.quoted()?)
        } else {
            Value::Scalar(self.scalar()?)
        };
        Ok(Spanned { line, value })
    }

    fn at_line_start_indented(&self) -> bool {
        matches!(self.peek(), Some(b' ' | b'\t'))
    }
}

/// Top-level entries: `key: value` or `key:` followed by an indented block of
/// `key: value` lines.
enum Entry {
    Inline(Spanned),
    Block(Vec<(Spanned, Spanned)>),
}

fn parse_document(text: &str) -> Result<Vec<(Spanned, Entry)>, ParseError> {
    let mut cur = Cursor::new(text);
    let mut entries = Vec::new();
    loop {
        // skip blank / comment lines
        loop {
            let save = (cur.pos, cur.line);
            cur.skip_inline_space();
            match cur.peek() {
                Some(b'\n') => {
                    cur.bump();
                }
                None => return Ok(entries),
                Some(_) => {
                    if save.0 != cur.pos && entries.is_empty() {
                        return Err(ParseError::syntax(cur.line, "unexpected indentation"));
                    }
                    if save.0 != cur.pos {
                        return Err(ParseError::syntax(
                            cur.line,
                            "indented line outside a block",
                        ));
                    }
                    break;
                }
            }
        }
        let key = cur.key()?;
        cur.skip_inline_space();
        cur.expect(b':')?;
        cur.skip_inline_space();
        match cur.peek() {
            None | Some(b'\n') => {
                let mut block = Vec::new();
                loop {
                    // consume the newline ending the previous line
                    if cur.peek() == Some(b'\n') {
                        cur.bump();
                    }
                    let save = (cur.pos, cur.line);
                    if !cur.at_line_start_indented() {
                        cur.skip_inline_space();
                        if cur.peek() == Some(b'\n') {
                            continue;
                        }
                        cur.pos = save.0;
                        cur.line = save.1;
                        break;
                    }
                    cur.skip_inline_space();
                    match cur.peek() {
                        Some(b'\n') => continue,
                        None => break,
                        Some(_) => {}
                    }
                    let k = cur.key()?;
                    cur.skip_inline_space();
                    cur.expect(b':')?;
                    cur.skip_inline_space();
                    let v = cur.value()?;
                    cur.skip_inline_space();
                    if !matches!(cur.peek(), None | Some(b'\n')) {
                        return Err(ParseError::syntax(cur.line, "trailing characters"));
                    }
                    block.push((k, v));
                }
                entries.push((key, Entry::Block(block)));
            }
            Some(_) => {
                let v = cur.value()?;
                cur.skip_inline_space();
                if !matches!(cur.peek(), None | Some(b'\n')) {
                    return Err(ParseError::syntax(cur.line, "trailing characters"));
                }
                entries.push((key, Entry::Inline(v)));
            }
        }
    }
}

fn text_of(s: &Spanned) -> Option<&str> {
    match &s.value {
        Value::Scalar(t) | Value::Quoted(t) => Some(t),
        _ => None,
    }
}

fn parse_probability(s: &Spanned) -> Result<f64, ParseError> {
    match &s.value {
        Value::Scalar(t) => t
            .parse::<f64>()
            .map_err(|_| ParseError::syntax(s.line, format!("invalid number {t:?}"))),
        _ => Err(ParseError::syntax(s.line, "expected a probability")),
    }
}

struct RawCpt {
    line: usize,
    parents: Vec<(usize, String)>,
    rows: Vec<(Spanned, f64)>,
}

fn parse_cpt(value: &Spanned, owner: &str) -> Result<RawCpt, ParseError> {
    let Value::Map(fields) = &value.value else {
        return Err(ParseError::model(
            value.line,
            format!("{owner}: cpt must be a map"),
        ));
    };
    let mut parents = None;
    let mut rows = None;
    for (k, v) in fields {
        match text_of(k) {
            Some("parents") => {
                let Value::List(items) = &v.value else {
                    return Err(ParseError::model(
                        v.line,
                        format!("{owner}: parents must be a list"),
                    ));
                };
                let names = items
                    .iter()
                    .map(|i| {
                        text_of(i)
                            .map(|t| (i.line, t.to_string()))
                            .ok_or_else(|| ParseError::syntax(i.line, "expected a variable name"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if parents.replace(names).is_some() {
                    return Err(ParseError::model(
                        k.line,
                        format!("{owner}: parents given twice"),
                    ));
                }
            }
            Some("rows") => {
                let Value::Map(entries) = &v.value else {
                    return Err(ParseError::model(
                        v.line,
                        format!("{owner}: rows must be a map"),
                    ));
                };
                let parsed = entries
                    .iter()
                    .map(|(rk, rv)| Ok((rk.clone(), parse_probability(rv)?)))
                    .collect::<Result<Vec<_>, ParseError>>()?;
                if rows.replace(parsed).is_some() {
                    return Err(ParseError::model(
                        k.line,
                        format!("{owner}: rows given twice"),
                    ));
                }
            }
            _ => {
                return Err(ParseError::model(
                    k.line,
                    format!("{owner}: unknown cpt field {:?}", text_of(k).unwrap_or("?")),
                ))
            }
        }
    }
    Ok(RawCpt {
        line: value.line,
        parents: parents.unwrap_or_default(),
        rows: rows
            .ok_or_else(|| ParseError::model(value.line, format!("{owner}: cpt has no rows")))?,
    })
}

/// Parses a model file and validates the resulting network.
pub fn parse_model(text: &str) -> Result<BayesNet, ParseError> {
    let entries = parse_document(text)?;
    let mut names: Option<(usize, Vec<String>)> = None;
    let mut blocks: BTreeMap<String, (usize, RawCpt)> = BTreeMap::new();
    for (key, entry) in &entries {
        let Some(k) = text_of(key) else {
            return Err(ParseError::syntax(key.line, "expected a key"));
        };
        match (k, entry) {
            ("variables", Entry::Inline(v)) => {
                let Value::List(items) = &v.value else {
                    return Err(ParseError::model(v.line, "variables must be a list"));
                };
                let list = items
                    .iter()
                    .map(|i| {
                        text_of(i)
                            .map(str::to_string)
                            .ok_or_else(|| ParseError::syntax(i.line, "expected a variable name"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if names.replace((key.line, list)).is_some() {
                    return Err(ParseError::model(key.line, "variables declared twice"));
                }
            }
            ("variables", Entry::Block(_)) => {
                return Err(ParseError::model(key.line, "variables must be a list"));
            }
            (name, Entry::Block(fields)) => {
                let mut cpt = None;
                for (fk, fv) in fields {
                    match text_of(fk) {
                        Some("cpt") if cpt.is_none() => cpt = Some(parse_cpt(fv, name)?),
                        Some("cpt") => {
                            return Err(ParseError::model(
                                fk.line,
                                format!("{name}: cpt given twice"),
                            ))
                        }
                        other => {
                            return Err(ParseError::model(
                                fk.line,
                                format!("{name}: unknown field {:?}", other.unwrap_or("?")),
                            ))
                        }
                    }
                }
                let cpt =
                    cpt.ok_or_else(|| ParseError::model(key.line, format!("{name}: missing cpt")))?;
                if blocks.insert(name.to_string(), (key.line, cpt)).is_some() {
                    return Err(ParseError::model(
                        key.line,
                        format!("{name}: defined twice"),
                    ));
                }
            }
            (name, Entry::Inline(v)) => {
                return Err(ParseError::model(
                    v.line,
                    format!("{name}: expected an indented block with a cpt"),
                ));
            }
        }
    }
    let (decl_line, names) =
        names.ok_or_else(|| ParseError::model(1, "missing `variables: [...]` declaration"))?;
    if names.is_empty() {
        return Err(ParseError::model(decl_line, "no variables declared"));
    }
    for name in &names {
        if !is_identifier(name) {
            return Err(ParseError::model(
                decl_line,
                format!("invalid variable name {name:?}"),
            ));
        }
    }
    for (name, (line, _)) in &blocks {
        if !names.contains(name) {
            return Err(ParseError::model(
                *line,
                format!("cpt for undeclared variable {name}"),
            ));
        }
    }
    let index = |n: &str| names.iter().position(|x| x == n);
    let mut cpts = Vec::with_capacity(names.len());
    for name in &names {
        let (_, raw) = blocks
            .remove(name)
            .ok_or_else(|| ParseError::model(decl_line, format!("{name}: no cpt given")))?;
        cpts.push(build_cpt(name, raw, &names, index)?);
    }
    Ok(BayesNet::new(names, cpts)?)
}

fn build_cpt(
    owner: &str,
    raw: RawCpt,
    names: &[String],
    index: impl Fn(&str) -> Option<usize>,
) -> Result<Cpt, ParseError> {
    let mut parents = Vec::with_capacity(raw.parents.len());
    for (line, p) in &raw.parents {
        let i = index(p)
            .ok_or_else(|| ParseError::model(*line, format!("{owner}: undeclared parent {p}")))?;
        if parents.contains(&i) {
            return Err(ParseError::model(
                *line,
                format!("{owner}: parent {p} listed twice"),
            ));
        }
        parents.push(i);
    }
    let k = parents.len();
    if k > 24 {
        return Err(ParseError::model(
            raw.line,
            format!("{owner}: too many parents"),
        ));
    }
    let mut rows: Vec<Option<f64>> = vec![None; 1 << k];
    for (key, p) in raw.rows {
        let text = text_of(&key).unwrap_or_default();
        let bits: Vec<&str> = if text.is_empty() {
            Vec::new()
        } else {
            text.split(',').map(str::trim).collect()
        };
        if bits.len() != k || bits.iter().any(|b| *b != "0" && *b != "1") {
            return Err(ParseError::model(
                key.line,
                format!("{owner}: row key {text:?} must list {k} comma-separated bits"),
            ));
        }
        let r = Cpt::row_index(bits.iter().map(|b| *b == "1"));
        if rows[r].replace(p).is_some() {
            return Err(ParseError::model(
                key.line,
                format!("{owner}: duplicate row {text:?}"),
            ));
        }
    }
    let mut filled = Vec::with_capacity(rows.len());
    for (r, p) in rows.into_iter().enumerate() {
        match p {
            Some(p) => filled.push(p),
            None => {
                let assignment = (0..k)
                    .map(|j| format!("{}={}", names[parents[j]], (r >> (k - 1 - j)) & 1))
                    .collect::<Vec<_>>()
                    .join(",");
                let what = if k == 0 {
                    "prior".to_string()
                } else {
                    format!("\"{assignment}\"")
                };
                return Err(ParseError::model(
                    raw.line,
                    format!("{owner}: missing CPT row {what}"),
                ));
            }
        }
    }
    Ok(Cpt::new(parents, filled))
}

/// Renders a network in the model format. Probabilities use the shortest
/// representation that parses back to the same double.
pub fn render_model(net: &BayesNet) -> String {
    let mut out = String::new();
    let names: Vec<&str> = net.variables().iter().map(|v| v.name.as_str()).collect();
    let _ = writeln!(out, "variables: [{}]", names.join(", "));
    for (v, cpt) in net.cpts().iter().enumerate() {
        let parents: Vec<&str> = cpt.parents().iter().map(|&p| names[p]).collect();
        let rows: Vec<String> = cpt
            .rows()
            .iter()
            .enumerate()
            .map(|(r, p)| {
                let key: Vec<&str> = cpt
                    .row_bits(r)
                    .into_iter()
                    .map(|b| if b { "1" } else { "0" })
                    .collect();
                format!("\"{}\": {:?}", key.join(","), p)
            })
            .collect();
        let _ = writeln!(out, "\n{}:", names[v]);
        let _ = writeln!(
            out,
            "  cpt: {{parents: [{}], rows: {{{}}}}}",
            parents.join(", "),
            rows.join(", ")
        );
    }
    out
}
