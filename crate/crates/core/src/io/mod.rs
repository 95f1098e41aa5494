//! The line-oriented model format.
//!
//! A model is a `model <version>` line followed by declarations. Each
//! declaration is a header line `<kind> <name> <form> <args...>` starting in
//! column 1, optionally followed by indented body lines. Blank lines and
//! `#` comments are ignored. Numeric entries are exact rationals (`3/2`),
//! decimals (`0.5`, `1e-3`) or complex numbers (`1/2-3i`, `i`).
//!
//! ```text
//! model 1
//! group Z2 cyclic 2
//! groupoid X pair 2
//! action swap units Z2 X left
//!   1 2
//!   2 1
//! ```

mod emit;
mod resolve;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{format_c64, C64};

pub use emit::{emit_action, emit_algebra, emit_bundle, emit_group, emit_groupoid, emit_space_action};
pub use resolve::{resolve, Automorphisms, Object, Objects, Scenario};

pub const FORMAT_VERSION: u32 = 1;

/// One declaration: header tokens and body rows, with source positions kept
/// for error messages. Equality ignores positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decl {
    pub kind: String,
    pub name: String,
    pub form: String,
    pub args: Vec<String>,
    pub body: Vec<Vec<String>>,
    #[serde(skip)]
    pub line: usize,
    #[serde(skip)]
    pub body_pos: Vec<(usize, Vec<usize>)>,
}

impl PartialEq for Decl {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.name == other.name
            && self.form == other.form
            && self.args == other.args
            && self.body == other.body
    }
}

impl Decl {
    pub fn new(kind: &str, name: &str, form: &str, args: Vec<String>) -> Self {
        Decl {
            kind: kind.into(),
            name: name.into(),
            form: form.into(),
            args,
            body: Vec::new(),
            line: 0,
            body_pos: Vec::new(),
        }
    }

    pub fn row(&mut self, row: Vec<String>) {
        self.body.push(row);
    }

    pub(crate) fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line, column: 1, message: message.into() }
    }

    /// Error located at token `col` of body row `row`.
    pub(crate) fn body_err(&self, row: usize, col: usize, message: impl Into<String>) -> Error {
        let (line, column) = match self.body_pos.get(row) {
            Some((l, cols)) => (*l, cols.get(col).copied().unwrap_or(1)),
            None => (self.line, 1),
        };
        Error::Parse { line, column, message: message.into() }
    }
}

/// A parsed model: syntax only. [`resolve`] turns it into objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub decls: Vec<Decl>,
}

impl Default for ModelFile {
    fn default() -> Self {
        ModelFile { version: FORMAT_VERSION, decls: Vec::new() }
    }
}

fn tokens(line: &str) -> Vec<(usize, &str)> {
    let line = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(b, t)| (line[..b].chars().count() + 1, t)).collect()
}

/// Parses the syntax of a model without resolving names.
pub fn parse_syntax(text: &str) -> Result<ModelFile> {
    let mut model = ModelFile::default();
    let mut seen_header = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let toks = tokens(raw);
        if toks.is_empty() {
            continue;
        }
        let indented = raw.starts_with([' ', '\t']);
        if !seen_header {
            if indented || toks[0].1 != "model" || toks.len() != 2 {
                return Err(Error::Parse { line, column: toks[0].0, message: "expected `model <version>`".into() });
            }
            model.version = toks[1].1.parse().map_err(|_| Error::Parse {
                line,
                column: toks[1].0,
                message: format!("bad version `{}`", toks[1].1),
            })?;
            if model.version != FORMAT_VERSION {
                return Err(Error::Parse { line, column: toks[1].0, message: format!("unsupported version {}", model.version) });
            }
            seen_header = true;
            continue;
        }
        if indented {
            let decl = model.decls.last_mut().ok_or_else(|| Error::Parse {
                line,
                column: toks[0].0,
                message: "body line outside a declaration".into(),
            })?;
            decl.body.push(toks.iter().map(|t| t.1.to_string()).collect());
            decl.body_pos.push((line, toks.iter().map(|t| t.0).collect()));
            continue;
        }
        if toks.len() < 3 {
            return Err(Error::Parse { line, column: toks[0].0, message: "expected `<kind> <name> <form> ...`".into() });
        }
        let mut d = Decl::new(toks[0].1, toks[1].1, toks[2].1, toks[3..].iter().map(|t| t.1.to_string()).collect());
        d.line = line;
        model.decls.push(d);
    }
    Ok(model)
}

/// Parses and resolves a model; every reference, table and dimension is
/// checked, so the returned file is known to describe valid objects.
pub fn parse_model(text: &str) -> Result<ModelFile> {
    let m = parse_syntax(text)?;
    resolve(&m)?;
    Ok(m)
}

/// Reads a model from a path.
pub fn read_model(path: &std::path::Path) -> Result<ModelFile> {
    parse_model(&std::fs::read_to_string(path)?)
}

impl ModelFile {
    /// Canonical text: single spaces, two-space body indent, no comments.
    pub fn to_text(&self) -> String {
        let mut s = format!("model {}\n", self.version);
        for d in &self.decls {
            s.push_str(&d.kind);
            for t in [&d.name, &d.form].into_iter().chain(&d.args) {
                s.push(' ');
                s.push_str(t);
            }
            s.push('\n');
            for row in &d.body {
                s.push_str("  ");
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        }
        s
    }

    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }
}

fn real(s: &str) -> Option<f64> {
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.parse().ok()?;
            let q: i64 = q.parse().ok()?;
            (q != 0).then(|| p as f64 / q as f64)
        }
        None => s.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

/// Parses `3/2`, `-1`, `0.5`, `2e-3`, `i`, `-2i`, `1/2+3/4i` and similar.
pub fn parse_scalar(s: &str) -> Option<C64> {
    let Some(body) = s.strip_suffix('i') else {
        return real(s).map(|x| C64::new(x, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => real(t.strip_prefix('+').unwrap_or(t))?,
    };
    Some(C64::new(re, im))
}

pub fn format_scalar(z: C64) -> String {
    format_c64(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars() {
        let c = |re, im| Some(C64::new(re, im));
        assert_eq!(parse_scalar("3/2"), c(1.5, 0.0));
        assert_eq!(parse_scalar("-1"), c(-1.0, 0.0));
        assert_eq!(parse_scalar("0.5"), c(0.5, 0.0));
        assert_eq!(parse_scalar("i"), c(0.0, 1.0));
        assert_eq!(parse_scalar("-i"), c(0.0, -1.0));
        assert_eq!(parse_scalar("1/2-3/4i"), c(0.5, -0.75));
        assert_eq!(parse_scalar("1e-3+2i"), c(1e-3, 2.0));
        assert_eq!(parse_scalar("2.5e+1"), c(25.0, 0.0));
        assert_eq!(parse_scalar("1/0"), None);
        assert_eq!(parse_scalar("x"), None);
        assert_eq!(parse_scalar("1+"), None);
    }

    #[test]
    fn formatted_scalars_parse_back() {
        for z in [C64::new(0.1, -2.0), C64::new(-3.0, 0.0), C64::new(0.0, 1.0 / 3.0), C64::new(1e-20, 5e30)] {
            assert_eq!(parse_scalar(&format_scalar(z)), Some(z));
        }
    }

    #[test]
    fn empty_model_is_empty() {
        let m = parse_model("").unwrap();
        assert!(m.decls.is_empty());
        let m = parse_model("# nothing\nmodel 1\n").unwrap();
        assert!(m.decls.is_empty());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_syntax("model 1\n  1 2\n") {
            Err(Error::Parse { line: 2, column: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_syntax("model 2\n") {
            Err(Error::Parse { line: 1, column: 7, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "model 1\n# c\ngroup  Z2 cyclic 2   # trailing\n\ngroupoid X pair 2\naction s units Z2 X left\n   1 2\n\t2 1\n";
        let m = parse_model(text).unwrap();
        let again = parse_model(&m.to_text()).unwrap();
        assert_eq!(m, again);
        assert_eq!(again.to_text(), m.to_text());
    }
}
