//! Small line formats: contexts (`x:E, y:N`), assignments
//! (`x=e0, y:N=n1`), and `//@` check directives embedded in model files.
//!
//! A directive line reads
//! `//@ sat|unsat TRACE POS ASSIGN|- [pnf] :: FORMULA`.

use super::{ErrorKind, ParseError, SourceSpan};
use crate::logic::Context;

fn at(line: usize, column: usize, kind: ErrorKind, message: impl Into<String>) -> ParseError {
    ParseError {
        span: SourceSpan {
            file: None,
            line,
            column,
            length: 1,
        },
        kind,
        message: message.into(),
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

/// `x:E, y:N`; the empty string is the empty context.
pub fn parse_context(text: &str) -> Result<Context, ParseError> {
    let mut ctx = Context::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((x, s)) = item.split_once(':') else {
            return Err(at(1, 1, ErrorKind::Syntactic, format!("expected `var:SORT`, found `{item}`")));
        };
        let (x, s) = (x.trim(), s.trim());
        if !valid_name(x) || !valid_name(s) {
            return Err(at(1, 1, ErrorKind::Syntactic, format!("malformed context entry `{item}`")));
        }
        ctx.push(x, s)
            .map_err(|e| at(1, 1, ErrorKind::Scoping, e.to_string()))?;
    }
    Ok(ctx)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignItem {
    pub var: String,
    pub sort: Option<String>,
    pub elem: String,
}

/// `x=e0, y:N=n1`; `-` and the empty string are the empty assignment.
pub fn parse_assignment(text: &str) -> Result<Vec<AssignItem>, ParseError> {
    let text = text.trim();
    if text == "-" {
        return Ok(Vec::new());
    }
    let mut out: Vec<AssignItem> = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((lhs, elem)) = item.split_once('=') else {
            return Err(at(1, 1, ErrorKind::Syntactic, format!("expected `var=elem`, found `{item}`")));
        };
        let (var, sort) = match lhs.split_once(':') {
            Some((v, s)) => (v.trim(), Some(s.trim().to_string())),
            None => (lhs.trim(), None),
        };
        let elem = elem.trim();
        if !valid_name(var) || !valid_name(elem) || sort.as_deref().is_some_and(|s| !valid_name(s)) {
            return Err(at(1, 1, ErrorKind::Syntactic, format!("malformed assignment `{item}`")));
        }
        if out.iter().any(|a| a.var == var) {
            return Err(at(1, 1, ErrorKind::Scoping, format!("`{var}` assigned twice")));
        }
        out.push(AssignItem {
            var: var.to_string(),
            sort,
            elem: elem.to_string(),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Directive {
    /// 1-based line of the directive in the file.
    pub line: usize,
    pub expect_sat: bool,
    pub trace: String,
    pub pos: usize,
    pub assign: Vec<AssignItem>,
    pub pnf: bool,
    pub formula: String,
}

/// Collects the `//@` directives of a model file.
pub fn parse_directives(text: &str) -> Result<Vec<Directive>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(rest) = raw.trim_start().strip_prefix("//@") else {
            continue;
        };
        let Some((head, formula)) = rest.split_once("::") else {
            return Err(at(line, 1, ErrorKind::Syntactic, "directive needs `::` before the formula"));
        };
        let words: Vec<&str> = head.split_whitespace().collect();
        let (verdict, trace, pos, assign, flag) = match words.as_slice() {
            [v, t, p, a] => (*v, *t, *p, *a, None),
            [v, t, p, a, f] => (*v, *t, *p, *a, Some(*f)),
            _ => {
                return Err(at(
                    line,
                    1,
                    ErrorKind::Syntactic,
                    "expected `sat|unsat TRACE POS ASSIGN [pnf] :: FORMULA`",
                ))
            }
        };
        let expect_sat = match verdict {
            "sat" => true,
            "unsat" => false,
            v => return Err(at(line, 1, ErrorKind::Syntactic, format!("unknown verdict `{v}`"))),
        };
        let pnf = match flag {
            None => false,
            Some("pnf") => true,
            Some(f) => return Err(at(line, 1, ErrorKind::Syntactic, format!("unknown flag `{f}`"))),
        };
        let pos = pos
            .parse()
            .map_err(|_| at(line, 1, ErrorKind::Syntactic, format!("bad position `{pos}`")))?;
        let assign = parse_assignment(assign).map_err(|mut e| {
            e.span.line = line;
            e
        })?;
        out.push(Directive {
            line,
            expect_sat,
            trace: trace.to_string(),
            pos,
            assign,
            pnf,
            formula: formula.trim().to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignments() {
        let a = parse_assignment("x=e0, y:N=n1").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[1].sort.as_deref(), Some("N"));
        assert!(parse_assignment("-").unwrap().is_empty());
        assert!(parse_assignment("x=e0,x=e1").is_err());
        assert!(parse_assignment("x").is_err());
    }

    #[test]
    fn contexts() {
        assert_eq!(parse_context("x:E, y:N").unwrap().len(), 2);
        assert!(parse_context("").unwrap().is_empty());
        assert!(parse_context("x:E,x:N").is_err());
    }

    #[test]
    fn directives() {
        let text = "world w {}\n//@ unsat sigma 1 x:E=e1 pnf :: B(x) F R(x)\n//@ sat s 0 - :: O true\n";
        let d = parse_directives(text).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!((d[0].line, d[0].expect_sat, d[0].pnf, d[0].pos), (2, false, true, 1));
        assert_eq!(d[1].formula, "O true");
        assert!(parse_directives("//@ sat s 0 - O true").is_err());
    }
}
