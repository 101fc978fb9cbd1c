use super::{ErrorKind, ParseError, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    Eq,
    /// `=:` introducing an explicit equality sort
    EqColon,
    Neq,
    Arrow,
    Star,
    Bar,
    Amp,
    Bang,
    /// `<>`
    Diamond,
    /// `<>*`
    DiamondAll,
    /// `[]`
    Box,
    /// `[]*`
    BoxAll,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
            t => format!("`{}`", t.text()),
        }
    }

    fn text(&self) -> &str {
        match self {
            Tok::Ident(s) => s,
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Eq => "=",
            Tok::EqColon => "=:",
            Tok::Neq => "!=",
            Tok::Arrow => "->",
            Tok::Star => "*",
            Tok::Bar => "|",
            Tok::Amp => "&",
            Tok::Bang => "!",
            Tok::Diamond => "<>",
            Tok::DiamondAll => "<>*",
            Tok::Box => "[]",
            Tok::BoxAll => "[]*",
            Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub(crate) fn lex(text: &str, file: Option<&str>) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |line, column, length| SourceSpan {
        file: file.map(str::to_string),
        line,
        column,
        length,
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if is_ident(c) {
            let start = i;
            while i < chars.len() && is_ident(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                span: span(line, col, n),
            });
            col += n;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let third = chars.get(i + 2).copied();
        let (tok, n) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('=', Some(':')) => (Tok::EqColon, 2),
            ('!', Some('=')) => (Tok::Neq, 2),
            ('<', Some('>')) if third == Some('*') => (Tok::DiamondAll, 3),
            ('<', Some('>')) => (Tok::Diamond, 2),
            ('[', Some(']')) if third == Some('*') => (Tok::BoxAll, 3),
            ('[', Some(']')) => (Tok::Box, 2),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            ('.', _) => (Tok::Dot, 1),
            ('=', _) => (Tok::Eq, 1),
            ('*', _) => (Tok::Star, 1),
            ('|', _) => (Tok::Bar, 1),
            ('&', _) => (Tok::Amp, 1),
            ('!', _) => (Tok::Bang, 1),
            _ => {
                return Err(ParseError {
                    span: span(line, col, 1),
                    kind: ErrorKind::Lexical,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token {
            tok,
            span: span(line, col, n),
        });
        i += n;
        col += n;
    }
    out.push(Token {
        tok: Tok::Eof,
        span: span(line, col, 0),
    });
    Ok(out)
}

/// Cursor over a token stream with the shared error helpers.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub(crate) fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    pub(crate) fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub(crate) fn error(&self, kind: ErrorKind, message: impl Into<String>) -> ParseError {
        ParseError {
            span: self.span(),
            kind,
            message: message.into(),
        }
    }

    pub(crate) fn unexpected(&self, expected: &str) -> ParseError {
        self.error(
            ErrorKind::Syntactic,
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<SourceSpan, ParseError> {
        if self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub(crate) fn keyword(&mut self, kw: &str) -> Result<SourceSpan, ParseError> {
        if self.at_keyword(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub(crate) fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.unexpected(what)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compound_tokens() {
        let toks: Vec<Tok> = lex("<>* [] []* <> != =: -> = !", None)
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::DiamondAll,
                Tok::Box,
                Tok::BoxAll,
                Tok::Diamond,
                Tok::Neq,
                Tok::EqColon,
                Tok::Arrow,
                Tok::Eq,
                Tok::Bang,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn spans_track_lines() {
        let toks = lex("a // note\n  bb", None).unwrap();
        assert_eq!((toks[1].span.line, toks[1].span.column, toks[1].span.length), (2, 3, 2));
        let err = lex("a\n #", None).unwrap_err();
        assert_eq!((err.span.line, err.span.column), (2, 2));
        assert_eq!(err.kind, ErrorKind::Lexical);
    }
}
