//! Formula surface syntax.
//!
//! Precedence from loosest to tightest: the temporal binaries `U F W T`
//! (non-associative), `|`, `&`, the prefix operators `! O A <> [] <>* []*`,
//! then atoms. A quantifier `exists [SORT] x . φ` takes everything to its
//! right as its body.

use super::lexer::{lex, Cursor, Tok};
use super::{ErrorKind, ParseError, SourceSpan};
use crate::algebra::{Signature, SortId};
use crate::logic::{Atom, Context, Formula, Pnf, Term};

type PResult<T> = Result<T, ParseError>;

const KEYWORDS: &[&str] = &["true", "false", "exists", "forall", "O", "A", "U", "F", "W", "T"];

#[derive(Clone, Debug)]
enum STerm {
    Name(String, SourceSpan),
    App(String, Vec<STerm>, SourceSpan),
}

impl STerm {
    fn span(&self) -> &SourceSpan {
        match self {
            STerm::Name(_, s) | STerm::App(_, _, s) => s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Unary {
    Next,
    NextAll,
    Eventually,
    Always,
    EventuallyAll,
    AlwaysAll,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Binary {
    U,
    F,
    W,
    T,
}

#[derive(Clone, Debug)]
enum Surf {
    True,
    False,
    Eq {
        sort: Option<(String, SourceSpan)>,
        lhs: STerm,
        rhs: STerm,
        negated: bool,
        span: SourceSpan,
    },
    Label {
        name: String,
        arg: STerm,
    },
    Not(Box<Surf>, SourceSpan),
    Or(Box<Surf>, Box<Surf>),
    And(Box<Surf>, Box<Surf>),
    Quant {
        universal: bool,
        var: String,
        sort: Option<String>,
        body: Box<Surf>,
        span: SourceSpan,
    },
    Unary(Unary, Box<Surf>, SourceSpan),
    Binary(Binary, Box<Surf>, Box<Surf>, SourceSpan),
}

impl Surf {
    fn is_atomic(&self) -> bool {
        matches!(self, Surf::True | Surf::Eq { negated: false, .. } | Surf::Label { .. })
    }

    fn needs_pnf(&self) -> bool {
        match self {
            Surf::True | Surf::False | Surf::Eq { .. } | Surf::Label { .. } => false,
            Surf::Unary(op, f, _) => {
                matches!(op, Unary::NextAll | Unary::EventuallyAll | Unary::AlwaysAll) || f.needs_pnf()
            }
            Surf::Binary(op, a, b, _) => {
                matches!(op, Binary::F | Binary::T) || a.needs_pnf() || b.needs_pnf()
            }
            Surf::Not(f, _) | Surf::Quant { body: f, .. } => f.needs_pnf(),
            Surf::Or(a, b) | Surf::And(a, b) => a.needs_pnf() || b.needs_pnf(),
        }
    }
}

struct Parser<'s> {
    cur: Cursor,
    sig: &'s Signature,
}

impl<'s> Parser<'s> {
    fn formula(&mut self) -> PResult<Surf> {
        let lhs = self.disj()?;
        let Some(op) = self.binary_op() else {
            return Ok(lhs);
        };
        let span = self.cur.bump().span;
        let rhs = self.disj()?;
        if self.binary_op().is_some() {
            return Err(self.cur.error(
                ErrorKind::Syntactic,
                format!(
                    "temporal operators do not associate: parenthesize before {}",
                    self.cur.peek().describe()
                ),
            ));
        }
        Ok(Surf::Binary(op, Box::new(lhs), Box::new(rhs), span))
    }

    fn binary_op(&self) -> Option<Binary> {
        match self.cur.peek() {
            Tok::Ident(s) => match s.as_str() {
                "U" => Some(Binary::U),
                "F" => Some(Binary::F),
                "W" => Some(Binary::W),
                "T" => Some(Binary::T),
                _ => None,
            },
            _ => None,
        }
    }

    fn disj(&mut self) -> PResult<Surf> {
        let mut f = self.conj()?;
        while self.cur.eat(&Tok::Bar) {
            f = Surf::Or(Box::new(f), Box::new(self.conj()?));
        }
        Ok(f)
    }

    fn conj(&mut self) -> PResult<Surf> {
        let mut f = self.unary()?;
        while self.cur.eat(&Tok::Amp) {
            f = Surf::And(Box::new(f), Box::new(self.unary()?));
        }
        Ok(f)
    }

    fn unary(&mut self) -> PResult<Surf> {
        let span = self.cur.span();
        let op = match self.cur.peek() {
            Tok::Bang => {
                self.cur.bump();
                return Ok(Surf::Not(Box::new(self.unary()?), span));
            }
            Tok::Diamond => Unary::Eventually,
            Tok::Box => Unary::Always,
            Tok::DiamondAll => Unary::EventuallyAll,
            Tok::BoxAll => Unary::AlwaysAll,
            Tok::Ident(s) if s == "O" => Unary::Next,
            Tok::Ident(s) if s == "A" => Unary::NextAll,
            Tok::Ident(s) if s == "exists" || s == "forall" => return self.quantifier(),
            _ => return self.primary(),
        };
        self.cur.bump();
        Ok(Surf::Unary(op, Box::new(self.unary()?), span))
    }

    fn quantifier(&mut self) -> PResult<Surf> {
        let (q, span) = self.cur.ident("a quantifier")?;
        let (first, fspan) = self.cur.ident("a variable or sort")?;
        let (var, vspan, sort) = if let Tok::Ident(_) = self.cur.peek() {
            let (v, vs) = self.cur.ident("a variable")?;
            (v, vs, Some(first))
        } else {
            (first, fspan, None)
        };
        if KEYWORDS.contains(&var.as_str()) {
            return Err(ParseError {
                span: vspan,
                kind: ErrorKind::Syntactic,
                message: format!("`{var}` is reserved and cannot name a variable"),
            });
        }
        if let Some(s) = &sort {
            if self.sig.sort_id(s).is_none() {
                return Err(ParseError {
                    span: span.clone(),
                    kind: ErrorKind::Sort,
                    message: format!("unknown sort `{s}`"),
                });
            }
        }
        self.cur.expect(&Tok::Dot)?;
        let body = self.formula()?;
        Ok(Surf::Quant {
            universal: q == "forall",
            var,
            sort,
            body: Box::new(body),
            span: vspan,
        })
    }

    fn primary(&mut self) -> PResult<Surf> {
        if self.cur.eat(&Tok::LParen) {
            let f = self.formula()?;
            self.cur.expect(&Tok::RParen)?;
            return Ok(f);
        }
        if self.cur.at_keyword("true") {
            self.cur.bump();
            return Ok(Surf::True);
        }
        if self.cur.at_keyword("false") {
            self.cur.bump();
            return Ok(Surf::False);
        }
        let span = self.cur.span();
        let Tok::Ident(name) = self.cur.peek().clone() else {
            return Err(self.cur.unexpected("a formula"));
        };
        if KEYWORDS.contains(&name.as_str()) {
            return Err(self.cur.unexpected("a formula"));
        }
        if self.sig.function_id(&name).is_none() && self.cur.peek_at(1) == &Tok::LParen {
            self.cur.bump();
            self.cur.bump();
            let arg = self.term()?;
            if self.cur.peek() == &Tok::Comma {
                return Err(self.cur.error(
                    ErrorKind::Sort,
                    format!("label `{name}` is unary"),
                ));
            }
            self.cur.expect(&Tok::RParen)?;
            return Ok(Surf::Label { name, arg });
        }
        let lhs = self.term()?;
        let (sort, negated) = match self.cur.peek() {
            Tok::Eq => {
                self.cur.bump();
                (None, false)
            }
            Tok::Neq => {
                self.cur.bump();
                (None, true)
            }
            Tok::EqColon => {
                self.cur.bump();
                let s = self.cur.ident("a sort")?;
                (Some(s), false)
            }
            _ => return Err(self.cur.unexpected("`=`, `!=` or `=:SORT` after a term")),
        };
        let rhs = self.term()?;
        Ok(Surf::Eq {
            sort,
            lhs,
            rhs,
            negated,
            span,
        })
    }

    fn term(&mut self) -> PResult<STerm> {
        let (name, span) = self.cur.ident("a term")?;
        if KEYWORDS.contains(&name.as_str()) {
            return Err(ParseError {
                span,
                kind: ErrorKind::Syntactic,
                message: format!("expected a term, found keyword `{name}`"),
            });
        }
        if !self.cur.eat(&Tok::LParen) {
            return Ok(STerm::Name(name, span));
        }
        let mut args = Vec::new();
        if !self.cur.eat(&Tok::RParen) {
            loop {
                args.push(self.term()?);
                if self.cur.eat(&Tok::RParen) {
                    break;
                }
                self.cur.expect(&Tok::Comma)?;
            }
        }
        Ok(STerm::App(name, args, span))
    }
}

fn parse_surface(text: &str, sig: &Signature) -> PResult<Surf> {
    let mut p = Parser {
        cur: Cursor::new(lex(text, None)?),
        sig,
    };
    let f = p.formula()?;
    if p.cur.peek() != &Tok::Eof {
        return Err(p.cur.unexpected("end of formula"));
    }
    Ok(f)
}

/// Variables in scope during elaboration.
struct Env<'s> {
    sig: &'s Signature,
    vars: Vec<(String, SortId)>,
}

fn perr(span: &SourceSpan, kind: ErrorKind, message: impl Into<String>) -> ParseError {
    ParseError {
        span: span.clone(),
        kind,
        message: message.into(),
    }
}

impl<'s> Env<'s> {
    fn new(sig: &'s Signature, ctx: &Context) -> PResult<Self> {
        let mut vars = Vec::new();
        for (x, s) in ctx.iter() {
            let id = sig.sort_id(s).ok_or_else(|| {
                perr(&SourceSpan::default(), ErrorKind::Sort, format!("unknown sort `{s}` in context"))
            })?;
            vars.push((x.to_string(), id));
        }
        Ok(Env { sig, vars })
    }

    fn lookup(&self, x: &str) -> Option<SortId> {
        self.vars.iter().rev().find(|(y, _)| y == x).map(|(_, s)| *s)
    }

    fn term(&self, t: &STerm) -> PResult<(Term, SortId)> {
        match t {
            STerm::Name(x, span) => {
                if let Some(s) = self.lookup(x) {
                    return Ok((Term::Var(x.clone()), s));
                }
                match self.sig.function_id(x) {
                    Some(f) if self.sig.function(f).args.is_empty() => {
                        Ok((Term::App(x.clone(), vec![]), self.sig.function(f).result))
                    }
                    _ => Err(perr(span, ErrorKind::Scoping, format!("unbound variable `{x}`"))),
                }
            }
            STerm::App(f, args, span) => {
                let id = self
                    .sig
                    .function_id(f)
                    .ok_or_else(|| perr(span, ErrorKind::Reference, format!("unknown function `{f}`")))?;
                let sym = self.sig.function(id);
                if sym.args.len() != args.len() {
                    return Err(perr(
                        span,
                        ErrorKind::Sort,
                        format!("`{f}` takes {} arguments, got {}", sym.args.len(), args.len()),
                    ));
                }
                let mut out = Vec::new();
                for (a, &want) in args.iter().zip(&sym.args) {
                    let (t, got) = self.term(a)?;
                    if got != want {
                        return Err(perr(
                            a.span(),
                            ErrorKind::Sort,
                            format!(
                                "argument of `{f}` must have sort {}, found {}",
                                self.sig.sort_name(want),
                                self.sig.sort_name(got)
                            ),
                        ));
                    }
                    out.push(t);
                }
                Ok((Term::App(f.clone(), out), sym.result))
            }
        }
    }

    /// Sort of a term if derivable without the variable `unknown`.
    fn try_sort(&self, t: &STerm) -> Option<SortId> {
        self.term(t).ok().map(|(_, s)| s)
    }

    fn eq_atom(
        &self,
        sort: &Option<(String, SourceSpan)>,
        lhs: &STerm,
        rhs: &STerm,
        span: &SourceSpan,
    ) -> PResult<Atom> {
        let (l, ls) = self.term(lhs)?;
        let (r, rs) = self.term(rhs)?;
        let want = match sort {
            Some((s, sspan)) => self
                .sig
                .sort_id(s)
                .ok_or_else(|| perr(sspan, ErrorKind::Sort, format!("unknown sort `{s}`")))?,
            None => ls,
        };
        if ls != want || rs != want {
            return Err(perr(
                span,
                ErrorKind::Sort,
                format!(
                    "equality between sorts {} and {}",
                    self.sig.sort_name(ls),
                    self.sig.sort_name(rs)
                ),
            ));
        }
        Ok(Atom::eq(self.sig.sort_name(want), l, r))
    }

    fn atom(&self, f: &Surf) -> PResult<Option<Atom>> {
        Ok(match f {
            Surf::True => Some(Atom::True),
            Surf::Eq {
                sort,
                lhs,
                rhs,
                span,
                negated: false,
            } => Some(self.eq_atom(sort, lhs, rhs, span)?),
            Surf::Label { name, arg } => Some(Atom::label(name, self.term(arg)?.0)),
            _ => None,
        })
    }

    fn bind<T>(
        &mut self,
        var: &str,
        sort: &Option<String>,
        body: &Surf,
        span: &SourceSpan,
        go: impl FnOnce(&mut Self, &Surf) -> PResult<T>,
    ) -> PResult<(String, T)> {
        if self.lookup(var).is_some() {
            return Err(perr(
                span,
                ErrorKind::Scoping,
                format!("`{var}` is already bound; shadowing is not allowed"),
            ));
        }
        let sid = match sort {
            Some(s) => self
                .sig
                .sort_id(s)
                .ok_or_else(|| perr(span, ErrorKind::Sort, format!("unknown sort `{s}`")))?,
            None => self.infer(var, body).ok_or_else(|| {
                perr(
                    span,
                    ErrorKind::Sort,
                    format!("cannot infer the sort of `{var}`; write `exists SORT {var} . ...`"),
                )
            })?,
        };
        self.vars.push((var.to_string(), sid));
        let r = go(self, body);
        self.vars.pop();
        Ok((self.sig.sort_name(sid).to_string(), r?))
    }

    /// Infers the sort of a fresh variable from its uses in `body`: as a
    /// function argument, or as one side of an equality whose sort is known.
    fn infer(&mut self, var: &str, body: &Surf) -> Option<SortId> {
        fn in_term(sig: &Signature, var: &str, t: &STerm) -> Option<SortId> {
            let STerm::App(f, args, _) = t else { return None };
            let id = sig.function_id(f)?;
            let sym = sig.function(id);
            args.iter().enumerate().find_map(|(i, a)| match a {
                STerm::Name(x, _) if x == var => sym.args.get(i).copied(),
                _ => in_term(sig, var, a),
            })
        }
        let is_var = |t: &STerm| matches!(t, STerm::Name(x, _) if x == var);
        match body {
            Surf::True | Surf::False => None,
            Surf::Label { arg, .. } => in_term(self.sig, var, arg),
            Surf::Eq { sort, lhs, rhs, .. } => {
                if let Some(s) = in_term(self.sig, var, lhs).or_else(|| in_term(self.sig, var, rhs)) {
                    return Some(s);
                }
                if !is_var(lhs) && !is_var(rhs) {
                    return None;
                }
                if let Some((s, _)) = sort {
                    return self.sig.sort_id(s);
                }
                let other = if is_var(lhs) { rhs } else { lhs };
                if is_var(other) {
                    return None;
                }
                self.try_sort(other)
            }
            Surf::Not(f, _) | Surf::Unary(_, f, _) => self.infer(var, f),
            Surf::Or(a, b) | Surf::And(a, b) | Surf::Binary(_, a, b, _) => {
                self.infer(var, a).or_else(|| self.infer(var, b))
            }
            Surf::Quant {
                var: inner,
                sort,
                body,
                ..
            } => {
                if inner == var {
                    return None;
                }
                let sid = match sort {
                    Some(s) => self.sig.sort_id(s),
                    None => self.infer(inner, body),
                };
                match sid {
                    Some(sid) => {
                        self.vars.push((inner.clone(), sid));
                        let r = self.infer(var, body);
                        self.vars.pop();
                        r
                    }
                    None => self.infer(var, body),
                }
            }
        }
    }

    fn qltl(&mut self, f: &Surf) -> PResult<Formula> {
        if let Some(a) = self.atom(f)? {
            return Ok(Formula::Atom(a));
        }
        let pnf_only = |span: &SourceSpan, op: &str| {
            perr(
                span,
                ErrorKind::Syntactic,
                format!("`{op}` exists only in positive normal form"),
            )
        };
        Ok(match f {
            Surf::False => Formula::ff(),
            Surf::Eq {
                sort,
                lhs,
                rhs,
                span,
                ..
            } => Formula::not(Formula::Atom(self.eq_atom(sort, lhs, rhs, span)?)),
            Surf::Not(g, _) => Formula::not(self.qltl(g)?),
            Surf::Or(a, b) => Formula::or(self.qltl(a)?, self.qltl(b)?),
            Surf::And(a, b) => Formula::and(self.qltl(a)?, self.qltl(b)?),
            Surf::Quant {
                universal,
                var,
                sort,
                body,
                span,
            } => {
                let (s, b) = self.bind(var, sort, body, span, |e, b| e.qltl(b))?;
                if *universal {
                    Formula::forall(var, &s, b)
                } else {
                    Formula::exists(var, &s, b)
                }
            }
            Surf::Unary(op, g, span) => match op {
                Unary::Next => Formula::next(self.qltl(g)?),
                Unary::Eventually => Formula::eventually(self.qltl(g)?),
                Unary::Always => Formula::always(self.qltl(g)?),
                Unary::NextAll => return Err(pnf_only(span, "A")),
                Unary::EventuallyAll => return Err(pnf_only(span, "<>*")),
                Unary::AlwaysAll => return Err(pnf_only(span, "[]*")),
            },
            Surf::Binary(op, a, b, span) => match op {
                Binary::U => Formula::until(self.qltl(a)?, self.qltl(b)?),
                Binary::W => Formula::wuntil(self.qltl(a)?, self.qltl(b)?),
                Binary::F => return Err(pnf_only(span, "F")),
                Binary::T => return Err(pnf_only(span, "T")),
            },
            Surf::True | Surf::Label { .. } => unreachable!("atoms handled above"),
        })
    }

    fn pnf(&mut self, f: &Surf) -> PResult<Pnf> {
        if let Some(a) = self.atom(f)? {
            return Ok(Pnf::Atom(a));
        }
        Ok(match f {
            Surf::False => Pnf::ff(),
            Surf::Eq {
                sort,
                lhs,
                rhs,
                span,
                ..
            } => Pnf::NegAtom(self.eq_atom(sort, lhs, rhs, span)?),
            Surf::Not(g, span) => {
                if !g.is_atomic() {
                    return Err(perr(
                        span,
                        ErrorKind::Syntactic,
                        "in positive normal form `!` applies only to atoms",
                    ));
                }
                Pnf::NegAtom(self.atom(g)?.expect("atomic"))
            }
            Surf::Or(a, b) => Pnf::or(self.pnf(a)?, self.pnf(b)?),
            Surf::And(a, b) => Pnf::and(self.pnf(a)?, self.pnf(b)?),
            Surf::Quant {
                universal,
                var,
                sort,
                body,
                span,
            } => {
                let (s, b) = self.bind(var, sort, body, span, |e, b| e.pnf(b))?;
                if *universal {
                    Pnf::forall(var, &s, b)
                } else {
                    Pnf::exists(var, &s, b)
                }
            }
            Surf::Unary(op, g, _) => {
                let g = self.pnf(g)?;
                match op {
                    Unary::Next => Pnf::next(g),
                    Unary::NextAll => Pnf::next_all(g),
                    Unary::Eventually => Pnf::eventually(g),
                    Unary::Always => Pnf::always(g),
                    Unary::EventuallyAll => Pnf::eventually_all(g),
                    Unary::AlwaysAll => Pnf::always_all(g),
                }
            }
            Surf::Binary(op, a, b, _) => {
                let (a, b) = (self.pnf(a)?, self.pnf(b)?);
                match op {
                    Binary::U => Pnf::until(a, b),
                    Binary::F => Pnf::until_all(a, b),
                    Binary::W => Pnf::wuntil(a, b),
                    Binary::T => Pnf::then(a, b),
                }
            }
            Surf::True | Surf::Label { .. } => unreachable!("atoms handled above"),
        })
    }
}

/// Parses a QLTL formula in context. `&`, `forall`, `false`, `!=`, `<>` and
/// `[]` are expanded through negation into the minimal operator set.
pub fn parse_formula(text: &str, sig: &Signature, ctx: &Context) -> PResult<Formula> {
    let s = parse_surface(text, sig)?;
    Env::new(sig, ctx)?.qltl(&s)
}

/// Parses a formula in positive normal form; `!` may only precede atoms.
pub fn parse_pnf(text: &str, sig: &Signature, ctx: &Context) -> PResult<Pnf> {
    let s = parse_surface(text, sig)?;
    Env::new(sig, ctx)?.pnf(&s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parsed {
    Qltl(Formula),
    Pnf(Pnf),
}

/// Parses as PNF when the text uses `A`, `F`, `T`, `<>*` or `[]*`, and as
/// QLTL otherwise.
pub fn parse_any(text: &str, sig: &Signature, ctx: &Context) -> PResult<Parsed> {
    let s = parse_surface(text, sig)?;
    let mut env = Env::new(sig, ctx)?;
    if s.needs_pnf() {
        env.pnf(&s).map(Parsed::Pnf)
    } else {
        env.qltl(&s).map(Parsed::Qltl)
    }
}

pub fn term_to_string(t: &Term) -> String {
    match t {
        Term::Var(x) => x.clone(),
        Term::App(f, args) => {
            let args: Vec<String> = args.iter().map(term_to_string).collect();
            format!("{f}({})", args.join(", "))
        }
    }
}

fn atom_to_string(a: &Atom) -> String {
    match a {
        Atom::True => "true".to_string(),
        Atom::Eq { lhs, rhs, .. } => format!("{} = {}", term_to_string(lhs), term_to_string(rhs)),
        Atom::Label { name, arg } => format!("{name}({})", term_to_string(arg)),
    }
}

fn neg_atom_to_string(a: &Atom) -> String {
    match a {
        Atom::Eq { .. } => format!("!({})", atom_to_string(a)),
        _ => format!("!{}", atom_to_string(a)),
    }
}

/// Serializes in the minimal QLTL syntax (no sugar is reintroduced).
pub fn formula_to_string(f: &Formula) -> String {
    fn is_binary(f: &Formula) -> bool {
        matches!(f, Formula::Or(..) | Formula::Until(..) | Formula::WUntil(..))
    }
    fn operand(f: &Formula) -> String {
        match f {
            Formula::Atom(a) => atom_to_string(a),
            _ => format!("({})", formula_to_string(f)),
        }
    }
    fn unary_operand(f: &Formula) -> String {
        if is_binary(f) {
            format!("({})", formula_to_string(f))
        } else {
            formula_to_string(f)
        }
    }
    match f {
        Formula::Atom(a) => atom_to_string(a),
        Formula::Not(g) => format!("!{}", unary_operand(g)),
        Formula::Or(a, b) => format!("{} | {}", operand(a), operand(b)),
        Formula::Exists { var, sort, body } => {
            format!("exists {sort} {var} . {}", formula_to_string(body))
        }
        Formula::Next(g) => format!("O {}", unary_operand(g)),
        Formula::Until(a, b) => format!("{} U {}", operand(a), operand(b)),
        Formula::WUntil(a, b) => format!("{} W {}", operand(a), operand(b)),
    }
}

pub fn pnf_to_string(f: &Pnf) -> String {
    fn is_binary(f: &Pnf) -> bool {
        matches!(
            f,
            Pnf::Or(..) | Pnf::And(..) | Pnf::Until(..) | Pnf::UntilAll(..) | Pnf::WUntil(..) | Pnf::Then(..)
        )
    }
    fn operand(f: &Pnf) -> String {
        match f {
            Pnf::Atom(a) => atom_to_string(a),
            _ => format!("({})", pnf_to_string(f)),
        }
    }
    fn unary_operand(f: &Pnf) -> String {
        if is_binary(f) {
            format!("({})", pnf_to_string(f))
        } else {
            pnf_to_string(f)
        }
    }
    let bin = |a: &Pnf, op: &str, b: &Pnf| format!("{} {op} {}", operand(a), operand(b));
    match f {
        Pnf::Atom(a) => atom_to_string(a),
        Pnf::NegAtom(a) => neg_atom_to_string(a),
        Pnf::Or(a, b) => bin(a, "|", b),
        Pnf::And(a, b) => bin(a, "&", b),
        Pnf::Exists { var, sort, body } => format!("exists {sort} {var} . {}", pnf_to_string(body)),
        Pnf::Forall { var, sort, body } => format!("forall {sort} {var} . {}", pnf_to_string(body)),
        Pnf::Next(g) => format!("O {}", unary_operand(g)),
        Pnf::NextAll(g) => format!("A {}", unary_operand(g)),
        Pnf::Until(a, b) => bin(a, "U", b),
        Pnf::UntilAll(a, b) => bin(a, "F", b),
        Pnf::WUntil(a, b) => bin(a, "W", b),
        Pnf::Then(a, b) => bin(a, "T", b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::graph_signature;
    use crate::logic::to_pnf;

    fn sig() -> Signature {
        graph_signature()
    }

    fn ctx(pairs: &[(&str, &str)]) -> Context {
        Context::from_pairs(pairs).unwrap()
    }

    #[test]
    fn disequality_keeps_its_negation() {
        let c = ctx(&[("x", "E")]);
        let f = parse_formula("exists E e . s(e) != t(x)", &sig(), &c).unwrap();
        let Formula::Exists { body, .. } = &f else { panic!() };
        assert!(matches!(**body, Formula::Not(_)));
        let p = parse_pnf("s(x) != t(x)", &sig(), &c).unwrap();
        assert!(matches!(p, Pnf::NegAtom(_)));
    }

    fn loop_of(x: &str) -> Formula {
        Formula::eq(
            "N",
            Term::app("s", vec![Term::var(x)]),
            Term::app("t", vec![Term::var(x)]),
        )
    }

    #[test]
    fn has_loop_body() {
        let f = parse_formula("exists E e . s(e) = n & s(e) = t(e)", &sig(), &ctx(&[("n", "N")])).unwrap();
        let want = Formula::exists(
            "e",
            "E",
            Formula::and(
                Formula::eq("N", Term::app("s", vec![Term::var("e")]), Term::var("n")),
                loop_of("e"),
            ),
        );
        assert_eq!(f, want);
    }

    #[test]
    fn binder_sort_is_inferred() {
        let f = parse_formula("exists e . s(e) = t(e)", &sig(), &Context::new()).unwrap();
        assert_eq!(f, Formula::exists("e", "E", loop_of("e")));
        let g = parse_formula("exists x . exists y . x = s(y)", &sig(), &Context::new()).unwrap();
        let Formula::Exists { sort, .. } = g else { panic!() };
        assert_eq!(sort, "N");
        let e = parse_formula("exists x . B(x)", &sig(), &Context::new()).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Sort);
    }

    #[test]
    fn temporal_operators_do_not_chain() {
        let c = ctx(&[("a", "N")]);
        let e = parse_formula("B(a) U B(a) U B(a)", &sig(), &c).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Syntactic);
        assert_eq!(e.span.column, 13);
        assert!(parse_formula("(B(a) U B(a)) U B(a)", &sig(), &c).is_ok());
    }

    #[test]
    fn next_true() {
        assert_eq!(
            parse_formula("O true", &sig(), &Context::new()).unwrap(),
            Formula::next(Formula::tt())
        );
    }

    #[test]
    fn precedence() {
        let c = ctx(&[("a", "N")]);
        let b = || Formula::label("B", Term::var("a"));
        let r = || Formula::label("R", Term::var("a"));
        assert_eq!(
            parse_formula("!B(a) | B(a) & R(a) U O R(a)", &sig(), &c).unwrap(),
            Formula::until(
                Formula::or(Formula::not(b()), Formula::and(b(), r())),
                Formula::next(r())
            )
        );
    }

    #[test]
    fn pnf_printing() {
        let c = ctx(&[("x", "N")]);
        let p = |s: &str| pnf_to_string(&to_pnf(&parse_formula(s, &sig(), &c).unwrap()));
        assert_eq!(p("!(O true)"), "A !true");
        assert_eq!(p("true"), "true");
        assert_eq!(p("!(B(x) U R(x))"), "(!R(x)) T ((!B(x)) & (!R(x)))");
    }

    #[test]
    fn pnf_rejects_inner_negation() {
        let c = ctx(&[("x", "N")]);
        assert!(parse_pnf("!(B(x) | R(x))", &sig(), &c).is_err());
        assert!(parse_pnf("(!R(x)) T ((!B(x)) & (!R(x)))", &sig(), &c).is_ok());
        assert!(parse_pnf("x != x", &sig(), &c).is_ok());
        assert_eq!(
            parse_formula("A true", &sig(), &c).unwrap_err().kind,
            ErrorKind::Syntactic
        );
    }

    #[test]
    fn auto_detects_logic() {
        let c = Context::new();
        assert!(matches!(parse_any("O true", &sig(), &c), Ok(Parsed::Qltl(_))));
        assert!(matches!(parse_any("A true", &sig(), &c), Ok(Parsed::Pnf(_))));
    }

    #[test]
    fn scoping_errors() {
        let c = ctx(&[("x", "N")]);
        let e = parse_formula("exists N x . true", &sig(), &c).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Scoping);
        let e = parse_formula("B(y)", &sig(), &c).unwrap_err();
        assert_eq!((e.kind, e.span.column), (ErrorKind::Scoping, 3));
        let e = parse_formula("s(x) = t(x)", &sig(), &c).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Sort);
    }

    #[test]
    fn printing_round_trips() {
        let c = ctx(&[("x", "E")]);
        for s in [
            "exists N n . n = s(x) | O (s(x) = t(x))",
            "(!B(s(x))) U (O !(s(x) = t(x)))",
            "!exists E y . s(y) = t(x)",
            "(s(x) = t(x)) W (!true)",
        ] {
            let f = parse_formula(s, &sig(), &c).unwrap();
            let text = formula_to_string(&f);
            assert_eq!(parse_formula(&text, &sig(), &c).unwrap(), f, "{text}");
            let p = to_pnf(&f);
            let ptext = pnf_to_string(&p);
            assert_eq!(parse_pnf(&ptext, &sig(), &c).unwrap(), p, "{ptext}");
        }
    }
}
