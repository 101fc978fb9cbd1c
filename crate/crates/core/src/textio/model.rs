use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use indexmap::IndexMap;

use super::lexer::{lex, Cursor, Tok};
use super::{ErrorKind, ParseError, SourceSpan};
use crate::algebra::{for_each_tuple, AlgebraBuilder, AlgebraError, Elem, RelMorphism, Signature};
use crate::model::{CounterpartModel, LassoTrace, ModelDocument, ModelError};

type PResult<T> = Result<T, ParseError>;

fn err(span: &SourceSpan, kind: ErrorKind, message: impl Into<String>) -> ParseError {
    ParseError {
        span: span.clone(),
        kind,
        message: message.into(),
    }
}

fn algebra_kind(e: &AlgebraError) -> ErrorKind {
    match e {
        AlgebraError::DuplicateSort(_)
        | AlgebraError::DuplicateFunction(_)
        | AlgebraError::DuplicateElement { .. }
        | AlgebraError::Redefined { .. } => ErrorKind::Scoping,
        AlgebraError::ArityMismatch { .. }
        | AlgebraError::NotTotal { .. }
        | AlgebraError::SignatureMismatch => ErrorKind::Sort,
        _ => ErrorKind::Reference,
    }
}

fn model_kind(e: &ModelError) -> ErrorKind {
    match e {
        ModelError::NotPreserving { .. } | ModelError::AlgebraMismatch { .. } => ErrorKind::Sort,
        ModelError::DuplicateWorld(_) | ModelError::DuplicateRelation(_) => ErrorKind::Scoping,
        ModelError::EmptyCycle => ErrorKind::Syntactic,
        _ => ErrorKind::Reference,
    }
}

/// Parses a `.cqm` document: one signature, then worlds, relations and
/// traces. Every load-time invariant is checked.
pub fn parse_model(text: &str) -> PResult<ModelDocument> {
    Parser::new(text, None)?.document()
}

/// Like [`parse_model`], with `file` recorded in error spans.
pub fn parse_model_file(text: &str, file: &str) -> PResult<ModelDocument> {
    Parser::new(text, Some(file))?.document()
}

struct Parser {
    cur: Cursor,
}

struct NamedList {
    items: Vec<(String, SourceSpan)>,
}

impl Parser {
    fn new(text: &str, file: Option<&str>) -> PResult<Self> {
        Ok(Parser {
            cur: Cursor::new(lex(text, file)?),
        })
    }

    fn document(mut self) -> PResult<ModelDocument> {
        let sig = Arc::new(self.signature()?);
        let mut model = CounterpartModel::new(sig.clone());
        while self.cur.at_keyword("world") {
            self.world(&mut model)?;
        }
        while self.cur.at_keyword("relation") {
            self.relation(&mut model)?;
        }
        let model = Arc::new(model);
        let mut traces = IndexMap::new();
        while self.cur.at_keyword("trace") {
            let (name, span, t) = self.trace(&model)?;
            if traces.insert(name.clone(), t).is_some() {
                return Err(err(&span, ErrorKind::Scoping, format!("trace `{name}` declared twice")));
            }
        }
        if self.cur.peek() != &Tok::Eof {
            return Err(self
                .cur
                .unexpected("`world`, `relation` or `trace` (declarations go in that order)"));
        }
        Ok(ModelDocument { model, traces })
    }

    fn names_until(&mut self, close: &Tok, what: &str) -> PResult<NamedList> {
        let mut items = Vec::new();
        if self.cur.eat(close) {
            return Ok(NamedList { items });
        }
        loop {
            items.push(self.cur.ident(what)?);
            if self.cur.eat(close) {
                return Ok(NamedList { items });
            }
            self.cur.expect(&Tok::Comma)?;
        }
    }

    fn signature(&mut self) -> PResult<Signature> {
        self.cur.keyword("signature")?;
        let (name, _) = self.cur.ident("a signature name")?;
        let mut sig = Signature::new(name);
        self.cur.expect(&Tok::LBrace)?;
        self.cur.keyword("sorts")?;
        loop {
            let (s, span) = self.cur.ident("a sort name")?;
            sig.add_sort(&s)
                .map_err(|e| err(&span, algebra_kind(&e), e.to_string()))?;
            if !self.cur.eat(&Tok::Comma) {
                break;
            }
        }
        self.cur.expect(&Tok::Semi)?;
        while self.cur.at_keyword("fn") {
            self.cur.bump();
            let (f, fspan) = self.cur.ident("a function name")?;
            self.cur.expect(&Tok::Colon)?;
            let mut args = Vec::new();
            if !self.cur.eat(&Tok::Arrow) {
                loop {
                    args.push(self.cur.ident("an argument sort")?.0);
                    if self.cur.eat(&Tok::Arrow) {
                        break;
                    }
                    self.cur.expect(&Tok::Star)?;
                }
            }
            let (res, _) = self.cur.ident("a result sort")?;
            self.cur.expect(&Tok::Semi)?;
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            sig.add_function(&f, &args, &res)
                .map_err(|e| err(&fspan, algebra_kind(&e), e.to_string()))?;
        }
        self.cur.expect(&Tok::RBrace)?;
        Ok(sig)
    }

    fn world(&mut self, model: &mut CounterpartModel) -> PResult<()> {
        self.cur.keyword("world")?;
        let (name, wspan) = self.cur.ident("a world name")?;
        let sig = model.signature().clone();
        self.cur.expect(&Tok::LBrace)?;
        let mut carriers: Vec<(usize, NamedList)> = Vec::new();
        let mut tables = Vec::new();
        let mut labels = Vec::new();
        while !self.cur.eat(&Tok::RBrace) {
            if self.cur.at_keyword("fn") {
                self.cur.bump();
                let (f, fspan) = self.cur.ident("a function name")?;
                self.cur.expect(&Tok::Eq)?;
                self.cur.expect(&Tok::LBrace)?;
                let mut entries = Vec::new();
                if !self.cur.eat(&Tok::RBrace) {
                    loop {
                        let span = self.cur.span();
                        let args = if self.cur.eat(&Tok::LParen) {
                            self.names_until(&Tok::RParen, "an argument element")?.items
                        } else {
                            vec![self.cur.ident("an argument element")?]
                        };
                        self.cur.expect(&Tok::Arrow)?;
                        let res = self.cur.ident("a result element")?;
                        entries.push((span, args, res));
                        if self.cur.eat(&Tok::RBrace) {
                            break;
                        }
                        self.cur.expect(&Tok::Comma)?;
                    }
                }
                self.cur.expect(&Tok::Semi)?;
                tables.push((f, fspan, entries));
            } else if self.cur.at_keyword("label") {
                self.cur.bump();
                let (l, _) = self.cur.ident("a label name")?;
                self.cur.expect(&Tok::Colon)?;
                let (s, sspan) = self.cur.ident("a sort")?;
                let sid = sig
                    .sort_id(&s)
                    .ok_or_else(|| err(&sspan, ErrorKind::Reference, format!("unknown sort `{s}`")))?;
                self.cur.expect(&Tok::Eq)?;
                self.cur.expect(&Tok::LBrace)?;
                let elems = self.names_until(&Tok::RBrace, "an element")?;
                self.cur.expect(&Tok::Semi)?;
                labels.push((l, sid, elems));
            } else {
                let (s, sspan) = self.cur.ident("a sort, `fn` or `label`")?;
                let sid = sig
                    .sort_id(&s)
                    .ok_or_else(|| err(&sspan, ErrorKind::Reference, format!("unknown sort `{s}`")))?;
                if carriers.iter().any(|(c, _)| *c == sid) {
                    return Err(err(&sspan, ErrorKind::Scoping, format!("carrier of `{s}` given twice")));
                }
                self.cur.expect(&Tok::Eq)?;
                self.cur.expect(&Tok::LBrace)?;
                let elems = self.names_until(&Tok::RBrace, "an element")?;
                self.cur.expect(&Tok::Semi)?;
                carriers.push((sid, elems));
            }
        }
        let mut b = AlgebraBuilder::new(sig.clone());
        carriers.sort_by_key(|(s, _)| *s);
        for (sid, elems) in &carriers {
            for (e, span) in &elems.items {
                b.add_element_in(*sid, e)
                    .map_err(|x| err(span, algebra_kind(&x), x.to_string()))?;
            }
        }
        for (f, fspan, entries) in &tables {
            let fid = sig.function_id(f).ok_or_else(|| {
                err(fspan, ErrorKind::Reference, format!("unknown function symbol `{f}`"))
            })?;
            let sym = sig.function(fid).clone();
            for (span, args, (res, rspan)) in entries {
                if args.len() != sym.args.len() {
                    return Err(err(
                        span,
                        ErrorKind::Sort,
                        format!("`{f}` takes {} arguments, got {}", sym.args.len(), args.len()),
                    ));
                }
                let mut vals = Vec::new();
                for ((a, aspan), &s) in args.iter().zip(&sym.args) {
                    vals.push(b.elem(s, a).map_err(|x| err(aspan, algebra_kind(&x), x.to_string()))?);
                }
                let r = b
                    .elem(sym.result, res)
                    .map_err(|x| err(rspan, algebra_kind(&x), x.to_string()))?;
                b.define_elems(fid, vals, r)
                    .map_err(|x| err(span, algebra_kind(&x), x.to_string()))?;
            }
        }
        let alg = b
            .build()
            .map_err(|x| err(&wspan, algebra_kind(&x), format!("in world `{name}`: {x}")))?;
        let w = model
            .add_world(&name, Arc::new(alg))
            .map_err(|x| err(&wspan, model_kind(&x), x.to_string()))?;
        for (l, sid, elems) in labels {
            for (e, span) in &elems.items {
                model
                    .add_label(&l, sid, w, e)
                    .map_err(|x| err(span, model_kind(&x), x.to_string()))?;
            }
        }
        Ok(())
    }

    fn relation(&mut self, model: &mut CounterpartModel) -> PResult<()> {
        self.cur.keyword("relation")?;
        let (name, rspan) = self.cur.ident("a relation name")?;
        self.cur.expect(&Tok::Colon)?;
        let world = |m: &CounterpartModel, (w, span): (String, SourceSpan)| {
            m.world_id(&w)
                .ok_or_else(|| err(&span, ErrorKind::Reference, format!("unknown world `{w}`")))
        };
        let src = world(model, self.cur.ident("a source world")?)?;
        self.cur.expect(&Tok::Arrow)?;
        let tgt = world(model, self.cur.ident("a target world")?)?;
        let sig = model.signature().clone();
        let (sa, ta) = (model.algebra(src).clone(), model.algebra(tgt).clone());
        let mut rel = vec![BTreeSet::new(); sig.sorts().len()];
        let mut given = vec![false; sig.sorts().len()];
        self.cur.expect(&Tok::LBrace)?;
        while !self.cur.eat(&Tok::RBrace) {
            let (s, sspan) = self.cur.ident("a sort")?;
            let sid = sig
                .sort_id(&s)
                .ok_or_else(|| err(&sspan, ErrorKind::Reference, format!("unknown sort `{s}`")))?;
            if std::mem::replace(&mut given[sid], true) {
                return Err(err(&sspan, ErrorKind::Scoping, format!("component `{s}` given twice")));
            }
            self.cur.expect(&Tok::Eq)?;
            self.cur.expect(&Tok::LBrace)?;
            if !self.cur.eat(&Tok::RBrace) {
                loop {
                    let (a, aspan) = self.cur.ident("a source element")?;
                    self.cur.expect(&Tok::Arrow)?;
                    let (b, bspan) = self.cur.ident("a target element")?;
                    let lookup = |alg: &crate::algebra::Algebra, e: &str, span: &SourceSpan, w: crate::model::WorldId| {
                        alg.elem(sid, e).ok_or_else(|| {
                            err(
                                span,
                                ErrorKind::Reference,
                                format!("`{e}` is not an element of sort {s} in world `{}`", model.world(w).name),
                            )
                        })
                    };
                    let ea = lookup(&sa, &a, &aspan, src)?;
                    let eb = lookup(&ta, &b, &bspan, tgt)?;
                    rel[sid].insert((ea, eb));
                    if self.cur.eat(&Tok::RBrace) {
                        break;
                    }
                    self.cur.expect(&Tok::Comma)?;
                }
            }
            self.cur.expect(&Tok::Semi)?;
        }
        let m = RelMorphism::new(sa, ta, rel).map_err(|x| err(&rspan, algebra_kind(&x), x.to_string()))?;
        model
            .add_relation(&name, src, tgt, m)
            .map_err(|x| err(&rspan, model_kind(&x), x.to_string()))?;
        Ok(())
    }

    fn trace(&mut self, model: &Arc<CounterpartModel>) -> PResult<(String, SourceSpan, LassoTrace)> {
        self.cur.keyword("trace")?;
        let (name, span) = self.cur.ident("a trace name")?;
        self.cur.expect(&Tok::Eq)?;
        let prefix = if self.cur.eat(&Tok::Box) {
            Vec::new()
        } else {
            self.cur.expect(&Tok::LBracket)?;
            self.names_until(&Tok::RBracket, "a relation name")?.items
        };
        self.cur.expect(&Tok::LParen)?;
        let cycle = self.names_until(&Tok::RParen, "a relation name")?.items;
        if cycle.is_empty() {
            return Err(err(&span, ErrorKind::Syntactic, "trace cycle must not be empty"));
        }
        self.cur.expect(&Tok::Semi)?;
        let ids = |names: &[(String, SourceSpan)]| {
            names
                .iter()
                .map(|(r, s)| {
                    model
                        .relation_id(r)
                        .ok_or_else(|| err(s, ErrorKind::Reference, format!("unknown relation `{r}`")))
                })
                .collect::<PResult<Vec<_>>>()
        };
        let t = LassoTrace::new(model.clone(), ids(&prefix)?, ids(&cycle)?)
            .map_err(|x| err(&span, model_kind(&x), x.to_string()))?;
        Ok((name, span, t))
    }
}

/// Canonical text of a document: signature, worlds, relations, traces, each
/// in declaration order; carriers and relation components in signature
/// order; table entries in argument order.
pub fn serialize_model(doc: &ModelDocument) -> String {
    let m = &doc.model;
    let sig = m.signature();
    let mut out = String::new();
    let _ = writeln!(out, "signature {} {{", sig.name());
    let _ = writeln!(out, "  sorts {};", sig.sorts().join(", "));
    for f in sig.functions() {
        let args: Vec<&str> = f.args.iter().map(|&s| sig.sort_name(s)).collect();
        let lhs = if args.is_empty() {
            String::new()
        } else {
            format!("{} ", args.join(" * "))
        };
        let _ = writeln!(out, "  fn {} : {lhs}-> {};", f.name, sig.sort_name(f.result));
    }
    out.push_str("}\n");
    for (wi, w) in m.worlds().iter().enumerate() {
        let a = &w.algebra;
        let _ = writeln!(out, "\nworld {} {{", w.name);
        for (s, sname) in sig.sorts().iter().enumerate() {
            let _ = writeln!(out, "  {sname} = {{{}}};", a.carrier(s).names().join(", "));
        }
        for (fid, f) in sig.functions().iter().enumerate() {
            let mut entries = Vec::new();
            let sizes = a.arg_sizes(fid);
            for_each_tuple(&sizes, |args| {
                let names: Vec<&str> = args
                    .iter()
                    .zip(&f.args)
                    .map(|(&e, &s)| a.elem_name(s, e))
                    .collect();
                let lhs = if names.len() == 1 {
                    names[0].to_string()
                } else {
                    format!("({})", names.join(", "))
                };
                entries.push(format!("{lhs} -> {}", a.elem_name(f.result, a.apply(fid, args))));
            });
            let _ = writeln!(out, "  fn {} = {{{}}};", f.name, entries.join(", "));
        }
        let mut labels = m.labeling().labels_at(crate::model::WorldId(wi));
        labels.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        for (l, s, elems) in labels {
            let names: Vec<&str> = elems.iter().map(|&e| a.elem_name(s, e)).collect();
            let _ = writeln!(
                out,
                "  label {l} : {} = {{{}}};",
                sig.sort_name(s),
                names.join(", ")
            );
        }
        out.push_str("}\n");
    }
    for r in m.relations() {
        let _ = writeln!(
            out,
            "\nrelation {} : {} -> {} {{",
            r.name,
            m.world(r.source).name,
            m.world(r.target).name
        );
        let (sa, ta) = (r.morphism.source(), r.morphism.target());
        for (s, sname) in sig.sorts().iter().enumerate() {
            let pairs = r.morphism.pairs(s);
            if pairs.is_empty() {
                continue;
            }
            let items: Vec<String> = pairs
                .iter()
                .map(|&(x, y): &(Elem, Elem)| format!("{} -> {}", sa.elem_name(s, x), ta.elem_name(s, y)))
                .collect();
            let _ = writeln!(out, "  {sname} = {{{}}};", items.join(", "));
        }
        out.push_str("}\n");
    }
    if !doc.traces.is_empty() {
        out.push('\n');
    }
    for (name, t) in &doc.traces {
        let names = |ids: &[usize]| {
            ids.iter()
                .map(|&r| m.relation(r).name.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(out, "trace {name} = [{}] ({});", names(t.prefix()), names(t.cycle()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
signature Graph { sorts N, E; fn s : E -> N; fn t : E -> N; }
world a { N = {x, y}; E = {f}; fn s = {f -> x}; fn t = {f -> y}; label B : N = {x}; }
world b { N = {z}; E = {g}; fn s = {g -> z}; fn t = {g -> z}; }
relation R : a -> b { N = {x -> z, y -> z}; E = {f -> g}; }
relation L : b -> b { N = {z -> z}; E = {g -> g}; }
trace tr = [R] (L);
";

    #[test]
    fn parses_and_round_trips() {
        let doc = parse_model(SMALL).unwrap();
        assert_eq!(doc.model.worlds().len(), 2);
        let text = serialize_model(&doc);
        let again = parse_model(&text).unwrap();
        assert_eq!(doc, again);
        assert_eq!(serialize_model(&again), text);
    }

    #[test]
    fn empty_prefix_forms() {
        for p in ["[]", "[ ]"] {
            let src = SMALL.replace("[R] (L)", &format!("{p} (L)"));
            let doc = parse_model(&src).unwrap();
            assert_eq!(doc.trace("tr").unwrap().prefix_len(), 0);
        }
    }

    #[test]
    fn undeclared_element_is_a_reference_error() {
        let src = SMALL.replace("y -> z}; E", "w -> z}; E");
        let e = parse_model(&src).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Reference);
        assert_eq!(e.span.line, 5);
        assert!(e.message.contains("`w`"), "{}", e.message);
    }

    #[test]
    fn non_preserving_relation_is_a_sort_error() {
        let src = SMALL.replace("N = {x -> z, y -> z}; E = {f -> g};", "E = {f -> g};");
        let e = parse_model(&src).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Sort);
    }

    #[test]
    fn partial_function_table_is_rejected() {
        let src = SMALL.replace("fn t = {f -> y};", "fn t = {};");
        let e = parse_model(&src).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Sort);
        assert_eq!(e.span.line, 3);
    }

    #[test]
    fn broken_chain_is_a_reference_error() {
        let src = SMALL.replace("[R] (L)", "[L] (R)");
        assert_eq!(parse_model(&src).unwrap_err().kind, ErrorKind::Reference);
    }

    #[test]
    fn constants_and_binary_symbols() {
        let src = "
signature Z2 { sorts V; fn zero : -> V; fn add : V * V -> V; }
world w { V = {o, i}; fn zero = {() -> o};
  fn add = {(o, o) -> o, (o, i) -> i, (i, o) -> i, (i, i) -> o}; }
relation id : w -> w { V = {o -> o, i -> i}; }
trace t = [] (id);
";
        let doc = parse_model(src).unwrap();
        let text = serialize_model(&doc);
        assert!(text.contains("fn zero : -> V;"));
        assert!(text.contains("fn zero = {() -> o};"));
        assert_eq!(parse_model(&text).unwrap(), doc);
    }
}
