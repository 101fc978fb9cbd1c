//! Syntax of QLTL and of its positive normal form, typing contexts, and
//! assignments.
//!
//! QLTL keeps the minimal operator set (`true`, sorted equality, labels,
//! `¬`, `∨`, `∃`, `O`, `U`, `W`); conjunction, universal quantification and
//! `false` are abbreviations through negation. The positive normal form
//! ([`Pnf`]) has negation only on atoms and adds the duals `∧`, `∀`, `A`,
//! `F` and `T`.

mod pnf;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::algebra::{Algebra, Elem, RelMorphism, Signature, SortId};
use crate::model::{CounterpartModel, WorldId};

pub use pnf::{embed_positive, to_pnf};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("variable `{0}` is already bound in this context")]
    Shadowed(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown function symbol `{0}`")]
    UnknownFunction(String),
    #[error("`{function}` expects {expected} arguments, got {found}")]
    Arity {
        function: String,
        expected: usize,
        found: usize,
    },
    #[error("sort mismatch in `{term}`: expected {expected}, found {found}")]
    SortMismatch {
        term: String,
        expected: String,
        found: String,
    },
    #[error("`{elem}` is not an element of sort {sort} in this world")]
    NotInCarrier { elem: String, sort: String },
    #[error("assignment gives {found} values for a context of {expected} variables")]
    ContextLength { expected: usize, found: usize },
}

type Result<T> = std::result::Result<T, LogicError>;

/// An ordered list of distinctly named, sorted variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    entries: Vec<(String, String)>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Result<Self> {
        let mut ctx = Context::new();
        for (x, s) in pairs {
            ctx.push(x, s)?;
        }
        Ok(ctx)
    }

    pub fn push(&mut self, var: &str, sort: &str) -> Result<()> {
        if self.lookup(var).is_some() {
            return Err(LogicError::Shadowed(var.to_string()));
        }
        self.entries.push((var.to_string(), sort.to_string()));
        Ok(())
    }

    pub fn extended(&self, var: &str, sort: &str) -> Result<Context> {
        let mut c = self.clone();
        c.push(var, sort)?;
        Ok(c)
    }

    pub(crate) fn pop(&mut self) {
        self.entries.pop();
    }

    /// Position and sort of `var`.
    pub fn lookup(&self, var: &str) -> Option<(usize, &str)> {
        self.entries
            .iter()
            .position(|(x, _)| x == var)
            .map(|i| (i, self.entries[i].1.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(x, s)| (x.as_str(), s.as_str()))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.entries.iter().map(|(x, _)| x.clone()).collect()
    }

    pub(crate) fn sort_ids(&self, sig: &Signature) -> Result<Vec<SortId>> {
        self.entries
            .iter()
            .map(|(_, s)| sig.sort_id(s).ok_or_else(|| LogicError::UnknownSort(s.clone())))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(x.to_string())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_string(), args)
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

/// The sort of a term in a context.
pub fn term_sort(sig: &Signature, ctx: &Context, term: &Term) -> Result<SortId> {
    match term {
        Term::Var(x) => {
            let (_, s) = ctx
                .lookup(x)
                .ok_or_else(|| LogicError::UnboundVariable(x.clone()))?;
            sig.sort_id(s).ok_or_else(|| LogicError::UnknownSort(s.to_string()))
        }
        Term::App(f, args) => {
            let id = sig
                .function_id(f)
                .ok_or_else(|| LogicError::UnknownFunction(f.clone()))?;
            let sym = sig.function(id);
            if sym.args.len() != args.len() {
                return Err(LogicError::Arity {
                    function: f.clone(),
                    expected: sym.args.len(),
                    found: args.len(),
                });
            }
            for (a, &want) in args.iter().zip(&sym.args) {
                let got = term_sort(sig, ctx, a)?;
                if got != want {
                    return Err(LogicError::SortMismatch {
                        term: crate::textio::term_to_string(a),
                        expected: sig.sort_name(want).to_string(),
                        found: sig.sort_name(got).to_string(),
                    });
                }
            }
            Ok(sym.result)
        }
    }
}

/// Atomic formulae: `true`, sorted equality, and unary labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    True,
    Eq { sort: String, lhs: Term, rhs: Term },
    Label { name: String, arg: Term },
}

impl Atom {
    pub fn eq(sort: &str, lhs: Term, rhs: Term) -> Atom {
        Atom::Eq {
            sort: sort.to_string(),
            lhs,
            rhs,
        }
    }

    pub fn label(name: &str, arg: Term) -> Atom {
        Atom::Label {
            name: name.to_string(),
            arg,
        }
    }

    fn typecheck(&self, sig: &Signature, ctx: &Context) -> Result<()> {
        match self {
            Atom::True => Ok(()),
            Atom::Eq { sort, lhs, rhs } => {
                let want = sig
                    .sort_id(sort)
                    .ok_or_else(|| LogicError::UnknownSort(sort.clone()))?;
                for t in [lhs, rhs] {
                    let got = term_sort(sig, ctx, t)?;
                    if got != want {
                        return Err(LogicError::SortMismatch {
                            term: crate::textio::term_to_string(t),
                            expected: sort.clone(),
                            found: sig.sort_name(got).to_string(),
                        });
                    }
                }
                Ok(())
            }
            Atom::Label { arg, .. } => term_sort(sig, ctx, arg).map(|_| ()),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Atom::True => {}
            Atom::Eq { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            Atom::Label { arg, .. } => arg.collect_vars(out),
        }
    }
}

/// QLTL formulae over the minimal operator set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists {
        var: String,
        sort: String,
        body: Box<Formula>,
    },
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    WUntil(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn tt() -> Formula {
        Formula::Atom(Atom::True)
    }

    /// `false := ¬true`
    pub fn ff() -> Formula {
        Formula::not(Formula::tt())
    }

    pub fn eq(sort: &str, lhs: Term, rhs: Term) -> Formula {
        Formula::Atom(Atom::eq(sort, lhs, rhs))
    }

    pub fn label(name: &str, arg: Term) -> Formula {
        Formula::Atom(Atom::label(name, arg))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// `a ∧ b := ¬(¬a ∨ ¬b)`
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::or(Formula::not(a), Formula::not(b)))
    }

    pub fn exists(var: &str, sort: &str, body: Formula) -> Formula {
        Formula::Exists {
            var: var.to_string(),
            sort: sort.to_string(),
            body: Box::new(body),
        }
    }

    /// `∀x.φ := ¬∃x.¬φ`
    pub fn forall(var: &str, sort: &str, body: Formula) -> Formula {
        Formula::not(Formula::exists(var, sort, Formula::not(body)))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn wuntil(a: Formula, b: Formula) -> Formula {
        Formula::WUntil(Box::new(a), Box::new(b))
    }

    /// `◇φ := true U φ`
    pub fn eventually(f: Formula) -> Formula {
        Formula::until(Formula::tt(), f)
    }

    /// `□φ := φ W false`
    pub fn always(f: Formula) -> Formula {
        Formula::wuntil(f, Formula::ff())
    }

    pub fn typecheck(&self, sig: &Signature, ctx: &Context) -> Result<()> {
        let mut ctx = ctx.clone();
        self.check_in(sig, &mut ctx)
    }

    fn check_in(&self, sig: &Signature, ctx: &mut Context) -> Result<()> {
        match self {
            Formula::Atom(a) => a.typecheck(sig, ctx),
            Formula::Not(f) | Formula::Next(f) => f.check_in(sig, ctx),
            Formula::Or(a, b) | Formula::Until(a, b) | Formula::WUntil(a, b) => {
                a.check_in(sig, ctx)?;
                b.check_in(sig, ctx)
            }
            Formula::Exists { var, sort, body } => {
                if sig.sort_id(sort).is_none() {
                    return Err(LogicError::UnknownSort(sort.clone()));
                }
                ctx.push(var, sort)?;
                let r = body.check_in(sig, ctx);
                ctx.pop();
                r
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                let mut vs = BTreeSet::new();
                a.collect_vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(f) | Formula::Next(f) => f.collect_free(bound, out),
            Formula::Or(a, b) | Formula::Until(a, b) | Formula::WUntil(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Nesting depth of connectives; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Next(f) | Formula::Exists { body: f, .. } => 1 + f.depth(),
            Formula::Or(a, b) | Formula::Until(a, b) | Formula::WUntil(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Largest number of variables in scope anywhere in the formula, given
    /// `base` free ones.
    pub fn max_context(&self, base: usize) -> usize {
        match self {
            Formula::Atom(_) => base,
            Formula::Not(f) | Formula::Next(f) => f.max_context(base),
            Formula::Exists { body, .. } => body.max_context(base + 1),
            Formula::Or(a, b) | Formula::Until(a, b) | Formula::WUntil(a, b) => {
                a.max_context(base).max(b.max_context(base))
            }
        }
    }

    pub fn is_negation_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(_) => false,
            Formula::Next(f) | Formula::Exists { body: f, .. } => f.is_negation_free(),
            Formula::Or(a, b) | Formula::Until(a, b) | Formula::WUntil(a, b) => {
                a.is_negation_free() && b.is_negation_free()
            }
        }
    }
}

/// Formulae in positive normal form: negation occurs only on atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pnf {
    Atom(Atom),
    NegAtom(Atom),
    Or(Box<Pnf>, Box<Pnf>),
    And(Box<Pnf>, Box<Pnf>),
    Exists {
        var: String,
        sort: String,
        body: Box<Pnf>,
    },
    Forall {
        var: String,
        sort: String,
        body: Box<Pnf>,
    },
    Next(Box<Pnf>),
    /// Next-forall: every counterpart at the next step satisfies the body.
    NextAll(Box<Pnf>),
    Until(Box<Pnf>, Box<Pnf>),
    /// Until-forall.
    UntilAll(Box<Pnf>, Box<Pnf>),
    WUntil(Box<Pnf>, Box<Pnf>),
    /// Then: the weak variant of until-forall.
    Then(Box<Pnf>, Box<Pnf>),
}

impl Pnf {
    pub fn tt() -> Pnf {
        Pnf::Atom(Atom::True)
    }

    pub fn ff() -> Pnf {
        Pnf::NegAtom(Atom::True)
    }

    pub fn or(a: Pnf, b: Pnf) -> Pnf {
        Pnf::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Pnf, b: Pnf) -> Pnf {
        Pnf::And(Box::new(a), Box::new(b))
    }

    pub fn exists(var: &str, sort: &str, body: Pnf) -> Pnf {
        Pnf::Exists {
            var: var.to_string(),
            sort: sort.to_string(),
            body: Box::new(body),
        }
    }

    pub fn forall(var: &str, sort: &str, body: Pnf) -> Pnf {
        Pnf::Forall {
            var: var.to_string(),
            sort: sort.to_string(),
            body: Box::new(body),
        }
    }

    pub fn next(f: Pnf) -> Pnf {
        Pnf::Next(Box::new(f))
    }

    pub fn next_all(f: Pnf) -> Pnf {
        Pnf::NextAll(Box::new(f))
    }

    pub fn until(a: Pnf, b: Pnf) -> Pnf {
        Pnf::Until(Box::new(a), Box::new(b))
    }

    pub fn until_all(a: Pnf, b: Pnf) -> Pnf {
        Pnf::UntilAll(Box::new(a), Box::new(b))
    }

    pub fn wuntil(a: Pnf, b: Pnf) -> Pnf {
        Pnf::WUntil(Box::new(a), Box::new(b))
    }

    pub fn then(a: Pnf, b: Pnf) -> Pnf {
        Pnf::Then(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Pnf) -> Pnf {
        Pnf::until(Pnf::tt(), f)
    }

    pub fn always(f: Pnf) -> Pnf {
        Pnf::wuntil(f, Pnf::ff())
    }

    /// `◇*φ := true F φ`
    pub fn eventually_all(f: Pnf) -> Pnf {
        Pnf::until_all(Pnf::tt(), f)
    }

    /// `□*φ := φ T false`
    pub fn always_all(f: Pnf) -> Pnf {
        Pnf::then(f, Pnf::ff())
    }

    pub fn typecheck(&self, sig: &Signature, ctx: &Context) -> Result<()> {
        let mut ctx = ctx.clone();
        self.check_in(sig, &mut ctx)
    }

    fn check_in(&self, sig: &Signature, ctx: &mut Context) -> Result<()> {
        match self {
            Pnf::Atom(a) | Pnf::NegAtom(a) => a.typecheck(sig, ctx),
            Pnf::Next(f) | Pnf::NextAll(f) => f.check_in(sig, ctx),
            Pnf::Or(a, b)
            | Pnf::And(a, b)
            | Pnf::Until(a, b)
            | Pnf::UntilAll(a, b)
            | Pnf::WUntil(a, b)
            | Pnf::Then(a, b) => {
                a.check_in(sig, ctx)?;
                b.check_in(sig, ctx)
            }
            Pnf::Exists { var, sort, body } | Pnf::Forall { var, sort, body } => {
                if sig.sort_id(sort).is_none() {
                    return Err(LogicError::UnknownSort(sort.clone()));
                }
                ctx.push(var, sort)?;
                let r = body.check_in(sig, ctx);
                ctx.pop();
                r
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Pnf::Atom(a) | Pnf::NegAtom(a) => {
                let mut vs = BTreeSet::new();
                a.collect_vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Pnf::Next(f) | Pnf::NextAll(f) => f.collect_free(bound, out),
            Pnf::Or(a, b)
            | Pnf::And(a, b)
            | Pnf::Until(a, b)
            | Pnf::UntilAll(a, b)
            | Pnf::WUntil(a, b)
            | Pnf::Then(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Pnf::Exists { var, body, .. } | Pnf::Forall { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn max_context(&self, base: usize) -> usize {
        match self {
            Pnf::Atom(_) | Pnf::NegAtom(_) => base,
            Pnf::Next(f) | Pnf::NextAll(f) => f.max_context(base),
            Pnf::Exists { body, .. } | Pnf::Forall { body, .. } => body.max_context(base + 1),
            Pnf::Or(a, b)
            | Pnf::And(a, b)
            | Pnf::Until(a, b)
            | Pnf::UntilAll(a, b)
            | Pnf::WUntil(a, b)
            | Pnf::Then(a, b) => a.max_context(base).max(b.max_context(base)),
        }
    }

    /// Uses only operators that also exist in QLTL (no `A`, `F`, `T`).
    pub fn uses_only_qltl_temporals(&self) -> bool {
        match self {
            Pnf::Atom(_) | Pnf::NegAtom(_) => true,
            Pnf::NextAll(_) | Pnf::UntilAll(..) | Pnf::Then(..) => false,
            Pnf::Next(f) | Pnf::Exists { body: f, .. } | Pnf::Forall { body: f, .. } => {
                f.uses_only_qltl_temporals()
            }
            Pnf::Or(a, b) | Pnf::And(a, b) | Pnf::Until(a, b) | Pnf::WUntil(a, b) => {
                a.uses_only_qltl_temporals() && b.uses_only_qltl_temporals()
            }
        }
    }
}

/// A sort-respecting valuation of a context's variables in one world.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    world: WorldId,
    context: Context,
    values: Vec<Elem>,
}

impl Assignment {
    pub fn empty(world: WorldId) -> Self {
        Assignment {
            world,
            context: Context::new(),
            values: Vec::new(),
        }
    }

    /// Builds an assignment from element identifiers, one per context
    /// variable, in context order.
    pub fn new(
        model: &CounterpartModel,
        world: WorldId,
        context: Context,
        elems: &[&str],
    ) -> Result<Self> {
        if elems.len() != context.len() {
            return Err(LogicError::ContextLength {
                expected: context.len(),
                found: elems.len(),
            });
        }
        let mut mu = Assignment::empty(world);
        for ((x, s), e) in context.iter().zip(elems) {
            mu = mu.extend(model, x, s, e)?;
        }
        Ok(mu)
    }

    /// Wraps raw values; the caller guarantees they lie in the right
    /// carriers.
    pub fn from_elems(world: WorldId, context: Context, values: Vec<Elem>) -> Self {
        debug_assert_eq!(context.len(), values.len());
        Assignment {
            world,
            context,
            values,
        }
    }

    /// `μ[x ↦ e]` for an element `e` of the world's carrier of `sort`.
    pub fn extend(
        &self,
        model: &CounterpartModel,
        var: &str,
        sort: &str,
        elem: &str,
    ) -> Result<Assignment> {
        let sig = model.signature();
        let s = sig
            .sort_id(sort)
            .ok_or_else(|| LogicError::UnknownSort(sort.to_string()))?;
        let e = model
            .algebra(self.world)
            .elem(s, elem)
            .ok_or_else(|| LogicError::NotInCarrier {
                elem: elem.to_string(),
                sort: sort.to_string(),
            })?;
        self.extend_elem(var, sort, e)
    }

    pub fn extend_elem(&self, var: &str, sort: &str, e: Elem) -> Result<Assignment> {
        let context = self.context.extended(var, sort)?;
        let mut values = self.values.clone();
        values.push(e);
        Ok(Assignment {
            world: self.world,
            context,
            values,
        })
    }

    pub fn world(&self) -> WorldId {
        self.world
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }

    pub fn get(&self, var: &str) -> Option<Elem> {
        self.context.lookup(var).map(|(i, _)| self.values[i])
    }

    /// Checks that every value lies in the world's carrier of its sort.
    pub fn validate(&self, model: &CounterpartModel) -> Result<()> {
        let sig = model.signature();
        let alg = model.algebra(self.world);
        for ((x, s), e) in self.context.iter().zip(&self.values) {
            let sid = sig
                .sort_id(s)
                .ok_or_else(|| LogicError::UnknownSort(s.to_string()))?;
            if e.index() >= alg.carrier(sid).len() {
                return Err(LogicError::NotInCarrier {
                    elem: format!("{x}#{}", e.0),
                    sort: s.to_string(),
                });
            }
        }
        Ok(())
    }

    /// `{x ↦ e0, y ↦ n1}` using element identifiers.
    pub fn describe(&self, model: &CounterpartModel) -> String {
        let sig = model.signature();
        let alg = model.algebra(self.world);
        let parts: Vec<String> = self
            .context
            .iter()
            .zip(&self.values)
            .map(|((x, s), &e)| {
                let sid = sig.sort_id(s).expect("validated sort");
                format!("{x}={}", alg.elem_name(sid, e))
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Interprets a term under an assignment in the assignment's world algebra.
pub fn interpret_term(mu: &Assignment, algebra: &Algebra, term: &Term) -> Result<Elem> {
    match term {
        Term::Var(x) => mu.get(x).ok_or_else(|| LogicError::UnboundVariable(x.clone())),
        Term::App(f, args) => {
            let sig = algebra.signature();
            let id = sig
                .function_id(f)
                .ok_or_else(|| LogicError::UnknownFunction(f.clone()))?;
            let vals = args
                .iter()
                .map(|a| interpret_term(mu, algebra, a))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != sig.function(id).args.len() {
                return Err(LogicError::Arity {
                    function: f.clone(),
                    expected: sig.function(id).args.len(),
                    found: vals.len(),
                });
            }
            Ok(algebra.apply(id, &vals))
        }
    }
}

/// All value tuples related pointwise to `values` (with the given sorts)
/// through `r`, in lexicographic order.
pub(crate) fn counterpart_values(r: &RelMorphism, sorts: &[SortId], values: &[Elem]) -> Vec<Vec<Elem>> {
    let images: Vec<Vec<Elem>> = sorts
        .iter()
        .zip(values)
        .map(|(&s, &v)| r.images(s, v).collect())
        .collect();
    let sizes: Vec<usize> = images.iter().map(Vec::len).collect();
    let mut out = Vec::new();
    if sizes.is_empty() {
        out.push(Vec::new());
        return out;
    }
    crate::algebra::for_each_tuple(&sizes, |pick| {
        out.push(
            pick.iter()
                .enumerate()
                .map(|(i, p)| images[i][p.index()])
                .collect(),
        );
    });
    out
}

/// The assignments at `target` that are counterpart related to `mu`
/// through `r`: the product of the per-variable counterpart sets.
pub fn counterpart_assignments(
    mu: &Assignment,
    r: &RelMorphism,
    target: WorldId,
) -> Result<Vec<Assignment>> {
    let sorts = mu.context.sort_ids(r.source().signature())?;
    Ok(counterpart_values(r, &sorts, &mu.values)
        .into_iter()
        .map(|values| Assignment {
            world: target,
            context: mu.context.clone(),
            values,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::graph_signature;

    fn loop_body() -> Formula {
        Formula::eq(
            "N",
            Term::app("s", vec![Term::var("x")]),
            Term::app("t", vec![Term::var("x")]),
        )
    }

    #[test]
    fn typecheck_loop_in_edge_context() {
        let sig = graph_signature();
        let ctx = Context::from_pairs(&[("x", "E")]).unwrap();
        assert_eq!(loop_body().typecheck(&sig, &ctx), Ok(()));
    }

    #[test]
    fn typecheck_unbound_variable() {
        let sig = graph_signature();
        let f = Formula::eq("N", Term::var("x"), Term::var("x"));
        assert_eq!(
            f.typecheck(&sig, &Context::new()),
            Err(LogicError::UnboundVariable("x".into()))
        );
    }

    #[test]
    fn typecheck_sort_error_on_node_argument() {
        let sig = graph_signature();
        let ctx = Context::from_pairs(&[("x", "N")]).unwrap();
        assert!(matches!(
            loop_body().typecheck(&sig, &ctx),
            Err(LogicError::SortMismatch { .. })
        ));
    }

    #[test]
    fn typecheck_rejects_shadowing() {
        let sig = graph_signature();
        let ctx = Context::from_pairs(&[("x", "E")]).unwrap();
        let f = Formula::exists("x", "E", loop_body());
        assert_eq!(f.typecheck(&sig, &ctx), Err(LogicError::Shadowed("x".into())));
        let g = Formula::exists("y", "E", Formula::exists("y", "N", Formula::tt()));
        assert_eq!(
            g.typecheck(&sig, &Context::new()),
            Err(LogicError::Shadowed("y".into()))
        );
        // sibling binders may reuse a name
        let h = Formula::or(
            Formula::exists("y", "E", Formula::tt()),
            Formula::exists("y", "N", Formula::tt()),
        );
        assert_eq!(h.typecheck(&sig, &Context::new()), Ok(()));
    }

    #[test]
    fn context_rejects_duplicates() {
        assert!(Context::from_pairs(&[("x", "N"), ("x", "E")]).is_err());
    }

    #[test]
    fn sugar_unfolds() {
        let p = Formula::label("B", Term::var("x"));
        assert_eq!(
            Formula::eventually(p.clone()),
            Formula::Until(Box::new(Formula::tt()), Box::new(p.clone()))
        );
        assert_eq!(
            Formula::always(p.clone()),
            Formula::WUntil(
                Box::new(p.clone()),
                Box::new(Formula::Not(Box::new(Formula::tt())))
            )
        );
        assert_eq!(
            Pnf::always_all(Pnf::tt()),
            Pnf::then(Pnf::tt(), Pnf::NegAtom(Atom::True))
        );
        assert_eq!(
            Pnf::eventually_all(Pnf::tt()),
            Pnf::until_all(Pnf::tt(), Pnf::tt())
        );
    }

    #[test]
    fn free_variables() {
        let f = Formula::exists(
            "e",
            "E",
            Formula::eq("N", Term::app("s", vec![Term::var("e")]), Term::var("n")),
        );
        assert_eq!(f.free_vars(), ["n".to_string()].into_iter().collect());
        assert_eq!(f.max_context(1), 2);
    }
}
