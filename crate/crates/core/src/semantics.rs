//! Satisfiability of QLTL and PNF formulae on lasso traces.
//!
//! Formulae are compiled into a small node arena with variables resolved to
//! context positions, then evaluated recursively. The four until-like
//! operators share one decision loop over `(position, counterpart set)`
//! states: the counterpart sets of a lasso are eventually periodic, so the
//! first repeated state settles the outcome.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::algebra::{Elem, FnId, Signature, SortId};
use crate::logic::{counterpart_values, Assignment, Atom, Context, Formula, LogicError, Pnf, Term};
use crate::model::{LassoTrace, TracePosition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("formula needs {needed} variables in scope, above the cap of {cap}")]
    ContextTooLarge { needed: usize, cap: usize },
    #[error("assignment lives in world {found} but the trace is in world {expected} at this position")]
    WorldMismatch { expected: String, found: String },
    #[error(transparent)]
    Type(#[from] LogicError),
}

/// Which of the four until-like operators a loop decides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UntilFlavor {
    /// `U`
    Until,
    /// `W`
    WeakUntil,
    /// `F`
    UntilAll,
    /// `T`
    Then,
}

impl UntilFlavor {
    pub fn is_universal(self) -> bool {
        matches!(self, UntilFlavor::UntilAll | UntilFlavor::Then)
    }

    pub fn is_weak(self) -> bool {
        matches!(self, UntilFlavor::WeakUntil | UntilFlavor::Then)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub memoize: bool,
    /// Largest number of simultaneously bound variables accepted.
    pub max_context: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            memoize: true,
            max_context: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub cache_hits: usize,
    pub cache_misses: usize,
}

type NodeId = usize;

#[derive(Debug)]
enum CTerm {
    Var(usize),
    App(FnId, Vec<CTerm>),
}

#[derive(Debug)]
enum Node {
    True,
    Eq(CTerm, CTerm),
    Label { name: String, sort: SortId, arg: CTerm },
    Not(NodeId),
    Or(NodeId, NodeId),
    And(NodeId, NodeId),
    Quant { universal: bool, sort: SortId, body: NodeId },
    Next { universal: bool, sorts: Vec<SortId>, body: NodeId },
    Temporal { flavor: UntilFlavor, sorts: Vec<SortId>, lhs: NodeId, rhs: NodeId },
}

struct Compiler<'s> {
    sig: &'s Signature,
    scope: Vec<(String, SortId)>,
    nodes: Vec<Node>,
}

impl<'s> Compiler<'s> {
    fn new(sig: &'s Signature, ctx: &Context) -> Result<Self, EvalError> {
        let ids = ctx.sort_ids(sig)?;
        let scope = ctx.iter().map(|(x, _)| x.to_string()).zip(ids).collect();
        Ok(Compiler {
            sig,
            scope,
            nodes: Vec::new(),
        })
    }

    fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn sorts(&self) -> Vec<SortId> {
        self.scope.iter().map(|(_, s)| *s).collect()
    }

    fn sort(&self, name: &str) -> Result<SortId, EvalError> {
        self.sig
            .sort_id(name)
            .ok_or_else(|| LogicError::UnknownSort(name.to_string()).into())
    }

    fn term(&self, t: &Term) -> Result<(CTerm, SortId), EvalError> {
        match t {
            Term::Var(x) => {
                let i = self
                    .scope
                    .iter()
                    .rposition(|(y, _)| y == x)
                    .ok_or_else(|| LogicError::UnboundVariable(x.clone()))?;
                Ok((CTerm::Var(i), self.scope[i].1))
            }
            Term::App(f, args) => {
                let id = self
                    .sig
                    .function_id(f)
                    .ok_or_else(|| LogicError::UnknownFunction(f.clone()))?;
                let args = args
                    .iter()
                    .map(|a| self.term(a).map(|(c, _)| c))
                    .collect::<Result<_, _>>()?;
                Ok((CTerm::App(id, args), self.sig.function(id).result))
            }
        }
    }

    fn atom(&mut self, a: &Atom) -> Result<NodeId, EvalError> {
        let n = match a {
            Atom::True => Node::True,
            Atom::Eq { lhs, rhs, .. } => Node::Eq(self.term(lhs)?.0, self.term(rhs)?.0),
            Atom::Label { name, arg } => {
                let (arg, sort) = self.term(arg)?;
                Node::Label {
                    name: name.clone(),
                    sort,
                    arg,
                }
            }
        };
        Ok(self.push(n))
    }

    fn binder(
        &mut self,
        var: &str,
        sort: &str,
        body: impl FnOnce(&mut Self) -> Result<NodeId, EvalError>,
    ) -> Result<(SortId, NodeId), EvalError> {
        let s = self.sort(sort)?;
        self.scope.push((var.to_string(), s));
        let b = body(self);
        self.scope.pop();
        Ok((s, b?))
    }

    fn formula(&mut self, f: &Formula) -> Result<NodeId, EvalError> {
        let n = match f {
            Formula::Atom(a) => return self.atom(a),
            Formula::Not(g) => Node::Not(self.formula(g)?),
            Formula::Or(a, b) => Node::Or(self.formula(a)?, self.formula(b)?),
            Formula::Exists { var, sort, body } => {
                let (sort, body) = self.binder(var, sort, |c| c.formula(body))?;
                Node::Quant {
                    universal: false,
                    sort,
                    body,
                }
            }
            Formula::Next(g) => Node::Next {
                universal: false,
                sorts: self.sorts(),
                body: self.formula(g)?,
            },
            Formula::Until(a, b) => self.temporal(UntilFlavor::Until, a.as_ref(), b.as_ref(), Self::formula)?,
            Formula::WUntil(a, b) => self.temporal(UntilFlavor::WeakUntil, a.as_ref(), b.as_ref(), Self::formula)?,
        };
        Ok(self.push(n))
    }

    fn pnf(&mut self, f: &Pnf) -> Result<NodeId, EvalError> {
        let n = match f {
            Pnf::Atom(a) => return self.atom(a),
            Pnf::NegAtom(a) => Node::Not(self.atom(a)?),
            Pnf::Or(a, b) => Node::Or(self.pnf(a)?, self.pnf(b)?),
            Pnf::And(a, b) => Node::And(self.pnf(a)?, self.pnf(b)?),
            Pnf::Exists { var, sort, body } | Pnf::Forall { var, sort, body } => {
                let (sort, body) = self.binder(var, sort, |c| c.pnf(body))?;
                Node::Quant {
                    universal: matches!(f, Pnf::Forall { .. }),
                    sort,
                    body,
                }
            }
            Pnf::Next(g) | Pnf::NextAll(g) => Node::Next {
                universal: matches!(f, Pnf::NextAll(_)),
                sorts: self.sorts(),
                body: self.pnf(g)?,
            },
            Pnf::Until(a, b) => self.temporal(UntilFlavor::Until, a.as_ref(), b.as_ref(), Self::pnf)?,
            Pnf::WUntil(a, b) => self.temporal(UntilFlavor::WeakUntil, a.as_ref(), b.as_ref(), Self::pnf)?,
            Pnf::UntilAll(a, b) => self.temporal(UntilFlavor::UntilAll, a.as_ref(), b.as_ref(), Self::pnf)?,
            Pnf::Then(a, b) => self.temporal(UntilFlavor::Then, a.as_ref(), b.as_ref(), Self::pnf)?,
        };
        Ok(self.push(n))
    }

    fn temporal<F>(
        &mut self,
        flavor: UntilFlavor,
        a: &F,
        b: &F,
        go: impl Fn(&mut Self, &F) -> Result<NodeId, EvalError>,
    ) -> Result<Node, EvalError> {
        Ok(Node::Temporal {
            flavor,
            sorts: self.sorts(),
            lhs: go(self, a)?,
            rhs: go(self, b)?,
        })
    }
}

/// Decides judgments `σ_i, μ ⊨ φ` on one trace.
pub struct Evaluator<'t> {
    trace: &'t LassoTrace,
    config: EvalConfig,
}

impl<'t> Evaluator<'t> {
    pub fn new(trace: &'t LassoTrace) -> Self {
        Self::with_config(trace, EvalConfig::default())
    }

    pub fn with_config(trace: &'t LassoTrace, config: EvalConfig) -> Self {
        Evaluator { trace, config }
    }

    pub fn trace(&self) -> &LassoTrace {
        self.trace
    }

    pub fn sat_qltl(&self, pos: TracePosition, mu: &Assignment, phi: &Formula) -> Result<bool, EvalError> {
        self.sat_qltl_stats(pos, mu, phi).map(|(b, _)| b)
    }

    pub fn sat_pnf(&self, pos: TracePosition, mu: &Assignment, phi: &Pnf) -> Result<bool, EvalError> {
        self.sat_pnf_stats(pos, mu, phi).map(|(b, _)| b)
    }

    pub fn sat_qltl_stats(
        &self,
        pos: TracePosition,
        mu: &Assignment,
        phi: &Formula,
    ) -> Result<(bool, EvalStats), EvalError> {
        let sig = self.trace.model().signature();
        self.admit(pos, mu, phi.max_context(mu.context().len()))?;
        phi.typecheck(sig, mu.context())?;
        let mut c = Compiler::new(sig, mu.context())?;
        let root = c.formula(phi)?;
        Ok(self.run(c.nodes, root, pos, mu))
    }

    pub fn sat_pnf_stats(
        &self,
        pos: TracePosition,
        mu: &Assignment,
        phi: &Pnf,
    ) -> Result<(bool, EvalStats), EvalError> {
        let sig = self.trace.model().signature();
        self.admit(pos, mu, phi.max_context(mu.context().len()))?;
        phi.typecheck(sig, mu.context())?;
        let mut c = Compiler::new(sig, mu.context())?;
        let root = c.pnf(phi)?;
        Ok(self.run(c.nodes, root, pos, mu))
    }

    /// Decides `φ₁ ⋆ φ₂` for one of the until-like operators `⋆`.
    pub fn eval_until(
        &self,
        flavor: UntilFlavor,
        pos: TracePosition,
        mu: &Assignment,
        lhs: &Pnf,
        rhs: &Pnf,
    ) -> Result<bool, EvalError> {
        self.sat_pnf(pos, mu, &until_node(flavor, lhs, rhs))
    }

    /// For a formula whose top operator is until-like, the first step `n̄` at
    /// which the success condition holds after continuing from step 0.
    /// `None` when the operator is not until-like or no such step exists.
    pub fn until_witness(&self, pos: TracePosition, mu: &Assignment, phi: &Pnf) -> Result<Option<usize>, EvalError> {
        let sig = self.trace.model().signature();
        self.admit(pos, mu, phi.max_context(mu.context().len()))?;
        phi.typecheck(sig, mu.context())?;
        let mut c = Compiler::new(sig, mu.context())?;
        let root = c.pnf(phi)?;
        let mut run = Run::new(self.trace, c.nodes, self.config.memoize);
        Ok(match run.nodes[root] {
            Node::Temporal { flavor, ref sorts, lhs, rhs } => {
                let sorts = sorts.clone();
                run.until_loop(flavor, &sorts, lhs, rhs, pos.index(), mu.values()).1
            }
            _ => None,
        })
    }

    fn admit(&self, pos: TracePosition, mu: &Assignment, needed: usize) -> Result<(), EvalError> {
        if needed > self.config.max_context {
            return Err(EvalError::ContextTooLarge {
                needed,
                cap: self.config.max_context,
            });
        }
        let model = self.trace.model();
        let expected = self.trace.world_at(self.trace.normalize(pos.index()));
        if mu.world() != expected {
            return Err(EvalError::WorldMismatch {
                expected: model.world(expected).name.clone(),
                found: model
                    .worlds()
                    .get(mu.world().0)
                    .map_or_else(|| format!("#{}", mu.world().0), |w| w.name.clone()),
            });
        }
        mu.validate(model)?;
        Ok(())
    }

    fn run(&self, nodes: Vec<Node>, root: NodeId, pos: TracePosition, mu: &Assignment) -> (bool, EvalStats) {
        let mut run = Run::new(self.trace, nodes, self.config.memoize);
        let p = self.trace.normalize(pos.index()).index();
        let b = run.sat(root, p, mu.values());
        (b, run.stats)
    }
}

fn until_node(flavor: UntilFlavor, lhs: &Pnf, rhs: &Pnf) -> Pnf {
    let (a, b) = (lhs.clone(), rhs.clone());
    match flavor {
        UntilFlavor::Until => Pnf::until(a, b),
        UntilFlavor::WeakUntil => Pnf::wuntil(a, b),
        UntilFlavor::UntilAll => Pnf::until_all(a, b),
        UntilFlavor::Then => Pnf::then(a, b),
    }
}

struct Run<'t> {
    trace: &'t LassoTrace,
    nodes: Vec<Node>,
    memoize: bool,
    cache: HashMap<(NodeId, usize, Vec<Elem>), bool>,
    stats: EvalStats,
}

impl<'t> Run<'t> {
    fn new(trace: &'t LassoTrace, nodes: Vec<Node>, memoize: bool) -> Self {
        Run {
            trace,
            nodes,
            memoize,
            cache: HashMap::new(),
            stats: EvalStats::default(),
        }
    }

    fn sat(&mut self, n: NodeId, pos: usize, vals: &[Elem]) -> bool {
        if !self.memoize {
            return self.compute(n, pos, vals);
        }
        let key = (n, pos, vals.to_vec());
        if let Some(&b) = self.cache.get(&key) {
            self.stats.cache_hits += 1;
            return b;
        }
        self.stats.cache_misses += 1;
        let b = self.compute(n, pos, vals);
        self.cache.insert(key, b);
        b
    }

    fn term(&self, t: &CTerm, pos: usize, vals: &[Elem]) -> Elem {
        match t {
            CTerm::Var(i) => vals[*i],
            CTerm::App(f, args) => {
                let args: Vec<Elem> = args.iter().map(|a| self.term(a, pos, vals)).collect();
                let w = self.trace.world_index(pos);
                self.trace.model().algebra(w).apply(*f, &args)
            }
        }
    }

    fn compute(&mut self, n: NodeId, pos: usize, vals: &[Elem]) -> bool {
        match self.nodes[n] {
            Node::True => true,
            Node::Eq(ref a, ref b) => self.term(a, pos, vals) == self.term(b, pos, vals),
            Node::Label { ref name, sort, ref arg } => {
                let e = self.term(arg, pos, vals);
                let w = self.trace.world_index(pos);
                self.trace.model().labeling().holds(name, sort, w, e)
            }
            Node::Not(a) => !self.sat(a, pos, vals),
            Node::Or(a, b) => self.sat(a, pos, vals) || self.sat(b, pos, vals),
            Node::And(a, b) => self.sat(a, pos, vals) && self.sat(b, pos, vals),
            Node::Quant { universal, sort, body } => {
                let w = self.trace.world_index(pos);
                let size = self.trace.model().algebra(w).carrier(sort).len();
                let mut ext = vals.to_vec();
                ext.push(Elem(0));
                let mut test = |e: u32| {
                    *ext.last_mut().unwrap() = Elem(e);
                    self.sat(body, pos, &ext)
                };
                if universal {
                    (0..size as u32).all(&mut test)
                } else {
                    (0..size as u32).any(&mut test)
                }
            }
            Node::Next { universal, ref sorts, body } => {
                let succ = self.successors(sorts, pos, vals);
                let next = self.trace.next_index(pos);
                if universal {
                    succ.iter().all(|v| self.sat(body, next, v))
                } else {
                    succ.iter().any(|v| self.sat(body, next, v))
                }
            }
            Node::Temporal { flavor, ref sorts, lhs, rhs } => {
                let sorts = sorts.clone();
                self.until_loop(flavor, &sorts, lhs, rhs, pos, vals).0
            }
        }
    }

    fn successors(&self, sorts: &[SortId], pos: usize, vals: &[Elem]) -> Vec<Vec<Elem>> {
        let rel = self.trace.relation_index(pos);
        counterpart_values(&self.trace.model().relation(rel).morphism, sorts, vals)
    }

    fn quantify(&mut self, universal: bool, n: NodeId, pos: usize, set: &BTreeSet<Vec<Elem>>) -> bool {
        if universal {
            set.iter().all(|v| self.sat(n, pos, v))
        } else {
            set.iter().any(|v| self.sat(n, pos, v))
        }
    }

    /// Returns the verdict and, on strong success, the number of steps taken.
    fn until_loop(
        &mut self,
        flavor: UntilFlavor,
        sorts: &[SortId],
        lhs: NodeId,
        rhs: NodeId,
        pos: usize,
        vals: &[Elem],
    ) -> (bool, Option<usize>) {
        let universal = flavor.is_universal();
        let mut set: BTreeSet<Vec<Elem>> = BTreeSet::from([vals.to_vec()]);
        let mut p = pos;
        let mut seen: HashSet<(usize, BTreeSet<Vec<Elem>>)> = HashSet::new();
        for step in 0.. {
            if self.quantify(universal, rhs, p, &set) {
                return (true, Some(step));
            }
            if !self.quantify(universal, lhs, p, &set) {
                return (false, None);
            }
            if !seen.insert((p, set.clone())) {
                return (flavor.is_weak(), None);
            }
            set = set
                .iter()
                .flat_map(|v| self.successors(sorts, p, v))
                .collect();
            p = self.trace.next_index(p);
        }
        unreachable!()
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::{graph_signature, AlgebraBuilder, RelMorphism};
    use crate::logic::Term;
    use crate::model::{CounterpartModel, WorldId};

    /// One node, no edges, and the empty relation looping on it.
    fn lonely() -> LassoTrace {
        let sig = Arc::new(graph_signature());
        let mut b = AlgebraBuilder::new(sig.clone());
        b.add_element("N", "n").unwrap();
        let a = Arc::new(b.build().unwrap());
        let mut m = CounterpartModel::new(sig);
        let w = m.add_world("w", a.clone()).unwrap();
        m.add_relation("C", w, w, RelMorphism::empty(a.clone(), a).unwrap())
            .unwrap();
        LassoTrace::from_names(Arc::new(m), &[], &["C"]).unwrap()
    }

    fn p0() -> TracePosition {
        TracePosition::default()
    }

    #[test]
    fn quantifiers_cannot_be_elided() {
        let t = lonely();
        let ev = Evaluator::new(&t);
        let mu = Assignment::empty(WorldId(0));
        let o = Formula::next(Formula::tt());
        assert!(ev.sat_qltl(p0(), &mu, &o).unwrap());
        assert!(!ev.sat_qltl(p0(), &mu, &Formula::exists("x", "N", o)).unwrap());
    }

    #[test]
    fn empty_relations_satisfy_universal_operators() {
        let t = lonely();
        let ev = Evaluator::new(&t);
        let mu = Assignment::empty(WorldId(0))
            .extend(t.model(), "x", "N", "n")
            .unwrap();
        let b = Pnf::Atom(Atom::label("B", Term::var("x")));
        for flavor in [UntilFlavor::UntilAll, UntilFlavor::Then] {
            // once x has lost its counterpart both operators hold for any operands
            let f = Pnf::next_all(until_node(flavor, &b, &Pnf::ff()));
            assert!(ev.sat_pnf(p0(), &mu, &f).unwrap());
            let g = Pnf::next_all(until_node(flavor, &Pnf::ff(), &Pnf::ff()));
            assert!(ev.sat_pnf(p0(), &mu, &g).unwrap());
            // at step 0 x itself is still the one counterpart
            assert!(!ev.sat_pnf(p0(), &mu, &until_node(flavor, &b, &Pnf::ff())).unwrap());
            assert!(ev
                .eval_until(flavor, p0(), &mu, &Pnf::tt(), &Pnf::ff())
                .unwrap());
        }
        let w = Pnf::until_all(Pnf::tt(), Pnf::ff());
        assert_eq!(ev.until_witness(p0(), &mu, &w).unwrap(), Some(1));
        assert!(ev.sat_pnf(p0(), &mu, &Pnf::next_all(Pnf::ff())).unwrap());
        assert!(!ev.sat_pnf(p0(), &mu, &Pnf::next(Pnf::tt())).unwrap());
        assert!(!ev.sat_pnf(p0(), &mu, &Pnf::until(Pnf::tt(), Pnf::ff())).unwrap());
    }

    #[test]
    fn context_cap_is_enforced() {
        let t = lonely();
        let ev = Evaluator::with_config(
            &t,
            EvalConfig {
                memoize: true,
                max_context: 1,
            },
        );
        let f = Formula::exists("x", "N", Formula::exists("y", "N", Formula::tt()));
        assert_eq!(
            ev.sat_qltl(p0(), &Assignment::empty(WorldId(0)), &f),
            Err(EvalError::ContextTooLarge { needed: 2, cap: 1 })
        );
    }

    #[test]
    fn memo_hits_on_shared_subterm() {
        let t = lonely();
        let ev = Evaluator::new(&t);
        // both branches of the until repeat the same (node, position) pairs
        let f = Formula::wuntil(Formula::tt(), Formula::ff());
        let (b, stats) = ev
            .sat_qltl_stats(p0(), &Assignment::empty(WorldId(0)), &f)
            .unwrap();
        assert!(b);
        assert!(stats.cache_hits > 0);
    }
}
