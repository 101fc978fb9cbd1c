//! Seeded random models, traces, formulae and assignments, the randomized
//! equivalence suites, and bounded counterexample search.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{graph_signature, Algebra, AlgebraBuilder, Elem, RelMorphism, Signature, SortId};
use crate::logic::{to_pnf, Assignment, Atom, Context, Formula, Pnf, Term};
use crate::model::{CounterpartModel, LassoTrace, ModelDocument, TracePosition, WorldId};
use crate::semantics::{EvalConfig, EvalError, Evaluator};
use crate::textio::{formula_to_string, pnf_to_string, serialize_model};

/// Name of the single trace in generated documents.
pub const TRACE: &str = "sigma";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_worlds: usize,
    /// Per carrier.
    pub max_elems: usize,
    /// Lower bound for the carrier of the labelled sort (the first one).
    pub min_elems: usize,
    /// Outgoing atomic relations per world.
    pub max_rels: usize,
    pub depth: usize,
    /// Largest number of variables in scope in generated formulae.
    pub ctx_size: usize,
    pub labels: usize,
    pub functional_only: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_worlds: 3,
            max_elems: 3,
            min_elems: 0,
            max_rels: 1,
            depth: 4,
            ctx_size: 3,
            labels: 2,
            functional_only: false,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), String> {
        let bounds = [
            ("max_worlds", self.max_worlds),
            ("max_elems", self.max_elems),
            ("max_rels", self.max_rels),
            ("depth", self.depth),
            ("ctx_size", self.ctx_size),
        ];
        match bounds.iter().find(|(_, v)| *v == 0) {
            Some((n, _)) => Err(format!("{n} must be at least 1")),
            None => Ok(()),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GenConfig { seed, ..self.clone() }
    }
}

/// `B`, `R`, then `L2`, `L3`, ...
pub fn label_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| match i {
            0 => "B".to_string(),
            1 => "R".to_string(),
            _ => format!("L{i}"),
        })
        .collect()
}

/// Mixes a base seed with an index so neighbouring candidates get
/// unrelated streams.
pub fn derive_seed(base: u64, i: u64) -> u64 {
    let mut z = base ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub struct Generator {
    cfg: GenConfig,
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(cfg: &GenConfig) -> Self {
        Generator {
            cfg: cfg.clone(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A random finite algebra; element identifiers are `<sort><world>_<i>`
    /// with the sort name lowercased.
    pub fn algebra(&mut self, sig: &Arc<Signature>, world: usize) -> Algebra {
        let k = sig.sorts().len();
        let mut sizes: Vec<usize> = (0..k)
            .map(|s| {
                let lo = if s == 0 { self.cfg.min_elems.min(self.cfg.max_elems) } else { 0 };
                self.rng.gen_range(lo..=self.cfg.max_elems)
            })
            .collect();
        // a function with inhabited arguments needs an inhabited result
        loop {
            let mut changed = false;
            for f in sig.functions() {
                if f.args.iter().all(|&a| sizes[a] > 0) && sizes[f.result] == 0 {
                    sizes[f.result] = 1;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut b = AlgebraBuilder::new(sig.clone());
        for (s, &n) in sizes.iter().enumerate() {
            let prefix = sig.sort_name(s).to_lowercase();
            for i in 0..n {
                b.add_element_in(s, &format!("{prefix}{world}_{i}"))
                    .expect("fresh names");
            }
        }
        for (fid, f) in sig.functions().iter().enumerate() {
            let arg_sizes: Vec<usize> = f.args.iter().map(|&a| sizes[a]).collect();
            let mut tuples = Vec::new();
            crate::algebra::for_each_tuple(&arg_sizes, |t| tuples.push(t.to_vec()));
            for t in tuples {
                let r = Elem(self.rng.gen_range(0..sizes[f.result]) as u32);
                b.define_elems(fid, t, r).expect("in range");
            }
        }
        b.build().expect("total by construction")
    }

    /// A random structure-preserving relation: random pairs first, then the
    /// largest preserving restriction.
    pub fn relation(&mut self, src: &Arc<Algebra>, tgt: &Arc<Algebra>) -> RelMorphism {
        let k = src.signature().sorts().len();
        for _ in 0..8 {
            let mut rel = vec![std::collections::BTreeSet::new(); k];
            for (s, pairs) in rel.iter_mut().enumerate() {
                let (m, n) = (src.carrier(s).len(), tgt.carrier(s).len());
                if n == 0 {
                    continue;
                }
                for a in 0..m {
                    if self.cfg.functional_only {
                        if self.rng.gen_bool(0.7) {
                            pairs.insert((Elem(a as u32), Elem(self.rng.gen_range(0..n) as u32)));
                        }
                    } else {
                        for b in 0..n {
                            if self.rng.gen_bool(0.45) {
                                pairs.insert((Elem(a as u32), Elem(b as u32)));
                            }
                        }
                    }
                }
            }
            let r = RelMorphism::new(src.clone(), tgt.clone(), rel)
                .expect("pairs in range")
                .restrict_to_preserving();
            if !self.cfg.functional_only || r.is_functional() {
                return r;
            }
        }
        RelMorphism::empty(src.clone(), tgt.clone())
            .expect("same signature")
            .restrict_to_preserving()
    }

    /// A random model over `sig` whose every world has an outgoing
    /// relation, with one lasso trace named [`TRACE`] starting in the
    /// first world.
    pub fn model_with(&mut self, sig: Arc<Signature>) -> ModelDocument {
        let nworlds = self.rng.gen_range(1..=self.cfg.max_worlds);
        let mut m = CounterpartModel::new(sig.clone());
        let algebras: Vec<Arc<Algebra>> = (0..nworlds).map(|w| Arc::new(self.algebra(&sig, w))).collect();
        for (w, a) in algebras.iter().enumerate() {
            m.add_world(&format!("w{w}"), a.clone()).expect("fresh world");
        }
        let labels = label_names(self.cfg.labels);
        let label_sort: SortId = 0;
        for (w, a) in algebras.iter().enumerate() {
            for l in &labels {
                for e in a.carrier(label_sort).elems() {
                    if self.rng.gen_bool(0.5) {
                        m.labeling_mut().insert(l, label_sort, WorldId(w), e);
                    }
                }
            }
        }
        let mut next_name = 0;
        for w in 0..nworlds {
            let k = self.rng.gen_range(1..=self.cfg.max_rels);
            for _ in 0..k {
                // lean towards chains so that traces get long enough to
                // tell the temporal operators apart
                let t = if w + 1 < nworlds && self.rng.gen_bool(0.5) {
                    w + 1
                } else {
                    self.rng.gen_range(0..nworlds)
                };
                let r = self.relation(&algebras[w], &algebras[t]);
                m.add_relation(&format!("C{next_name}"), WorldId(w), WorldId(t), r)
                    .expect("preserving by construction");
                next_name += 1;
            }
        }
        let model = Arc::new(m);
        let trace = self.lasso(&model);
        let mut traces = IndexMap::new();
        traces.insert(TRACE.to_string(), trace);
        ModelDocument { model, traces }
    }

    pub fn model(&mut self) -> ModelDocument {
        self.model_with(Arc::new(graph_signature()))
    }

    /// Random walk from the first world, closed into a lasso at a repeated
    /// world.
    pub fn lasso(&mut self, model: &Arc<CounterpartModel>) -> LassoTrace {
        let mut worlds = vec![WorldId(0)];
        let mut rels = Vec::new();
        let soft_len = self.rng.gen_range(1..=4);
        loop {
            let here = *worlds.last().unwrap();
            let out: Vec<usize> = model.outgoing(here).map(|(id, _)| id).collect();
            let r = *out.choose(&mut self.rng).expect("every world has a successor");
            rels.push(r);
            let there = model.relation(r).target;
            if let Some(j) = worlds.iter().position(|&w| w == there) {
                if rels.len() >= soft_len || self.rng.gen_bool(0.5) {
                    let cycle = rels.split_off(j);
                    return LassoTrace::new(model.clone(), rels, cycle).expect("chained walk");
                }
            }
            worlds.push(there);
        }
    }

    /// A context of up to `max` free variables over sorts inhabited in
    /// `alg`, named `x0`, `x1`, ...
    pub fn context(&mut self, alg: &Algebra, max: usize) -> Context {
        let sorts: Vec<SortId> = (0..alg.signature().sorts().len())
            .filter(|&s| !alg.carrier(s).is_empty())
            .collect();
        let mut ctx = Context::new();
        if sorts.is_empty() {
            return ctx;
        }
        let n = self.rng.gen_range(0..=max);
        for i in 0..n {
            let s = *sorts.choose(&mut self.rng).unwrap();
            ctx.push(&format!("x{i}"), alg.signature().sort_name(s))
                .expect("fresh names");
        }
        ctx
    }

    /// A uniformly random assignment of `ctx` in `world`; `None` when some
    /// carrier is empty.
    pub fn assignment(&mut self, model: &CounterpartModel, world: WorldId, ctx: &Context) -> Option<Assignment> {
        let sig = model.signature();
        let alg = model.algebra(world);
        let mut vals = Vec::new();
        for (_, s) in ctx.iter() {
            let n = alg.carrier(sig.sort_id(s)?).len();
            if n == 0 {
                return None;
            }
            vals.push(Elem(self.rng.gen_range(0..n) as u32));
        }
        Some(Assignment::from_elems(world, ctx.clone(), vals))
    }

    fn term(&mut self, sig: &Signature, ctx: &Context, sort: SortId, depth: usize) -> Option<Term> {
        let mut options: Vec<Term> = ctx
            .iter()
            .filter(|(_, s)| sig.sort_id(s) == Some(sort))
            .map(|(x, _)| Term::var(x))
            .collect();
        if depth > 0 {
            for f in sig.functions().iter().filter(|f| f.result == sort) {
                let args: Option<Vec<Term>> = f.args.iter().map(|&a| self.term(sig, ctx, a, depth - 1)).collect();
                if let Some(args) = args {
                    options.push(Term::App(f.name.clone(), args));
                }
            }
        }
        options.choose(&mut self.rng).cloned()
    }

    pub fn atom(&mut self, sig: &Signature, ctx: &Context) -> Atom {
        let labels = label_names(self.cfg.labels);
        for _ in 0..4 {
            match self.rng.gen_range(0..3) {
                0 => return Atom::True,
                1 => {
                    let s = self.rng.gen_range(0..sig.sorts().len());
                    if let (Some(a), Some(b)) = (self.term(sig, ctx, s, 1), self.term(sig, ctx, s, 1)) {
                        return Atom::eq(sig.sort_name(s), a, b);
                    }
                }
                _ => {
                    if let (Some(l), Some(t)) = (labels.choose(&mut self.rng).cloned(), self.term(sig, ctx, 0, 1)) {
                        return Atom::label(&l, t);
                    }
                }
            }
        }
        Atom::True
    }

    /// A random QLTL formula, well typed in `ctx`, of depth at most
    /// `depth`.
    pub fn formula(&mut self, sig: &Signature, ctx: &Context, depth: usize) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.15) {
            return Formula::Atom(self.atom(sig, ctx));
        }
        let d = depth - 1;
        match self.rng.gen_range(0..6) {
            0 => Formula::not(self.formula(sig, ctx, d)),
            1 => Formula::or(self.formula(sig, ctx, d), self.formula(sig, ctx, d)),
            2 if ctx.len() < self.cfg.ctx_size => {
                let var = format!("v{}", ctx.len());
                let s = self.rng.gen_range(0..sig.sorts().len());
                let sort = sig.sort_name(s).to_string();
                let inner = ctx.extended(&var, &sort).expect("fresh binder");
                Formula::exists(&var, &sort, self.formula(sig, &inner, d))
            }
            2 | 3 => Formula::next(self.formula(sig, ctx, d)),
            4 => Formula::until(self.formula(sig, ctx, d), self.formula(sig, ctx, d)),
            _ => Formula::wuntil(self.formula(sig, ctx, d), self.formula(sig, ctx, d)),
        }
    }
}

pub fn gen_model(cfg: &GenConfig) -> ModelDocument {
    Generator::new(cfg).model()
}

pub fn gen_model_with(sig: Arc<Signature>, cfg: &GenConfig) -> ModelDocument {
    Generator::new(cfg).model_with(sig)
}

pub fn gen_formula(cfg: &GenConfig, sig: &Signature, ctx: &Context) -> Formula {
    Generator::new(cfg).formula(sig, ctx, cfg.depth)
}

/// Thread pool honouring `QLTL_THREADS`.
pub fn thread_pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("QLTL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        b = b.num_threads(n.max(1));
    }
    b.build().expect("thread pool")
}

/// The equivalences the search tries to falsify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    /// `¬(ψ₁ T ψ₂)` against `¬ψ₂ U (¬ψ₁ ∧ ¬ψ₂)`
    ThenDuality,
    /// `¬(ψ₁ F ψ₂)` against `¬ψ₂ W (¬ψ₁ ∧ ¬ψ₂)`
    UntilAllDuality,
    UntilExpansion,
    WeakUntilExpansion,
    UntilAllExpansion,
    ThenExpansion,
}

impl Target {
    pub const ALL: [Target; 6] = [
        Target::ThenDuality,
        Target::UntilAllDuality,
        Target::UntilExpansion,
        Target::WeakUntilExpansion,
        Target::UntilAllExpansion,
        Target::ThenExpansion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::ThenDuality => "then-duality",
            Target::UntilAllDuality => "until-all-duality",
            Target::UntilExpansion => "until-expansion",
            Target::WeakUntilExpansion => "weak-until-expansion",
            Target::UntilAllExpansion => "until-all-expansion",
            Target::ThenExpansion => "then-expansion",
        }
    }

    /// The two sides over `φ₁`, `φ₂`: `(lhs, lhs negated, rhs)`. The
    /// equivalence claims `sat(lhs) ≠ negated ⇔ sat(rhs)`.
    pub fn sides(self, a: &Pnf, b: &Pnf) -> (Pnf, bool, Pnf) {
        fn neg(p: &Pnf) -> Pnf {
            match p {
                Pnf::Atom(x) => Pnf::NegAtom(x.clone()),
                Pnf::NegAtom(x) => Pnf::Atom(x.clone()),
                _ => panic!("dualities are stated for atoms"),
            }
        }
        let (a, b) = (a.clone(), b.clone());
        match self {
            Target::ThenDuality => (
                Pnf::then(a.clone(), b.clone()),
                true,
                Pnf::until(neg(&b), Pnf::and(neg(&a), neg(&b))),
            ),
            Target::UntilAllDuality => (
                Pnf::until_all(a.clone(), b.clone()),
                true,
                Pnf::wuntil(neg(&b), Pnf::and(neg(&a), neg(&b))),
            ),
            Target::UntilExpansion => expansion(Pnf::until, Pnf::next, a, b),
            Target::WeakUntilExpansion => expansion(Pnf::wuntil, Pnf::next, a, b),
            Target::UntilAllExpansion => expansion(Pnf::until_all, Pnf::next_all, a, b),
            Target::ThenExpansion => expansion(Pnf::then, Pnf::next_all, a, b),
        }
    }
}

fn expansion(op: fn(Pnf, Pnf) -> Pnf, next: fn(Pnf) -> Pnf, a: Pnf, b: Pnf) -> (Pnf, bool, Pnf) {
    let whole = op(a.clone(), b.clone());
    let rhs = Pnf::or(b, Pnf::and(a, next(whole.clone())));
    (whole, false, rhs)
}

/// `B(x)` and `R(x)`.
pub fn blue_red() -> (Pnf, Pnf) {
    (
        Pnf::Atom(Atom::label("B", Term::var("x"))),
        Pnf::Atom(Atom::label("R", Term::var("x"))),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SideValues {
    pub lhs: bool,
    pub rhs: bool,
    pub lhs_negated: bool,
}

impl SideValues {
    /// Whether the equivalence holds on this instance.
    pub fn agree(&self) -> bool {
        (self.lhs != self.lhs_negated) == self.rhs
    }
}

pub fn evaluate_target(
    target: Target,
    trace: &LassoTrace,
    pos: TracePosition,
    mu: &Assignment,
    a: &Pnf,
    b: &Pnf,
    memoize: bool,
) -> Result<SideValues, EvalError> {
    let (lhs, neg, rhs) = target.sides(a, b);
    let ev = Evaluator::with_config(
        trace,
        EvalConfig {
            memoize,
            ..EvalConfig::default()
        },
    );
    Ok(SideValues {
        lhs: ev.sat_pnf(pos, mu, &lhs)?,
        rhs: ev.sat_pnf(pos, mu, &rhs)?,
        lhs_negated: neg,
    })
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub target: Target,
    /// Index of the candidate within the search.
    pub candidate: u64,
    pub doc: ModelDocument,
    pub pos: usize,
    pub assignment: Assignment,
    pub values: SideValues,
}

impl Witness {
    pub fn trace(&self) -> &LassoTrace {
        &self.doc.traces[TRACE]
    }

    /// The witness as a replayable model file: both sides become `//@`
    /// directives with their observed verdicts.
    pub fn to_cqm(&self) -> String {
        let (a, b) = blue_red();
        let (lhs, neg, rhs) = self.target.sides(&a, &b);
        let m = &self.doc.model;
        let assign = self
            .assignment
            .context()
            .iter()
            .zip(self.assignment.values())
            .map(|((x, s), &e)| {
                let sid = m.signature().sort_id(s).unwrap();
                format!("{x}:{s}={}", m.algebra(self.assignment.world()).elem_name(sid, e))
            })
            .collect::<Vec<_>>()
            .join(",");
        let verdict = |b: bool| if b { "sat" } else { "unsat" };
        let mut out = String::new();
        let _ = writeln!(out, "// counterexample for {}", self.target.name());
        let _ = writeln!(
            out,
            "// the equivalence relates {}{} and {}",
            if neg { "the negation of " } else { "" },
            pnf_to_string(&lhs),
            pnf_to_string(&rhs)
        );
        out.push_str(&serialize_model(&self.doc));
        out.push('\n');
        let _ = writeln!(out, "//@ {} {TRACE} {} {assign} pnf :: {}", verdict(self.values.lhs), self.pos, pnf_to_string(&lhs));
        let _ = writeln!(out, "//@ {} {TRACE} {} {assign} pnf :: {}", verdict(self.values.rhs), self.pos, pnf_to_string(&rhs));
        out
    }
}

/// Graphs without edges: a single sort `N`.
pub fn node_signature() -> Signature {
    let mut sig = Signature::new("Nodes");
    sig.add_sort("N").expect("fresh sort");
    sig
}

/// The bounds of the relational counterexample search.
pub fn search_bounds() -> GenConfig {
    GenConfig {
        seed: 0,
        max_worlds: 3,
        max_elems: 2,
        min_elems: 1,
        max_rels: 1,
        depth: 1,
        ctx_size: 1,
        labels: 2,
        functional_only: false,
    }
}

fn try_candidate(target: Target, bounds: &GenConfig, i: u64) -> Option<Witness> {
    let doc = gen_model_with(Arc::new(node_signature()), &bounds.with_seed(derive_seed(bounds.seed, i)));
    let trace = &doc.traces[TRACE];
    let (a, b) = blue_red();
    let ctx = Context::from_pairs(&[("x", "N")]).unwrap();
    for pos in 0..trace.len() {
        let p = trace.normalize(pos);
        let w = trace.world_at(p);
        let n = doc.model.algebra(w).carrier(0).len();
        for e in 0..n as u32 {
            let mu = Assignment::from_elems(w, ctx.clone(), vec![Elem(e)]);
            let v = evaluate_target(target, trace, p, &mu, &a, &b, true).ok()?;
            if !v.agree() {
                // confirm with the uncached evaluator before reporting
                let again = evaluate_target(target, trace, p, &mu, &a, &b, false).ok()?;
                if again == v {
                    return Some(Witness {
                        target,
                        candidate: i,
                        doc: doc.clone(),
                        pos,
                        assignment: mu,
                        values: v,
                    });
                }
            }
        }
    }
    None
}

/// Samples up to `budget` node-only models within `bounds` and returns the
/// first (by candidate index) on which the target equivalence fails for
/// some `x:N` at some position.
pub fn search_counterexample(target: Target, bounds: &GenConfig, budget: u64) -> Option<Witness> {
    thread_pool().install(|| {
        (0..budget)
            .into_par_iter()
            .find_map_first(|i| try_candidate(target, bounds, i))
    })
}

/// Tallies of one randomized suite.
#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub models: usize,
    /// check name → (instances, disagreements)
    pub checks: BTreeMap<String, (usize, usize)>,
    pub first_failure: Option<Failure>,
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub check: String,
    pub model_seed: u64,
    pub doc: ModelDocument,
    pub pos: usize,
    pub assignment: String,
    pub formula: String,
}

impl Failure {
    pub fn to_cqm(&self) -> String {
        format!(
            "// {} failed at position {} with {}\n// {}\n{}",
            self.check,
            self.pos,
            self.assignment,
            self.formula,
            serialize_model(&self.doc)
        )
    }
}

impl SuiteReport {
    pub fn disagreements(&self) -> usize {
        self.checks.values().map(|(_, d)| d).sum()
    }

    pub fn instances(&self) -> usize {
        self.checks.values().map(|(n, _)| n).sum()
    }

    fn record(&mut self, check: &str, ok: bool, failure: impl FnOnce() -> Failure) {
        let e = self.checks.entry(check.to_string()).or_default();
        e.0 += 1;
        if !ok {
            e.1 += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(failure());
            }
        }
    }

    fn merge(mut self, other: SuiteReport) -> SuiteReport {
        self.models += other.models;
        for (k, (n, d)) in other.checks {
            let e = self.checks.entry(k).or_default();
            e.0 += n;
            e.1 += d;
        }
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure;
        }
        self
    }

    pub fn summary(&self) -> String {
        let mut out = format!("{} models, {} checks, {} disagreements\n", self.models, self.instances(), self.disagreements());
        for (k, (n, d)) in &self.checks {
            let _ = writeln!(out, "  {k:<28} {n:>8} checked {d:>4} failed");
        }
        out
    }
}

/// Settings for [`equivalence_suite`].
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub models: usize,
    pub formulas_per_model: usize,
    pub gen: GenConfig,
    /// Positions sampled are `0..=max_pos`.
    pub max_pos: usize,
    /// Also check both dualities and the four expansion laws.
    pub laws: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            models: 500,
            formulas_per_model: 20,
            gen: GenConfig::default(),
            max_pos: 2,
            laws: false,
        }
    }
}

/// The randomized equivalence suite: QLTL against its PNF translation, the
/// negation equivalences for atoms, the `A`/`O` duality, and optionally the
/// dualities and expansion laws that hold for functional models.
pub fn equivalence_suite(cfg: &SuiteConfig) -> SuiteReport {
    thread_pool().install(|| {
        (0..cfg.models)
            .into_par_iter()
            .map(|m| suite_model(cfg, m as u64))
            .reduce(SuiteReport::default, SuiteReport::merge)
    })
}

fn suite_model(cfg: &SuiteConfig, m: u64) -> SuiteReport {
    let seed = derive_seed(cfg.gen.seed, m);
    let mut g = Generator::new(&cfg.gen.with_seed(seed));
    let doc = g.model();
    let trace = doc.traces[TRACE].clone();
    let model = doc.model.clone();
    let sig = model.signature().clone();
    let ev = Evaluator::new(&trace);
    let mut report = SuiteReport {
        models: 1,
        ..SuiteReport::default()
    };
    let fail = |check: &str, pos: usize, mu: &Assignment, formula: String| {
        let check = check.to_string();
        let assignment = mu.describe(&model);
        let doc = doc.clone();
        move || Failure {
            check,
            model_seed: seed,
            doc,
            pos,
            assignment,
            formula,
        }
    };
    for _ in 0..cfg.formulas_per_model {
        let pos = g.rng().gen_range(0..=cfg.max_pos);
        let p = trace.normalize(pos);
        let w = trace.world_at(p);
        let ctx = g.context(model.algebra(w), 1);
        let Some(mu) = g.assignment(&model, w, &ctx) else { continue };
        let depth = g.rng().gen_range(0..=cfg.gen.depth);
        let phi = g.formula(&sig, &ctx, depth);
        let q = ev.sat_qltl(p, &mu, &phi).expect("generated queries are well formed");
        let pn = ev.sat_pnf(p, &mu, &to_pnf(&phi)).expect("translation is well formed");
        report.record("pnf-equivalence", q == pn, fail("pnf-equivalence", pos, &mu, formula_to_string(&phi)));
        let nq = ev.sat_qltl(p, &mu, &Formula::not(phi.clone())).unwrap();
        report.record("negation-coherence", nq != q, fail("negation-coherence", pos, &mu, formula_to_string(&phi)));

        let atom = |g: &mut Generator| g.atom(&sig, &ctx);
        let (psi, psi1, psi2) = (atom(&mut g), atom(&mut g), atom(&mut g));
        let f = |a: &Atom| Formula::Atom(a.clone());
        let na = |a: &Atom| Pnf::NegAtom(a.clone());
        let pa = |a: &Atom| Pnf::Atom(a.clone());
        let negations = [
            (
                Formula::not(Formula::next(f(&psi))),
                Pnf::next_all(na(&psi)),
            ),
            (
                Formula::not(Formula::until(f(&psi1), f(&psi2))),
                Pnf::then(na(&psi2), Pnf::and(na(&psi1), na(&psi2))),
            ),
            (
                Formula::not(Formula::wuntil(f(&psi1), f(&psi2))),
                Pnf::until_all(na(&psi2), Pnf::and(na(&psi1), na(&psi2))),
            ),
        ];
        for (i, (q, pn)) in negations.iter().enumerate() {
            let name = ["negated-next", "negated-until", "negated-weak-until"][i];
            let ok = ev.sat_qltl(p, &mu, q).unwrap() == ev.sat_pnf(p, &mu, pn).unwrap();
            report.record(name, ok, fail(name, pos, &mu, formula_to_string(q)));
        }
        let a_sat = ev.sat_pnf(p, &mu, &Pnf::next_all(pa(&psi))).unwrap();
        let o_sat = ev.sat_pnf(p, &mu, &Pnf::next(na(&psi))).unwrap();
        report.record("next-all-duality", a_sat != o_sat, fail("next-all-duality", pos, &mu, pnf_to_string(&Pnf::next_all(pa(&psi)))));

        if cfg.laws {
            for t in Target::ALL {
                let v = evaluate_target(t, &trace, p, &mu, &pa(&psi1), &pa(&psi2), true).unwrap();
                let (lhs, _, _) = t.sides(&pa(&psi1), &pa(&psi2));
                report.record(t.name(), v.agree(), fail(t.name(), pos, &mu, pnf_to_string(&lhs)));
            }
        }
    }
    report
}

/// Role names pinned on the duplication model.
pub const DUPLICATION_ROLES: [(&str, usize, &str); 6] = [
    ("n0", 0, "N"),
    ("n1", 1, "N"),
    ("e1", 1, "E"),
    ("n5", 2, "N"),
    ("e5", 2, "E"),
    ("e4", 2, "E"),
];

/// The judgments the duplication model must satisfy: `(position, variable
/// role, expected, PNF formula over x)`.
pub fn duplication_judgments() -> Vec<(usize, &'static str, &'static str, bool, &'static str)> {
    vec![
        (0, "n0", "N", true, "A exists E e . s(e) = x & s(e) = t(e)"),
        (1, "n1", "N", false, "A exists E e . s(e) = x & s(e) = t(e)"),
        (1, "e1", "E", true, "(exists E e . s(e) = s(x) & s(e) = t(e)) U (s(x) = t(x))"),
        (1, "e1", "E", false, "(exists E e . s(e) = s(x) & s(e) = t(e)) F (s(x) = t(x))"),
        (2, "e5", "E", true, "A s(x) = t(x)"),
        (2, "n5", "N", true, "(exists E e . s(e) = x & s(e) = t(e)) F false"),
        (2, "e4", "E", true, "(exists E e . s(e) = s(x) & s(e) = t(e)) T (!(s(x) = t(x)))"),
    ]
}

/// Extra conditions on the duplication model so that the first judgment
/// does not hold vacuously.
pub fn duplication_side_conditions() -> Vec<(usize, &'static str, &'static str, bool, &'static str)> {
    vec![(0, "n0", "N", true, "O x = x")]
}

/// Bounds of the duplication-model search.
pub fn duplication_bounds() -> GenConfig {
    GenConfig {
        seed: 0,
        max_worlds: 4,
        max_elems: 2,
        min_elems: 0,
        max_rels: 1,
        depth: 1,
        ctx_size: 1,
        labels: 0,
        functional_only: false,
    }
}

/// The linear model `w0 → w1 → w2 → w3 ↺` with relations `C0..C3`.
fn linear_model(algebras: &[Arc<Algebra>; 4], rels: [RelMorphism; 4]) -> ModelDocument {
    let mut m = CounterpartModel::new(algebras[0].signature().clone());
    for (w, a) in algebras.iter().enumerate() {
        m.add_world(&format!("w{w}"), a.clone()).unwrap();
    }
    for (i, r) in rels.into_iter().enumerate() {
        let (s, t) = (i, (i + 1).min(3));
        m.add_relation(&format!("C{i}"), WorldId(s), WorldId(t), r).unwrap();
    }
    let model = Arc::new(m);
    let trace = LassoTrace::new(model.clone(), vec![0, 1, 2], vec![3]).unwrap();
    let mut traces = IndexMap::new();
    traces.insert(TRACE.to_string(), trace);
    ModelDocument { model, traces }
}

/// Renames elements of a document; `names[w][s][e]` is the new identifier.
fn rename(doc: &ModelDocument, names: &[Vec<Vec<String>>]) -> ModelDocument {
    let text = serialize_model(doc);
    let old = crate::textio::parse_model(&text).unwrap();
    let sig = old.model.signature().clone();
    let mut m = CounterpartModel::new(sig.clone());
    let mut algebras = Vec::new();
    for (wi, w) in old.model.worlds().iter().enumerate() {
        let mut b = AlgebraBuilder::new(sig.clone());
        for (s, carrier) in names[wi].iter().enumerate() {
            for name in carrier {
                b.add_element_in(s, name).unwrap();
            }
        }
        for fid in 0..sig.functions().len() {
            let sizes = w.algebra.arg_sizes(fid);
            let mut tuples = Vec::new();
            crate::algebra::for_each_tuple(&sizes, |t| tuples.push(t.to_vec()));
            for t in tuples {
                let r = w.algebra.apply(fid, &t);
                b.define_elems(fid, t, r).unwrap();
            }
        }
        let a = Arc::new(b.build().unwrap());
        m.add_world(&w.name, a.clone()).unwrap();
        algebras.push(a);
    }
    for r in old.model.relations() {
        let rel = RelMorphism::new(
            algebras[r.source.0].clone(),
            algebras[r.target.0].clone(),
            r.morphism.relations().to_vec(),
        )
        .unwrap();
        m.add_relation(&r.name, r.source, r.target, rel).unwrap();
    }
    let model = Arc::new(m);
    let t = &old.traces[TRACE];
    let trace = LassoTrace::new(model.clone(), t.prefix().to_vec(), t.cycle().to_vec()).unwrap();
    let mut traces = IndexMap::new();
    traces.insert(TRACE.to_string(), trace);
    ModelDocument { model, traces }
}

/// For each role in order, the first element not taken by an earlier role
/// that passes all of the role's judgments.
fn duplication_roles(doc: &ModelDocument, roles: &[(&str, usize, &str)]) -> Option<Vec<Elem>> {
    let trace = &doc.traces[TRACE];
    let sig = doc.model.signature().clone();
    let ev = Evaluator::new(trace);
    let mut judgments = duplication_judgments();
    judgments.extend(duplication_side_conditions());
    let mut chosen: Vec<(usize, SortId, Elem)> = Vec::new();
    for &(role, world, sort) in roles {
        let sid = sig.sort_id(sort).unwrap();
        let ctx = Context::from_pairs(&[("x", sort)]).unwrap();
        let found = doc.model.algebra(WorldId(world)).carrier(sid).elems().find(|&e| {
            if chosen.contains(&(world, sid, e)) {
                return false;
            }
            let mu = Assignment::from_elems(WorldId(world), ctx.clone(), vec![e]);
            judgments.iter().filter(|j| j.1 == role).all(|&(pos, _, _, expect, f)| {
                let phi = crate::textio::parse_pnf(f, &sig, &ctx).unwrap();
                ev.sat_pnf(trace.normalize(pos), &mu, &phi).ok() == Some(expect)
            })
        })?;
        chosen.push((world, sid, found));
    }
    Some(chosen.into_iter().map(|(_, _, e)| e).collect())
}

/// Completions of the trace tried for each middle section that passes.
const COMPLETIONS: usize = 64;

/// One candidate: a random middle section `w1 → w2`, filtered on the
/// judgments at position 1 with everything else empty, then random
/// completions of the rest of the trace.
fn duplication_candidate(bounds: &GenConfig, i: u64) -> Option<ModelDocument> {
    let mut g = Generator::new(&bounds.with_seed(derive_seed(bounds.seed, i)));
    let sig = Arc::new(graph_signature());
    let empty = Arc::new(AlgebraBuilder::new(sig.clone()).build().unwrap());
    let (a1, a2) = (Arc::new(g.algebra(&sig, 1)), Arc::new(g.algebra(&sig, 2)));
    let c1 = g.relation(&a1, &a2);
    let none = |s: &Arc<Algebra>, t: &Arc<Algebra>| RelMorphism::empty(s.clone(), t.clone()).unwrap();
    let probe = linear_model(
        &[empty.clone(), a1.clone(), a2.clone(), empty.clone()],
        [none(&empty, &a1), c1.clone(), none(&a2, &empty), none(&empty, &empty)],
    );
    duplication_roles(&probe, &DUPLICATION_ROLES[1..3])?;
    for _ in 0..COMPLETIONS {
        let (a0, a3) = (Arc::new(g.algebra(&sig, 0)), Arc::new(g.algebra(&sig, 3)));
        let rels = [g.relation(&a0, &a1), c1.clone(), g.relation(&a2, &a3), g.relation(&a3, &a3)];
        let doc = linear_model(&[a0, a1.clone(), a2.clone(), a3], rels);
        if let Some(chosen) = duplication_roles(&doc, &DUPLICATION_ROLES) {
            return Some(rename_roles(&doc, &chosen));
        }
    }
    None
}

fn rename_roles(doc: &ModelDocument, chosen: &[Elem]) -> ModelDocument {
    let sig = doc.model.signature().clone();
    let mut names: Vec<Vec<Vec<String>>> = doc
        .model
        .worlds()
        .iter()
        .enumerate()
        .map(|(wi, w)| {
            (0..sig.sorts().len())
                .map(|s| {
                    w.algebra
                        .carrier(s)
                        .elems()
                        .map(|e| format!("{}{wi}_{}", sig.sort_name(s).to_lowercase(), e.index()))
                        .collect()
                })
                .collect()
        })
        .collect();
    for ((role, world, sort), e) in DUPLICATION_ROLES.iter().zip(chosen) {
        let sid = sig.sort_id(sort).unwrap();
        names[*world][sid][e.index()] = role.to_string();
    }
    rename(doc, &names)
}

/// Searches linear four-world graph models for one satisfying every
/// duplication judgment; each candidate is a middle section with up to
/// [`COMPLETIONS`] completions. The roles are renamed to their conventional
/// identifiers.
pub fn search_duplication_model(bounds: &GenConfig, budget: u64) -> Option<(u64, ModelDocument)> {
    thread_pool().install(|| {
        (0..budget)
            .into_par_iter()
            .find_map_first(|i| duplication_candidate(bounds, i).map(|d| (i, d)))
    })
}

/// The duplication model as a replayable file.
pub fn duplication_cqm(doc: &ModelDocument) -> String {
    let mut out = String::from("// a graph model in which counterpart relations duplicate nodes and edges\n");
    out.push_str(&serialize_model(doc));
    out.push('\n');
    let side = duplication_side_conditions();
    for (pos, role, sort, expect, f) in duplication_judgments().into_iter().chain(side) {
        let _ = writeln!(
            out,
            "//@ {} {TRACE} {pos} x:{sort}={role} pnf :: {f}",
            if expect { "sat" } else { "unsat" }
        );
    }
    out
}
