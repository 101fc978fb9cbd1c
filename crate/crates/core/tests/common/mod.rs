//! A second evaluator written straight from the satisfaction clauses: the
//! counterparts of an assignment after `n` steps are read off the composite
//! of the first `n` relations, computed here pair by pair.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use qltl::algebra::SortId;
use qltl::logic::{Atom, Formula, Pnf, Term};
use qltl::{Elem, LassoTrace, TracePosition};

type Env = Vec<(String, SortId, Elem)>;
pub type Pairs = Vec<BTreeSet<(Elem, Elem)>>;

pub struct Oracle<'a> {
    trace: &'a LassoTrace,
}

impl<'a> Oracle<'a> {
    pub fn new(trace: &'a LassoTrace) -> Self {
        Oracle { trace }
    }

    fn world(&self, i: usize) -> qltl::WorldId {
        self.trace.world_at(self.trace.normalize(i))
    }

    fn sorts(&self) -> usize {
        self.trace.model().signature().sorts().len()
    }

    fn identity(&self, i: usize) -> Pairs {
        let alg = self.trace.model().algebra(self.world(i));
        (0..self.sorts())
            .map(|s| (0..alg.carrier(s).len() as u32).map(|e| (Elem(e), Elem(e))).collect())
            .collect()
    }

    fn step_pairs(&self, i: usize) -> Pairs {
        let r = self.trace.relation_at(self.trace.normalize(i));
        let rel = &self.trace.model().relation(r).morphism;
        (0..self.sorts()).map(|s| rel.pairs(s).clone()).collect()
    }

    pub fn then(a: &Pairs, b: &Pairs) -> Pairs {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let mut out = BTreeSet::new();
                for &(p, q) in x {
                    for &(q2, r) in y {
                        if q == q2 {
                            out.insert((p, r));
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// Every assignment of the same variables reachable through `comp`.
    fn counterparts(env: &Env, comp: &Pairs) -> Vec<Env> {
        let mut out: Vec<Env> = vec![Vec::new()];
        for (x, s, e) in env {
            let imgs: Vec<Elem> = comp[*s].iter().filter(|(a, _)| a == e).map(|&(_, b)| b).collect();
            out = out
                .into_iter()
                .flat_map(|pre| {
                    imgs.iter().map(move |&b| {
                        let mut v = pre.clone();
                        v.push((x.clone(), *s, b));
                        v
                    })
                })
                .collect();
        }
        out
    }

    fn term(&self, i: usize, env: &Env, t: &Term) -> (SortId, Elem) {
        let sig = self.trace.model().signature();
        match t {
            Term::Var(x) => {
                let (_, s, e) = env.iter().rev().find(|(y, _, _)| y == x).expect("bound");
                (*s, *e)
            }
            Term::App(f, args) => {
                let id = sig.function_id(f).unwrap();
                let vals: Vec<Elem> = args.iter().map(|a| self.term(i, env, a).1).collect();
                let alg = self.trace.model().algebra(self.world(i));
                (sig.function(id).result, alg.apply(id, &vals))
            }
        }
    }

    fn atom(&self, i: usize, env: &Env, a: &Atom) -> bool {
        match a {
            Atom::True => true,
            Atom::Eq { lhs, rhs, .. } => self.term(i, env, lhs).1 == self.term(i, env, rhs).1,
            Atom::Label { name, arg } => {
                let (s, e) = self.term(i, env, arg);
                self.trace.model().labeling().holds(name, s, self.world(i), e)
            }
        }
    }

    fn carrier(&self, i: usize, sort: &str) -> (SortId, usize) {
        let sig = self.trace.model().signature();
        let s = sig.sort_id(sort).unwrap();
        (s, self.trace.model().algebra(self.world(i)).carrier(s).len())
    }

    /// Decides an until-like operator: `all` selects the universal reading
    /// of both conditions, `weak` adds the case in which the first
    /// condition holds forever.
    fn until(&self, i: usize, env: &Env, all: bool, weak: bool, lhs: &dyn Fn(usize, &Env) -> bool, rhs: &dyn Fn(usize, &Env) -> bool) -> bool {
        let holds = |n: usize, f: &dyn Fn(usize, &Env) -> bool, set: &[Env]| {
            if all {
                set.iter().all(|v| f(i + n, v))
            } else {
                set.iter().any(|v| f(i + n, v))
            }
        };
        let mut comp = self.identity(i);
        let mut seen: HashSet<(TracePosition, Vec<Env>)> = HashSet::new();
        let mut n = 0;
        loop {
            let mut set = Self::counterparts(env, &comp);
            set.sort();
            set.dedup();
            if holds(n, rhs, &set) {
                return true;
            }
            if !holds(n, lhs, &set) {
                return false;
            }
            if !seen.insert((self.trace.normalize(i + n), set)) {
                return weak;
            }
            comp = Self::then(&comp, &self.step_pairs(i + n));
            n += 1;
        }
    }

    pub fn pnf(&self, i: usize, env: &Env, f: &Pnf) -> bool {
        match f {
            Pnf::Atom(a) => self.atom(i, env, a),
            Pnf::NegAtom(a) => !self.atom(i, env, a),
            Pnf::Or(a, b) => self.pnf(i, env, a) || self.pnf(i, env, b),
            Pnf::And(a, b) => self.pnf(i, env, a) && self.pnf(i, env, b),
            Pnf::Exists { var, sort, body } | Pnf::Forall { var, sort, body } => {
                let (s, n) = self.carrier(i, sort);
                let mut each = (0..n as u32).map(|e| {
                    let mut inner = env.clone();
                    inner.push((var.clone(), s, Elem(e)));
                    self.pnf(i, &inner, body)
                });
                if matches!(f, Pnf::Exists { .. }) {
                    each.any(|b| b)
                } else {
                    each.all(|b| b)
                }
            }
            Pnf::Next(g) | Pnf::NextAll(g) => {
                let set = Self::counterparts(env, &Self::then(&self.identity(i), &self.step_pairs(i)));
                let mut each = set.iter().map(|v| self.pnf(i + 1, v, g));
                if matches!(f, Pnf::Next(_)) {
                    each.any(|b| b)
                } else {
                    each.all(|b| b)
                }
            }
            Pnf::Until(a, b) | Pnf::UntilAll(a, b) | Pnf::WUntil(a, b) | Pnf::Then(a, b) => {
                let all = matches!(f, Pnf::UntilAll(..) | Pnf::Then(..));
                let weak = matches!(f, Pnf::WUntil(..) | Pnf::Then(..));
                self.until(i, env, all, weak, &|j, v| self.pnf(j, v, a), &|j, v| self.pnf(j, v, b))
            }
        }
    }

    pub fn qltl(&self, i: usize, env: &Env, f: &Formula) -> bool {
        match f {
            Formula::Atom(a) => self.atom(i, env, a),
            Formula::Not(g) => !self.qltl(i, env, g),
            Formula::Or(a, b) => self.qltl(i, env, a) || self.qltl(i, env, b),
            Formula::Exists { var, sort, body } => {
                let (s, n) = self.carrier(i, sort);
                (0..n as u32).any(|e| {
                    let mut inner = env.clone();
                    inner.push((var.clone(), s, Elem(e)));
                    self.qltl(i, &inner, body)
                })
            }
            Formula::Next(g) => {
                let set = Self::counterparts(env, &Self::then(&self.identity(i), &self.step_pairs(i)));
                set.iter().any(|v| self.qltl(i + 1, v, g))
            }
            Formula::Until(a, b) | Formula::WUntil(a, b) => {
                let weak = matches!(f, Formula::WUntil(..));
                self.until(i, env, false, weak, &|j, v| self.qltl(j, v, a), &|j, v| self.qltl(j, v, b))
            }
        }
    }

    /// The counterparts of `env` after `n` steps from position `i`.
    pub fn counterparts_after(&self, i: usize, env: &Env, n: usize) -> Vec<Env> {
        let mut comp = self.identity(i);
        for k in 0..n {
            comp = Self::then(&comp, &self.step_pairs(i + k));
        }
        Self::counterparts(env, &comp)
    }

    /// The oracle's verdict for an assignment of the engine's kind.
    pub fn sat_pnf(&self, i: usize, mu: &qltl::Assignment, f: &Pnf) -> bool {
        self.pnf(i, &env_of(self.trace, mu), f)
    }

    pub fn sat_qltl(&self, i: usize, mu: &qltl::Assignment, f: &Formula) -> bool {
        self.qltl(i, &env_of(self.trace, mu), f)
    }
}

pub fn env_of(trace: &LassoTrace, mu: &qltl::Assignment) -> Env {
    let sig = trace.model().signature();
    mu.context()
        .iter()
        .zip(mu.values())
        .map(|((x, s), &e)| (x.to_string(), sig.sort_id(s).unwrap(), e))
        .collect()
}

/// Path of a file under the crate root.
pub fn crate_path(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

/// Replays every `//@` directive of a model file: `(line, expected,
/// observed)`.
pub fn replay(rel: &str) -> Vec<(usize, bool, bool)> {
    let path = crate_path(rel);
    let (doc, text) = qltl::cli::load_model(&path).expect("model loads");
    qltl::textio::parse_directives(&text)
        .expect("directives parse")
        .iter()
        .map(|d| {
            let (_, v) = qltl::cli::replay_directive(&doc, d)
                .unwrap_or_else(|e| panic!("{rel}:{}: {}", d.line, e.0));
            (d.line, d.expect_sat, v.satisfied)
        })
        .collect()
}

/// A random query: model, position, assignment, formula.
pub struct Query {
    pub doc: qltl::ModelDocument,
    pub pos: usize,
    pub mu: qltl::Assignment,
    pub phi: Formula,
}

/// `per_model` random queries on each of `models` random models.
pub fn queries(seed: u64, models: usize, per_model: usize, cfg: &qltl::gen::GenConfig) -> Vec<Query> {
    use qltl::gen::{derive_seed, Generator, TRACE};
    use rand::Rng;
    let mut out = Vec::new();
    for m in 0..models as u64 {
        let mut g = Generator::new(&cfg.with_seed(derive_seed(seed, m)));
        let doc = g.model();
        let trace = doc.traces[TRACE].clone();
        let sig = doc.model.signature().clone();
        for _ in 0..per_model {
            let pos = g.rng().gen_range(0..=2);
            let w = trace.world_at(trace.normalize(pos));
            let ctx = g.context(doc.model.algebra(w), 1);
            let Some(mu) = g.assignment(&doc.model, w, &ctx) else { continue };
            let depth = g.rng().gen_range(0..=cfg.depth);
            let phi = g.formula(&sig, &ctx, depth);
            out.push(Query { doc: doc.clone(), pos, mu, phi });
        }
    }
    out
}

/// All relations between two algebras that are structure preserving.
pub fn preserving_relations(a: &std::sync::Arc<qltl::Algebra>, b: &std::sync::Arc<qltl::Algebra>) -> Vec<qltl::RelMorphism> {
    let sorts = a.signature().sorts().len();
    let cells: Vec<(usize, Elem, Elem)> = (0..sorts)
        .flat_map(|s| {
            let n = b.carrier(s).len() as u32;
            (0..a.carrier(s).len() as u32).flat_map(move |x| (0..n).map(move |y| (s, Elem(x), Elem(y))))
        })
        .collect();
    assert!(cells.len() <= 16, "too many pairs to enumerate");
    let mut out = Vec::new();
    for mask in 0u32..(1 << cells.len()) {
        let mut rel = vec![BTreeSet::new(); sorts];
        for (k, &(s, x, y)) in cells.iter().enumerate() {
            if mask & (1 << k) != 0 {
                rel[s].insert((x, y));
            }
        }
        let r = qltl::RelMorphism::new(a.clone(), b.clone(), rel).unwrap();
        if r.is_structure_preserving() {
            out.push(r);
        }
    }
    out
}

/// Associativity, both identity laws, agreement with the pair-level
/// definition and closure of preservation, over every triple of preserving
/// relations between the given algebras. Returns `(checks, failures)`.
pub fn compose_laws(algebras: &[std::sync::Arc<qltl::Algebra>]) -> (usize, usize) {
    let mut checks = 0;
    let mut failures = 0;
    let mut check = |ok: bool| {
        checks += 1;
        if !ok {
            failures += 1;
        }
    };
    for a in algebras {
        for b in algebras {
            let ab = preserving_relations(a, b);
            for r in &ab {
                let id_a = qltl::RelMorphism::identity(a);
                let id_b = qltl::RelMorphism::identity(b);
                check(id_a.compose(r).unwrap() == *r);
                check(r.compose(&id_b).unwrap() == *r);
            }
            for c in algebras {
                let bc = preserving_relations(b, c);
                for r1 in &ab {
                    for r2 in &bc {
                        let rc = r1.compose(r2).unwrap();
                        let by_pairs: Pairs = Oracle::then(&r1.relations().to_vec(), &r2.relations().to_vec());
                        check(rc.relations() == by_pairs.as_slice());
                        check(rc.is_structure_preserving());
                    }
                }
                for d in algebras {
                    let cd = preserving_relations(c, d);
                    if ab.len() * bc.len() * cd.len() > 20_000 {
                        continue;
                    }
                    for r1 in &ab {
                        for r2 in &bc {
                            let r12 = r1.compose(r2).unwrap();
                            for r3 in &cd {
                                let left = r12.compose(r3).unwrap();
                                let right = r1.compose(&r2.compose(r3).unwrap()).unwrap();
                                check(left == right);
                            }
                        }
                    }
                }
            }
        }
    }
    (checks, failures)
}

/// Tiny algebras for the enumerated checks: node-only carriers of size 0
/// to 2, and a few graphs.
pub fn small_algebras() -> (Vec<std::sync::Arc<qltl::Algebra>>, Vec<std::sync::Arc<qltl::Algebra>>) {
    use qltl::AlgebraBuilder;
    use std::sync::Arc;
    let nodes = Arc::new(qltl::gen::node_signature());
    let plain = (0..=2)
        .map(|n| {
            let mut b = AlgebraBuilder::new(nodes.clone());
            for i in 0..n {
                b.add_element_in(0, &format!("a{i}")).unwrap();
            }
            Arc::new(b.build().unwrap())
        })
        .collect();
    let graph = Arc::new(qltl::graph_signature());
    let shapes: [(usize, &[(u32, u32)]); 4] = [(1, &[(0, 0)]), (2, &[(0, 1)]), (2, &[(0, 0), (0, 1)]), (2, &[])];
    let graphs = shapes
        .iter()
        .map(|&(n, edges)| {
            let mut b = AlgebraBuilder::new(graph.clone());
            for i in 0..n {
                b.add_element_in(0, &format!("n{i}")).unwrap();
            }
            for (k, _) in edges.iter().enumerate() {
                b.add_element_in(1, &format!("e{k}")).unwrap();
            }
            for (k, &(s, t)) in edges.iter().enumerate() {
                b.define_elems(0, vec![Elem(k as u32)], Elem(s)).unwrap();
                b.define_elems(1, vec![Elem(k as u32)], Elem(t)).unwrap();
            }
            Arc::new(b.build().unwrap())
        })
        .collect();
    (plain, graphs)
}

/// Replays each directive of a fixture through `qltl check`; returns the
/// observed verdicts in order.
pub fn check_via_cli(bin: &str, rel: &str) -> Vec<bool> {
    let path = crate_path(rel);
    let text = std::fs::read_to_string(&path).unwrap();
    qltl::textio::parse_directives(&text)
        .unwrap()
        .iter()
        .map(|d| {
            let assign: Vec<String> = d
                .assign
                .iter()
                .map(|a| match &a.sort {
                    Some(s) => format!("{}:{s}={}", a.var, a.elem),
                    None => format!("{}={}", a.var, a.elem),
                })
                .collect();
            let pos = d.pos.to_string();
            let joined = assign.join(",");
            let mut args = vec!["check", path.to_str().unwrap(), "--trace", &d.trace, "--pos", &pos];
            args.extend(["--assign", &joined, "--formula", &d.formula]);
            if d.pnf {
                args.push("--pnf");
            }
            let o = std::process::Command::new(bin).args(&args).output().unwrap();
            let code = o.status.code();
            assert!(code == Some(0) || code == Some(1), "{rel}:{}: {}", d.line, String::from_utf8_lossy(&o.stderr));
            let sat = code == Some(0);
            assert_eq!(sat, d.expect_sat, "{rel}:{}", d.line);
            sat
        })
        .collect()
}
