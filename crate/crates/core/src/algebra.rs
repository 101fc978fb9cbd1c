//! Multi-sorted signatures, finite algebras over them, and relational
//! morphisms between algebras.
//!
//! Elements are interned per sort: an [`Elem`] is an index into the carrier
//! of a given sort of a given algebra, and the carrier keeps the identifier
//! string it was declared with. Two elements of one carrier are equal iff
//! their identifiers are equal.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub type SortId = usize;
pub type FnId = usize;

/// An element of a carrier, as an index into that carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(pub u32);

impl Elem {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("duplicate sort `{0}`")]
    DuplicateSort(String),
    #[error("duplicate function symbol `{0}`")]
    DuplicateFunction(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown function symbol `{0}`")]
    UnknownFunction(String),
    #[error("element `{name}` declared twice in sort {sort}")]
    DuplicateElement { sort: String, name: String },
    #[error("unknown element `{name}` of sort {sort}")]
    UnknownElement { sort: String, name: String },
    #[error("element index {index} out of range for sort {sort}")]
    ElementOutOfRange { sort: String, index: usize },
    #[error("function `{function}` expects {expected} arguments, got {found}")]
    ArityMismatch {
        function: String,
        expected: usize,
        found: usize,
    },
    #[error("function `{function}` defined twice on ({})", args.join(", "))]
    Redefined { function: String, args: Vec<String> },
    #[error("function `{function}` is not defined on ({})", args.join(", "))]
    NotTotal { function: String, args: Vec<String> },
    #[error("algebras are over different signatures")]
    SignatureMismatch,
    #[error("cannot compose: target of the first relation is not the source of the second")]
    CompositionMismatch,
}

pub type Result<T, E = AlgebraError> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSymbol {
    pub name: String,
    pub args: Vec<SortId>,
    pub result: SortId,
}

/// A finite multi-sorted signature: ordered sorts and typed function symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    name: String,
    sorts: Vec<String>,
    functions: Vec<FunctionSymbol>,
}

impl Signature {
    pub fn new(name: impl Into<String>) -> Self {
        Signature {
            name: name.into(),
            sorts: Vec::new(),
            functions: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_sort(&mut self, name: &str) -> Result<SortId> {
        if self.sort_id(name).is_some() {
            return Err(AlgebraError::DuplicateSort(name.to_string()));
        }
        self.sorts.push(name.to_string());
        Ok(self.sorts.len() - 1)
    }

    pub fn add_function(&mut self, name: &str, args: &[&str], result: &str) -> Result<FnId> {
        if self.function_id(name).is_some() {
            return Err(AlgebraError::DuplicateFunction(name.to_string()));
        }
        let args = args
            .iter()
            .map(|a| self.require_sort(a))
            .collect::<Result<Vec<_>>>()?;
        let result = self.require_sort(result)?;
        self.functions.push(FunctionSymbol {
            name: name.to_string(),
            args,
            result,
        });
        Ok(self.functions.len() - 1)
    }

    /// Re-checks the uniqueness and well-formedness invariants.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.sorts.iter().enumerate() {
            if self.sorts[..i].contains(s) {
                return Err(AlgebraError::DuplicateSort(s.clone()));
            }
        }
        for (i, f) in self.functions.iter().enumerate() {
            if self.functions[..i].iter().any(|g| g.name == f.name) {
                return Err(AlgebraError::DuplicateFunction(f.name.clone()));
            }
            for &s in f.args.iter().chain(std::iter::once(&f.result)) {
                if s >= self.sorts.len() {
                    return Err(AlgebraError::UnknownSort(format!("#{s}")));
                }
            }
        }
        Ok(())
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    pub fn functions(&self) -> &[FunctionSymbol] {
        &self.functions
    }

    pub fn sort_id(&self, name: &str) -> Option<SortId> {
        self.sorts.iter().position(|s| s == name)
    }

    pub fn require_sort(&self, name: &str) -> Result<SortId> {
        self.sort_id(name)
            .ok_or_else(|| AlgebraError::UnknownSort(name.to_string()))
    }

    pub fn sort_name(&self, id: SortId) -> &str {
        &self.sorts[id]
    }

    pub fn function_id(&self, name: &str) -> Option<FnId> {
        self.functions.iter().position(|f| f.name == name)
    }

    pub fn function(&self, id: FnId) -> &FunctionSymbol {
        &self.functions[id]
    }
}

/// The signature of directed graphs: nodes `N`, edges `E`, and source and
/// target maps `s, t : E -> N`.
pub fn graph_signature() -> Signature {
    let mut sig = Signature::new("Graph");
    sig.add_sort("N").expect("fresh sort");
    sig.add_sort("E").expect("fresh sort");
    sig.add_function("s", &["E"], "N").expect("fresh symbol");
    sig.add_function("t", &["E"], "N").expect("fresh symbol");
    sig
}

/// A finite ordered set of element identifiers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Carrier {
    names: Vec<String>,
    index: HashMap<String, Elem>,
}

impl Carrier {
    fn insert(&mut self, name: &str) -> Option<Elem> {
        if self.index.contains_key(name) {
            return None;
        }
        let e = Elem(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), e);
        Some(e)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<Elem> {
        self.index.get(name).copied()
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.names.len() as u32).map(Elem)
    }
}

/// Calls `f` on every tuple of the product of `[0, sizes[i])`, in
/// lexicographic order (last coordinate fastest).
pub(crate) fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[Elem])) {
    if sizes.contains(&0) {
        return;
    }
    let mut cur = vec![Elem(0); sizes.len()];
    loop {
        f(&cur);
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            cur[i].0 += 1;
            if cur[i].index() < sizes[i] {
                break;
            }
            cur[i] = Elem(0);
        }
    }
}

/// A finite algebra: one carrier per sort and a total table per function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    signature: Arc<Signature>,
    carriers: Vec<Carrier>,
    // Per function, results indexed by the mixed-radix encoding of the arguments.
    tables: Vec<Vec<Elem>>,
}

impl Algebra {
    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn carrier(&self, sort: SortId) -> &Carrier {
        &self.carriers[sort]
    }

    pub fn elem(&self, sort: SortId, name: &str) -> Option<Elem> {
        self.carriers[sort].get(name)
    }

    pub fn elem_name(&self, sort: SortId, e: Elem) -> &str {
        self.carriers[sort].name(e)
    }

    /// Total number of elements across all sorts.
    pub fn size(&self) -> usize {
        self.carriers.iter().map(Carrier::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    fn table_index(&self, f: FnId, args: &[Elem]) -> usize {
        let sym = self.signature.function(f);
        sym.args
            .iter()
            .zip(args)
            .fold(0, |acc, (&s, a)| acc * self.carriers[s].len() + a.index())
    }

    /// Applies the interpretation of `f`. Arguments must lie in the carriers
    /// of the symbol's argument sorts.
    pub fn apply(&self, f: FnId, args: &[Elem]) -> Elem {
        self.tables[f][self.table_index(f, args)]
    }

    pub fn arg_sizes(&self, f: FnId) -> Vec<usize> {
        self.signature
            .function(f)
            .args
            .iter()
            .map(|&s| self.carriers[s].len())
            .collect()
    }
}

/// Incremental constructor for [`Algebra`]; `build` checks totality.
#[derive(Clone, Debug)]
pub struct AlgebraBuilder {
    signature: Arc<Signature>,
    carriers: Vec<Carrier>,
    defs: Vec<Vec<(Vec<Elem>, Elem)>>,
}

impl AlgebraBuilder {
    pub fn new(signature: Arc<Signature>) -> Self {
        let nsorts = signature.sorts().len();
        let nfns = signature.functions().len();
        AlgebraBuilder {
            signature,
            carriers: vec![Carrier::default(); nsorts],
            defs: vec![Vec::new(); nfns],
        }
    }

    pub fn add_element(&mut self, sort: &str, name: &str) -> Result<Elem> {
        let s = self.signature.require_sort(sort)?;
        self.add_element_in(s, name)
    }

    pub fn add_element_in(&mut self, sort: SortId, name: &str) -> Result<Elem> {
        self.carriers[sort]
            .insert(name)
            .ok_or_else(|| AlgebraError::DuplicateElement {
                sort: self.signature.sort_name(sort).to_string(),
                name: name.to_string(),
            })
    }

    pub fn elem(&self, sort: SortId, name: &str) -> Result<Elem> {
        self.carriers[sort]
            .get(name)
            .ok_or_else(|| AlgebraError::UnknownElement {
                sort: self.signature.sort_name(sort).to_string(),
                name: name.to_string(),
            })
    }

    pub fn carrier_len(&self, sort: SortId) -> usize {
        self.carriers[sort].len()
    }

    /// Defines `function(args) = result` by element identifiers.
    pub fn define(&mut self, function: &str, args: &[&str], result: &str) -> Result<()> {
        let f = self
            .signature
            .function_id(function)
            .ok_or_else(|| AlgebraError::UnknownFunction(function.to_string()))?;
        let sym = self.signature.function(f).clone();
        if sym.args.len() != args.len() {
            return Err(AlgebraError::ArityMismatch {
                function: function.to_string(),
                expected: sym.args.len(),
                found: args.len(),
            });
        }
        let args = sym
            .args
            .iter()
            .zip(args)
            .map(|(&s, a)| self.elem(s, a))
            .collect::<Result<Vec<_>>>()?;
        let result = self.elem(sym.result, result)?;
        self.define_elems(f, args, result)
    }

    pub fn define_elems(&mut self, f: FnId, args: Vec<Elem>, result: Elem) -> Result<()> {
        if self.defs[f].iter().any(|(a, _)| *a == args) {
            let sym = self.signature.function(f);
            return Err(AlgebraError::Redefined {
                function: sym.name.clone(),
                args: self.arg_names(f, &args),
            });
        }
        self.defs[f].push((args, result));
        Ok(())
    }

    fn arg_names(&self, f: FnId, args: &[Elem]) -> Vec<String> {
        let sym = self.signature.function(f);
        sym.args
            .iter()
            .zip(args)
            .map(|(&s, &a)| self.carriers[s].name(a).to_string())
            .collect()
    }

    pub fn build(self) -> Result<Algebra> {
        let mut tables = Vec::with_capacity(self.defs.len());
        for (f, defs) in self.defs.iter().enumerate() {
            let sym = self.signature.function(f);
            let sizes: Vec<usize> = sym.args.iter().map(|&s| self.carriers[s].len()).collect();
            let total: usize = sizes.iter().product();
            let mut table: Vec<Option<Elem>> = vec![None; total];
            for (args, result) in defs {
                let idx = sym
                    .args
                    .iter()
                    .zip(args)
                    .fold(0, |acc, (&s, a)| acc * self.carriers[s].len() + a.index());
                table[idx] = Some(*result);
            }
            let mut missing = None;
            let mut i = 0;
            for_each_tuple(&sizes, |t| {
                if missing.is_none() && table[i].is_none() {
                    missing = Some(t.to_vec());
                }
                i += 1;
            });
            if let Some(t) = missing {
                return Err(AlgebraError::NotTotal {
                    function: sym.name.clone(),
                    args: self.arg_names(f, &t),
                });
            }
            tables.push(table.into_iter().map(|e| e.expect("total")).collect());
        }
        Ok(Algebra {
            signature: self.signature,
            carriers: self.carriers,
            tables,
        })
    }
}

/// A sort-indexed family of relations between the carriers of two algebras.
///
/// Construction only checks that pairs lie in the carriers; structure
/// preservation is decided by [`RelMorphism::is_structure_preserving`].
#[derive(Clone, PartialEq, Eq)]
pub struct RelMorphism {
    source: Arc<Algebra>,
    target: Arc<Algebra>,
    rel: Vec<BTreeSet<(Elem, Elem)>>,
}

/// A witness that a relation does not preserve some function symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreservationViolation {
    pub function: String,
    pub source_args: Vec<String>,
    pub target_args: Vec<String>,
}

impl fmt::Display for PreservationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "arguments ({}) are related to ({}) but their images under `{}` are not",
            self.source_args.join(", "),
            self.target_args.join(", "),
            self.function
        )
    }
}

fn same_algebra(a: &Arc<Algebra>, b: &Arc<Algebra>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn same_signature(a: &Algebra, b: &Algebra) -> bool {
    Arc::ptr_eq(&a.signature, &b.signature) || a.signature == b.signature
}

impl RelMorphism {
    pub fn new(
        source: Arc<Algebra>,
        target: Arc<Algebra>,
        rel: Vec<BTreeSet<(Elem, Elem)>>,
    ) -> Result<Self> {
        if !same_signature(&source, &target) {
            return Err(AlgebraError::SignatureMismatch);
        }
        let sig = source.signature().clone();
        if rel.len() != sig.sorts().len() {
            return Err(AlgebraError::SignatureMismatch);
        }
        for (s, pairs) in rel.iter().enumerate() {
            for &(a, b) in pairs {
                for (alg, e) in [(&source, a), (&target, b)] {
                    if e.index() >= alg.carrier(s).len() {
                        return Err(AlgebraError::ElementOutOfRange {
                            sort: sig.sort_name(s).to_string(),
                            index: e.index(),
                        });
                    }
                }
            }
        }
        Ok(RelMorphism {
            source,
            target,
            rel,
        })
    }

    /// Builds a relation from `(sort, [(source element, target element)])`
    /// entries given by identifier.
    pub fn from_pairs(
        source: Arc<Algebra>,
        target: Arc<Algebra>,
        pairs: &[(&str, &[(&str, &str)])],
    ) -> Result<Self> {
        let sig = source.signature().clone();
        let mut rel = vec![BTreeSet::new(); sig.sorts().len()];
        for (sort, ps) in pairs {
            let s = sig.require_sort(sort)?;
            for (a, b) in ps.iter() {
                let ea = source.elem(s, a).ok_or_else(|| AlgebraError::UnknownElement {
                    sort: sort.to_string(),
                    name: a.to_string(),
                })?;
                let eb = target.elem(s, b).ok_or_else(|| AlgebraError::UnknownElement {
                    sort: sort.to_string(),
                    name: b.to_string(),
                })?;
                rel[s].insert((ea, eb));
            }
        }
        RelMorphism::new(source, target, rel)
    }

    pub fn empty(source: Arc<Algebra>, target: Arc<Algebra>) -> Result<Self> {
        let n = source.signature().sorts().len();
        RelMorphism::new(source, target, vec![BTreeSet::new(); n])
    }

    pub fn identity(a: &Arc<Algebra>) -> Self {
        let rel = (0..a.signature().sorts().len())
            .map(|s| a.carrier(s).elems().map(|e| (e, e)).collect())
            .collect();
        RelMorphism {
            source: a.clone(),
            target: a.clone(),
            rel,
        }
    }

    pub fn source(&self) -> &Arc<Algebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Algebra> {
        &self.target
    }

    pub fn pairs(&self, sort: SortId) -> &BTreeSet<(Elem, Elem)> {
        &self.rel[sort]
    }

    pub fn relations(&self) -> &[BTreeSet<(Elem, Elem)>] {
        &self.rel
    }

    pub fn contains(&self, sort: SortId, a: Elem, b: Elem) -> bool {
        self.rel[sort].contains(&(a, b))
    }

    pub fn is_empty(&self) -> bool {
        self.rel.iter().all(BTreeSet::is_empty)
    }

    /// The counterparts of `a` in the target carrier of `sort`.
    pub fn images(&self, sort: SortId, a: Elem) -> impl Iterator<Item = Elem> + '_ {
        self.rel[sort]
            .range((a, Elem(0))..=(a, Elem(u32::MAX)))
            .map(|&(_, b)| b)
    }

    /// Diagrammatic composition: `self` first, then `next`.
    pub fn compose(&self, next: &RelMorphism) -> Result<RelMorphism> {
        if !same_algebra(&self.target, &next.source) {
            return Err(AlgebraError::CompositionMismatch);
        }
        let rel = self
            .rel
            .iter()
            .enumerate()
            .map(|(s, pairs)| {
                pairs
                    .iter()
                    .flat_map(|&(a, b)| next.images(s, b).map(move |c| (a, c)))
                    .collect()
            })
            .collect();
        Ok(RelMorphism {
            source: self.source.clone(),
            target: next.target.clone(),
            rel,
        })
    }

    /// First function symbol whose preservation condition fails, found by
    /// enumerating all tuples of related argument pairs.
    pub fn preservation_violation(&self) -> Option<PreservationViolation> {
        let sig = self.source.signature().clone();
        for (f, sym) in sig.functions().iter().enumerate() {
            let lists: Vec<Vec<(Elem, Elem)>> = sym
                .args
                .iter()
                .map(|&s| self.rel[s].iter().copied().collect())
                .collect();
            let sizes: Vec<usize> = lists.iter().map(Vec::len).collect();
            let mut found = None;
            let mut check = |pick: &[Elem]| {
                if found.is_some() {
                    return;
                }
                let (src, tgt): (Vec<Elem>, Vec<Elem>) = pick
                    .iter()
                    .enumerate()
                    .map(|(i, p)| lists[i][p.index()])
                    .unzip();
                let fa = self.source.apply(f, &src);
                let fb = self.target.apply(f, &tgt);
                if !self.rel[sym.result].contains(&(fa, fb)) {
                    found = Some((src, tgt));
                }
            };
            if sym.args.is_empty() {
                check(&[]);
            } else {
                for_each_tuple(&sizes, &mut check);
            }
            if let Some((src, tgt)) = found {
                let names = |alg: &Algebra, es: &[Elem]| {
                    sym.args
                        .iter()
                        .zip(es)
                        .map(|(&s, &e)| alg.elem_name(s, e).to_string())
                        .collect()
                };
                return Some(PreservationViolation {
                    function: sym.name.clone(),
                    source_args: names(&self.source, &src),
                    target_args: names(&self.target, &tgt),
                });
            }
        }
        None
    }

    pub fn is_structure_preserving(&self) -> bool {
        self.preservation_violation().is_none()
    }

    /// Every source element has at most one counterpart, in every sort.
    pub fn is_functional(&self) -> bool {
        self.rel
            .iter()
            .all(|pairs| pairs.iter().zip(pairs.iter().skip(1)).all(|(p, q)| p.0 != q.0))
    }

    /// Makes the relation structure-preserving by first adding the pairs
    /// that every morphism must contain (images of constants, closed under
    /// the operations) and then dropping related argument pairs of violating
    /// tuples. For signatures without constants the result is a subset of
    /// `self`.
    pub fn restrict_to_preserving(mut self) -> RelMorphism {
        let sig = self.source.signature().clone();
        let required = self.required_pairs();
        for (s, req) in required.iter().enumerate() {
            self.rel[s].extend(req.iter().copied());
        }
        loop {
            let mut removed = false;
            for (f, sym) in sig.functions().iter().enumerate() {
                if sym.args.is_empty() {
                    continue;
                }
                let lists: Vec<Vec<(Elem, Elem)>> = sym
                    .args
                    .iter()
                    .map(|&s| self.rel[s].iter().copied().collect())
                    .collect();
                let sizes: Vec<usize> = lists.iter().map(Vec::len).collect();
                let mut bad: Option<(SortId, (Elem, Elem))> = None;
                let mut check = |pick: &[Elem]| {
                    if bad.is_some() {
                        return;
                    }
                    let pairs: Vec<(Elem, Elem)> = pick
                        .iter()
                        .enumerate()
                        .map(|(i, p)| lists[i][p.index()])
                        .collect();
                    let (src, tgt): (Vec<Elem>, Vec<Elem>) = pairs.iter().copied().unzip();
                    let fa = self.source.apply(f, &src);
                    let fb = self.target.apply(f, &tgt);
                    if !self.rel[sym.result].contains(&(fa, fb)) {
                        bad = sym
                            .args
                            .iter()
                            .zip(&pairs)
                            .find(|(&s, p)| !required[s].contains(p))
                            .map(|(&s, &p)| (s, p));
                    }
                };
                for_each_tuple(&sizes, &mut check);
                if let Some((s, pair)) = bad {
                    self.rel[s].remove(&pair);
                    removed = true;
                }
            }
            if !removed {
                return self;
            }
        }
    }

    /// Least preserving family: constant images closed under the operations.
    fn required_pairs(&self) -> Vec<BTreeSet<(Elem, Elem)>> {
        let sig = self.source.signature().clone();
        let mut req: Vec<BTreeSet<(Elem, Elem)>> = vec![BTreeSet::new(); sig.sorts().len()];
        loop {
            let mut grew = false;
            for (f, sym) in sig.functions().iter().enumerate() {
                let lists: Vec<Vec<(Elem, Elem)>> = sym
                    .args
                    .iter()
                    .map(|&s| req[s].iter().copied().collect())
                    .collect();
                let sizes: Vec<usize> = lists.iter().map(Vec::len).collect();
                let mut new = Vec::new();
                for_each_tuple(&sizes, |pick| {
                    let (src, tgt): (Vec<Elem>, Vec<Elem>) = pick
                        .iter()
                        .enumerate()
                        .map(|(i, p)| lists[i][p.index()])
                        .unzip();
                    new.push((self.source.apply(f, &src), self.target.apply(f, &tgt)));
                });
                for p in new {
                    grew |= req[sym.result].insert(p);
                }
            }
            if !grew {
                return req;
            }
        }
    }
}

impl fmt::Debug for RelMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = self.source.signature();
        let mut m = f.debug_map();
        for (s, pairs) in self.rel.iter().enumerate() {
            let names: Vec<String> = pairs
                .iter()
                .map(|&(a, b)| {
                    format!(
                        "{}->{}",
                        self.source.elem_name(s, a),
                        self.target.elem_name(s, b)
                    )
                })
                .collect();
            m.entry(&sig.sort_name(s), &names);
        }
        m.finish()
    }
}

pub fn identity_morphism(a: &Arc<Algebra>) -> RelMorphism {
    RelMorphism::identity(a)
}

pub fn compose(r1: &RelMorphism, r2: &RelMorphism) -> Result<RelMorphism> {
    r1.compose(r2)
}
