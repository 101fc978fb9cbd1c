mod common;

use std::collections::BTreeSet;

use common::{crate_path, replay};
use qltl::cli::load_model;
use qltl::textio::parse_model;
use qltl::{Assignment, Elem, Evaluator, Formula, TracePosition};

const EXAMPLE: &str = "models/running_example.cqm";

#[test]
fn running_example_judgments() {
    let results = replay(EXAMPLE);
    assert_eq!(results.len(), 32);
    let wrong: Vec<_> = results.iter().filter(|(_, e, o)| e != o).collect();
    assert!(wrong.is_empty(), "mismatched lines: {wrong:?}");
}

fn pairs(doc: &qltl::ModelDocument, rel: &str, sort: &str) -> BTreeSet<(String, String)> {
    let m = &doc.model;
    let r = m.relation(m.relation_id(rel).unwrap());
    let s = m.signature().sort_id(sort).unwrap();
    let (src, tgt) = (m.algebra(r.source), m.algebra(r.target));
    r.morphism
        .pairs(s)
        .iter()
        .map(|&(a, b)| (src.elem_name(s, a).to_string(), tgt.elem_name(s, b).to_string()))
        .collect()
}

/// The published relation tables list each pair target first; the model
/// file stores them source first.
#[test]
fn published_tables_flipped() {
    let (doc, _) = load_model(&crate_path(EXAMPLE)).unwrap();
    type Table = (&'static str, &'static str, &'static [(&'static str, &'static str)]);
    let published: [Table; 8] = [
        ("C0", "N", &[("n4", "n0"), ("n3", "n1"), ("n4", "n2")]),
        ("C0", "E", &[("e4", "e0"), ("e3", "e1")]),
        ("C1", "N", &[("n5", "n3"), ("n5", "n4")]),
        ("C1", "E", &[("e5", "e4")]),
        ("C2", "N", &[("n5", "n3"), ("n5", "n4")]),
        ("C2", "E", &[("e5", "e3")]),
        ("C3", "N", &[("n5", "n5")]),
        ("C3", "E", &[("e5", "e5")]),
    ];
    for (rel, sort, table) in published {
        let flipped: BTreeSet<(String, String)> =
            table.iter().map(|(t, s)| (s.to_string(), t.to_string())).collect();
        assert_eq!(pairs(&doc, rel, sort), flipped, "{rel} on {sort}");
    }
}

#[test]
fn source_and_target_tables() {
    let (doc, _) = load_model(&crate_path(EXAMPLE)).unwrap();
    let m = &doc.model;
    let sig = m.signature();
    let (n, e) = (sig.sort_id("N").unwrap(), sig.sort_id("E").unwrap());
    let (s, t) = (sig.function_id("s").unwrap(), sig.function_id("t").unwrap());
    let table = [
        ("e0", "n0", "n1"),
        ("e1", "n1", "n2"),
        ("e2", "n2", "n0"),
        ("e3", "n3", "n4"),
        ("e4", "n4", "n3"),
        ("e5", "n5", "n5"),
    ];
    for (edge, src, tgt) in table {
        let w = m
            .worlds()
            .iter()
            .find(|w| w.algebra.elem(e, edge).is_some())
            .expect("edge somewhere");
        let x = w.algebra.elem(e, edge).unwrap();
        assert_eq!(w.algebra.elem_name(n, w.algebra.apply(s, &[x])), src);
        assert_eq!(w.algebra.elem_name(n, w.algebra.apply(t, &[x])), tgt);
    }
}

const SINGLE_NODE: &str = "
signature Graph { sorts N, E; fn s : E -> N; fn t : E -> N; }
world w { N = {n}; }
relation C : w -> w { }
trace sigma = [] (C);
";

#[test]
fn quantifier_elision() {
    let doc = parse_model(SINGLE_NODE).unwrap();
    let trace = &doc.traces["sigma"];
    let ev = Evaluator::new(trace);
    let p = TracePosition::default();
    let mu = Assignment::empty(trace.world_at(p));
    assert!(ev.sat_qltl(p, &mu, &Formula::next(Formula::tt())).unwrap());
    assert!(!ev
        .sat_qltl(p, &mu, &Formula::exists("x", "N", Formula::next(Formula::tt())))
        .unwrap());
    // with the node bound, the next step has no counterpart for it
    let x = Assignment::from_elems(trace.world_at(p), qltl::Context::from_pairs(&[("x", "N")]).unwrap(), vec![Elem(0)]);
    assert!(!ev.sat_qltl(p, &x, &Formula::next(Formula::tt())).unwrap());
}
