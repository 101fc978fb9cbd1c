mod common;

use common::{queries, Oracle};
use qltl::gen::{GenConfig, TRACE};
use qltl::logic::to_pnf;
use qltl::textio::formula_to_string;
use qltl::{EvalConfig, Evaluator};

fn no_memo() -> EvalConfig {
    EvalConfig {
        memoize: false,
        ..EvalConfig::default()
    }
}

#[test]
fn engine_matches_oracle() {
    let cfg = GenConfig::default();
    for q in queries(11, 150, 10, &cfg) {
        let trace = &q.doc.traces[TRACE];
        let p = trace.normalize(q.pos);
        let ev = Evaluator::new(trace);
        let oracle = Oracle::new(trace);
        let got = ev.sat_qltl(p, &q.mu, &q.phi).unwrap();
        assert_eq!(got, oracle.sat_qltl(q.pos, &q.mu, &q.phi), "{}", formula_to_string(&q.phi));
        let pnf = to_pnf(&q.phi);
        assert_eq!(got, oracle.sat_pnf(q.pos, &q.mu, &pnf), "pnf of {}", formula_to_string(&q.phi));
    }
}

#[test]
fn memo_and_unrolling_are_transparent() {
    let cfg = GenConfig::default();
    for q in queries(12, 100, 10, &cfg) {
        let trace = &q.doc.traces[TRACE];
        let p = trace.normalize(q.pos);
        let base = Evaluator::new(trace).sat_qltl(p, &q.mu, &q.phi).unwrap();
        let plain = Evaluator::with_config(trace, no_memo()).sat_qltl(p, &q.mu, &q.phi).unwrap();
        assert_eq!(base, plain);
        let unrolled = trace.unrolled();
        let u = Evaluator::new(&unrolled)
            .sat_qltl(unrolled.normalize(q.pos), &q.mu, &q.phi)
            .unwrap();
        assert_eq!(base, u);
    }
}

#[test]
fn functional_models_agree_with_oracle() {
    let cfg = GenConfig {
        functional_only: true,
        ..GenConfig::default()
    };
    for q in queries(13, 100, 10, &cfg) {
        assert!(q.doc.model.is_functional());
        let trace = &q.doc.traces[TRACE];
        let got = Evaluator::new(trace)
            .sat_pnf(trace.normalize(q.pos), &q.mu, &to_pnf(&q.phi))
            .unwrap();
        assert_eq!(got, Oracle::new(trace).sat_qltl(q.pos, &q.mu, &q.phi));
    }
}

#[test]
fn witness_steps_reverify() {
    use qltl::Pnf;
    let cfg = GenConfig::default();
    let mut checked = 0;
    for q in queries(14, 200, 10, &cfg) {
        let pnf = to_pnf(&q.phi);
        let (a, b, all) = match &pnf {
            Pnf::Until(a, b) => (a, b, false),
            Pnf::UntilAll(a, b) => (a, b, true),
            _ => continue,
        };
        let trace = &q.doc.traces[TRACE];
        let ev = Evaluator::new(trace);
        let p = trace.normalize(q.pos);
        let sat = ev.sat_pnf(p, &q.mu, &pnf).unwrap();
        let step = ev.until_witness(p, &q.mu, &pnf).unwrap();
        assert_eq!(sat, step.is_some());
        let Some(n) = step else { continue };
        let o = Oracle::new(trace);
        let env = common::env_of(trace, &q.mu);
        let holds = |k: usize, f: &Pnf| {
            let set = o.counterparts_after(q.pos, &env, k);
            if all {
                set.iter().all(|v| o.pnf(q.pos + k, v, f))
            } else {
                set.iter().any(|v| o.pnf(q.pos + k, v, f))
            }
        };
        assert!((0..n).all(|k| holds(k, a)));
        assert!(holds(n, b));
        checked += 1;
    }
    assert!(checked > 20, "only {checked} witnesses");
}
