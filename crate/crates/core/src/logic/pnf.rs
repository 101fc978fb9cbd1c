use super::{Formula, Pnf};

/// Translates a QLTL formula into positive normal form by pushing negation
/// down to the atoms. The negated temporal operators become their duals:
/// `¬O` becomes `A`, `¬(a U b)` becomes `¬b T (¬a ∧ ¬b)`, and `¬(a W b)`
/// becomes `¬b F (¬a ∧ ¬b)`.
pub fn to_pnf(phi: &Formula) -> Pnf {
    pos(phi)
}

fn pos(phi: &Formula) -> Pnf {
    match phi {
        Formula::Atom(a) => Pnf::Atom(a.clone()),
        Formula::Not(f) => neg(f),
        Formula::Or(a, b) => Pnf::or(pos(a), pos(b)),
        Formula::Exists { var, sort, body } => Pnf::exists(var, sort, pos(body)),
        Formula::Next(f) => Pnf::next(pos(f)),
        Formula::Until(a, b) => Pnf::until(pos(a), pos(b)),
        Formula::WUntil(a, b) => Pnf::wuntil(pos(a), pos(b)),
    }
}

/// The translation of `¬phi`.
fn neg(phi: &Formula) -> Pnf {
    match phi {
        Formula::Atom(a) => Pnf::NegAtom(a.clone()),
        Formula::Not(f) => pos(f),
        Formula::Or(a, b) => Pnf::and(neg(a), neg(b)),
        Formula::Exists { var, sort, body } => Pnf::forall(var, sort, neg(body)),
        Formula::Next(f) => Pnf::next_all(neg(f)),
        Formula::Until(a, b) => Pnf::then(neg(b), Pnf::and(neg(a), neg(b))),
        Formula::WUntil(a, b) => Pnf::until_all(neg(b), Pnf::and(neg(a), neg(b))),
    }
}

/// Embeds a negation-free QLTL formula into PNF unchanged. Returns `None`
/// when the formula contains a negation.
pub fn embed_positive(phi: &Formula) -> Option<Pnf> {
    phi.is_negation_free().then(|| pos(phi))
}
