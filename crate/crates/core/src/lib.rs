//! Counterpart-based quantified linear temporal logic (QLTL) over
//! multi-sorted algebras.
//!
//! Worlds are finite algebras, transitions are structure-preserving
//! relations between them, and formulae are evaluated on ultimately-periodic
//! (lasso) traces. Both the full-negation logic and its positive normal form
//! are supported, together with the translation between them.

pub mod algebra;
pub mod cli;
pub mod gen;
pub mod logic;
pub mod model;
pub mod semantics;
pub mod textio;

pub use algebra::{graph_signature, Algebra, AlgebraBuilder, Elem, RelMorphism, Signature};
pub use logic::{Assignment, Atom, Context, Formula, Pnf, Term};
pub use model::{CounterpartModel, LassoTrace, ModelDocument, TracePosition, WorldId};
pub use semantics::{EvalConfig, EvalError, Evaluator, UntilFlavor};
