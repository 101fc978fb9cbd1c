//! The `qltl` command line.
//!
//! Exit codes: 0 for sat or all-pass, 1 for unsat or a violation (or a
//! missing witness), 2 for usage and parse errors.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::gen::{self, GenConfig, SuiteConfig, Target};
use crate::logic::{to_pnf, Assignment, Context, Pnf};
use crate::model::ModelDocument;
use crate::semantics::Evaluator;
use crate::textio::{
    formula_to_string, parse_any, parse_assignment, parse_context, parse_directives, parse_model_file,
    pnf_to_string, AssignItem, Directive, Parsed,
};

#[derive(Parser, Debug)]
#[command(name = "qltl", version, about = "Counterpart-based quantified LTL on lasso traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide one judgment on a trace of a model file
    Check(CheckArgs),
    /// Print the positive normal form of a formula
    Pnf(PnfArgs),
    /// Replay the `//@` directives embedded in model files
    Replay {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Randomized equivalence suite
    Difftest(DifftestArgs),
    /// Bounded search for witnesses against the dualities and expansion laws
    Counterexamples(CounterexampleArgs),
    /// Bounded search for a model with node and edge duplication
    Duplication {
        #[arg(long, default_value_t = 200_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub model: PathBuf,
    #[arg(long, default_value = gen::TRACE)]
    pub trace: String,
    #[arg(long)]
    pub formula: String,
    /// `x=e0,y:N=n1`; the sort may be omitted when the element name is
    /// unique in the world
    #[arg(long, default_value = "")]
    pub assign: String,
    /// Evaluate the positive normal form instead
    #[arg(long)]
    pub pnf: bool,
    #[arg(long, default_value_t = 0)]
    pub pos: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct PnfArgs {
    #[arg(long)]
    pub formula: String,
    #[arg(long, default_value = "")]
    pub ctx: String,
    /// Take the signature from this model file instead of the graph one
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DifftestArgs {
    #[arg(long, default_value_t = 500)]
    pub models: usize,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub formulas: usize,
    /// Only partial-function counterpart relations; adds the duality and
    /// expansion-law checks
    #[arg(long)]
    pub functional: bool,
    /// Where to write the first failing model
    #[arg(long, default_value = "difftest-failure.cqm")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 10_000)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the witness files
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Not supported: the laws hold for functional models
    #[arg(long, hide = true)]
    pub functional: bool,
}

#[derive(Debug)]
pub struct CliError(pub String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

/// The outcome of one judgment, as printed by `check --json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub satisfied: bool,
    pub trace: String,
    pub pos: usize,
    pub assignment: String,
    pub formula: String,
    /// `qltl` or `pnf`
    pub mode: String,
    /// First step at which a top-level until succeeds.
    pub witness_step: Option<usize>,
}

impl Verdict {
    pub fn human(&self) -> String {
        let mut s = format!(
            "{} at {}[{}] with {}: {}",
            if self.satisfied { "sat" } else { "unsat" },
            self.trace,
            self.pos,
            self.assignment,
            self.formula
        );
        if let Some(n) = self.witness_step {
            s.push_str(&format!(" (witness step {n})"));
        }
        s
    }
}

/// Builds an assignment in the world at `pos`. An item without a sort
/// takes the sort of the unique carrier containing the element.
pub fn resolve_assignment(doc: &ModelDocument, trace: &str, pos: usize, items: &[AssignItem]) -> Result<Assignment, CliError> {
    let t = doc
        .trace(trace)
        .ok_or_else(|| CliError(format!("no trace named `{trace}`")))?;
    let world = t.world_at(t.normalize(pos));
    let model = &doc.model;
    let sig = model.signature();
    let alg = model.algebra(world);
    let wname = &model.world(world).name;
    let mut mu = Assignment::empty(world);
    for it in items {
        let sort = match &it.sort {
            Some(s) => s.clone(),
            None => {
                let hits: Vec<&str> = sig
                    .sorts()
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| alg.elem(*s, &it.elem).is_some())
                    .map(|(_, n)| n.as_str())
                    .collect();
                match hits.as_slice() {
                    [s] => s.to_string(),
                    [] => return Err(CliError(format!("`{}` is not an element of world `{wname}`", it.elem))),
                    _ => return Err(CliError(format!("`{}` is ambiguous in `{wname}`; write `{}:SORT={}`", it.elem, it.var, it.elem))),
                }
            }
        };
        mu = mu
            .extend(model, &it.var, &sort, &it.elem)
            .map_err(|e| CliError(format!("{e} in world `{wname}`")))?;
    }
    Ok(mu)
}

/// Decides one judgment given in surface syntax.
pub fn check(doc: &ModelDocument, trace: &str, pos: usize, items: &[AssignItem], formula: &str, pnf: bool) -> Result<Verdict, CliError> {
    let mu = resolve_assignment(doc, trace, pos, items)?;
    let t = doc.trace(trace).expect("resolved above");
    let sig = doc.model.signature();
    let parsed = parse_any(formula, sig, mu.context())?;
    let free = match &parsed {
        Parsed::Qltl(f) => f.free_vars(),
        Parsed::Pnf(p) => p.free_vars(),
    };
    let bound = mu.context().vars();
    if free != bound {
        let missing: Vec<_> = free.difference(&bound).cloned().collect();
        let extra: Vec<_> = bound.difference(&free).cloned().collect();
        return Err(CliError(format!(
            "the assignment must bind exactly the free variables (unbound: {missing:?}, unused: {extra:?})"
        )));
    }
    let ev = Evaluator::new(t);
    let p = t.normalize(pos);
    let (satisfied, shown, as_pnf, mode) = match parsed {
        Parsed::Qltl(f) if !pnf => {
            let sat = ev.sat_qltl(p, &mu, &f)?;
            let as_pnf = to_pnf(&f);
            (sat, formula_to_string(&f), as_pnf, "qltl")
        }
        Parsed::Qltl(f) => {
            let q = to_pnf(&f);
            (ev.sat_pnf(p, &mu, &q)?, pnf_to_string(&q), q, "pnf")
        }
        Parsed::Pnf(q) => (ev.sat_pnf(p, &mu, &q)?, pnf_to_string(&q), q, "pnf"),
    };
    let witness_step = match &as_pnf {
        Pnf::Until(..) | Pnf::UntilAll(..) if satisfied => ev.until_witness(p, &mu, &as_pnf)?,
        _ => None,
    };
    Ok(Verdict {
        satisfied,
        trace: trace.to_string(),
        pos,
        assignment: mu.describe(&doc.model),
        formula: shown,
        mode: mode.to_string(),
        witness_step,
    })
}

/// Replays a directive; `Ok(true)` when the verdict matches.
pub fn replay_directive(doc: &ModelDocument, d: &Directive) -> Result<(bool, Verdict), CliError> {
    let v = check(doc, &d.trace, d.pos, &d.assign, &d.formula, d.pnf)?;
    Ok((v.satisfied == d.expect_sat, v))
}

pub fn load_model(path: &Path) -> Result<(ModelDocument, String), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    let doc = parse_model_file(&text, &path.display().to_string())?;
    Ok((doc, text))
}

fn cmd_check(a: &CheckArgs) -> Result<i32, CliError> {
    let (doc, _) = load_model(&a.model)?;
    let items = parse_assignment(&a.assign)?;
    let v = check(&doc, &a.trace, a.pos, &items, &a.formula, a.pnf)?;
    if a.json {
        println!("{}", serde_json::to_string(&v)?);
    } else {
        println!("{}", v.human());
    }
    Ok(if v.satisfied { 0 } else { 1 })
}

fn cmd_pnf(a: &PnfArgs) -> Result<i32, CliError> {
    let sig = match &a.model {
        Some(p) => load_model(p)?.0.model.signature().clone(),
        None => Arc::new(crate::algebra::graph_signature()),
    };
    let ctx: Context = parse_context(&a.ctx)?;
    let out = match parse_any(&a.formula, &sig, &ctx)? {
        Parsed::Qltl(f) => to_pnf(&f),
        Parsed::Pnf(p) => p,
    };
    println!("{}", pnf_to_string(&out));
    Ok(0)
}

fn cmd_replay(files: &[PathBuf]) -> Result<i32, CliError> {
    let mut failed = 0;
    let mut total = 0;
    for f in files {
        let (doc, text) = load_model(f)?;
        for d in parse_directives(&text)? {
            total += 1;
            let (ok, v) = replay_directive(&doc, &d)
                .map_err(|e| CliError(format!("{}:{}: {}", f.display(), d.line, e.0)))?;
            if !ok {
                failed += 1;
                println!("FAIL {}:{}: expected {}, got {}", f.display(), d.line, if d.expect_sat { "sat" } else { "unsat" }, v.human());
            }
        }
    }
    println!("{total} directives, {failed} failed");
    Ok(if failed == 0 { 0 } else { 1 })
}

fn cmd_difftest(a: &DifftestArgs) -> Result<i32, CliError> {
    let cfg = SuiteConfig {
        models: a.models,
        formulas_per_model: a.formulas,
        gen: GenConfig {
            seed: a.seed,
            depth: a.depth,
            functional_only: a.functional,
            ..GenConfig::default()
        },
        laws: a.functional,
        ..SuiteConfig::default()
    };
    cfg.gen.validate().map_err(CliError)?;
    let report = gen::equivalence_suite(&cfg);
    print!("{}", report.summary());
    match &report.first_failure {
        None => Ok(0),
        Some(f) => {
            std::fs::write(&a.out, f.to_cqm())?;
            println!("first failure ({}) written to {}", f.check, a.out.display());
            Ok(1)
        }
    }
}

fn cmd_counterexamples(a: &CounterexampleArgs) -> Result<i32, CliError> {
    if a.functional {
        return Err(CliError(
            "--functional is not accepted: every target law holds on functional models".into(),
        ));
    }
    let bounds = GenConfig {
        seed: a.seed,
        ..gen::search_bounds()
    };
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
    }
    let mut missing = 0;
    println!("{:<22} {:>10}  {:<7} {:<7}", "target", "candidate", "lhs", "rhs");
    for t in Target::ALL {
        match gen::search_counterexample(t, &bounds, a.budget) {
            Some(w) => {
                println!("{:<22} {:>10}  {:<7} {:<7}", t.name(), w.candidate, w.values.lhs, w.values.rhs);
                if let Some(dir) = &a.out {
                    std::fs::write(dir.join(format!("{}.cqm", t.name())), w.to_cqm())?;
                }
            }
            None => {
                missing += 1;
                println!("{:<22} {:>10}", t.name(), "not found");
            }
        }
    }
    println!("{}/{} targets witnessed", Target::ALL.len() - missing, Target::ALL.len());
    Ok(if missing == 0 { 0 } else { 1 })
}

fn cmd_duplication(budget: u64, seed: u64, out: Option<&Path>) -> Result<i32, CliError> {
    let bounds = GenConfig {
        seed,
        ..gen::duplication_bounds()
    };
    match gen::search_duplication_model(&bounds, budget) {
        Some((i, doc)) => {
            let text = gen::duplication_cqm(&doc);
            match out {
                Some(p) => {
                    std::fs::write(p, &text)?;
                    println!("candidate {i} written to {}", p.display());
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
        None => {
            println!("no model found within {budget} candidates");
            Ok(1)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Pnf(a) => cmd_pnf(a),
        Command::Replay { files } => cmd_replay(files),
        Command::Difftest(a) => cmd_difftest(a),
        Command::Counterexamples(a) => cmd_counterexamples(a),
        Command::Duplication { budget, seed, out } => cmd_duplication(*budget, *seed, out.as_deref()),
    }
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.0);
            2
        }
    }
}
