//! Running an external SMT solver and certifying its answers.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use super::encode::{entailment_formula, EntailmentQuery, FoError};
use super::poly::{poly_from_sexp, root};
use super::sexp::{parse_all, Sexp};
use super::smtlib::{emit_query, Dialect, Query};
use super::{Fo, FoTerm};
use crate::num::{fmt_rational, int, one, parse_rational, Rational};
use crate::syntax::{CmpOp, DomainDecl, Expr, Quantified, Quantifier};

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub path: String,
    pub timeout: Duration,
    pub seed: Option<u64>,
    pub dialect: Dialect,
    /// Every query and raw answer is saved here when set.
    pub debug_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        let path = std::env::var("RWP_SOLVER").unwrap_or_else(|_| "z3".to_string());
        SolverConfig::with_path(path)
    }
}

impl SolverConfig {
    pub fn with_path(path: impl Into<String>) -> SolverConfig {
        let path = path.into();
        let base = std::path::Path::new(&path).file_name().and_then(|s| s.to_str()).unwrap_or("").to_string();
        let dialect = if base.starts_with("z3") {
            Dialect::Z3
        } else if base.starts_with("cvc5") {
            Dialect::Cvc5
        } else {
            Dialect::Generic
        };
        SolverConfig { path, timeout: Duration::from_secs(180), seed: None, dialect, debug_dir: None }
    }

    fn args(&self) -> Vec<String> {
        match self.dialect {
            Dialect::Z3 => vec!["-in".into(), "-smt2".into()],
            Dialect::Cvc5 => vec!["--lang".into(), "smt2".into(), "--incremental".into()],
            Dialect::Generic => vec![],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("cannot run solver '{path}': {source}")]
    Spawn { path: String, source: std::io::Error },
    #[error("solver error: {0}")]
    Failed(String),
    #[error(transparent)]
    Encoding(#[from] FoError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Solver values for the declared constants.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub values: BTreeMap<String, Rational>,
    /// Constants whose value is a rational approximation of an algebraic number.
    pub approx: BTreeSet<String>,
    /// Whether the model was checked exactly against the original question.
    pub certified: bool,
}

impl Model {
    pub fn restrict(&self, names: &[String]) -> BTreeMap<String, Rational> {
        names.iter().filter_map(|n| self.values.get(n).map(|v| (n.clone(), v.clone()))).collect()
    }

    pub fn display(&self, names: &[String]) -> String {
        names
            .iter()
            .map(|n| format!("{n} = {}", self.values.get(n).map(fmt_rational).unwrap_or_else(|| "?".into())))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
    Unknown(String),
}

#[derive(Clone, Debug)]
pub struct SolverRun {
    pub result: SatResult,
    pub elapsed: Duration,
    pub nodes: u64,
}

static QUERY_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Run the solver on one query.
pub fn solve(q: &Query, cfg: &SolverConfig) -> Result<SolverRun, SolverError> {
    let emitted = emit_query(q, cfg.dialect, cfg.seed);
    let start = Instant::now();
    let (stdout, stderr, timed_out) = run_process(cfg, &emitted.text)?;
    let elapsed = start.elapsed();
    if let Some(dir) = &cfg.debug_dir {
        let k = QUERY_COUNTER.fetch_add(1, Ordering::SeqCst) + 1;
        let _ = std::fs::create_dir_all(dir);
        let _ = std::fs::write(dir.join(format!("query-{k:04}.smt2")), &emitted.text);
        let _ = std::fs::write(dir.join(format!("query-{k:04}.out")), format!("{stdout}{stderr}"));
    }
    let result = if timed_out {
        SatResult::Unknown("timeout".into())
    } else {
        parse_answer(&stdout, &q.consts).map_err(|e| {
            let detail = if stderr.trim().is_empty() { e } else { format!("{e}: {}", stderr.trim()) };
            SolverError::Failed(detail)
        })?
    };
    Ok(SolverRun { result, elapsed, nodes: emitted.nodes })
}

fn run_process(cfg: &SolverConfig, script: &str) -> Result<(String, String, bool), SolverError> {
    let spawn_err = |source| SolverError::Spawn { path: cfg.path.clone(), source };
    let mut child = Command::new(&cfg.path)
        .args(cfg.args())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(spawn_err)?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let script = Arc::new(script.to_string());
    let writer = {
        let script = Arc::clone(&script);
        std::thread::spawn(move || {
            let _ = stdin.write_all(script.as_bytes());
        })
    };
    let mut out = child.stdout.take().expect("piped stdout");
    let mut err = child.stderr.take().expect("piped stderr");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = out.read_to_string(&mut s);
        s
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = err.read_to_string(&mut s);
        s
    });
    let status = child.wait_timeout(cfg.timeout).map_err(spawn_err)?;
    let timed_out = status.is_none();
    if timed_out {
        let _ = child.kill();
        let _ = child.wait();
    }
    let _ = writer.join();
    let stdout = reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    Ok((stdout, stderr, timed_out))
}

fn parse_answer(stdout: &str, consts: &[String]) -> Result<SatResult, String> {
    let items = parse_all(stdout)?;
    let mut answer = None;
    let mut rest = items.iter();
    for item in rest.by_ref() {
        match item {
            Sexp::Atom(a) if a == "sat" || a == "unsat" || a == "unknown" => {
                answer = Some(a.clone());
                break;
            }
            Sexp::List(_) if item.head() == Some("error") => return Err(item.to_string()),
            _ => {}
        }
    }
    match answer.as_deref() {
        Some("unsat") => Ok(SatResult::Unsat),
        Some("unknown") => Ok(SatResult::Unknown("solver returned unknown".into())),
        Some("sat") => {
            let model = rest.find(|s| s.head() != Some("error")).map(parse_model).unwrap_or_default();
            let mut model = model;
            for c in consts {
                if !model.values.contains_key(c) {
                    // Unconstrained constants may be left out of the model.
                    model.values.insert(c.clone(), Rational::from_integer(0.into()));
                }
            }
            Ok(SatResult::Sat(model))
        }
        _ => Err(format!("no answer in solver output '{}'", stdout.trim())),
    }
}

fn parse_model(e: &Sexp) -> Model {
    let mut m = Model::default();
    let defs = match e.list() {
        Some([Sexp::Atom(h), rest @ ..]) if h == "model" => rest,
        Some(all) => all,
        None => return m,
    };
    for d in defs {
        let Some([Sexp::Atom(h), Sexp::Atom(name), Sexp::List(params), _sort, value]) = d.list() else { continue };
        if h != "define-fun" || !params.is_empty() {
            continue;
        }
        if let Some((v, exact)) = value_of(value) {
            if !exact {
                m.approx.insert(name.clone());
            }
            m.values.insert(name.clone(), v);
        }
    }
    m
}

/// A model value and whether it is exact.
pub fn value_of(e: &Sexp) -> Option<(Rational, bool)> {
    match e {
        Sexp::Atom(a) => match a.strip_suffix('?') {
            Some(d) => parse_rational(d).map(|v| (v, false)),
            None => parse_rational(a).map(|v| (v, true)),
        },
        Sexp::List(l) => {
            let head = l.first()?.atom()?;
            if head == "root-obj" {
                let p = poly_from_sexp(l.get(1)?)?;
                let k: usize = l.get(2)?.atom()?.parse().ok()?;
                let (lo, hi) = root(&p, k, 64)?;
                let exact = lo == hi;
                return Some(((lo + hi) / int(2), exact));
            }
            let args: Option<Vec<(Rational, bool)>> = l[1..].iter().map(value_of).collect();
            let args = args?;
            let exact = args.iter().all(|(_, e)| *e);
            let vals: Vec<Rational> = args.into_iter().map(|(v, _)| v).collect();
            let v = match (head, vals.as_slice()) {
                ("-", [a]) => -a,
                ("-", [a, rest @ ..]) => rest.iter().fold(a.clone(), |x, y| x - y),
                ("+", vs) => vs.iter().fold(Rational::from_integer(0.into()), |x, y| x + y),
                ("*", vs) => vs.iter().fold(one(), |x, y| x * y),
                ("/", [a, b]) if *b != Rational::from_integer(0.into()) => a / b,
                _ => return None,
            };
            Some((v, exact))
        }
    }
}

/// Outcome of a validity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverVerdict {
    Valid,
    /// A counterexample. Certified models have been rechecked exactly.
    Invalid(Model),
    Unknown(String),
}

/// Evaluate definitions then assertions of a quantifier-free query exactly.
fn satisfies(q: &Query, values: &BTreeMap<String, Rational>) -> Option<bool> {
    let mut m = values.clone();
    for (name, t) in &q.definitions {
        let v = t.eval(&m)?;
        m.insert(name.clone(), v);
    }
    for c in &q.nonneg {
        if *m.get(c)? < Rational::from_integer(0.into()) {
            return Some(false);
        }
    }
    for a in &q.assertions {
        if !a.eval(&m)? {
            return Some(false);
        }
    }
    Some(true)
}

/// Validity of `φ` (a universally closed formula).
pub fn check_validity(phi: &Fo, domains: &[DomainDecl], cfg: &SolverConfig) -> Result<(SolverVerdict, SolverRun), SolverError> {
    let q = Query::validity(phi, domains);
    let run = solve(&q, cfg)?;
    let verdict = match &run.result {
        SatResult::Unsat => SolverVerdict::Valid,
        SatResult::Unknown(r) => SolverVerdict::Unknown(r.clone()),
        SatResult::Sat(m) => {
            let mut m = m.clone();
            m.certified = m.approx.is_empty() && satisfies(&q, &m.values) == Some(true);
            SolverVerdict::Invalid(m)
        }
    };
    Ok((verdict, run))
}

#[derive(Clone, Debug)]
pub struct EntailmentOutcome {
    pub verdict: SolverVerdict,
    pub query: EntailmentQuery,
    pub solver_time: Duration,
    pub nodes: u64,
    pub calls: u32,
}

impl EntailmentOutcome {
    /// Counterexample state, if any.
    pub fn witness(&self) -> Option<BTreeMap<String, Rational>> {
        match &self.verdict {
            SolverVerdict::Invalid(m) => Some(m.restrict(&self.query.state_vars)),
            _ => None,
        }
    }
}

/// Decide `lhs ⊑ rhs` for inf-free `lhs` and sup-free `rhs`.
///
/// Counterexamples are certified by evaluating both sides exactly at the
/// model. When the model has irrational coordinates the state is pinned to
/// a rational rounding and the solver is asked once more.
pub fn check_entailment(lhs: &Expr, rhs: &Expr, domains: &[DomainDecl], cfg: &SolverConfig) -> Result<EntailmentOutcome, SolverError> {
    let eq = entailment_formula(lhs, rhs, domains)?;
    let q = eq.query();
    let run = solve(&q, cfg)?;
    let mut out = EntailmentOutcome {
        verdict: SolverVerdict::Unknown(String::new()),
        query: eq.clone(),
        solver_time: run.elapsed,
        nodes: run.nodes,
        calls: 1,
    };
    out.verdict = match run.result {
        SatResult::Unsat => SolverVerdict::Valid,
        SatResult::Unknown(r) => SolverVerdict::Unknown(r),
        SatResult::Sat(m) => certify(&eq, &q, m, cfg, &mut out)?,
    };
    Ok(out)
}

fn certify(eq: &EntailmentQuery, q: &Query, mut m: Model, cfg: &SolverConfig, out: &mut EntailmentOutcome) -> Result<SolverVerdict, SolverError> {
    if q.has_apps() {
        // Domain functions have no exact interpretation to check against.
        return Ok(SolverVerdict::Invalid(m));
    }
    match eq.is_violated_at(&m.values) {
        Some(true) => {
            m.certified = true;
            return Ok(SolverVerdict::Invalid(m));
        }
        Some(false) | None if m.approx.is_empty() => {
            return Err(SolverError::Internal(format!(
                "solver counterexample does not violate the entailment: {}",
                m.display(&q.consts)
            )));
        }
        _ => {}
    }
    // Pin the state to the rounded values and look for exact binder values.
    let mut pinned = q.clone();
    for v in &eq.state_vars {
        let x = m.values.get(v).cloned().unwrap_or_else(|| int(0));
        pinned.assertions.push(Fo::Cmp(CmpOp::Eq, FoTerm::var(v), FoTerm::Num(x)));
    }
    let run = solve(&pinned, cfg)?;
    out.solver_time += run.elapsed;
    out.nodes = out.nodes.max(run.nodes);
    out.calls += 1;
    if let SatResult::Sat(mut m2) = run.result {
        if eq.is_violated_at(&m2.values) == Some(true) {
            m2.certified = true;
            return Ok(SolverVerdict::Invalid(m2));
        }
    }
    Ok(SolverVerdict::Unknown("counterexample has irrational coordinates and could not be certified".into()))
}

/// Replace every infimum by a supremum. The result bounds the input from above.
pub fn relax_inf(f: &Expr) -> Expr {
    match f {
        Expr::Term(_) => f.clone(),
        Expr::Iverson(g, e) => Expr::iverson((**g).clone(), relax_inf(e)),
        Expr::Scale(q, e) => Expr::scale(q.clone(), relax_inf(e)),
        Expr::Sum(a, b) => Expr::sum(relax_inf(a), relax_inf(b)),
        Expr::Quant(q) => Expr::Quant(Arc::new(Quantified {
            quantifier: Quantifier::Sup,
            var: q.var.clone(),
            lo: q.lo.clone(),
            hi: q.hi.clone(),
            body: relax_inf(&q.body),
        })),
    }
}

/// Whether `f ⊑ 1`. Infima are relaxed to suprema first, so a failed check
/// on a relaxed expectation is inconclusive rather than a refutation.
pub fn check_one_bounded(f: &Expr, domains: &[DomainDecl], cfg: &SolverConfig) -> Result<EntailmentOutcome, SolverError> {
    let relaxed = !f.is_inf_free();
    let g = if relaxed { relax_inf(f) } else { f.clone() };
    let mut out = check_entailment(&g, &Expr::one(), domains, cfg)?;
    if relaxed {
        if let SolverVerdict::Invalid(_) = out.verdict {
            out.verdict = SolverVerdict::Unknown("bound fails for the relaxation of the infima".into());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio;

    #[test]
    fn parse_sat_with_model() {
        let out = "sat\n(\n  (define-fun x () Real\n    (/ 1.0 4.0))\n  (define-fun |v#1| () Real\n    (- 2.0))\n  (define-fun f ((a Real)) Real a)\n)\n";
        let r = parse_answer(out, &["x".into(), "v#1".into(), "z".into()]).unwrap();
        let SatResult::Sat(m) = r else { panic!() };
        assert_eq!(m.values["x"], ratio(1, 4));
        assert_eq!(m.values["v#1"], int(-2));
        assert_eq!(m.values["z"], int(0));
        assert!(m.approx.is_empty());
    }

    #[test]
    fn parse_root_obj() {
        let out = "sat\n((define-fun x () Real (root-obj (+ (* 2 (^ x 2)) (- 1)) 2)))";
        let SatResult::Sat(m) = parse_answer(out, &["x".into()]).unwrap() else { panic!() };
        assert!(m.approx.contains("x"));
        let v = crate::num::to_f64(&m.values["x"]);
        assert!((v - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn parse_other_answers() {
        assert_eq!(parse_answer("unsat\n(error \"model is not available\")", &[]).unwrap(), SatResult::Unsat);
        assert!(matches!(parse_answer("unknown\n", &[]).unwrap(), SatResult::Unknown(_)));
        assert!(parse_answer("(error \"bad\")\n", &[]).is_err());
        assert!(parse_answer("", &[]).is_err());
    }

    #[test]
    fn relaxation_bounds_from_above() {
        let f = crate::syntax::parse_expr("inf v in [0,1]: sup w in [0,1]: v + w").unwrap();
        let g = relax_inf(&f);
        assert!(g.is_inf_free());
        let s = crate::semantics::State::new();
        assert!(crate::semantics::eval(&f, &s, 4).unwrap() <= crate::semantics::eval(&g, &s, 4).unwrap());
    }
}
