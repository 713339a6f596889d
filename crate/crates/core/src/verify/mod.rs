//! Verification workflows: loop-free bounds, loop invariants, conditional
//! expectation bounds, and refutation by unrolling.

mod refute;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use crate::fo::{check_entailment, check_one_bounded, EntailmentOutcome, FoError, SolverConfig, SolverError, SolverVerdict};
use crate::num::{fmt_rational, Rational};
use crate::riemann::{
    char_fn_apply_assuming_bounded, syntactically_one_bounded, transform_assuming_bounded, Kind, TransformError,
    TransformerKind, DEFAULT_NODE_CAP,
};
use crate::semantics::State;
use crate::syntax::{DomainDecl, Expr, Guard, Loop, Program};

pub use refute::{refute_lower_bound_wlp, refute_upper_bound, Budget};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Verified,
    Refuted(State),
    Unknown(String),
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::Refuted(_) => "refuted",
            Status::Unknown(_) => "unknown",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Verified => 0,
            Status::Refuted(_) => 1,
            Status::Unknown(_) => 2,
        }
    }
}

/// Where a verdict came from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Provenance {
    pub kind: Option<Kind>,
    pub n: Option<u32>,
    /// Largest emitted query, in distinct DAG nodes.
    pub query_nodes: u64,
    pub solver_time: Duration,
    pub solver_calls: u32,
}

impl Provenance {
    fn absorb(&mut self, o: &EntailmentOutcome) {
        self.query_nodes = self.query_nodes.max(o.nodes);
        self.solver_time += o.solver_time;
        self.solver_calls += o.calls;
    }

    fn merge(&mut self, o: &Provenance) {
        self.query_nodes = self.query_nodes.max(o.query_nodes);
        self.solver_time += o.solver_time;
        self.solver_calls += o.solver_calls;
        self.kind = self.kind.or(o.kind);
        self.n = self.n.or(o.n);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub provenance: Provenance,
    /// Facts taken on trust, such as 1-boundedness under domain symbols.
    pub assumptions: Vec<String>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(status: Status, kind: TransformerKind) -> Verdict {
        Verdict {
            status,
            provenance: Provenance { kind: Some(kind.kind), n: Some(kind.n), ..Provenance::default() },
            assumptions: vec![],
            notes: vec![],
        }
    }

    pub fn is_verified(&self) -> bool {
        self.status == Status::Verified
    }

    pub fn witness(&self) -> Option<&State> {
        match &self.status {
            Status::Refuted(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.status {
            Status::Verified => write!(f, "verified")?,
            Status::Refuted(s) => write!(f, "refuted at {}", show_state(s))?,
            Status::Unknown(r) => write!(f, "unknown: {r}")?,
        }
        if let (Some(k), Some(n)) = (self.provenance.kind, self.provenance.n) {
            write!(f, " ({k}, N = {n})")?;
        }
        Ok(())
    }
}

pub fn show_state(s: &State) -> String {
    let parts: Vec<String> = s.iter().map(|(k, v)| format!("{k} = {}", fmt_rational(v))).collect();
    format!("{{{}}}", parts.join(", "))
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Encoding(#[from] FoError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Polarity(String),
    #[error("{what} is not 1-bounded: it exceeds 1 at {}", show_state(.witness))]
    NotOneBounded { what: String, witness: State },
    #[error("{0} uses domain functions, so 1-boundedness cannot be decided; pass --assume-bounded to take it on trust")]
    NeedsAssumption(String),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `T(C)(f) ⊑ g` with an upper transformer.
    Upper,
    /// `g ⊑ T(C)(f)` with a lower transformer.
    Lower,
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Direction, String> {
        match s {
            "upper" => Ok(Direction::Upper),
            "lower" => Ok(Direction::Lower),
            _ => Err(format!("unknown direction '{s}' (expected upper or lower)")),
        }
    }
}

/// Everything a check needs besides its inputs.
#[derive(Clone, Debug)]
pub struct Options {
    pub solver: SolverConfig,
    pub domains: Vec<DomainDecl>,
    pub assume_bounded: bool,
    pub node_cap: u64,
}

impl Default for Options {
    fn default() -> Options {
        Options { solver: SolverConfig::default(), domains: vec![], assume_bounded: false, node_cap: DEFAULT_NODE_CAP }
    }
}

enum Bounded {
    Yes,
    Unknown(String),
}

/// Establish `f ⊑ 1` syntactically, by the solver, or by assumption.
fn ensure_bounded(f: &Expr, what: &str, opts: &Options, v: &mut Verdict) -> Result<Bounded, VerifyError> {
    if syntactically_one_bounded(f) {
        return Ok(Bounded::Yes);
    }
    if opts.assume_bounded {
        v.assumptions.push(format!("{what} is 1-bounded"));
        return Ok(Bounded::Yes);
    }
    if !f.functions().is_empty() {
        return Err(VerifyError::NeedsAssumption(what.to_string()));
    }
    let out = check_one_bounded(f, &opts.domains, &opts.solver)?;
    v.provenance.absorb(&out);
    match out.verdict {
        SolverVerdict::Valid => {
            v.notes.push(format!("{what} certified 1-bounded"));
            Ok(Bounded::Yes)
        }
        SolverVerdict::Invalid(m) => {
            Err(VerifyError::NotOneBounded { what: what.to_string(), witness: m.restrict(&out.query.state_vars) })
        }
        SolverVerdict::Unknown(r) => Ok(Bounded::Unknown(format!("1-boundedness of {what}: {r}"))),
    }
}

/// Decide `lhs ⊑ rhs` and turn the answer into a verdict.
fn entail(lhs: &Expr, rhs: &Expr, opts: &Options, v: &mut Verdict) -> Result<(), VerifyError> {
    let out = check_entailment(lhs, rhs, &opts.domains, &opts.solver)?;
    v.provenance.absorb(&out);
    v.status = match &out.verdict {
        SolverVerdict::Valid => Status::Verified,
        SolverVerdict::Invalid(m) if m.certified => Status::Refuted(m.restrict(&out.query.state_vars)),
        SolverVerdict::Invalid(m) => Status::Unknown(format!(
            "solver reports a counterexample that cannot be checked exactly: {}",
            m.display(&out.query.state_vars)
        )),
        SolverVerdict::Unknown(r) => Status::Unknown(r.clone()),
    };
    Ok(())
}

fn require(cond: bool, msg: impl Into<String>) -> Result<(), VerifyError> {
    if cond {
        Ok(())
    } else {
        Err(VerifyError::Polarity(msg.into()))
    }
}

fn check_direction(direction: Direction, kind: Kind) -> Result<(), VerifyError> {
    match direction {
        Direction::Upper => require(!kind.is_lower(), format!("upper bounds need uwp or uwlp, not {kind}")),
        Direction::Lower => require(kind.is_lower(), format!("lower bounds need lwp or lwlp, not {kind}")),
    }
}

/// Bound check for a loop-free program.
///
/// Upper: `T(C)(f) ⊑ g` with `f` inf-free and `g` sup-free.
/// Lower: `g ⊑ T(C)(f)` with `f` sup-free and `g` inf-free.
pub fn check_bound_loopfree(
    direction: Direction,
    kind: TransformerKind,
    prog: &Program,
    f: &Expr,
    g: &Expr,
    opts: &Options,
) -> Result<Verdict, VerifyError> {
    check_direction(direction, kind.kind)?;
    if !prog.is_loop_free() {
        return Err(TransformError::Loop.into());
    }
    match direction {
        Direction::Upper => {
            require(f.is_inf_free(), "upper bounds need an inf-free post-expectation")?;
            require(g.is_sup_free(), "upper bounds need a sup-free bound")?;
        }
        Direction::Lower => {
            require(f.is_sup_free(), "lower bounds need a sup-free post-expectation")?;
            require(g.is_inf_free(), "lower bounds need an inf-free bound")?;
        }
    }
    let mut v = Verdict::new(Status::Unknown(String::new()), kind);
    if kind.kind.is_liberal() {
        for (e, what) in [(f, "the post-expectation"), (g, "the bound")] {
            if let Bounded::Unknown(r) = ensure_bounded(e, what, opts, &mut v)? {
                v.status = Status::Unknown(r);
                return Ok(v);
            }
        }
    }
    let t = transform_assuming_bounded(kind, prog, f, opts.node_cap)?;
    match direction {
        Direction::Upper => entail(&t, g, opts, &mut v)?,
        Direction::Lower => entail(g, &t, opts, &mut v)?,
    }
    Ok(v)
}

/// `Φ_uwp(I) ⊑ I`: `I` is a superinvariant, so `wp[loop](post) ⊑ I`.
pub fn check_superinvariant(n: u32, lp: &Loop, post: &Expr, inv: &Expr, opts: &Options) -> Result<Verdict, VerifyError> {
    require(inv.is_quantifier_free(), "the invariant must be quantifier-free")?;
    require(post.is_inf_free(), "the post-expectation must be inf-free")?;
    let kind = TransformerKind::new(Kind::Uwp, n);
    let mut v = Verdict::new(Status::Unknown(String::new()), kind);
    let phi = char_fn_apply_assuming_bounded(kind, lp, post, inv, opts.node_cap)?;
    entail(&phi, inv, opts, &mut v)?;
    Ok(v)
}

/// `J ⊑ Φ_lwlp(J)`: `J` is a subinvariant, so `J ⊑ wlp[loop](post)`.
pub fn check_subinvariant_wlp(n: u32, lp: &Loop, post: &Expr, inv: &Expr, opts: &Options) -> Result<Verdict, VerifyError> {
    require(inv.is_quantifier_free(), "the invariant must be quantifier-free")?;
    require(post.is_sup_free(), "the post-expectation must be sup-free")?;
    let kind = TransformerKind::new(Kind::Lwlp, n);
    let mut v = Verdict::new(Status::Unknown(String::new()), kind);
    for (e, what) in [(post, "the post-expectation"), (inv, "the invariant")] {
        if let Bounded::Unknown(r) = ensure_bounded(e, what, opts, &mut v)? {
            v.status = Status::Unknown(r);
            return Ok(v);
        }
    }
    let phi = char_fn_apply_assuming_bounded(kind, lp, post, inv, opts.node_cap)?;
    entail(inv, &phi, opts, &mut v)?;
    Ok(v)
}

/// `cwp[loop](f) <= I / J` wherever `J > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CwpBoundReport {
    pub numerator: Expr,
    pub denominator: Expr,
    pub n: u32,
    pub n_denominator: u32,
    /// The ratio bound holds only where this is true.
    pub side_condition: String,
    pub numerator_verdict: Verdict,
    pub denominator_verdict: Verdict,
}

impl CwpBoundReport {
    pub fn ratio(&self) -> String {
        format!("({}) / ({})", self.numerator, self.denominator)
    }

    pub fn assumptions(&self) -> Vec<String> {
        let mut a = self.numerator_verdict.assumptions.clone();
        a.extend(self.denominator_verdict.assumptions.iter().cloned());
        a
    }

    pub fn provenance(&self) -> Provenance {
        let mut p = self.numerator_verdict.provenance.clone();
        p.merge(&self.denominator_verdict.provenance);
        p
    }
}

impl fmt::Display for CwpBoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cwp <= {} wherever {} (N = {}, N' = {})", self.ratio(), self.side_condition, self.n, self.n_denominator)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CwpOutcome {
    Bound(Box<CwpBoundReport>),
    /// The first invariant check that did not verify.
    Failed(Verdict),
}

/// Bound the conditional expectation of a loop by a superinvariant `I` for
/// `wp(f)` and a subinvariant `J` for `wlp(1)`.
pub fn cwp_upper_bound(
    lp: &Loop,
    f: &Expr,
    num: &Expr,
    n: u32,
    den: &Expr,
    n_den: u32,
    opts: &Options,
) -> Result<CwpOutcome, VerifyError> {
    let nv = check_superinvariant(n, lp, f, num, opts)?;
    if !nv.is_verified() {
        return Ok(CwpOutcome::Failed(nv));
    }
    let dv = check_subinvariant_wlp(n_den, lp, &Expr::one(), den, opts)?;
    if !dv.is_verified() {
        return Ok(CwpOutcome::Failed(dv));
    }
    let side = format!("{den} > 0");
    Ok(CwpOutcome::Bound(Box::new(CwpBoundReport {
        numerator: num.clone(),
        denominator: den.clone(),
        n,
        n_denominator: n_den,
        side_condition: side,
        numerator_verdict: nv,
        denominator_verdict: dv,
    })))
}

/// Bound check for a whole program. Loops are replaced by their annotated
/// invariants, checked from the last statement backwards, each verified
/// invariant serving as the post-expectation of what precedes it.
pub fn check_bound(
    direction: Direction,
    kind: TransformerKind,
    prog: &Program,
    f: &Expr,
    g: &Expr,
    opts: &Options,
) -> Result<Verdict, VerifyError> {
    if prog.is_loop_free() {
        return check_bound_loopfree(direction, kind, prog, f, g, opts);
    }
    check_direction(direction, kind.kind)?;
    match (direction, kind.kind) {
        (Direction::Upper, Kind::Uwp) | (Direction::Lower, Kind::Lwlp) => {}
        _ => {
            return Err(VerifyError::Unsupported(format!(
                "loops are only handled by uwp superinvariants and lwlp subinvariants, not {} for {} bounds",
                kind.kind,
                if direction == Direction::Upper { "upper" } else { "lower" }
            )))
        }
    }
    let mut v = Verdict::new(Status::Unknown(String::new()), kind);
    let mut loops = 0;
    let pre = match thread(direction, kind, prog, f.clone(), opts, &mut v, &mut loops)? {
        Ok(pre) => pre,
        Err(reason) => {
            v.status = Status::Unknown(reason);
            return Ok(v);
        }
    };
    v.notes.push(format!("{loops} loop invariant(s) verified"));
    let mut last = Verdict::new(Status::Unknown(String::new()), kind);
    match direction {
        Direction::Upper => entail(&pre, g, opts, &mut last)?,
        Direction::Lower => entail(g, &pre, opts, &mut last)?,
    }
    v.provenance.merge(&last.provenance);
    v.status = last.status;
    Ok(v)
}

type Threaded = Result<Expr, String>;

fn thread(
    direction: Direction,
    kind: TransformerKind,
    p: &Program,
    post: Expr,
    opts: &Options,
    v: &mut Verdict,
    loops: &mut usize,
) -> Result<Threaded, VerifyError> {
    if p.is_loop_free() {
        if kind.kind.is_liberal() {
            if let Bounded::Unknown(r) = ensure_bounded(&post, "an intermediate post-expectation", opts, v)? {
                return Ok(Err(r));
            }
        }
        return Ok(Ok(transform_assuming_bounded(kind, p, &post, opts.node_cap)?));
    }
    Ok(match p {
        Program::Seq(a, b) => match thread(direction, kind, b, post, opts, v, loops)? {
            Ok(mid) => thread(direction, kind, a, mid, opts, v, loops)?,
            e => e,
        },
        Program::Ite(g, a, b) => {
            let ta = match thread(direction, kind, a, post.clone(), opts, v, loops)? {
                Ok(t) => t,
                e => return Ok(e),
            };
            let tb = match thread(direction, kind, b, post, opts, v, loops)? {
                Ok(t) => t,
                e => return Ok(e),
            };
            Ok(Expr::sum(Expr::iverson(g.clone(), ta), Expr::iverson(Guard::not(g.clone()), tb)))
        }
        Program::PChoice(a, q, b) => {
            let ta = match thread(direction, kind, a, post.clone(), opts, v, loops)? {
                Ok(t) => t,
                e => return Ok(e),
            };
            let tb = match thread(direction, kind, b, post, opts, v, loops)? {
                Ok(t) => t,
                e => return Ok(e),
            };
            let rest = Rational::from_integer(1.into()) - q;
            Ok(Expr::sum(Expr::scale(q.clone(), ta), Expr::scale(rest, tb)))
        }
        Program::While(l) => {
            let Some(inv) = &l.invariant else {
                return Err(VerifyError::Unsupported("every loop needs an @invariant annotation".into()));
            };
            *loops += 1;
            let lv = match direction {
                Direction::Upper => check_superinvariant(kind.n, l, &post, inv, opts)?,
                Direction::Lower => check_subinvariant_wlp(kind.n, l, &post, inv, opts)?,
            };
            v.provenance.merge(&lv.provenance);
            v.assumptions.extend(lv.assumptions.iter().cloned());
            match lv.status {
                Status::Verified => Ok(inv.clone()),
                Status::Refuted(s) => Err(format!("the invariant of loop {} is not inductive at {}", *loops, show_state(&s))),
                Status::Unknown(r) => Err(format!("the invariant of loop {}: {r}", *loops)),
            }
        }
        _ => unreachable!("loop-free statements are handled above"),
    })
}

/// Exact values of a loop-free transformer at the given states, for reports.
pub fn values_at(kind: TransformerKind, prog: &Program, f: &Expr, states: &[State]) -> Result<Vec<Rational>, VerifyError> {
    let t = transform_assuming_bounded(kind, prog, f, DEFAULT_NODE_CAP)?;
    Ok(states.iter().filter_map(|s| crate::semantics::eval(&t, s, kind.n).ok()).collect())
}

/// Convenience for building witness maps in tests and reports.
pub fn witness_strings(s: &State) -> BTreeMap<String, String> {
    s.iter().map(|(k, v)| (k.clone(), fmt_rational(v))).collect()
}
