//! Refutation by simultaneous unrolling and partition refinement.
//!
//! For n = 1, 2, 4, ... the claim is tested against the n-th Riemann
//! approximation of the n-fold unrolling. A violation needs a state where
//! the sup-side `S` lies strictly below the inf-side `L`. Both sides carry
//! bounded quantifiers, so the search alternates two quantifier-free
//! queries: find a state violating the claim at finitely many binder
//! values, then check with the state fixed that no binder values close the
//! gap by half. The second query being unsatisfiable certifies the state.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_traits::Zero;

use super::{ensure_bounded, require, Bounded, Options, Status, Verdict, VerifyError};
use crate::fo::{solve, EncodeCtx, Fo, FoTerm, Interval, Query, SatResult, SolverConfig};
use crate::num::{int, Rational};
use crate::riemann::{propagate_constants, transform_assuming_bounded, unfold, Kind, TransformError, TransformerKind, DEFAULT_NODE_CAP};
use crate::semantics::{eval, prenex, prenex_avoiding, substitute, Binder, State};
use crate::syntax::{CmpOp, Expr, Program, Quantifier, Term};

#[derive(Clone, Debug)]
pub struct Budget {
    /// Largest n tried; the schedule is 1, 2, 4, ... up to this.
    pub max_n: u32,
    /// Node cap for each pre-expectation.
    pub max_nodes: u64,
    pub max_time: Duration,
    /// Refinement rounds per n.
    pub max_rounds: u32,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { max_n: 64, max_nodes: DEFAULT_NODE_CAP, max_time: Duration::from_secs(600), max_rounds: 16 }
    }
}

/// Refute `wp[C](f) ⊑ g` by finding a state where `g < lwp_n(unfold(C, n))(f)`.
pub fn refute_upper_bound(prog: &Program, f: &Expr, g: &Expr, budget: &Budget, opts: &Options) -> Result<Verdict, VerifyError> {
    require(f.is_sup_free(), "refuting an upper bound needs a sup-free post-expectation")?;
    require(g.is_inf_free(), "refuting an upper bound needs an inf-free bound")?;
    run(Kind::Lwp, prog, f, g, budget, opts)
}

/// Refute `g ⊑ wlp[C](f)` by finding a state where `uwlp_n(unfold(C, n))(f) < g`.
pub fn refute_lower_bound_wlp(prog: &Program, f: &Expr, g: &Expr, budget: &Budget, opts: &Options) -> Result<Verdict, VerifyError> {
    require(f.is_inf_free(), "refuting a wlp lower bound needs an inf-free post-expectation")?;
    require(g.is_sup_free(), "refuting a wlp lower bound needs a sup-free bound")?;
    run(Kind::Uwlp, prog, f, g, budget, opts)
}

fn run(kind: Kind, prog: &Program, f: &Expr, g: &Expr, budget: &Budget, opts: &Options) -> Result<Verdict, VerifyError> {
    let start = Instant::now();
    let mut v = Verdict::new(Status::Unknown(String::new()), TransformerKind::new(kind, 1));
    v.provenance.n = None;
    if kind.is_liberal() {
        for (e, what) in [(f, "the post-expectation"), (g, "the bound")] {
            if let Bounded::Unknown(r) = ensure_bounded(e, what, opts, &mut v)? {
                v.status = Status::Unknown(r);
                return Ok(v);
            }
        }
    }
    let mut n = 1u32;
    let mut last_issue = None;
    while n <= budget.max_n.max(1) {
        if start.elapsed() >= budget.max_time {
            last_issue = Some("time budget exhausted".to_string());
            break;
        }
        let unrolled = propagate_constants(&unfold(prog, n));
        let t = match transform_assuming_bounded(TransformerKind::new(kind, n), &unrolled, f, budget.max_nodes) {
            Ok(t) => t,
            Err(TransformError::TooLarge { size, cap }) => {
                last_issue = Some(format!("n = {n}: pre-expectation has {size} nodes, above the cap of {cap}"));
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let (small, large) = if kind.is_lower() { (g, &t) } else { (&t, g) };
        let mut search = Search::new(small, large, &opts.solver, &opts.domains, start, budget);
        let found = search.run(budget.max_rounds)?;
        v.provenance.query_nodes = v.provenance.query_nodes.max(search.nodes);
        v.provenance.solver_time += search.solver_time;
        v.provenance.solver_calls += search.calls;
        match found {
            Found::Witness(s) => {
                v.provenance.n = Some(n);
                v.status = Status::Refuted(s);
                return Ok(v);
            }
            Found::None => {}
            Found::Inconclusive(r) => {
                v.notes.push(format!("n = {n}: {r}"));
                last_issue = Some(format!("n = {n}: {r}"));
            }
        }
        n = match n.checked_mul(2) {
            Some(m) => m,
            None => break,
        };
    }
    let reason = match last_issue {
        Some(r) => format!("budget: no violation found ({r})"),
        None => format!("budget: no violation found up to n = {}", budget.max_n),
    };
    v.status = Status::Unknown(reason);
    Ok(v)
}

enum Found {
    Witness(State),
    None,
    Inconclusive(String),
}

type Point = BTreeMap<String, Rational>;

struct Search<'a> {
    state_vars: Vec<String>,
    small: (Vec<Binder>, Expr),
    large: (Vec<Binder>, Expr),
    points_small: Vec<Point>,
    points_large: Vec<Point>,
    solver: &'a SolverConfig,
    domains: &'a [crate::syntax::DomainDecl],
    start: Instant,
    budget: &'a Budget,
    nodes: u64,
    solver_time: Duration,
    calls: u32,
}

fn midpoint(bs: &[Binder]) -> Point {
    bs.iter().map(|b| (b.var.clone(), (&b.lo + &b.hi) / int(2))).collect()
}

fn plug(e: &Expr, p: &Point) -> Expr {
    p.iter().fold(e.clone(), |e, (x, q)| substitute(&e, x, &Term::Const(q.clone())))
}

fn ranges(bs: &[Binder]) -> Vec<Fo> {
    bs.iter()
        .flat_map(|b| {
            [
                Fo::Cmp(CmpOp::Le, FoTerm::Num(b.lo.clone()), FoTerm::var(&b.var)),
                Fo::Cmp(CmpOp::Le, FoTerm::var(&b.var), FoTerm::Num(b.hi.clone())),
            ]
        })
        .collect()
}

impl<'a> Search<'a> {
    fn new(
        small: &Expr,
        large: &Expr,
        solver: &'a SolverConfig,
        domains: &'a [crate::syntax::DomainDecl],
        start: Instant,
        budget: &'a Budget,
    ) -> Search<'a> {
        let ps = prenex(small);
        let mut avoid: BTreeSet<String> = small.all_names();
        avoid.extend(ps.binders.iter().map(|b| b.var.clone()));
        let pl = prenex_avoiding(large, &avoid);
        debug_assert!(ps.binders.iter().all(|b| b.quantifier == Quantifier::Sup));
        debug_assert!(pl.binders.iter().all(|b| b.quantifier == Quantifier::Inf));
        let mut state: BTreeSet<String> = small.free_vars();
        state.extend(large.free_vars());
        Search {
            state_vars: state.into_iter().collect(),
            points_small: vec![midpoint(&ps.binders)],
            points_large: vec![midpoint(&pl.binders)],
            small: (ps.binders, ps.matrix),
            large: (pl.binders, pl.matrix),
            solver,
            domains,
            start,
            budget,
            nodes: 0,
            solver_time: Duration::ZERO,
            calls: 0,
        }
    }

    fn solve(&mut self, q: &Query) -> Result<Option<SatResult>, VerifyError> {
        let left = self.budget.max_time.saturating_sub(self.start.elapsed());
        if left.is_zero() {
            return Ok(None);
        }
        let mut cfg = self.solver.clone();
        cfg.timeout = cfg.timeout.min(left);
        let run = solve(q, &cfg)?;
        self.nodes = self.nodes.max(run.nodes);
        self.solver_time += run.elapsed;
        self.calls += 1;
        Ok(Some(run.result))
    }

    fn ctx(&self, binders: &[&Binder]) -> EncodeCtx {
        let mut ctx = EncodeCtx::folding(self.domains);
        for b in binders {
            ctx.bounds.insert(b.var.clone(), Interval::new(b.lo.clone(), b.hi.clone()));
        }
        ctx
    }

    fn run(&mut self, rounds: u32) -> Result<Found, VerifyError> {
        for _ in 0..rounds.max(1) {
            // Phase 1: a state violating the claim at the current sample points.
            let Some(sigma) = (match self.candidate()? {
                Ok(s) => s,
                Err(r) => return Ok(Found::Inconclusive(r)),
            }) else {
                return Ok(Found::None);
            };
            // Exact gap at the sample points.
            let gap = match self.gap(&sigma) {
                Some(g) if g > Rational::zero() => g,
                _ => return Ok(Found::Inconclusive("candidate state has irrational coordinates".into())),
            };
            // Phase 2: with the state fixed, can any binder values close half the gap?
            let delta = gap / int(2);
            match self.closes(&sigma, &delta)? {
                Ok(None) => return Ok(Found::Witness(sigma)),
                Ok(Some((ps, pl))) => {
                    self.points_small.push(ps);
                    self.points_large.push(pl);
                }
                Err(r) => return Ok(Found::Inconclusive(r)),
            }
        }
        Ok(Found::Inconclusive("refinement rounds exhausted".into()))
    }

    fn candidate(&mut self) -> Result<Result<Option<State>, String>, VerifyError> {
        let (m, delta) = ("m#".to_string(), "delta#".to_string());
        let ctx = self.ctx(&[]);
        let mut assertions = vec![Fo::Cmp(CmpOp::Gt, FoTerm::var(&delta), FoTerm::zero())];
        for p in &self.points_small {
            let s = ctx.expr(&plug(&self.small.1, p))?;
            assertions.push(Fo::Cmp(CmpOp::Ge, FoTerm::var(&m), s));
        }
        for p in &self.points_large {
            let l = ctx.expr(&plug(&self.large.1, p))?;
            assertions.push(Fo::Cmp(CmpOp::Le, FoTerm::add(vec![FoTerm::var(&m), FoTerm::var(&delta)]), l));
        }
        let mut consts = self.state_vars.clone();
        consts.push(m);
        consts.push(delta);
        let q = Query {
            consts,
            nonneg: self.state_vars.clone(),
            assertions,
            domains: self.domains.to_vec(),
            comment: Some("refutation: candidate state".into()),
            ..Query::default()
        };
        Ok(match self.solve(&q)? {
            None => Err("time budget exhausted".into()),
            Some(SatResult::Unsat) => Ok(None),
            Some(SatResult::Unknown(r)) => Err(r),
            Some(SatResult::Sat(model)) => Ok(Some(model.restrict(&self.state_vars))),
        })
    }

    fn gap(&self, sigma: &State) -> Option<Rational> {
        let mut hi_small: Option<Rational> = None;
        for p in &self.points_small {
            let mut s = sigma.clone();
            s.extend(p.clone());
            let v = eval(&self.small.1, &s, 1).ok()?;
            hi_small = Some(hi_small.map_or(v.clone(), |h| h.max(v)));
        }
        let mut lo_large: Option<Rational> = None;
        for p in &self.points_large {
            let mut s = sigma.clone();
            s.extend(p.clone());
            let v = eval(&self.large.1, &s, 1).ok()?;
            lo_large = Some(lo_large.map_or(v.clone(), |h| h.min(v)));
        }
        Some(lo_large? - hi_small?)
    }

    /// `Ok(None)` when no binder values bring the sides within `delta`.
    #[allow(clippy::type_complexity)]
    fn closes(&mut self, sigma: &State, delta: &Rational) -> Result<Result<Option<(Point, Point)>, String>, VerifyError> {
        if self.small.0.is_empty() && self.large.0.is_empty() {
            return Ok(Ok(None));
        }
        let binders: Vec<&Binder> = self.small.0.iter().chain(&self.large.0).collect();
        let ctx = self.ctx(&binders);
        let s = ctx.expr(&plug(&self.small.1, sigma))?;
        let l = ctx.expr(&plug(&self.large.1, sigma))?;
        let mut assertions = ranges(&self.small.0);
        assertions.extend(ranges(&self.large.0));
        assertions.push(Fo::Cmp(CmpOp::Gt, FoTerm::add(vec![s, FoTerm::Num(delta.clone())]), l));
        let q = Query {
            consts: binders.iter().map(|b| b.var.clone()).collect(),
            assertions,
            domains: self.domains.to_vec(),
            comment: Some("refutation: certify candidate".into()),
            ..Query::default()
        };
        Ok(match self.solve(&q)? {
            None => Err("time budget exhausted".into()),
            Some(SatResult::Unsat) => Ok(None),
            Some(SatResult::Unknown(r)) => Err(r),
            Some(SatResult::Sat(model)) => {
                let pick = |bs: &[Binder]| -> Point {
                    bs.iter()
                        .map(|b| {
                            let v = model.values.get(&b.var).cloned().unwrap_or_else(|| b.lo.clone());
                            (b.var.clone(), v.max(b.lo.clone()).min(b.hi.clone()))
                        })
                        .collect()
                };
                Ok(Some((pick(&self.small.0), pick(&self.large.0))))
            }
        })
    }
}
