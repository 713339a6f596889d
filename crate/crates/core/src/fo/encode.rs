//! Expectations to first-order formulas.
//!
//! A quantifier-free expectation becomes a single real term: monus is
//! `ite(a >= b, a - b, 0)` and `[g] * e` is `ite(g, e, 0)`. Given interval
//! bounds for the variables, guard atoms and monus splits that the bounds
//! already decide are folded away; the entailment query asserts those same
//! bounds, so folding never changes its answer.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;

use super::{Fo, FoTerm, Interval};
use crate::num::Rational;
use crate::semantics::{eval, prenex, prenex_avoiding, Binder, Prenex};
use crate::syntax::{CmpOp, DomainDecl, Expr, Guard, Quantifier, Sort, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FoError {
    #[error("{side} side must be {required} after prenexing (found a {found} binder)")]
    Polarity { side: &'static str, required: &'static str, found: &'static str },
    #[error("expected a quantifier-free expectation")]
    Quantified,
}

/// Variable ranges used to fold decided atoms, plus which function symbols
/// return non-negative values.
#[derive(Clone, Debug, Default)]
pub struct EncodeCtx {
    pub bounds: HashMap<String, Interval>,
    pub nonneg_funcs: BTreeSet<String>,
    /// When false every atom is kept, whatever the bounds say.
    pub fold: bool,
}

impl EncodeCtx {
    /// No folding: a literal translation.
    pub fn plain() -> EncodeCtx {
        EncodeCtx::default()
    }

    /// Folding with every variable in `[0, inf)` unless bounded otherwise.
    pub fn folding(domains: &[DomainDecl]) -> EncodeCtx {
        let nonneg_funcs = domains
            .iter()
            .flat_map(|d| d.funcs.iter())
            .filter(|f| f.result == Sort::UReal)
            .map(|f| f.name.clone())
            .collect();
        EncodeCtx { bounds: HashMap::new(), nonneg_funcs, fold: true }
    }

    fn var_range(&self, v: &str) -> Option<Interval> {
        if !self.fold {
            return None;
        }
        Some(self.bounds.get(v).cloned().unwrap_or_else(Interval::nonneg))
    }

    pub fn term(&self, t: &Term) -> (FoTerm, Option<Interval>) {
        match t {
            Term::Const(q) => (FoTerm::Num(q.clone()), self.fold.then(|| Interval::point(q.clone()))),
            Term::Var(v) => (FoTerm::Var(v.clone()), self.var_range(v)),
            Term::Add(a, b) => {
                let ((x, ix), (y, iy)) = (self.term(a), self.term(b));
                (FoTerm::add(vec![x, y]), ix.zip(iy).map(|(i, j)| i.add(&j)))
            }
            Term::Mul(a, b) => {
                let ((x, ix), (y, iy)) = (self.term(a), self.term(b));
                (FoTerm::mul(vec![x, y]), ix.zip(iy).map(|(i, j)| i.mul(&j)))
            }
            Term::Monus(a, b) => {
                let ((x, ix), (y, iy)) = (self.term(a), self.term(b));
                let range = ix.as_ref().zip(iy.as_ref()).map(|(i, j)| i.monus(j));
                if y.is_zero() {
                    return (x, range);
                }
                if let (Some(i), Some(j)) = (&ix, &iy) {
                    if j.below(i) {
                        return (FoTerm::Sub(Box::new(x), Box::new(y)), range);
                    }
                    if i.below(j) {
                        return (FoTerm::zero(), range);
                    }
                }
                let cond = Fo::Cmp(CmpOp::Ge, x.clone(), y.clone());
                (FoTerm::Ite(Box::new(cond), Box::new(FoTerm::Sub(Box::new(x), Box::new(y))), Box::new(FoTerm::zero())), range)
            }
            Term::App(f, args) => {
                let args = args.iter().map(|a| self.term(a).0).collect();
                let range = (self.fold && self.nonneg_funcs.contains(f)).then(Interval::nonneg);
                (FoTerm::App(f.clone(), args), range)
            }
        }
    }

    pub fn guard(&self, g: &Guard) -> Fo {
        match g {
            Guard::Bool(b) => Fo::Bool(*b),
            Guard::Cmp(op, a, b) => {
                let ((x, ix), (y, iy)) = (self.term(a), self.term(b));
                if let (Some(i), Some(j)) = (&ix, &iy) {
                    if let Some(v) = decide(*op, i, j) {
                        return Fo::Bool(v);
                    }
                }
                Fo::Cmp(*op, x, y)
            }
            Guard::Not(h) => Fo::not(self.guard(h)),
            Guard::And(a, b) => Fo::and(vec![self.guard(a), self.guard(b)]),
            Guard::Or(a, b) => Fo::or(vec![self.guard(a), self.guard(b)]),
            Guard::Implies(a, b) => Fo::implies(self.guard(a), self.guard(b)),
        }
    }

    /// The value of a quantifier-free expectation as a real term.
    pub fn expr(&self, f: &Expr) -> Result<FoTerm, FoError> {
        Ok(match f {
            Expr::Term(t) => self.term(t).0,
            Expr::Iverson(g, e) => match self.guard(g) {
                Fo::Bool(true) => self.expr(e)?,
                Fo::Bool(false) => FoTerm::zero(),
                c => {
                    let body = self.expr(e)?;
                    if body.is_zero() {
                        body
                    } else {
                        FoTerm::Ite(Box::new(c), Box::new(body), Box::new(FoTerm::zero()))
                    }
                }
            },
            Expr::Scale(q, e) => FoTerm::mul(vec![FoTerm::Num(q.clone()), self.expr(e)?]),
            Expr::Sum(a, b) => FoTerm::add(vec![self.expr(a)?, self.expr(b)?]),
            Expr::Quant(_) => return Err(FoError::Quantified),
        })
    }
}

fn decide(op: CmpOp, a: &Interval, b: &Interval) -> Option<bool> {
    let lt = || {
        if a.strictly_below(b) {
            Some(true)
        } else if b.below(a) {
            Some(false)
        } else {
            None
        }
    };
    let le = || {
        if a.below(b) {
            Some(true)
        } else if b.strictly_below(a) {
            Some(false)
        } else {
            None
        }
    };
    let eq = || match (a.as_point(), b.as_point()) {
        (Some(x), Some(y)) if x == y => Some(true),
        _ if a.strictly_below(b) || b.strictly_below(a) => Some(false),
        _ => None,
    };
    match op {
        CmpOp::Lt => lt(),
        CmpOp::Le => le(),
        CmpOp::Gt => decide(CmpOp::Lt, b, a),
        CmpOp::Ge => decide(CmpOp::Le, b, a),
        CmpOp::Eq => eq(),
        CmpOp::Ne => eq().map(|v| !v),
    }
}

/// Plain translation of a quantifier-free expectation.
pub fn encode_qf(f: &Expr) -> Result<FoTerm, FoError> {
    EncodeCtx::plain().expr(f)
}

/// Plain translation of a guard.
pub fn encode_guard_fo(g: &Guard) -> Fo {
    EncodeCtx::plain().guard(g)
}

/// `φ_f(vars, result)`: holds exactly when `result` is the value of `f`.
///
/// Quantifier-free expectations give a single equation. Suprema are encoded
/// as least upper bounds and infima as greatest lower bounds, which needs
/// nested quantifiers.
pub fn encode_expr(f: &Expr, result_var: &str) -> Fo {
    let mut taken = f.all_names();
    taken.insert(result_var.to_string());
    let mut r = Relational { taken, next: 0 };
    r.rel(f, FoTerm::var(result_var))
}

struct Relational {
    taken: BTreeSet<String>,
    next: usize,
}

impl Relational {
    fn fresh(&mut self, stem: &str) -> String {
        loop {
            self.next += 1;
            let name = format!("{stem}#{}", self.next);
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    fn rel(&mut self, f: &Expr, y: FoTerm) -> Fo {
        if f.is_quantifier_free() {
            let v = EncodeCtx::plain().expr(f).expect("quantifier-free");
            return Fo::Cmp(CmpOp::Eq, y, v);
        }
        match f {
            Expr::Term(_) => unreachable!("terms are quantifier-free"),
            Expr::Sum(a, b) => {
                let (ya, yb) = (self.fresh("y"), self.fresh("y"));
                let body = Fo::and(vec![
                    self.rel(a, FoTerm::var(&ya)),
                    self.rel(b, FoTerm::var(&yb)),
                    Fo::Cmp(CmpOp::Eq, y, FoTerm::add(vec![FoTerm::var(&ya), FoTerm::var(&yb)])),
                ]);
                Fo::exists(vec![ya, yb], body)
            }
            Expr::Scale(q, e) => {
                let z = self.fresh("y");
                let body = Fo::and(vec![
                    self.rel(e, FoTerm::var(&z)),
                    Fo::Cmp(CmpOp::Eq, y, FoTerm::mul(vec![FoTerm::Num(q.clone()), FoTerm::var(&z)])),
                ]);
                Fo::exists(vec![z], body)
            }
            Expr::Iverson(g, e) => {
                let z = self.fresh("y");
                let c = EncodeCtx::plain().guard(g);
                let body = Fo::and(vec![
                    self.rel(e, FoTerm::var(&z)),
                    Fo::Cmp(CmpOp::Eq, y, FoTerm::Ite(Box::new(c), Box::new(FoTerm::var(&z)), Box::new(FoTerm::zero()))),
                ]);
                Fo::exists(vec![z], body)
            }
            Expr::Quant(q) => {
                // bound(u): every value of the body over the range is on the
                // correct side of u.
                let (op, opt) = match q.quantifier {
                    Quantifier::Sup => (CmpOp::Le, CmpOp::Le),
                    Quantifier::Inf => (CmpOp::Ge, CmpOp::Ge),
                };
                let bound = |this: &mut Relational, u: FoTerm| {
                    let z = this.fresh("y");
                    let range = Fo::and(vec![
                        Fo::Cmp(CmpOp::Le, FoTerm::Num(q.lo.clone()), FoTerm::var(&q.var)),
                        Fo::Cmp(CmpOp::Le, FoTerm::var(&q.var), FoTerm::Num(q.hi.clone())),
                    ]);
                    let inner = Fo::exists(
                        vec![z.clone()],
                        Fo::and(vec![this.rel(&q.body, FoTerm::var(&z)), Fo::Cmp(op, FoTerm::var(&z), u)]),
                    );
                    Fo::forall(vec![q.var.clone()], Fo::implies(range, inner))
                };
                let is_bound = bound(self, y.clone());
                let u = self.fresh("u");
                let tightest = Fo::forall(vec![u.clone()], Fo::implies(bound(self, FoTerm::var(&u)), Fo::Cmp(opt, y, FoTerm::var(&u))));
                Fo::and(vec![is_bound, tightest])
            }
        }
    }
}

/// The quantitative entailment `lhs ⊑ rhs` for an inf-free `lhs` and a
/// sup-free `rhs`, with both sides in prenex form.
#[derive(Clone, Debug)]
pub struct EntailmentQuery {
    pub state_vars: Vec<String>,
    pub lhs: Prenex,
    pub rhs: Prenex,
    pub y_lhs: String,
    pub y_rhs: String,
    pub lhs_term: FoTerm,
    pub rhs_term: FoTerm,
    pub domains: Vec<DomainDecl>,
}

pub fn entailment_formula(lhs: &Expr, rhs: &Expr, domains: &[DomainDecl]) -> Result<EntailmentQuery, FoError> {
    let pl = prenex(lhs);
    if pl.binders.iter().any(|b| b.quantifier == Quantifier::Inf) {
        return Err(FoError::Polarity { side: "left", required: "inf-free", found: "inf" });
    }
    // Prenex the right side with fresh names that avoid everything on the left.
    let mut avoid: BTreeSet<String> = lhs.all_names();
    avoid.extend(pl.binders.iter().map(|b| b.var.clone()));
    let pr = prenex_avoiding(rhs, &avoid);
    if pr.binders.iter().any(|b| b.quantifier == Quantifier::Sup) {
        return Err(FoError::Polarity { side: "right", required: "sup-free", found: "sup" });
    }
    let mut state: BTreeSet<String> = lhs.free_vars();
    state.extend(rhs.free_vars());
    let mut names = state.clone();
    names.extend(pl.binders.iter().chain(&pr.binders).map(|b| b.var.clone()));
    let pick = |stem: &str, names: &BTreeSet<String>| {
        if names.contains(stem) {
            crate::semantics::fresh_name(stem, names)
        } else {
            stem.to_string()
        }
    };
    let y_lhs = pick("y_f", &names);
    names.insert(y_lhs.clone());
    let y_rhs = pick("y_g", &names);

    let mut ctx = EncodeCtx::folding(domains);
    for b in pl.binders.iter().chain(&pr.binders) {
        ctx.bounds.insert(b.var.clone(), Interval::new(b.lo.clone(), b.hi.clone()));
    }
    let lhs_term = ctx.expr(&pl.matrix)?;
    let rhs_term = ctx.expr(&pr.matrix)?;
    Ok(EntailmentQuery {
        state_vars: state.into_iter().collect(),
        lhs: pl,
        rhs: pr,
        y_lhs,
        y_rhs,
        lhs_term,
        rhs_term,
        domains: domains.to_vec(),
    })
}

impl EntailmentQuery {
    pub fn binders(&self) -> impl Iterator<Item = &Binder> {
        self.lhs.binders.iter().chain(&self.rhs.binders)
    }

    /// The universal closure `∀ vars, binders, y. premises → y_lhs <= y_rhs`.
    pub fn formula(&self) -> Fo {
        let mut premises: Vec<Fo> =
            self.state_vars.iter().map(|v| Fo::Cmp(CmpOp::Ge, FoTerm::var(v), FoTerm::zero())).collect();
        for b in self.binders() {
            premises.push(Fo::Cmp(CmpOp::Le, FoTerm::Num(b.lo.clone()), FoTerm::var(&b.var)));
            premises.push(Fo::Cmp(CmpOp::Le, FoTerm::var(&b.var), FoTerm::Num(b.hi.clone())));
        }
        premises.push(Fo::Cmp(CmpOp::Eq, FoTerm::var(&self.y_lhs), self.lhs_term.clone()));
        premises.push(Fo::Cmp(CmpOp::Eq, FoTerm::var(&self.y_rhs), self.rhs_term.clone()));
        let mut vars = self.state_vars.clone();
        vars.extend(self.binders().map(|b| b.var.clone()));
        vars.push(self.y_lhs.clone());
        vars.push(self.y_rhs.clone());
        Fo::forall(
            vars,
            Fo::Implies(Box::new(Fo::And(premises)), Box::new(Fo::Cmp(CmpOp::Le, FoTerm::var(&self.y_lhs), FoTerm::var(&self.y_rhs)))),
        )
    }

    /// The negated query as a satisfiability problem.
    pub fn query(&self) -> super::Query {
        let mut assertions = Vec::new();
        for b in self.binders() {
            assertions.push(Fo::Cmp(CmpOp::Le, FoTerm::Num(b.lo.clone()), FoTerm::var(&b.var)));
            assertions.push(Fo::Cmp(CmpOp::Le, FoTerm::var(&b.var), FoTerm::Num(b.hi.clone())));
        }
        assertions.push(Fo::Cmp(CmpOp::Gt, FoTerm::var(&self.y_lhs), FoTerm::var(&self.y_rhs)));
        let mut consts = self.state_vars.clone();
        consts.extend(self.binders().map(|b| b.var.clone()));
        super::Query {
            consts,
            nonneg: self.state_vars.clone(),
            definitions: vec![(self.y_lhs.clone(), self.lhs_term.clone()), (self.y_rhs.clone(), self.rhs_term.clone())],
            assertions,
            domains: self.domains.clone(),
            comment: None,
        }
    }

    /// Exact values of both matrices at a model; `None` if not evaluable.
    pub fn values_at(&self, model: &BTreeMap<String, Rational>) -> Option<(Rational, Rational)> {
        let mut s = model.clone();
        for v in &self.state_vars {
            s.entry(v.clone()).or_insert_with(Rational::zero);
        }
        for b in self.binders() {
            let x = s.entry(b.var.clone()).or_insert_with(|| b.lo.clone());
            if *x < b.lo || *x > b.hi {
                return None;
            }
        }
        if self.state_vars.iter().any(|v| s[v] < Rational::zero()) {
            return None;
        }
        let l = eval(&self.lhs.matrix, &s, 1).ok()?;
        let r = eval(&self.rhs.matrix, &s, 1).ok()?;
        Some((l, r))
    }

    /// Whether the model is a genuine counterexample: `lhs > rhs` there.
    pub fn is_violated_at(&self, model: &BTreeMap<String, Rational>) -> Option<bool> {
        self.values_at(model).map(|(l, r)| l > r)
    }
}
