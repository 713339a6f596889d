//! Prenex normal form.
//!
//! Rules, all semantics-preserving because every hoisted binder gets a name
//! that occurs nowhere else:
//!
//! * `(Q v: a) + b  =  Q v: (a + b)` and symmetrically on the right
//! * `[g] * (Q v: a)  =  Q v: [g] * a`
//! * `q * (Q v: a)  =  Q v: q * a`   (`q >= 0`)
//!
//! Sums of independent sup and inf parts separate, so the relative order of
//! hoisted binders from different summands does not matter.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::num::Rational;
use crate::syntax::{Expr, Guard, Quantified, Quantifier, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binder {
    pub quantifier: Quantifier,
    pub var: String,
    pub lo: Rational,
    pub hi: Rational,
}

/// Quantifier prefix (outermost first) and quantifier-free matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prenex {
    pub binders: Vec<Binder>,
    pub matrix: Expr,
}

impl Prenex {
    pub fn to_expr(&self) -> Expr {
        self.binders.iter().rev().fold(self.matrix.clone(), |body, b| {
            Expr::Quant(Arc::new(Quantified {
                quantifier: b.quantifier,
                var: b.var.clone(),
                lo: b.lo.clone(),
                hi: b.hi.clone(),
                body,
            }))
        })
    }
}

pub fn to_pnf(f: &Expr) -> Expr {
    if f.is_quantifier_free() {
        return f.clone();
    }
    prenex(f).to_expr()
}

pub fn prenex(f: &Expr) -> Prenex {
    prenex_avoiding(f, &BTreeSet::new())
}

/// Like [`prenex`], but hoisted binders also avoid the names in `extra`.
pub fn prenex_avoiding(f: &Expr, extra: &BTreeSet<String>) -> Prenex {
    let mut used = f.free_vars();
    used.extend(extra.iter().cloned());
    let mut avoid = f.all_names();
    avoid.extend(used.iter().cloned());
    let mut p = Pnf { used, avoid, next: HashMap::new(), binders: Vec::new() };
    let matrix = p.go(f, &mut Vec::new());
    Prenex { binders: p.binders, matrix }
}

struct Pnf {
    used: BTreeSet<String>,
    avoid: BTreeSet<String>,
    next: HashMap<String, usize>,
    binders: Vec<Binder>,
}

type Env = Vec<(String, String)>;

impl Pnf {
    fn fresh(&mut self, base: &str) -> String {
        let stem = base.split('#').next().unwrap_or(base).to_string();
        let k = self.next.entry(stem.clone()).or_insert(1);
        loop {
            let name = format!("{stem}#{k}");
            *k += 1;
            if !self.avoid.contains(&name) {
                return name;
            }
        }
    }

    fn go(&mut self, f: &Expr, env: &mut Env) -> Expr {
        match f {
            Expr::Term(t) => Expr::Term(rename_term(t, env)),
            Expr::Iverson(g, e) => {
                let body = self.go(e, env);
                Expr::Iverson(Arc::new(rename_guard(g, env)), Arc::new(body))
            }
            Expr::Scale(q, e) => Expr::scale(q.clone(), self.go(e, env)),
            Expr::Sum(a, b) => {
                let a = self.go(a, env);
                let b = self.go(b, env);
                Expr::sum(a, b)
            }
            Expr::Quant(q) => {
                let name = if self.used.contains(&q.var) { self.fresh(&q.var) } else { q.var.clone() };
                self.used.insert(name.clone());
                self.avoid.insert(name.clone());
                self.binders.push(Binder { quantifier: q.quantifier, var: name.clone(), lo: q.lo.clone(), hi: q.hi.clone() });
                env.push((q.var.clone(), name));
                let m = self.go(&q.body, env);
                env.pop();
                m
            }
        }
    }
}

fn lookup<'a>(env: &'a Env, v: &str) -> Option<&'a String> {
    env.iter().rev().find(|(k, _)| k == v).map(|(_, n)| n)
}

fn rename_term(t: &Term, env: &Env) -> Term {
    if env.is_empty() {
        return t.clone();
    }
    match t {
        Term::Const(_) => t.clone(),
        Term::Var(v) => match lookup(env, v) {
            Some(n) => Term::Var(n.clone()),
            None => t.clone(),
        },
        Term::Add(a, b) => Term::add(rename_term(a, env), rename_term(b, env)),
        Term::Monus(a, b) => Term::monus(rename_term(a, env), rename_term(b, env)),
        Term::Mul(a, b) => Term::mul(rename_term(a, env), rename_term(b, env)),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| rename_term(a, env)).collect()),
    }
}

fn rename_guard(g: &Guard, env: &Env) -> Guard {
    if env.is_empty() {
        return g.clone();
    }
    match g {
        Guard::Bool(_) => g.clone(),
        Guard::Cmp(op, a, b) => Guard::Cmp(*op, rename_term(a, env), rename_term(b, env)),
        Guard::Not(h) => Guard::not(rename_guard(h, env)),
        Guard::And(a, b) => Guard::and(rename_guard(a, env), rename_guard(b, env)),
        Guard::Or(a, b) => Guard::or(rename_guard(a, env), rename_guard(b, env)),
        Guard::Implies(a, b) => Guard::implies(rename_guard(a, env), rename_guard(b, env)),
    }
}
