//! Capture-avoiding substitution.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::syntax::{Expr, Guard, Quantified, Term};

/// `base#k` for the smallest `k >= 1` not in `taken`. The parser rejects `#`,
/// so generated names never collide with user names.
pub fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    let stem = base.split('#').next().unwrap_or(base);
    (1..).map(|k| format!("{stem}#{k}")).find(|n| !taken.contains(n)).expect("unbounded")
}

/// `t[x/a]`
pub fn substitute_term(t: &Term, x: &str, a: &Term) -> Term {
    term_sub(t, x, a).unwrap_or_else(|| t.clone())
}

fn term_sub(t: &Term, x: &str, a: &Term) -> Option<Term> {
    match t {
        Term::Const(_) => None,
        Term::Var(v) => (v == x).then(|| a.clone()),
        Term::Add(l, r) | Term::Monus(l, r) | Term::Mul(l, r) => {
            let (nl, nr) = (term_sub(l, x, a), term_sub(r, x, a));
            if nl.is_none() && nr.is_none() {
                return None;
            }
            let l = nl.map(Arc::new).unwrap_or_else(|| l.clone());
            let r = nr.map(Arc::new).unwrap_or_else(|| r.clone());
            Some(match t {
                Term::Add(..) => Term::Add(l, r),
                Term::Monus(..) => Term::Monus(l, r),
                _ => Term::Mul(l, r),
            })
        }
        Term::App(f, args) => {
            let new: Vec<Option<Term>> = args.iter().map(|u| term_sub(u, x, a)).collect();
            if new.iter().all(Option::is_none) {
                return None;
            }
            Some(Term::App(f.clone(), new.into_iter().zip(args).map(|(n, o)| n.unwrap_or_else(|| o.clone())).collect()))
        }
    }
}

pub fn substitute_guard(g: &Guard, x: &str, a: &Term) -> Guard {
    guard_sub(g, x, a).unwrap_or_else(|| g.clone())
}

fn guard_sub(g: &Guard, x: &str, a: &Term) -> Option<Guard> {
    match g {
        Guard::Bool(_) => None,
        Guard::Cmp(op, l, r) => {
            let (nl, nr) = (term_sub(l, x, a), term_sub(r, x, a));
            if nl.is_none() && nr.is_none() {
                return None;
            }
            Some(Guard::Cmp(*op, nl.unwrap_or_else(|| l.clone()), nr.unwrap_or_else(|| r.clone())))
        }
        Guard::Not(h) => guard_sub(h, x, a).map(Guard::not),
        Guard::And(l, r) | Guard::Or(l, r) | Guard::Implies(l, r) => {
            let (nl, nr) = (guard_sub(l, x, a), guard_sub(r, x, a));
            if nl.is_none() && nr.is_none() {
                return None;
            }
            let l = nl.map(Arc::new).unwrap_or_else(|| l.clone());
            let r = nr.map(Arc::new).unwrap_or_else(|| r.clone());
            Some(match g {
                Guard::And(..) => Guard::And(l, r),
                Guard::Or(..) => Guard::Or(l, r),
                _ => Guard::Implies(l, r),
            })
        }
    }
}

/// `f[x/a]`, renaming binders of `f` that would capture variables of `a`.
pub fn substitute(f: &Expr, x: &str, a: &Term) -> Expr {
    let mut s = Subst { x, a, a_vars: a.free_vars(), taken: None, root: f, memo: HashMap::new(), keep: Vec::new() };
    s.expr(f).unwrap_or_else(|| f.clone())
}

/// Renames the free occurrences of `from` to `to` (which must be unused in `f`).
pub fn rename_free(f: &Expr, from: &str, to: &str) -> Expr {
    substitute(f, from, &Term::Var(to.to_string()))
}

struct Subst<'a> {
    x: &'a str,
    a: &'a Term,
    a_vars: BTreeSet<String>,
    /// Names to avoid when renaming; computed on first capture.
    taken: Option<BTreeSet<String>>,
    root: &'a Expr,
    /// Shared subtrees are rewritten once.
    memo: HashMap<*const Expr, Option<Arc<Expr>>>,
    /// Renamed bodies stay alive so memo keys are never reused addresses.
    keep: Vec<Expr>,
}

impl Subst<'_> {
    fn child(&mut self, c: &Arc<Expr>) -> Option<Arc<Expr>> {
        let key = Arc::as_ptr(c);
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let r = self.expr(c).map(Arc::new);
        self.memo.insert(key, r.clone());
        r
    }

    fn expr(&mut self, f: &Expr) -> Option<Expr> {
        match f {
            Expr::Term(t) => term_sub(t, self.x, self.a).map(Expr::Term),
            Expr::Iverson(g, e) => {
                let ng = guard_sub(g, self.x, self.a);
                let ne = self.child(e);
                if ng.is_none() && ne.is_none() {
                    return None;
                }
                Some(Expr::Iverson(ng.map(Arc::new).unwrap_or_else(|| g.clone()), ne.unwrap_or_else(|| e.clone())))
            }
            Expr::Scale(q, e) => self.child(e).map(|e| Expr::Scale(q.clone(), e)),
            Expr::Sum(l, r) => {
                let (nl, nr) = (self.child(l), self.child(r));
                if nl.is_none() && nr.is_none() {
                    return None;
                }
                Some(Expr::Sum(nl.unwrap_or_else(|| l.clone()), nr.unwrap_or_else(|| r.clone())))
            }
            Expr::Quant(q) => {
                if q.var == self.x || !q.body.mentions(self.x) {
                    return None;
                }
                if self.a_vars.contains(&q.var) {
                    let taken = self.taken.get_or_insert_with(|| {
                        let mut t = self.root.all_names();
                        t.extend(self.a_vars.iter().cloned());
                        t.insert(self.x.to_string());
                        t
                    });
                    let fresh = fresh_name(&q.var, taken);
                    taken.insert(fresh.clone());
                    let renamed = rename_free(&q.body, &q.var, &fresh);
                    let body = self.expr(&renamed).unwrap_or_else(|| renamed.clone());
                    self.keep.push(renamed);
                    return Some(Expr::Quant(Arc::new(Quantified { var: fresh, body, ..(**q).clone() })));
                }
                let body = self.expr(&q.body)?;
                Some(Expr::Quant(Arc::new(Quantified { body, ..(**q).clone() })))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio, Rational};
    use crate::semantics::{eval, State};
    use crate::syntax::parse_expr;

    #[test]
    fn no_capture_needed() {
        let f = parse_expr("[x >= 1/2]").unwrap();
        let g = substitute(&f, "x", &Term::add(Term::var("y"), Term::var("y")));
        assert_eq!(g, parse_expr("[y + y >= 1/2]").unwrap());
    }

    #[test]
    fn binder_is_renamed() {
        let f = parse_expr("sup v in [0,1]: v + x").unwrap();
        let g = substitute(&f, "x", &Term::var("v"));
        match &g {
            Expr::Quant(q) => {
                assert_eq!(q.var, "v#1");
                assert_eq!(q.body, Expr::Term(Term::add(Term::var("v#1"), Term::var("v"))));
            }
            other => panic!("unexpected {other:?}"),
        }
        for k in 0..20 {
            let s: State = [("v".to_string(), ratio(k, 7)), ("x".to_string(), int(3))].into();
            let mut s2 = s.clone();
            s2.insert("x".into(), s["v"].clone());
            assert_eq!(eval(&g, &s, 4).unwrap(), eval(&f, &s2, 4).unwrap());
        }
    }

    #[test]
    fn identity_substitution() {
        let f = parse_expr("x + (sup x in [0,1]: x * y) + [x < y] * (inf y in [0, 2]: x + y)").unwrap();
        assert_eq!(substitute(&f, "x", &Term::var("x")), f);
    }

    #[test]
    fn bound_variable_is_untouched() {
        let f = parse_expr("sup x in [0,1]: x").unwrap();
        assert_eq!(substitute(&f, "x", &Term::Const(Rational::from_integer(5.into()))), f);
    }

    #[test]
    fn fresh_names_skip_taken() {
        let taken: BTreeSet<String> = ["v#1".to_string(), "v#2".to_string()].into();
        assert_eq!(fresh_name("v#1", &taken), "v#3");
    }
}
