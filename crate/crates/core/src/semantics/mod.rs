//! Evaluation of terms, guards and expectations on concrete states.

mod pnf;
mod subst;

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::num::{monus, Rational};
use crate::syntax::{CmpOp, Expr, Guard, Quantifier, Term};

pub use pnf::{prenex, prenex_avoiding, to_pnf, Binder, Prenex};
pub use subst::{fresh_name, rename_free, substitute, substitute_guard, substitute_term};

/// Variable valuation. Values are non-negative wherever they come from a
/// program; the evaluator does not enforce it.
pub type State = BTreeMap<String, Rational>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("variable `{0}` has no value in the state")]
    MissingVar(String),
    #[error("function `{0}` has no interpretation")]
    Uninterpreted(String),
}

/// Result of evaluating an expectation. Quantified expectations are sampled,
/// so `exact` is false and `lo == hi` is the sampled estimate: it never
/// exceeds a supremum and is never below an infimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
    pub exact: bool,
}

impl Enclosure {
    pub fn value(&self) -> &Rational {
        &self.lo
    }
}

pub fn eval_term(t: &Term, s: &State) -> Result<Rational, EvalError> {
    Ok(match t {
        Term::Const(q) => q.clone(),
        Term::Var(v) => s.get(v).cloned().ok_or_else(|| EvalError::MissingVar(v.clone()))?,
        Term::Add(a, b) => eval_term(a, s)? + eval_term(b, s)?,
        Term::Monus(a, b) => monus(&eval_term(a, s)?, &eval_term(b, s)?),
        Term::Mul(a, b) => {
            let x = eval_term(a, s)?;
            if x.is_zero() {
                // Still demand the other operand's variables.
                eval_term(b, s)?;
                return Ok(x);
            }
            x * eval_term(b, s)?
        }
        Term::App(f, _) => return Err(EvalError::Uninterpreted(f.clone())),
    })
}

pub fn eval_guard(g: &Guard, s: &State) -> Result<bool, EvalError> {
    Ok(match g {
        Guard::Bool(b) => *b,
        Guard::Cmp(op, a, b) => {
            let (x, y) = (eval_term(a, s)?, eval_term(b, s)?);
            match op {
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
            }
        }
        Guard::Not(g) => !eval_guard(g, s)?,
        Guard::And(a, b) => eval_guard(a, s)? & eval_guard(b, s)?,
        Guard::Or(a, b) => eval_guard(a, s)? | eval_guard(b, s)?,
        Guard::Implies(a, b) => !eval_guard(a, s)? | eval_guard(b, s)?,
    })
}

/// Evaluates `f` at `s`. Quantifiers are approximated by sampling `grid + 1`
/// equally spaced points of their range, endpoints included.
pub fn eval_expr(f: &Expr, s: &State, grid: u32) -> Result<Enclosure, EvalError> {
    let mut st = s.clone();
    let v = eval_rec(f, &mut st, grid.max(1))?;
    Ok(Enclosure { hi: v.clone(), lo: v, exact: f.is_quantifier_free() })
}

/// Exact value of a quantifier-free expectation; sampled otherwise.
pub fn eval(f: &Expr, s: &State, grid: u32) -> Result<Rational, EvalError> {
    eval_expr(f, s, grid).map(|e| e.lo)
}

fn eval_rec(f: &Expr, s: &mut State, grid: u32) -> Result<Rational, EvalError> {
    Ok(match f {
        Expr::Term(t) => eval_term(t, s)?,
        Expr::Iverson(g, e) => {
            if eval_guard(g, s)? {
                eval_rec(e, s, grid)?
            } else {
                Rational::zero()
            }
        }
        Expr::Scale(q, e) => q * eval_rec(e, s, grid)?,
        Expr::Sum(a, b) => eval_rec(a, s, grid)? + eval_rec(b, s, grid)?,
        Expr::Quant(q) => {
            let saved = s.get(&q.var).cloned();
            let width = &q.hi - &q.lo;
            let mut best: Option<Rational> = None;
            for k in 0..=grid {
                let point = if k == grid { q.hi.clone() } else { &q.lo + &width * Rational::new(k.into(), grid.into()) };
                s.insert(q.var.clone(), point);
                let v = eval_rec(&q.body, s, grid)?;
                best = Some(match (best, q.quantifier) {
                    (None, _) => v,
                    (Some(b), Quantifier::Sup) => b.max(v),
                    (Some(b), Quantifier::Inf) => b.min(v),
                });
                if q.lo == q.hi {
                    break;
                }
            }
            match saved {
                Some(old) => s.insert(q.var.clone(), old),
                None => s.remove(&q.var),
            };
            best.expect("at least one sample")
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    QuantifierFree,
    SupFree,
    InfFree,
    Mixed,
}

pub fn classify(f: &Expr) -> Classification {
    match (f.has_quantifier(Quantifier::Sup), f.has_quantifier(Quantifier::Inf)) {
        (false, false) => Classification::QuantifierFree,
        (false, true) => Classification::SupFree,
        (true, false) => Classification::InfFree,
        (true, true) => Classification::Mixed,
    }
}

/// Builds a state from `(name, value)` pairs.
pub fn state<'a>(pairs: impl IntoIterator<Item = (&'a str, Rational)>) -> State {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};
    use crate::syntax::{parse_expr, parse_guard, parse_term};
    use proptest::prelude::*;

    fn st(pairs: &[(&str, Rational)]) -> State {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn term_examples() {
        let t = parse_term("x - y").unwrap();
        assert_eq!(eval_term(&t, &st(&[("x", int(1)), ("y", int(3))])).unwrap(), int(0));
        let t = parse_term("2 * x + 1/2").unwrap();
        assert_eq!(eval_term(&t, &st(&[("x", ratio(3, 4))])).unwrap(), int(2));
        let t = parse_term("(M - i) + 1").unwrap();
        assert_eq!(eval_term(&t, &st(&[("M", int(5)), ("i", int(2))])).unwrap(), int(4));
    }

    #[test]
    fn missing_variable() {
        let t = parse_term("x + z").unwrap();
        assert_eq!(eval_term(&t, &st(&[("x", int(1))])), Err(EvalError::MissingVar("z".into())));
    }

    #[test]
    fn guard_examples() {
        let g = parse_guard("x < 1 && !(x < 0)").unwrap();
        assert!(eval_guard(&g, &st(&[("x", ratio(1, 2))])).unwrap());
        let g = parse_guard("x * x + y * y <= 1").unwrap();
        assert!(!eval_guard(&g, &st(&[("x", int(1)), ("y", int(1))])).unwrap());
        let g = parse_guard("x < x").unwrap();
        assert!(!eval_guard(&g, &st(&[("x", int(7))])).unwrap());
    }

    #[test]
    fn expr_examples() {
        let f = parse_expr("sup v in [0,5]: [w == v*v] * v").unwrap();
        let e = eval_expr(&f, &st(&[("w", int(25))]), 5).unwrap();
        assert_eq!(e.lo, int(5));
        assert!(!e.exact);
        let f = parse_expr("[x >= 1/2] * 1").unwrap();
        let e = eval_expr(&f, &st(&[("x", ratio(1, 2))]), 1).unwrap();
        assert_eq!(e, Enclosure { lo: int(1), hi: int(1), exact: true });
        let f = parse_expr("inf v in [0,1]: v + x").unwrap();
        assert_eq!(eval(&f, &st(&[("x", int(2))]), 1).unwrap(), int(2));
    }

    #[test]
    fn binder_does_not_leak() {
        let f = parse_expr("x + (sup x in [0,1]: x)").unwrap();
        assert_eq!(eval(&f, &st(&[("x", int(3))]), 4).unwrap(), int(4));
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&parse_expr("x + 1").unwrap()), Classification::QuantifierFree);
        assert_eq!(classify(&parse_expr("sup v in [0,1]: v").unwrap()), Classification::InfFree);
        assert_eq!(classify(&parse_expr("inf v in [0,1]: v").unwrap()), Classification::SupFree);
        assert_eq!(
            classify(&parse_expr("(sup v in [0,1]: v) + (inf w in [0,1]: w)").unwrap()),
            Classification::Mixed
        );
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (0u32..5).prop_map(|n| Term::int(n as i64)),
            prop::sample::select(vec!["x", "y"]).prop_map(Term::var),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::monus(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Term::mul(a, b)),
            ]
        })
    }

    fn arb_guard() -> impl Strategy<Value = Guard> {
        let ops = prop::sample::select(vec![CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Ge]);
        let leaf = prop_oneof![
            (ops, arb_term(), arb_term()).prop_map(|(o, a, b)| Guard::Cmp(o, a, b)),
            any::<bool>().prop_map(Guard::Bool),
        ];
        leaf.prop_recursive(3, 10, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Guard::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Guard::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Guard::or(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Guard::implies(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn normalization_preserves_guard_value(g in arb_guard(), x in 0u32..6, y in 0u32..6) {
            let s = st(&[("x", ratio(x as i64, 2)), ("y", ratio(y as i64, 3))]);
            let n = g.normalize();
            prop_assert!(n.is_core());
            prop_assert_eq!(eval_guard(&g, &s).unwrap(), eval_guard(&n, &s).unwrap());
        }
    }
}
