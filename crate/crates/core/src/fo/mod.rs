//! First-order real arithmetic: formulas, the expectation encoding,
//! quantitative entailment queries, SMT-LIB emission and the solver driver.

mod encode;
mod interval;
mod poly;
pub mod sexp;
pub mod smtlib;
mod solver;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::num::Rational;
use crate::syntax::CmpOp;

pub use encode::{
    encode_expr, encode_guard_fo, encode_qf, entailment_formula, EncodeCtx, EntailmentQuery, FoError,
};
pub use interval::Interval;
pub use smtlib::{emit_query, emit_smtlib, Dialect, Emitted, Query};
pub use solver::{
    check_entailment, check_one_bounded, check_validity, relax_inf, solve, value_of, EntailmentOutcome, Model,
    SatResult, SolverConfig, SolverError, SolverRun, SolverVerdict,
};

/// Real-valued terms with true subtraction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FoTerm {
    Num(Rational),
    Var(String),
    Add(Vec<FoTerm>),
    Sub(Box<FoTerm>, Box<FoTerm>),
    Mul(Vec<FoTerm>),
    Ite(Box<Fo>, Box<FoTerm>, Box<FoTerm>),
    App(String, Vec<FoTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Fo {
    Bool(bool),
    Cmp(CmpOp, FoTerm, FoTerm),
    Not(Box<Fo>),
    And(Vec<Fo>),
    Or(Vec<Fo>),
    Implies(Box<Fo>, Box<Fo>),
    Exists(Vec<String>, Box<Fo>),
    Forall(Vec<String>, Box<Fo>),
}

/// Pairs `ite(c, a, 0) + ite(not c, b, 0)` into `ite(c, a, b)` and
/// `ite(c, a, 0) + ite(c, b, 0)` into `ite(c, a + b, 0)`. z3 otherwise
/// case splits on every summand.
fn merge_guarded(parts: Vec<FoTerm>) -> Vec<FoTerm> {
    let mut out: Vec<FoTerm> = Vec::with_capacity(parts.len());
    let mut seen: std::collections::HashMap<Fo, usize> = std::collections::HashMap::new();
    for p in parts {
        let FoTerm::Ite(c, a, z) = p else {
            out.push(p);
            continue;
        };
        let hit = if z.is_zero() { seen.get(&c).or_else(|| seen.get(&Fo::not((*c).clone()))).copied() } else { None };
        let Some(i) = hit else {
            seen.entry((*c).clone()).or_insert(out.len());
            out.push(FoTerm::Ite(c, a, z));
            continue;
        };
        let FoTerm::Ite(d, x, e) = std::mem::replace(&mut out[i], FoTerm::zero()) else { unreachable!() };
        out[i] = if *d == *c {
            FoTerm::Ite(d, Box::new(FoTerm::add(vec![*x, *a])), e)
        } else {
            FoTerm::Ite(d, x, Box::new(FoTerm::add(vec![*e, *a])))
        };
    }
    out
}

impl FoTerm {
    pub fn var(v: impl Into<String>) -> FoTerm {
        FoTerm::Var(v.into())
    }

    pub fn zero() -> FoTerm {
        FoTerm::Num(Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FoTerm::Num(q) if q.is_zero())
    }

    /// Sum with zero summands dropped and constants merged.
    pub fn add(parts: Vec<FoTerm>) -> FoTerm {
        let mut konst = Rational::zero();
        let mut out = Vec::new();
        for p in parts {
            match p {
                FoTerm::Num(q) => konst += q,
                FoTerm::Add(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        let mut out = merge_guarded(out);
        if !konst.is_zero() {
            out.push(FoTerm::Num(konst));
        }
        match out.len() {
            0 => FoTerm::zero(),
            1 => out.pop().unwrap(),
            _ => FoTerm::Add(out),
        }
    }

    /// Product; zero absorbs, constants merge.
    pub fn mul(parts: Vec<FoTerm>) -> FoTerm {
        let mut konst: Rational = num_traits::One::one();
        let mut out = Vec::new();
        for p in parts {
            match p {
                FoTerm::Num(q) => konst *= q,
                p => out.push(p),
            }
        }
        if konst.is_zero() {
            return FoTerm::zero();
        }
        if !num_traits::One::is_one(&konst) || out.is_empty() {
            out.insert(0, FoTerm::Num(konst));
        }
        match out.len() {
            1 => out.pop().unwrap(),
            _ => FoTerm::Mul(out),
        }
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            FoTerm::Num(_) => {}
            FoTerm::Var(v) => {
                out.insert(v.clone());
            }
            FoTerm::Add(xs) | FoTerm::Mul(xs) | FoTerm::App(_, xs) => xs.iter().for_each(|x| x.free_vars_into(out)),
            FoTerm::Sub(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            FoTerm::Ite(c, a, b) => {
                c.free_vars_into(out);
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
        }
    }

    pub fn has_apps(&self) -> bool {
        match self {
            FoTerm::Num(_) | FoTerm::Var(_) => false,
            FoTerm::App(..) => true,
            FoTerm::Add(xs) | FoTerm::Mul(xs) => xs.iter().any(FoTerm::has_apps),
            FoTerm::Sub(a, b) => a.has_apps() || b.has_apps(),
            FoTerm::Ite(c, a, b) => c.has_apps() || a.has_apps() || b.has_apps(),
        }
    }

    /// Exact value; `None` if a variable is unassigned or a function symbol occurs.
    pub fn eval(&self, m: &BTreeMap<String, Rational>) -> Option<Rational> {
        Some(match self {
            FoTerm::Num(q) => q.clone(),
            FoTerm::Var(v) => m.get(v)?.clone(),
            FoTerm::Add(xs) => {
                let mut s = Rational::zero();
                for x in xs {
                    s += x.eval(m)?;
                }
                s
            }
            FoTerm::Mul(xs) => {
                let mut s: Rational = num_traits::One::one();
                for x in xs {
                    s *= x.eval(m)?;
                }
                s
            }
            FoTerm::Sub(a, b) => a.eval(m)? - b.eval(m)?,
            FoTerm::Ite(c, a, b) => {
                if c.eval(m)? {
                    a.eval(m)?
                } else {
                    b.eval(m)?
                }
            }
            FoTerm::App(..) => return None,
        })
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> u64 {
        match self {
            FoTerm::Num(_) | FoTerm::Var(_) => 1,
            FoTerm::Add(xs) | FoTerm::Mul(xs) | FoTerm::App(_, xs) => 1 + xs.iter().map(FoTerm::size).sum::<u64>(),
            FoTerm::Sub(a, b) => 1 + a.size() + b.size(),
            FoTerm::Ite(c, a, b) => 1 + c.size() + a.size() + b.size(),
        }
    }
}

impl Fo {
    pub fn cmp(op: CmpOp, a: FoTerm, b: FoTerm) -> Fo {
        Fo::Cmp(op, a, b)
    }

    pub fn and(parts: Vec<Fo>) -> Fo {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Fo::Bool(true) => {}
                Fo::Bool(false) => return Fo::Bool(false),
                Fo::And(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Fo::Bool(true),
            1 => out.pop().unwrap(),
            _ => Fo::And(out),
        }
    }

    pub fn or(parts: Vec<Fo>) -> Fo {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Fo::Bool(false) => {}
                Fo::Bool(true) => return Fo::Bool(true),
                Fo::Or(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Fo::Bool(false),
            1 => out.pop().unwrap(),
            _ => Fo::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Fo) -> Fo {
        match f {
            Fo::Bool(b) => Fo::Bool(!b),
            Fo::Not(inner) => *inner,
            f => Fo::Not(Box::new(f)),
        }
    }

    pub fn implies(a: Fo, b: Fo) -> Fo {
        match (a, b) {
            (Fo::Bool(true), b) => b,
            (Fo::Bool(false), _) | (_, Fo::Bool(true)) => Fo::Bool(true),
            (a, b) => Fo::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn forall(vars: Vec<String>, body: Fo) -> Fo {
        if vars.is_empty() {
            body
        } else {
            Fo::Forall(vars, Box::new(body))
        }
    }

    pub fn exists(vars: Vec<String>, body: Fo) -> Fo {
        if vars.is_empty() {
            body
        } else {
            Fo::Exists(vars, Box::new(body))
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Fo::Bool(_) => {}
            Fo::Cmp(_, a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            Fo::Not(f) => f.free_vars_into(out),
            Fo::And(fs) | Fo::Or(fs) => fs.iter().for_each(|f| f.free_vars_into(out)),
            Fo::Implies(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            Fo::Exists(vs, f) | Fo::Forall(vs, f) => {
                let mut inner = BTreeSet::new();
                f.free_vars_into(&mut inner);
                out.extend(inner.into_iter().filter(|v| !vs.contains(v)));
            }
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Fo::Bool(_) => true,
            Fo::Cmp(_, a, b) => term_qf(a) && term_qf(b),
            Fo::Not(f) => f.is_quantifier_free(),
            Fo::And(fs) | Fo::Or(fs) => fs.iter().all(Fo::is_quantifier_free),
            Fo::Implies(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Fo::Exists(..) | Fo::Forall(..) => false,
        }
    }

    pub fn has_apps(&self) -> bool {
        match self {
            Fo::Bool(_) => false,
            Fo::Cmp(_, a, b) => a.has_apps() || b.has_apps(),
            Fo::Not(f) | Fo::Exists(_, f) | Fo::Forall(_, f) => f.has_apps(),
            Fo::And(fs) | Fo::Or(fs) => fs.iter().any(Fo::has_apps),
            Fo::Implies(a, b) => a.has_apps() || b.has_apps(),
        }
    }

    /// Truth value of a quantifier-free, function-free formula.
    pub fn eval(&self, m: &BTreeMap<String, Rational>) -> Option<bool> {
        Some(match self {
            Fo::Bool(b) => *b,
            Fo::Cmp(op, a, b) => {
                let (x, y) = (a.eval(m)?, b.eval(m)?);
                match op {
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Eq => x == y,
                    CmpOp::Ne => x != y,
                    CmpOp::Gt => x > y,
                    CmpOp::Ge => x >= y,
                }
            }
            Fo::Not(f) => !f.eval(m)?,
            Fo::And(fs) => {
                for f in fs {
                    if !f.eval(m)? {
                        return Some(false);
                    }
                }
                true
            }
            Fo::Or(fs) => {
                for f in fs {
                    if f.eval(m)? {
                        return Some(true);
                    }
                }
                false
            }
            Fo::Implies(a, b) => !a.eval(m)? || b.eval(m)?,
            Fo::Exists(..) | Fo::Forall(..) => return None,
        })
    }

    pub fn size(&self) -> u64 {
        match self {
            Fo::Bool(_) => 1,
            Fo::Cmp(_, a, b) => 1 + a.size() + b.size(),
            Fo::Not(f) | Fo::Exists(_, f) | Fo::Forall(_, f) => 1 + f.size(),
            Fo::And(fs) | Fo::Or(fs) => 1 + fs.iter().map(Fo::size).sum::<u64>(),
            Fo::Implies(a, b) => 1 + a.size() + b.size(),
        }
    }
}

fn term_qf(t: &FoTerm) -> bool {
    match t {
        FoTerm::Num(_) | FoTerm::Var(_) => true,
        FoTerm::Add(xs) | FoTerm::Mul(xs) | FoTerm::App(_, xs) => xs.iter().all(term_qf),
        FoTerm::Sub(a, b) => term_qf(a) && term_qf(b),
        FoTerm::Ite(c, a, b) => c.is_quantifier_free() && term_qf(a) && term_qf(b),
    }
}
