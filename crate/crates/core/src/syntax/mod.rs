//! Abstract syntax for terms, guards, expectations and pWhile programs.
//!
//! Every tree node owns its children through `Arc`, so sharing subtrees is
//! cheap and expectation transformers can reuse the post-expectation without
//! copying it.

mod lexer;
mod parser;
mod pretty;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::num::Rational;

pub use parser::{check_expr_functions, parse_expr, parse_guard, parse_program, parse_source, parse_term, ParseError};

/// Arithmetic over the non-negative reals. `Monus` is truncated subtraction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Rational),
    Var(String),
    Add(Arc<Term>, Arc<Term>),
    Monus(Arc<Term>, Arc<Term>),
    Mul(Arc<Term>, Arc<Term>),
    /// Application of a function symbol introduced by a domain declaration.
    App(String, Vec<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

/// Boolean guards. The core connectives are `<`, `!` and `&&`; everything
/// else is sugar that [`Guard::normalize`] removes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Guard {
    Bool(bool),
    Cmp(CmpOp, Term, Term),
    Not(Arc<Guard>),
    And(Arc<Guard>, Arc<Guard>),
    Or(Arc<Guard>, Arc<Guard>),
    Implies(Arc<Guard>, Arc<Guard>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Sup,
    Inf,
}

/// `sup var in [lo, hi]: body` or the `inf` variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quantified {
    pub quantifier: Quantifier,
    pub var: String,
    pub lo: Rational,
    pub hi: Rational,
    pub body: Expr,
}

/// Expectations: non-negative real valued functions of the state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Term(Term),
    /// `[g] * e`
    Iverson(Arc<Guard>, Arc<Expr>),
    /// `q * e` for a non-negative rational `q`
    Scale(Rational, Arc<Expr>),
    Sum(Arc<Expr>, Arc<Expr>),
    Quant(Arc<Quantified>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Loop {
    pub guard: Guard,
    pub invariant: Option<Expr>,
    pub body: Program,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Program {
    Skip,
    Diverge,
    Assign(String, Term),
    /// `x := unif`, optionally with a per-statement partition size `unif@N`.
    Unif { var: String, partition: Option<u32> },
    Observe(Guard),
    Ite(Guard, Box<Program>, Box<Program>),
    /// `{ left } [p] { right }`: run `left` with probability `p`.
    PChoice(Box<Program>, Rational, Box<Program>),
    Seq(Box<Program>, Box<Program>),
    While(Box<Loop>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    /// Non-negative reals.
    UReal,
    Real,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FuncDecl {
    pub name: String,
    pub params: Vec<Sort>,
    pub result: Sort,
}

/// `axiom name forall a, b . body`, quantifying over the non-negative reals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Axiom {
    pub name: String,
    pub vars: Vec<String>,
    pub body: Guard,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DomainDecl {
    pub name: String,
    pub funcs: Vec<FuncDecl>,
    pub axioms: Vec<Axiom>,
}

impl DomainDecl {
    pub fn func(&self, name: &str) -> Option<&FuncDecl> {
        self.funcs.iter().find(|f| f.name == name)
    }
}

/// A parsed file: optional `vars` header, domain declarations, and the program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Source {
    pub vars: Option<Vec<String>>,
    pub domains: Vec<DomainDecl>,
    pub program: Program,
}

impl Source {
    pub fn func(&self, name: &str) -> Option<&FuncDecl> {
        self.domains.iter().find_map(|d| d.func(name))
    }
}

// ---------------------------------------------------------------------------
// Constructors

impl Term {
    pub fn num(q: Rational) -> Term {
        Term::Const(q)
    }

    pub fn int(n: i64) -> Term {
        Term::Const(crate::num::int(n))
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Arc::new(a), Arc::new(b))
    }

    pub fn monus(a: Term, b: Term) -> Term {
        Term::Monus(Arc::new(a), Arc::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Arc::new(a), Arc::new(b))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Term::Const(q) => Some(q),
            _ => None,
        }
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Add(a, b) | Term::Monus(a, b) | Term::Mul(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.free_vars_into(out)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Term::Const(_) => false,
            Term::Var(v) => v == x,
            Term::Add(a, b) | Term::Monus(a, b) | Term::Mul(a, b) => a.mentions(x) || b.mentions(x),
            Term::App(_, args) => args.iter().any(|a| a.mentions(x)),
        }
    }

    pub fn functions_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) | Term::Var(_) => {}
            Term::Add(a, b) | Term::Monus(a, b) | Term::Mul(a, b) => {
                a.functions_into(out);
                b.functions_into(out);
            }
            Term::App(f, args) => {
                out.insert(f.clone());
                args.iter().for_each(|a| a.functions_into(out));
            }
        }
    }
}

impl Guard {
    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Guard {
        Guard::Cmp(op, a, b)
    }

    pub fn not(g: Guard) -> Guard {
        Guard::Not(Arc::new(g))
    }

    pub fn and(a: Guard, b: Guard) -> Guard {
        Guard::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Guard, b: Guard) -> Guard {
        Guard::Or(Arc::new(a), Arc::new(b))
    }

    pub fn implies(a: Guard, b: Guard) -> Guard {
        Guard::Implies(Arc::new(a), Arc::new(b))
    }

    /// Rewrites into the core connectives `<`, `!`, `&&`.
    pub fn normalize(&self) -> Guard {
        let lt = |a: &Term, b: &Term| Guard::Cmp(CmpOp::Lt, a.clone(), b.clone());
        match self {
            Guard::Bool(true) => Guard::not(lt(&Term::int(0), &Term::int(0))),
            Guard::Bool(false) => lt(&Term::int(0), &Term::int(0)),
            Guard::Cmp(op, a, b) => match op {
                CmpOp::Lt => lt(a, b),
                CmpOp::Le => Guard::not(lt(b, a)),
                CmpOp::Gt => lt(b, a),
                CmpOp::Ge => Guard::not(lt(a, b)),
                CmpOp::Eq => Guard::and(Guard::not(lt(a, b)), Guard::not(lt(b, a))),
                CmpOp::Ne => Guard::not(Guard::and(Guard::not(lt(a, b)), Guard::not(lt(b, a)))),
            },
            Guard::Not(g) => Guard::not(g.normalize()),
            Guard::And(a, b) => Guard::and(a.normalize(), b.normalize()),
            Guard::Or(a, b) => Guard::not(Guard::and(Guard::not(a.normalize()), Guard::not(b.normalize()))),
            Guard::Implies(a, b) => Guard::not(Guard::and(a.normalize(), Guard::not(b.normalize()))),
        }
    }

    pub fn is_core(&self) -> bool {
        match self {
            Guard::Cmp(CmpOp::Lt, _, _) => true,
            Guard::Not(g) => g.is_core(),
            Guard::And(a, b) => a.is_core() && b.is_core(),
            _ => false,
        }
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Guard::Bool(_) => {}
            Guard::Cmp(_, a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            Guard::Not(g) => g.free_vars_into(out),
            Guard::And(a, b) | Guard::Or(a, b) | Guard::Implies(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Guard::Bool(_) => false,
            Guard::Cmp(_, a, b) => a.mentions(x) || b.mentions(x),
            Guard::Not(g) => g.mentions(x),
            Guard::And(a, b) | Guard::Or(a, b) | Guard::Implies(a, b) => a.mentions(x) || b.mentions(x),
        }
    }

    pub fn functions_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Guard::Bool(_) => {}
            Guard::Cmp(_, a, b) => {
                a.functions_into(out);
                b.functions_into(out);
            }
            Guard::Not(g) => g.functions_into(out),
            Guard::And(a, b) | Guard::Or(a, b) | Guard::Implies(a, b) => {
                a.functions_into(out);
                b.functions_into(out);
            }
        }
    }
}

impl Expr {
    pub fn term(t: Term) -> Expr {
        Expr::Term(t)
    }

    pub fn constant(q: Rational) -> Expr {
        Expr::Term(Term::Const(q))
    }

    pub fn zero() -> Expr {
        Expr::Term(Term::int(0))
    }

    pub fn one() -> Expr {
        Expr::Term(Term::int(1))
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Term(Term::var(name))
    }

    pub fn iverson(g: Guard, e: Expr) -> Expr {
        Expr::Iverson(Arc::new(g), Arc::new(e))
    }

    /// `q * e`. Scaling a plain term folds into the term, which keeps the
    /// tree in the shape the parser produces.
    pub fn scale(q: Rational, e: Expr) -> Expr {
        if q.is_one() {
            return e;
        }
        if q.is_zero() {
            return Expr::zero();
        }
        match e {
            Expr::Term(t) => Expr::Term(Term::mul(Term::Const(q), t)),
            e => Expr::Scale(q, Arc::new(e)),
        }
    }

    /// `a + b`. Two plain terms fold into a term sum.
    pub fn sum(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Term(x), Expr::Term(y)) => Expr::Term(Term::add(x, y)),
            (a, b) => Expr::Sum(Arc::new(a), Arc::new(b)),
        }
    }

    /// Balanced sum of a non-empty list.
    pub fn sum_all(mut parts: Vec<Expr>) -> Expr {
        match parts.len() {
            0 => Expr::zero(),
            1 => parts.pop().unwrap(),
            n => {
                let right = parts.split_off(n / 2);
                Expr::sum(Expr::sum_all(parts), Expr::sum_all(right))
            }
        }
    }

    pub fn quant(quantifier: Quantifier, var: impl Into<String>, lo: Rational, hi: Rational, body: Expr) -> Expr {
        debug_assert!(lo <= hi, "empty quantifier range");
        Expr::Quant(Arc::new(Quantified { quantifier, var: var.into(), lo, hi, body }))
    }

    pub fn sup(var: impl Into<String>, lo: Rational, hi: Rational, body: Expr) -> Expr {
        Expr::quant(Quantifier::Sup, var, lo, hi, body)
    }

    pub fn inf(var: impl Into<String>, lo: Rational, hi: Rational, body: Expr) -> Expr {
        Expr::quant(Quantifier::Inf, var, lo, hi, body)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out, &mut Vec::new());
        out
    }

    fn free_vars_into(&self, out: &mut BTreeSet<String>, bound: &mut Vec<String>) {
        match self {
            Expr::Term(t) => {
                let mut vs = BTreeSet::new();
                t.free_vars_into(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Expr::Iverson(g, e) => {
                let mut vs = BTreeSet::new();
                g.free_vars_into(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
                e.free_vars_into(out, bound);
            }
            Expr::Scale(_, e) => e.free_vars_into(out, bound),
            Expr::Sum(a, b) => {
                a.free_vars_into(out, bound);
                b.free_vars_into(out, bound);
            }
            Expr::Quant(q) => {
                bound.push(q.var.clone());
                q.body.free_vars_into(out, bound);
                bound.pop();
            }
        }
    }

    /// Whether `x` occurs free.
    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Expr::Term(t) => t.mentions(x),
            Expr::Iverson(g, e) => g.mentions(x) || e.mentions(x),
            Expr::Scale(_, e) => e.mentions(x),
            Expr::Sum(a, b) => a.mentions(x) || b.mentions(x),
            Expr::Quant(q) => q.var != x && q.body.mentions(x),
        }
    }

    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Quant(q) = e {
                out.insert(q.var.clone());
            }
        });
        out
    }

    /// Every variable name appearing anywhere, free or bound.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = self.bound_vars();
        self.visit(&mut |e| match e {
            Expr::Term(t) => t.free_vars_into(&mut out),
            Expr::Iverson(g, _) => g.free_vars_into(&mut out),
            _ => {}
        });
        out
    }

    pub fn functions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| match e {
            Expr::Term(t) => t.functions_into(&mut out),
            Expr::Iverson(g, _) => g.functions_into(&mut out),
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Term(_) => {}
            Expr::Iverson(_, e) | Expr::Scale(_, e) => e.visit(f),
            Expr::Sum(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Quant(q) => q.body.visit(f),
        }
    }

    pub fn has_quantifier(&self, which: Quantifier) -> bool {
        match self {
            Expr::Term(_) => false,
            Expr::Iverson(_, e) | Expr::Scale(_, e) => e.has_quantifier(which),
            Expr::Sum(a, b) => a.has_quantifier(which) || b.has_quantifier(which),
            Expr::Quant(q) => q.quantifier == which || q.body.has_quantifier(which),
        }
    }

    pub fn is_sup_free(&self) -> bool {
        !self.has_quantifier(Quantifier::Sup)
    }

    pub fn is_inf_free(&self) -> bool {
        !self.has_quantifier(Quantifier::Inf)
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.is_sup_free() && self.is_inf_free()
    }

    /// Number of nodes when the tree is fully expanded (shared subtrees
    /// counted once per occurrence). Saturates at `u64::MAX`.
    pub fn tree_size(&self) -> u64 {
        let mut memo = std::collections::HashMap::new();
        tree_size(self, &mut memo)
    }
}

fn tree_size(e: &Expr, memo: &mut std::collections::HashMap<*const Expr, u64>) -> u64 {
    let child = |c: &Arc<Expr>, memo: &mut std::collections::HashMap<*const Expr, u64>| {
        let key = Arc::as_ptr(c);
        if let Some(&n) = memo.get(&key) {
            return n;
        }
        let n = tree_size(c, memo);
        memo.insert(key, n);
        n
    };
    match e {
        Expr::Term(t) => term_size(t),
        Expr::Iverson(_, b) | Expr::Scale(_, b) => child(b, memo).saturating_add(1),
        Expr::Sum(a, b) => child(a, memo).saturating_add(child(b, memo)).saturating_add(1),
        Expr::Quant(q) => tree_size(&q.body, memo).saturating_add(1),
    }
}

fn term_size(t: &Term) -> u64 {
    match t {
        Term::Const(_) | Term::Var(_) => 1,
        Term::Add(a, b) | Term::Monus(a, b) | Term::Mul(a, b) => term_size(a).saturating_add(term_size(b)).saturating_add(1),
        Term::App(_, args) => args.iter().map(term_size).fold(1u64, |a, b| a.saturating_add(b)),
    }
}

impl Program {
    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence; `skip` for an empty list.
    pub fn seq_all(parts: Vec<Program>) -> Program {
        let mut it = parts.into_iter().rev();
        let Some(mut acc) = it.next() else { return Program::Skip };
        for p in it {
            acc = Program::seq(p, acc);
        }
        acc
    }

    pub fn ite(g: Guard, a: Program, b: Program) -> Program {
        Program::Ite(g, Box::new(a), Box::new(b))
    }

    pub fn pchoice(a: Program, p: Rational, b: Program) -> Program {
        Program::PChoice(Box::new(a), p, Box::new(b))
    }

    pub fn while_loop(guard: Guard, invariant: Option<Expr>, body: Program) -> Program {
        Program::While(Box::new(Loop { guard, invariant, body }))
    }

    pub fn unif(var: impl Into<String>) -> Program {
        Program::Unif { var: var.into(), partition: None }
    }

    pub fn assign(var: impl Into<String>, t: Term) -> Program {
        Program::Assign(var.into(), t)
    }

    pub fn is_loop_free(&self) -> bool {
        match self {
            Program::While(_) => false,
            Program::Ite(_, a, b) | Program::PChoice(a, _, b) | Program::Seq(a, b) => a.is_loop_free() && b.is_loop_free(),
            _ => true,
        }
    }

    /// All program variables: assigned, sampled or read.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.vars_into(&mut out);
        out
    }

    fn vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Program::Skip | Program::Diverge => {}
            Program::Assign(x, t) => {
                out.insert(x.clone());
                t.free_vars_into(out);
            }
            Program::Unif { var, .. } => {
                out.insert(var.clone());
            }
            Program::Observe(g) => g.free_vars_into(out),
            Program::Ite(g, a, b) => {
                g.free_vars_into(out);
                a.vars_into(out);
                b.vars_into(out);
            }
            Program::PChoice(a, _, b) | Program::Seq(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Program::While(l) => {
                l.guard.free_vars_into(out);
                l.body.vars_into(out);
            }
        }
    }

    pub fn functions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.functions_into(&mut out);
        out
    }

    fn functions_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Program::Skip | Program::Diverge | Program::Unif { .. } => {}
            Program::Assign(_, t) => t.functions_into(out),
            Program::Observe(g) => g.functions_into(out),
            Program::Ite(g, a, b) => {
                g.functions_into(out);
                a.functions_into(out);
                b.functions_into(out);
            }
            Program::PChoice(a, _, b) | Program::Seq(a, b) => {
                a.functions_into(out);
                b.functions_into(out);
            }
            Program::While(l) => {
                l.guard.functions_into(out);
                if let Some(i) = &l.invariant {
                    out.extend(i.functions());
                }
                l.body.functions_into(out);
            }
        }
    }

    /// Flattens nested sequences into a statement list.
    pub fn statements(&self) -> Vec<&Program> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Program, out: &mut Vec<&'a Program>) {
            match p {
                Program::Seq(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                p => out.push(p),
            }
        }
        go(self, &mut out);
        out
    }

    /// The loops of the program in textual order, not descending into loop bodies.
    pub fn loops(&self) -> Vec<&Loop> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Program, out: &mut Vec<&'a Loop>) {
            match p {
                Program::While(l) => out.push(l),
                Program::Ite(_, a, b) | Program::PChoice(a, _, b) | Program::Seq(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty::term(self))
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty::guard(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty::expr(self))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty::program(self))
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty::source(self))
    }
}

impl fmt::Display for DomainDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty::domain(self))
    }
}

pub use pretty::{expr as pretty_expr, program as pretty_program, source as pretty_source};
