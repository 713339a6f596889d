//! SMT-LIB 2 emission with shared-subterm definitions.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use num_traits::{One, Signed};

use super::{Fo, FoTerm};
use crate::num::Rational;
use crate::syntax::{Axiom, CmpOp, DomainDecl, Sort};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Dialect {
    /// z3 with a tactic that suits the quantifier-free nonlinear queries.
    #[default]
    Z3,
    Cvc5,
    /// Plain SMT-LIB, `(check-sat)` only.
    Generic,
}

impl std::str::FromStr for Dialect {
    type Err = String;
    fn from_str(s: &str) -> Result<Dialect, String> {
        match s {
            "z3" => Ok(Dialect::Z3),
            "cvc5" => Ok(Dialect::Cvc5),
            "generic" | "smtlib" => Ok(Dialect::Generic),
            _ => Err(format!("unknown solver dialect '{s}'")),
        }
    }
}

/// A satisfiability problem over reals.
#[derive(Clone, Debug, Default)]
pub struct Query {
    pub consts: Vec<String>,
    /// Constants asserted non-negative.
    pub nonneg: Vec<String>,
    /// `define-fun` constants, in order.
    pub definitions: Vec<(String, FoTerm)>,
    pub assertions: Vec<Fo>,
    pub domains: Vec<DomainDecl>,
    pub comment: Option<String>,
}

impl Query {
    pub fn is_quantifier_free(&self) -> bool {
        self.assertions.iter().all(Fo::is_quantifier_free)
            && self.definitions.iter().all(|(_, t)| term_qf(t))
            && self.domains.iter().all(|d| d.axioms.is_empty())
    }

    pub fn has_apps(&self) -> bool {
        self.assertions.iter().any(Fo::has_apps) || self.definitions.iter().any(|(_, t)| t.has_apps())
    }

    pub fn logic(&self) -> &'static str {
        match (self.is_quantifier_free(), self.has_apps()) {
            (true, false) => "QF_NRA",
            (true, true) => "QF_UFNRA",
            (false, false) => "NRA",
            (false, true) => "UFNRA",
        }
    }

    /// Satisfiability of `¬φ`, with free variables as constants.
    pub fn validity(phi: &Fo, domains: &[DomainDecl]) -> Query {
        let mut vars: Vec<String> = Vec::new();
        let mut body = phi.clone();
        while let Fo::Forall(vs, b) = body {
            vars.extend(vs);
            body = *b;
        }
        let mut free: BTreeSet<String> = body.free_vars();
        for v in &vars {
            free.remove(v);
        }
        vars.extend(free);
        let mut seen = BTreeSet::new();
        vars.retain(|v| seen.insert(v.clone()));
        let mut q = Query { consts: vars, domains: domains.to_vec(), ..Query::default() };
        match body {
            Fo::Implies(p, c) => {
                let premises = match *p {
                    Fo::And(ps) => ps,
                    other => vec![other],
                };
                for p in premises {
                    match p {
                        Fo::Cmp(CmpOp::Eq, FoTerm::Var(y), t)
                            if !q.definitions.iter().any(|(d, _)| *d == y) && !t.free_vars_contains(&y) =>
                        {
                            q.consts.retain(|c| *c != y);
                            q.definitions.push((y, t));
                        }
                        other => q.assertions.push(other),
                    }
                }
                q.assertions.push(Fo::not(*c));
            }
            other => q.assertions.push(Fo::not(other)),
        }
        q
    }
}

impl FoTerm {
    fn free_vars_contains(&self, v: &str) -> bool {
        let mut s = BTreeSet::new();
        self.free_vars_into(&mut s);
        s.contains(v)
    }
}

fn term_qf(t: &FoTerm) -> bool {
    match t {
        FoTerm::Num(_) | FoTerm::Var(_) => true,
        FoTerm::Add(v) | FoTerm::Mul(v) | FoTerm::App(_, v) => v.iter().all(term_qf),
        FoTerm::Sub(a, b) => term_qf(a) && term_qf(b),
        FoTerm::Ite(c, a, b) => c.is_quantifier_free() && term_qf(a) && term_qf(b),
    }
}

#[derive(Clone, Debug)]
pub struct Emitted {
    pub text: String,
    /// Distinct nodes after sharing.
    pub nodes: u64,
    pub logic: &'static str,
}

pub fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.chars().next().unwrap().is_ascii_digit()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

pub fn number(q: &Rational) -> String {
    let a = q.abs();
    let body = if a.denom().is_one() { format!("{}.0", a.numer()) } else { format!("(/ {}.0 {}.0)", a.numer(), a.denom()) };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn cmp_head(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
        CmpOp::Eq | CmpOp::Ne => "=",
        CmpOp::Gt => ">",
        CmpOp::Ge => ">=",
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum NodeSort {
    Real,
    Bool,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Node {
    head: String,
    kids: Vec<usize>,
    leaf: bool,
    sort: NodeSort,
}

/// Hash-consed DAG of every term and formula in a query.
#[derive(Default)]
struct Dag {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
    refs: Vec<u32>,
}

impl Dag {
    fn intern(&mut self, node: Node) -> usize {
        if let Some(&i) = self.index.get(&node) {
            return i;
        }
        for &k in &node.kids {
            self.refs[k] += 1;
        }
        let i = self.nodes.len();
        self.nodes.push(node.clone());
        self.refs.push(0);
        self.index.insert(node, i);
        i
    }

    fn leaf(&mut self, text: String, sort: NodeSort) -> usize {
        self.intern(Node { head: text, kids: vec![], leaf: true, sort })
    }

    fn app(&mut self, head: &str, kids: Vec<usize>, sort: NodeSort) -> usize {
        self.intern(Node { head: head.to_string(), kids, leaf: false, sort })
    }

    fn term(&mut self, t: &FoTerm) -> usize {
        match t {
            FoTerm::Num(q) => self.leaf(number(q), NodeSort::Real),
            FoTerm::Var(v) => self.leaf(symbol(v), NodeSort::Real),
            FoTerm::Add(v) | FoTerm::Mul(v) if v.len() == 1 => self.term(&v[0]),
            FoTerm::Add(v) => {
                let k = v.iter().map(|x| self.term(x)).collect();
                self.app("+", k, NodeSort::Real)
            }
            FoTerm::Mul(v) => {
                let k = v.iter().map(|x| self.term(x)).collect();
                self.app("*", k, NodeSort::Real)
            }
            FoTerm::Sub(a, b) => {
                let k = vec![self.term(a), self.term(b)];
                self.app("-", k, NodeSort::Real)
            }
            FoTerm::Ite(c, a, b) => {
                let k = vec![self.fo(c), self.term(a), self.term(b)];
                self.app("ite", k, NodeSort::Real)
            }
            FoTerm::App(f, args) if args.is_empty() => self.leaf(symbol(f), NodeSort::Real),
            FoTerm::App(f, args) => {
                let k = args.iter().map(|x| self.term(x)).collect();
                self.app(&symbol(f), k, NodeSort::Real)
            }
        }
    }

    fn fo(&mut self, f: &Fo) -> usize {
        match f {
            Fo::Bool(b) => self.leaf(b.to_string(), NodeSort::Bool),
            Fo::Cmp(op, a, b) => {
                let k = vec![self.term(a), self.term(b)];
                let c = self.app(cmp_head(*op), k, NodeSort::Bool);
                if *op == CmpOp::Ne {
                    self.app("not", vec![c], NodeSort::Bool)
                } else {
                    c
                }
            }
            Fo::Not(g) => {
                let k = vec![self.fo(g)];
                self.app("not", k, NodeSort::Bool)
            }
            Fo::And(v) if v.is_empty() => self.leaf("true".into(), NodeSort::Bool),
            Fo::Or(v) if v.is_empty() => self.leaf("false".into(), NodeSort::Bool),
            Fo::And(v) | Fo::Or(v) if v.len() == 1 => self.fo(&v[0]),
            Fo::And(v) => {
                let k = v.iter().map(|x| self.fo(x)).collect();
                self.app("and", k, NodeSort::Bool)
            }
            Fo::Or(v) => {
                let k = v.iter().map(|x| self.fo(x)).collect();
                self.app("or", k, NodeSort::Bool)
            }
            Fo::Implies(a, b) => {
                let k = vec![self.fo(a), self.fo(b)];
                self.app("=>", k, NodeSort::Bool)
            }
            // Bound variables must not escape into global definitions, so a
            // quantified formula is one opaque leaf.
            Fo::Exists(..) | Fo::Forall(..) => self.leaf(plain_fo(f), NodeSort::Bool),
        }
    }
}

/// Printing without sharing.
pub fn plain_term(t: &FoTerm) -> String {
    match t {
        FoTerm::Num(q) => number(q),
        FoTerm::Var(v) => symbol(v),
        FoTerm::Add(v) | FoTerm::Mul(v) if v.len() == 1 => plain_term(&v[0]),
        FoTerm::Add(v) => format!("(+ {})", join(v.iter().map(plain_term))),
        FoTerm::Mul(v) => format!("(* {})", join(v.iter().map(plain_term))),
        FoTerm::Sub(a, b) => format!("(- {} {})", plain_term(a), plain_term(b)),
        FoTerm::Ite(c, a, b) => format!("(ite {} {} {})", plain_fo(c), plain_term(a), plain_term(b)),
        FoTerm::App(f, args) if args.is_empty() => symbol(f),
        FoTerm::App(f, args) => format!("({} {})", symbol(f), join(args.iter().map(plain_term))),
    }
}

pub fn plain_fo(f: &Fo) -> String {
    match f {
        Fo::Bool(b) => b.to_string(),
        Fo::Cmp(CmpOp::Ne, a, b) => format!("(not (= {} {}))", plain_term(a), plain_term(b)),
        Fo::Cmp(op, a, b) => format!("({} {} {})", cmp_head(*op), plain_term(a), plain_term(b)),
        Fo::Not(g) => format!("(not {})", plain_fo(g)),
        Fo::And(v) if v.is_empty() => "true".into(),
        Fo::Or(v) if v.is_empty() => "false".into(),
        Fo::And(v) | Fo::Or(v) if v.len() == 1 => plain_fo(&v[0]),
        Fo::And(v) => format!("(and {})", join(v.iter().map(plain_fo))),
        Fo::Or(v) => format!("(or {})", join(v.iter().map(plain_fo))),
        Fo::Implies(a, b) => format!("(=> {} {})", plain_fo(a), plain_fo(b)),
        Fo::Exists(vs, b) | Fo::Forall(vs, b) if vs.is_empty() => plain_fo(b),
        Fo::Exists(vs, b) => format!("(exists ({}) {})", binders(vs), plain_fo(b)),
        Fo::Forall(vs, b) => format!("(forall ({}) {})", binders(vs), plain_fo(b)),
    }
}

fn binders(vs: &[String]) -> String {
    join(vs.iter().map(|v| format!("({} Real)", symbol(v))))
}

fn join(it: impl Iterator<Item = String>) -> String {
    it.collect::<Vec<_>>().join(" ")
}

struct Printer<'a> {
    dag: &'a Dag,
    shared: Vec<Option<String>>,
    emitted: Vec<bool>,
    next: usize,
    out: String,
}

impl Printer<'_> {
    fn is_shared(&self, i: usize) -> bool {
        let n = &self.dag.nodes[i];
        !n.leaf && self.dag.refs[i] >= 2
    }

    /// Emit definitions for every shared node below `i`, children first.
    fn define_below(&mut self, i: usize) {
        let mut stack = vec![(i, false)];
        while let Some((j, expanded)) = stack.pop() {
            if self.emitted[j] {
                continue;
            }
            if expanded {
                self.emitted[j] = true;
                if self.is_shared(j) {
                    self.next += 1;
                    let name = format!("|cse#{}|", self.next);
                    let sort = match self.dag.nodes[j].sort {
                        NodeSort::Real => "Real",
                        NodeSort::Bool => "Bool",
                    };
                    let body = self.inline(j);
                    let _ = writeln!(self.out, "(define-fun {name} () {sort} {body})");
                    self.shared[j] = Some(name);
                }
                continue;
            }
            stack.push((j, true));
            for &k in self.dag.nodes[j].kids.iter().rev() {
                if !self.emitted[k] {
                    stack.push((k, false));
                }
            }
        }
    }

    /// Text of node `i` with shared children referenced by name.
    fn inline(&self, i: usize) -> String {
        let n = &self.dag.nodes[i];
        if n.leaf {
            return n.head.clone();
        }
        let kids: Vec<String> = n.kids.iter().map(|&k| self.reference(k)).collect();
        format!("({} {})", n.head, kids.join(" "))
    }

    fn reference(&self, i: usize) -> String {
        match &self.shared[i] {
            Some(name) => name.clone(),
            None => self.inline(i),
        }
    }
}

fn sort_name(s: Sort) -> &'static str {
    match s {
        Sort::UReal | Sort::Real => "Real",
    }
}

fn axiom_fo(a: &Axiom, ctx: &super::EncodeCtx) -> Fo {
    let premise = Fo::and(a.vars.iter().map(|v| Fo::Cmp(CmpOp::Ge, FoTerm::var(v), FoTerm::zero())).collect());
    Fo::forall(a.vars.clone(), Fo::implies(premise, ctx.guard(&a.body)))
}

/// Declarations and axioms for the domain functions.
fn domain_lines(domains: &[DomainDecl], out: &mut String) {
    let ctx = super::EncodeCtx::plain();
    for d in domains {
        let _ = writeln!(out, "; domain {}", d.name);
        for f in &d.funcs {
            let params = join(f.params.iter().map(|s| sort_name(*s).to_string()));
            let _ = writeln!(out, "(declare-fun {} ({params}) {})", symbol(&f.name), sort_name(f.result));
            if f.result == Sort::UReal {
                let vars: Vec<String> = (0..f.params.len()).map(|i| format!("a#{i}")).collect();
                let app = FoTerm::App(f.name.clone(), vars.iter().map(FoTerm::var).collect());
                let body = Fo::Cmp(CmpOp::Ge, app, FoTerm::zero());
                let _ = writeln!(out, "(assert {})", plain_fo(&Fo::forall(vars, body)));
            }
        }
        for a in &d.axioms {
            let _ = writeln!(out, "(assert (! {} :named {}))", plain_fo(&axiom_fo(a, &ctx)), symbol(&format!("axiom.{}", a.name)));
        }
    }
}

pub fn emit_query(q: &Query, dialect: Dialect, seed: Option<u64>) -> Emitted {
    let logic = q.logic();
    let mut out = String::new();
    if let Some(c) = &q.comment {
        for line in c.lines() {
            let _ = writeln!(out, "; {line}");
        }
    }
    let _ = writeln!(out, "(set-option :produce-models true)");
    if let Some(s) = seed {
        match dialect {
            Dialect::Z3 => {
                let _ = writeln!(out, "(set-option :smt.random_seed {s})");
            }
            Dialect::Cvc5 | Dialect::Generic => {
                let _ = writeln!(out, "(set-option :random-seed {s})");
            }
        }
    }
    if dialect != Dialect::Z3 || q.is_quantifier_free() {
        let _ = writeln!(out, "(set-logic {logic})");
    }
    for c in &q.consts {
        let _ = writeln!(out, "(declare-fun {} () Real)", symbol(c));
    }
    domain_lines(&q.domains, &mut out);
    for c in &q.nonneg {
        let _ = writeln!(out, "(assert (>= {} 0.0))", symbol(c));
    }

    let mut dag = Dag::default();
    let defs: Vec<(String, usize)> = q.definitions.iter().map(|(n, t)| (n.clone(), dag.term(t))).collect();
    let asserts: Vec<usize> = q.assertions.iter().map(|f| dag.fo(f)).collect();
    let n = dag.nodes.len();
    let mut p = Printer { dag: &dag, shared: vec![None; n], emitted: vec![false; n], next: 0, out };
    for (name, root) in &defs {
        for &k in &p.dag.nodes[*root].kids.clone() {
            p.define_below(k);
        }
        let body = if p.shared[*root].is_some() || p.dag.nodes[*root].leaf { p.reference(*root) } else { p.inline(*root) };
        let _ = writeln!(p.out, "(define-fun {} () Real {body})", symbol(name));
    }
    for &root in &asserts {
        for &k in &p.dag.nodes[root].kids.clone() {
            p.define_below(k);
        }
        let body = if p.shared[root].is_some() { p.reference(root) } else { p.inline(root) };
        let _ = writeln!(p.out, "(assert {body})");
    }
    let mut out = p.out;
    match dialect {
        Dialect::Z3 if q.is_quantifier_free() && !q.has_apps() => {
            let _ = writeln!(out, "(check-sat-using (or-else (then simplify solve-eqs smt) qfnra-nlsat))");
        }
        _ => {
            let _ = writeln!(out, "(check-sat)");
        }
    }
    let _ = writeln!(out, "(get-model)");
    let _ = writeln!(out, "(exit)");
    Emitted { text: out, nodes: n as u64, logic }
}

/// Validity of `φ` as an SMT-LIB script: the solver answers `unsat`
/// exactly when `φ` holds for all real values of its free variables.
pub fn emit_smtlib(phi: &Fo, domains: &[DomainDecl]) -> String {
    emit_query(&Query::validity(phi, domains), Dialect::Generic, None).text
}
