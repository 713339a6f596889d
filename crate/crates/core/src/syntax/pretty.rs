//! Printing that re-parses to the same tree.

use super::{CmpOp, DomainDecl, Expr, Guard, Program, Quantifier, Sort, Source, Term};
use crate::num::fmt_rational;

pub fn term(t: &Term) -> String {
    let mut s = String::new();
    write_term(t, &mut s);
    s
}

fn write_term(t: &Term, s: &mut String) {
    match t {
        Term::Const(q) => s.push_str(&fmt_rational(q)),
        Term::Var(v) => s.push_str(v),
        Term::Add(a, b) | Term::Monus(a, b) => {
            write_term(a, s);
            s.push_str(if matches!(t, Term::Add(..)) { " + " } else { " - " });
            wrap_term(b, s, matches!(**b, Term::Add(..) | Term::Monus(..)));
        }
        Term::Mul(a, b) => {
            wrap_term(a, s, matches!(**a, Term::Add(..) | Term::Monus(..)));
            s.push_str(" * ");
            wrap_term(b, s, matches!(**b, Term::Add(..) | Term::Monus(..) | Term::Mul(..)));
        }
        Term::App(f, args) => {
            s.push_str(f);
            s.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_term(a, s);
            }
            s.push(')');
        }
    }
}

fn wrap_term(t: &Term, s: &mut String, paren: bool) {
    if paren {
        s.push('(');
    }
    write_term(t, s);
    if paren {
        s.push(')');
    }
}

pub fn guard(g: &Guard) -> String {
    let mut s = String::new();
    write_guard(g, &mut s);
    s
}

// Binding strength: implies 0, or 1, and 2, unary 3.
fn guard_level(g: &Guard) -> u8 {
    match g {
        Guard::Implies(..) => 0,
        Guard::Or(..) => 1,
        Guard::And(..) => 2,
        Guard::Cmp(..) => 3,
        Guard::Not(_) | Guard::Bool(_) => 4,
    }
}

fn write_guard(g: &Guard, s: &mut String) {
    match g {
        Guard::Bool(b) => s.push_str(if *b { "true" } else { "false" }),
        Guard::Cmp(op, a, b) => {
            write_term(a, s);
            s.push_str(match op {
                CmpOp::Lt => " < ",
                CmpOp::Le => " <= ",
                CmpOp::Eq => " == ",
                CmpOp::Ne => " != ",
                CmpOp::Gt => " > ",
                CmpOp::Ge => " >= ",
            });
            write_term(b, s);
        }
        Guard::Not(inner) => {
            s.push('!');
            wrap_guard(inner, s, guard_level(inner) < 4);
        }
        Guard::And(a, b) | Guard::Or(a, b) => {
            let lvl = guard_level(g);
            wrap_guard(a, s, guard_level(a) < lvl);
            s.push_str(if lvl == 2 { " && " } else { " || " });
            wrap_guard(b, s, guard_level(b) <= lvl);
        }
        Guard::Implies(a, b) => {
            wrap_guard(a, s, guard_level(a) == 0);
            s.push_str(" ==> ");
            write_guard(b, s);
        }
    }
}

fn wrap_guard(g: &Guard, s: &mut String, paren: bool) {
    if paren {
        s.push('(');
    }
    write_guard(g, s);
    if paren {
        s.push(')');
    }
}

pub fn expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s, Pos::Top);
    s
}

#[derive(Clone, Copy, PartialEq)]
enum Pos {
    Top,
    SumLeft,
    SumRight,
    /// The tail of a product chain, after `[g] *` or `q *`.
    Tail,
}

fn write_expr(e: &Expr, s: &mut String, pos: Pos) {
    match e {
        Expr::Term(t) => {
            let paren = match pos {
                Pos::Top | Pos::SumLeft => false,
                Pos::SumRight | Pos::Tail => matches!(t, Term::Add(..) | Term::Monus(..)),
            };
            wrap_term(t, s, paren);
        }
        Expr::Iverson(g, body) => {
            s.push('[');
            write_guard(g, s);
            s.push(']');
            if !matches!(&**body, Expr::Term(Term::Const(q)) if num_traits::One::is_one(q)) {
                s.push_str(" * ");
                write_expr(body, s, Pos::Tail);
            }
        }
        Expr::Scale(q, body) => {
            s.push_str(&fmt_rational(q));
            s.push_str(" * ");
            write_expr(body, s, Pos::Tail);
        }
        Expr::Sum(a, b) => {
            let paren = pos == Pos::SumRight || pos == Pos::Tail;
            if paren {
                s.push('(');
            }
            write_expr(a, s, Pos::SumLeft);
            s.push_str(" + ");
            write_expr(b, s, Pos::SumRight);
            if paren {
                s.push(')');
            }
        }
        Expr::Quant(q) => {
            let paren = pos != Pos::Top;
            if paren {
                s.push('(');
            }
            s.push_str(match q.quantifier {
                Quantifier::Sup => "sup ",
                Quantifier::Inf => "inf ",
            });
            s.push_str(&q.var);
            s.push_str(" in [");
            s.push_str(&fmt_rational(&q.lo));
            s.push_str(", ");
            s.push_str(&fmt_rational(&q.hi));
            s.push_str("]: ");
            write_expr(&q.body, s, Pos::Top);
            if paren {
                s.push(')');
            }
        }
    }
}

pub fn program(p: &Program) -> String {
    let mut s = String::new();
    write_stmts(p, &mut s, 0);
    s
}

fn indent(s: &mut String, level: usize) {
    for _ in 0..level {
        s.push_str("    ");
    }
}

fn write_stmts(p: &Program, s: &mut String, level: usize) {
    match p {
        Program::Seq(a, b) => {
            if matches!(**a, Program::Seq(..)) {
                // Left-nested sequences keep their grouping as a block.
                indent(s, level);
                s.push_str("{\n");
                write_stmts(a, s, level + 1);
                indent(s, level);
                s.push_str("};\n");
            } else {
                write_stmt(a, s, level);
                s.push_str(";\n");
            }
            write_stmts(b, s, level);
        }
        p => {
            write_stmt(p, s, level);
            s.push('\n');
        }
    }
}

fn write_block(p: &Program, s: &mut String, level: usize) {
    s.push_str("{\n");
    write_stmts(p, s, level + 1);
    indent(s, level);
    s.push('}');
}

fn write_stmt(p: &Program, s: &mut String, level: usize) {
    indent(s, level);
    match p {
        Program::Skip => s.push_str("skip"),
        Program::Diverge => s.push_str("diverge"),
        Program::Assign(x, t) => {
            s.push_str(x);
            s.push_str(" := ");
            write_term(t, s);
        }
        Program::Unif { var, partition } => {
            s.push_str(var);
            s.push_str(" := unif");
            if let Some(n) = partition {
                s.push_str(&format!("@{n}"));
            }
        }
        Program::Observe(g) => {
            s.push_str("observe(");
            write_guard(g, s);
            s.push(')');
        }
        Program::Ite(g, a, b) => {
            s.push_str("if (");
            write_guard(g, s);
            s.push_str(") ");
            write_block(a, s, level);
            s.push_str(" else ");
            write_block(b, s, level);
        }
        Program::PChoice(a, p, b) => {
            write_block(a, s, level);
            s.push_str(&format!(" [{}] ", fmt_rational(p)));
            write_block(b, s, level);
        }
        Program::Seq(..) => {
            // Only reached for a sequence nested as a single statement.
            write_block(p, s, level);
        }
        Program::While(l) => {
            s.push_str("while (");
            write_guard(&l.guard, s);
            s.push_str(") ");
            if let Some(i) = &l.invariant {
                s.push_str("@invariant(");
                write_expr(i, s, Pos::Top);
                s.push_str(") ");
            }
            write_block(&l.body, s, level);
        }
    }
}

fn sort(s: Sort) -> &'static str {
    match s {
        Sort::UReal => "UReal",
        Sort::Real => "Real",
    }
}

pub fn domain(d: &DomainDecl) -> String {
    let mut s = format!("domain {} {{\n", d.name);
    for f in &d.funcs {
        let params: Vec<_> = f.params.iter().map(|p| sort(*p)).collect();
        s.push_str(&format!("    func {}({}): {};\n", f.name, params.join(", "), sort(f.result)));
    }
    for a in &d.axioms {
        s.push_str(&format!("    axiom {} ", a.name));
        if !a.vars.is_empty() {
            s.push_str(&format!("forall {} . ", a.vars.join(", ")));
        }
        write_guard(&a.body, &mut s);
        s.push_str(";\n");
    }
    s.push_str("}\n");
    s
}

pub fn source(src: &Source) -> String {
    let mut s = String::new();
    if let Some(vs) = &src.vars {
        s.push_str(&format!("vars {};\n", vs.join(", ")));
    }
    for d in &src.domains {
        s.push_str(&domain(d));
    }
    s.push_str(&program(&src.program));
    s
}
