use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::lexer::{describe, lex, Pos, Spanned, Tok};
use super::{Axiom, CmpOp, DomainDecl, Expr, FuncDecl, Guard, Loop, Program, Quantified, Quantifier, Sort, Source, Term};
use crate::num::Rational;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

const KEYWORDS: &[&str] = &[
    "skip", "diverge", "unif", "observe", "if", "else", "while", "true", "false", "sup", "inf", "in", "vars", "domain",
    "func", "axiom", "forall",
];

/// Parses a program, ignoring any `vars` header and domain declarations
/// beyond checking them.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_source(text).map(|s| s.program)
}

/// Parses a complete file: `vars` header, domain declarations, program.
pub fn parse_source(text: &str) -> Result<Source, ParseError> {
    let mut p = Parser::new(text)?;
    let src = p.source()?;
    p.expect_eof()?;
    Ok(src)
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_guard(text: &str) -> Result<Guard, ParseError> {
    let mut p = Parser::new(text)?;
    let g = p.guard()?;
    p.expect_eof()?;
    Ok(g)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

struct Parser {
    toks: Vec<Spanned>,
    i: usize,
}

/// One factor of a product in expression position.
enum Factor {
    Lit(Rational),
    Div(Rational),
    Guard(Guard),
    Term(Term),
    Expr(Expr),
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str) -> PResult<Parser> {
        let toks = lex(text).map_err(|(pos, msg)| ParseError { line: pos.line, col: pos.col, msg })?;
        Ok(Parser { toks, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let pos = self.pos();
        Err(ParseError { line: pos.line, col: pos.col, msg: msg.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", describe(self.peek())))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.unexpected(&describe(t))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            Tok::Ident(s) => self.err(format!("`{s}` is a keyword")),
            _ => self.unexpected("identifier"),
        }
    }

    fn number(&mut self) -> PResult<Rational> {
        match self.peek().clone() {
            Tok::Num(q) => {
                self.bump();
                Ok(q)
            }
            _ => self.unexpected("number"),
        }
    }

    // -- files --------------------------------------------------------------

    fn source(&mut self) -> PResult<Source> {
        let mut vars = None;
        if self.eat_kw("vars") {
            let mut vs = vec![self.ident()?];
            while self.eat(&Tok::Comma) {
                vs.push(self.ident()?);
            }
            self.eat(&Tok::Semi);
            vars = Some(vs);
        }
        let mut domains = Vec::new();
        while self.is_kw("domain") {
            domains.push(self.domain()?);
        }
        let pos = self.pos();
        let program = if *self.peek() == Tok::Eof { Program::Skip } else { self.stmts()? };
        let src = Source { vars, domains, program };
        check_source(&src).map_err(|msg| ParseError { line: pos.line, col: pos.col, msg })?;
        Ok(src)
    }

    fn domain(&mut self) -> PResult<DomainDecl> {
        self.expect_kw("domain")?;
        let name = self.ident()?;
        self.expect(&Tok::LBrace)?;
        let mut d = DomainDecl { name, ..Default::default() };
        loop {
            if self.eat_kw("func") {
                let name = self.ident()?;
                self.expect(&Tok::LParen)?;
                let mut params = Vec::new();
                if *self.peek() != Tok::RParen {
                    params.push(self.sort()?);
                    while self.eat(&Tok::Comma) {
                        params.push(self.sort()?);
                    }
                }
                self.expect(&Tok::RParen)?;
                self.expect(&Tok::Colon)?;
                let result = self.sort()?;
                self.eat(&Tok::Semi);
                d.funcs.push(FuncDecl { name, params, result });
            } else if self.eat_kw("axiom") {
                let name = self.ident()?;
                let mut vars = Vec::new();
                if self.eat_kw("forall") {
                    vars.push(self.ident()?);
                    while self.eat(&Tok::Comma) {
                        vars.push(self.ident()?);
                    }
                    if !self.eat(&Tok::Dot) {
                        self.expect(&Tok::Colon)?;
                    }
                }
                let body = self.guard()?;
                self.eat(&Tok::Semi);
                d.axioms.push(Axiom { name, vars, body });
            } else if self.eat(&Tok::RBrace) {
                return Ok(d);
            } else {
                return self.unexpected("`func`, `axiom` or `}`");
            }
        }
    }

    fn sort(&mut self) -> PResult<Sort> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "UReal" => {
                self.bump();
                Ok(Sort::UReal)
            }
            Tok::Ident(s) if s == "Real" => {
                self.bump();
                Ok(Sort::Real)
            }
            _ => self.unexpected("`UReal` or `Real`"),
        }
    }

    // -- statements ---------------------------------------------------------

    fn stmts(&mut self) -> PResult<Program> {
        let mut parts = vec![];
        loop {
            let (s, braced) = self.stmt()?;
            parts.push(s);
            if self.eat(&Tok::Semi) {
                if matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                    break;
                }
                continue;
            }
            // A statement ending in `}` needs no separator.
            if braced && !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                continue;
            }
            break;
        }
        Ok(Program::seq_all(parts))
    }

    fn block(&mut self) -> PResult<Program> {
        self.expect(&Tok::LBrace)?;
        if self.eat(&Tok::RBrace) {
            return Ok(Program::Skip);
        }
        let p = self.stmts()?;
        self.expect(&Tok::RBrace)?;
        Ok(p)
    }

    fn invariant_annotation(&mut self) -> PResult<Option<Expr>> {
        if *self.peek() == Tok::At && matches!(self.peek_at(1), Tok::Ident(s) if s == "invariant") {
            self.bump();
            self.bump();
            self.expect(&Tok::LParen)?;
            let e = self.expr()?;
            self.expect(&Tok::RParen)?;
            return Ok(Some(e));
        }
        Ok(None)
    }

    /// Returns the statement and whether it ended with a closing brace.
    fn stmt(&mut self) -> PResult<(Program, bool)> {
        if let Some(inv) = self.invariant_annotation()? {
            if !self.is_kw("while") {
                return self.unexpected("`while` after `@invariant`");
            }
            let (mut p, b) = self.stmt()?;
            if let Program::While(l) = &mut p {
                if l.invariant.is_some() {
                    return self.err("loop has two invariant annotations");
                }
                l.invariant = Some(inv);
            }
            return Ok((p, b));
        }
        match self.peek().clone() {
            Tok::LBrace => {
                let left = self.block()?;
                if self.eat(&Tok::LBrack) {
                    let p = self.number()?;
                    if p > Rational::one() {
                        return self.err("choice probability must lie in [0, 1]");
                    }
                    self.expect(&Tok::RBrack)?;
                    let right = self.block()?;
                    return Ok((Program::pchoice(left, p, right), true));
                }
                Ok((left, true))
            }
            Tok::Ident(kw) => match kw.as_str() {
                "skip" => {
                    self.bump();
                    Ok((Program::Skip, false))
                }
                "diverge" => {
                    self.bump();
                    Ok((Program::Diverge, false))
                }
                "observe" => {
                    self.bump();
                    self.expect(&Tok::LParen)?;
                    let g = self.guard()?;
                    self.expect(&Tok::RParen)?;
                    Ok((Program::Observe(g), false))
                }
                "if" => {
                    self.bump();
                    self.expect(&Tok::LParen)?;
                    let g = self.guard()?;
                    self.expect(&Tok::RParen)?;
                    let a = self.block()?;
                    let b = if self.eat_kw("else") {
                        if self.is_kw("if") {
                            self.stmt()?.0
                        } else {
                            self.block()?
                        }
                    } else {
                        Program::Skip
                    };
                    Ok((Program::ite(g, a, b), true))
                }
                "while" => {
                    self.bump();
                    self.expect(&Tok::LParen)?;
                    let guard = self.guard()?;
                    self.expect(&Tok::RParen)?;
                    let invariant = self.invariant_annotation()?;
                    let body = self.block()?;
                    Ok((Program::While(Box::new(Loop { guard, invariant, body })), true))
                }
                _ => {
                    let x = self.ident()?;
                    self.expect(&Tok::Assign)?;
                    if self.eat_kw("unif") {
                        let mut partition = None;
                        if self.eat(&Tok::LParen) {
                            let lo = self.number()?;
                            self.expect(&Tok::Comma)?;
                            let hi = self.number()?;
                            self.expect(&Tok::RParen)?;
                            if !lo.is_zero() || !hi.is_one() {
                                return self.err("only unif(0, 1) is supported");
                            }
                        }
                        if self.eat(&Tok::At) {
                            let n = self.number()?;
                            if !n.is_integer() || n < Rational::one() || n > Rational::from_integer(u32::MAX.into()) {
                                return self.err("partition size must be a positive integer");
                            }
                            partition = Some(n.to_integer().try_into().expect("bounded above"));
                        }
                        return Ok((Program::Unif { var: x, partition }, false));
                    }
                    let t = self.term()?;
                    Ok((Program::Assign(x, t), false))
                }
            },
            _ => self.unexpected("statement"),
        }
    }

    // -- guards -------------------------------------------------------------

    fn guard(&mut self) -> PResult<Guard> {
        let lhs = self.disj()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.guard()?;
            return Ok(Guard::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> PResult<Guard> {
        let mut g = self.conj()?;
        while self.eat(&Tok::OrOr) {
            g = Guard::or(g, self.conj()?);
        }
        Ok(g)
    }

    fn conj(&mut self) -> PResult<Guard> {
        let mut g = self.unary_guard()?;
        while self.eat(&Tok::AndAnd) {
            g = Guard::and(g, self.unary_guard()?);
        }
        Ok(g)
    }

    fn unary_guard(&mut self) -> PResult<Guard> {
        if self.eat(&Tok::Bang) {
            return Ok(Guard::not(self.unary_guard()?));
        }
        if self.eat_kw("true") {
            return Ok(Guard::Bool(true));
        }
        if self.eat_kw("false") {
            return Ok(Guard::Bool(false));
        }
        if *self.peek() == Tok::LParen {
            // Either a parenthesised term starting a comparison or a
            // parenthesised guard.
            let save = self.i;
            if let Ok(g) = self.comparison() {
                return Ok(g);
            }
            self.i = save;
            self.bump();
            let g = self.guard()?;
            self.expect(&Tok::RParen)?;
            return Ok(g);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Guard> {
        let a = self.term()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return self.unexpected("comparison operator"),
        };
        self.bump();
        let b = self.term()?;
        Ok(Guard::Cmp(op, a, b))
    }

    // -- terms --------------------------------------------------------------

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.term_product()?;
        loop {
            if self.eat(&Tok::Plus) {
                t = Term::add(t, self.term_product()?);
            } else if self.eat(&Tok::Minus) {
                t = Term::monus(t, self.term_product()?);
            } else {
                return Ok(t);
            }
        }
    }

    fn term_product(&mut self) -> PResult<Term> {
        let mut t = self.term_atom()?;
        loop {
            if self.eat(&Tok::Star) {
                t = Term::mul(t, self.term_atom()?);
            } else if self.eat(&Tok::Slash) {
                let q = self.divisor()?;
                t = Term::mul(t, Term::Const(q.recip()));
            } else {
                return Ok(t);
            }
        }
    }

    fn divisor(&mut self) -> PResult<Rational> {
        let paren = self.eat(&Tok::LParen);
        let q = self.number()?;
        if paren {
            self.expect(&Tok::RParen)?;
        }
        if q.is_zero() {
            return self.err("division by zero");
        }
        Ok(q)
    }

    fn term_atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Num(q) => {
                self.bump();
                Ok(Term::Const(q))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        args.push(self.term()?);
                        while self.eat(&Tok::Comma) {
                            args.push(self.term()?);
                        }
                    }
                    self.expect(&Tok::RParen)?;
                    return Ok(Term::App(name, args));
                }
                Ok(Term::Var(name))
            }
            _ => self.unexpected("term"),
        }
    }

    // -- expectations -------------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.expr_product()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.expr_product()?;
                acc = match (acc, rhs) {
                    (Expr::Term(a), Expr::Term(b)) => Expr::Term(Term::add(a, b)),
                    (a, b) => Expr::Sum(Arc::new(a), Arc::new(b)),
                };
            } else if *self.peek() == Tok::Minus {
                let pos = self.pos();
                self.bump();
                let rhs = self.expr_product()?;
                acc = match (acc, rhs) {
                    (Expr::Term(a), Expr::Term(b)) => Expr::Term(Term::monus(a, b)),
                    _ => {
                        return Err(ParseError {
                            line: pos.line,
                            col: pos.col,
                            msg: "`-` (truncated subtraction) applies to terms only".into(),
                        })
                    }
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn expr_product(&mut self) -> PResult<Expr> {
        let start = self.pos();
        let mut factors = vec![self.expr_factor()?];
        loop {
            if self.eat(&Tok::Star) {
                factors.push(self.expr_factor()?);
            } else if self.eat(&Tok::Slash) {
                let q = self.divisor()?;
                // `2 / 3` right after a literal is just a literal.
                if let Some(Factor::Lit(p)) = factors.last_mut() {
                    *p = &*p / q;
                } else {
                    factors.push(Factor::Div(q));
                }
            } else {
                break;
            }
        }
        convert_product(factors).map_err(|msg| ParseError { line: start.line, col: start.col, msg })
    }

    fn expr_factor(&mut self) -> PResult<Factor> {
        match self.peek().clone() {
            Tok::Num(q) => {
                self.bump();
                Ok(Factor::Lit(q))
            }
            Tok::LBrack => {
                self.bump();
                let g = self.guard()?;
                self.expect(&Tok::RBrack)?;
                Ok(Factor::Guard(g))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(match e {
                    Expr::Term(t) => Factor::Term(t),
                    e => Factor::Expr(e),
                })
            }
            Tok::Ident(s) if s == "sup" || s == "inf" => {
                self.bump();
                let quantifier = if s == "sup" { Quantifier::Sup } else { Quantifier::Inf };
                let var = self.ident()?;
                self.expect_kw("in")?;
                self.expect(&Tok::LBrack)?;
                let lo = self.number()?;
                self.expect(&Tok::Comma)?;
                let hi = self.number()?;
                self.expect(&Tok::RBrack)?;
                if lo > hi {
                    return self.err("empty quantifier range");
                }
                self.expect(&Tok::Colon)?;
                let body = self.expr()?;
                Ok(Factor::Expr(Expr::Quant(Arc::new(Quantified { quantifier, var, lo, hi, body }))))
            }
            Tok::Ident(_) => Ok(Factor::Term(self.term_atom()?)),
            _ => self.unexpected("expectation"),
        }
    }
}

fn is_termish(f: &Factor) -> bool {
    matches!(f, Factor::Lit(_) | Factor::Div(_) | Factor::Term(_))
}

/// Builds an expectation from a product chain. Pure term chains become a
/// left-nested term product; otherwise leading literals and Iverson brackets
/// scale the rest of the chain.
fn convert_product(mut factors: Vec<Factor>) -> Result<Expr, String> {
    if factors.iter().all(is_termish) {
        let mut it = factors.into_iter();
        let mut t = match it.next() {
            Some(Factor::Lit(q)) => Term::Const(q),
            Some(Factor::Term(t)) => t,
            _ => return Err("product cannot start with a division".into()),
        };
        for f in it {
            t = match f {
                Factor::Lit(q) => Term::mul(t, Term::Const(q)),
                Factor::Term(u) => Term::mul(t, u),
                Factor::Div(q) => Term::mul(t, Term::Const(q.recip())),
                _ => unreachable!(),
            };
        }
        return Ok(Expr::Term(t));
    }
    let rest = factors.split_off(1);
    match factors.pop().unwrap() {
        Factor::Lit(q) => Ok(Expr::Scale(q, Arc::new(convert_product(rest)?))),
        Factor::Guard(g) if rest.is_empty() => Ok(Expr::Iverson(Arc::new(g), Arc::new(Expr::one()))),
        Factor::Guard(g) => Ok(Expr::Iverson(Arc::new(g), Arc::new(convert_product(rest)?))),
        Factor::Expr(e) if rest.is_empty() => Ok(e),
        Factor::Expr(_) => Err("only a literal or an Iverson bracket may multiply an expectation".into()),
        Factor::Term(_) => Err("a term may only be multiplied by a term; write `[guard] * e` or `q * e`".into()),
        Factor::Div(_) => Err("product cannot start with a division".into()),
    }
}

/// Static checks on a parsed file: declared variables, known functions and
/// arities, well-formed axioms.
fn check_source(src: &Source) -> Result<(), String> {
    let mut funcs = std::collections::BTreeMap::new();
    for d in &src.domains {
        for f in &d.funcs {
            if funcs.insert(f.name.clone(), f.params.len()).is_some() {
                return Err(format!("function `{}` declared twice", f.name));
            }
        }
    }
    let check_apps = |names: &[(String, usize)]| -> Result<(), String> {
        for (f, arity) in names {
            match funcs.get(f) {
                None => return Err(format!("unknown function `{f}`")),
                Some(&n) if n != *arity => return Err(format!("`{f}` expects {n} argument(s), got {arity}")),
                _ => {}
            }
        }
        Ok(())
    };
    for d in &src.domains {
        for ax in &d.axioms {
            let fv = ax.body.free_vars();
            let bound: BTreeSet<_> = ax.vars.iter().cloned().collect();
            if let Some(v) = fv.difference(&bound).next() {
                return Err(format!("axiom `{}` mentions unbound variable `{v}`", ax.name));
            }
            check_apps(&guard_apps(&ax.body))?;
        }
    }
    check_apps(&program_apps(&src.program))?;
    if let Some(vars) = &src.vars {
        let declared: BTreeSet<_> = vars.iter().cloned().collect();
        let mut used = src.program.vars();
        for l in src.program.loops() {
            if let Some(i) = &l.invariant {
                used.extend(i.free_vars());
            }
        }
        if let Some(v) = used.difference(&declared).next() {
            return Err(format!("variable `{v}` is not declared in the `vars` header"));
        }
    }
    Ok(())
}

fn term_apps(t: &Term, out: &mut Vec<(String, usize)>) {
    match t {
        Term::Const(_) | Term::Var(_) => {}
        Term::Add(a, b) | Term::Monus(a, b) | Term::Mul(a, b) => {
            term_apps(a, out);
            term_apps(b, out);
        }
        Term::App(f, args) => {
            out.push((f.clone(), args.len()));
            args.iter().for_each(|a| term_apps(a, out));
        }
    }
}

fn guard_apps(g: &Guard) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    fn go(g: &Guard, out: &mut Vec<(String, usize)>) {
        match g {
            Guard::Bool(_) => {}
            Guard::Cmp(_, a, b) => {
                term_apps(a, out);
                term_apps(b, out);
            }
            Guard::Not(g) => go(g, out),
            Guard::And(a, b) | Guard::Or(a, b) | Guard::Implies(a, b) => {
                go(a, out);
                go(b, out);
            }
        }
    }
    go(g, &mut out);
    out
}

fn expr_apps(e: &Expr, out: &mut Vec<(String, usize)>) {
    e.visit(&mut |e| match e {
        Expr::Term(t) => term_apps(t, out),
        Expr::Iverson(g, _) => out.extend(guard_apps(g)),
        _ => {}
    });
}

fn program_apps(p: &Program) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    fn go(p: &Program, out: &mut Vec<(String, usize)>) {
        match p {
            Program::Skip | Program::Diverge | Program::Unif { .. } => {}
            Program::Assign(_, t) => term_apps(t, out),
            Program::Observe(g) => out.extend(guard_apps(g)),
            Program::Ite(g, a, b) => {
                out.extend(guard_apps(g));
                go(a, out);
                go(b, out);
            }
            Program::PChoice(a, _, b) | Program::Seq(a, b) => {
                go(a, out);
                go(b, out);
            }
            Program::While(l) => {
                out.extend(guard_apps(&l.guard));
                if let Some(i) = &l.invariant {
                    expr_apps(i, out);
                }
                go(&l.body, out);
            }
        }
    }
    go(p, &mut out);
    out
}

/// Checks that every function symbol in `e` is declared with the right arity.
pub fn check_expr_functions(e: &Expr, domains: &[DomainDecl]) -> Result<(), String> {
    let mut apps = Vec::new();
    expr_apps(e, &mut apps);
    for (f, arity) in apps {
        match domains.iter().find_map(|d| d.func(&f)) {
            None => return Err(format!("unknown function `{f}`")),
            Some(decl) if decl.params.len() != arity => {
                return Err(format!("`{f}` expects {} argument(s), got {arity}", decl.params.len()))
            }
            _ => {}
        }
    }
    Ok(())
}
