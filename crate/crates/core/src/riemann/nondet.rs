//! Discrete nondeterministic encoding of the Riemann transformers.
//!
//! `x := unif` becomes a uniform choice of a cell index `j` in `0..N`
//! followed by a nondeterministic assignment of `x` within `[j/N, (j+1)/N]`.
//! Angelic resolution (`cohavoc`/`coassume`, in a `coproc`) yields the
//! upper transformers; demonic resolution (`havoc`/`assume`, in a `proc`)
//! yields the lower ones. The output follows HeyVL's concrete syntax.

use std::collections::BTreeSet;

use crate::num::fmt_rational;
use crate::syntax::{Expr, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    Angelic,
    Demonic,
}

impl std::str::FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "angelic" | "upper" => Ok(Polarity::Angelic),
            "demonic" | "lower" => Ok(Polarity::Demonic),
            other => Err(format!("unknown polarity `{other}` (angelic or demonic)")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NondetOptions {
    pub name: Option<String>,
    pub pre: Option<Expr>,
    pub post: Option<Expr>,
    /// Encode the liberal transformer (affects `diverge` only).
    pub liberal: bool,
}

pub fn encode_nondet(prog: &Program, n: u32, polarity: Polarity) -> String {
    encode_nondet_with(prog, n, polarity, &NondetOptions::default())
}

pub fn encode_nondet_with(prog: &Program, n: u32, polarity: Polarity, opts: &NondetOptions) -> String {
    let all = prog.vars();
    let assigned = assigned_vars(prog);
    let readonly: Vec<&String> = all.iter().filter(|v| !assigned.contains(*v)).collect();
    let mut taken = all.clone();
    let mut enc = Encoder { n, polarity, liberal: opts.liberal, out: String::new(), counter: 0, taken: &mut taken };

    let keyword = match polarity {
        Polarity::Angelic => "coproc",
        Polarity::Demonic => "proc",
    };
    let mut inputs: Vec<String> = readonly.iter().map(|v| format!("{v} : UReal")).collect();
    inputs.extend(assigned.iter().map(|v| format!("{v}_init : UReal")));
    let outputs: Vec<String> = assigned.iter().map(|v| format!("{v} : UReal")).collect();
    let name = opts.name.clone().unwrap_or_else(|| "main".into());
    enc.out.push_str(&format!("// partition size {n}, {} resolution\n", if polarity == Polarity::Angelic { "angelic" } else { "demonic" }));
    enc.out.push_str(&format!("{keyword} {name}({})\n    -> ({})\n", inputs.join(", "), outputs.join(", ")));
    if let Some(pre) = &opts.pre {
        let mut pre = pre.clone();
        for v in &assigned {
            pre = crate::semantics::rename_free(&pre, v, &format!("{v}_init"));
        }
        enc.out.push_str(&format!("pre {pre}\n"));
    }
    if let Some(post) = &opts.post {
        enc.out.push_str(&format!("post {post}\n"));
    }
    enc.out.push_str("{\n");
    for v in &assigned {
        enc.line(1, &format!("{v} = {v}_init"));
    }
    enc.stmts(prog, 1);
    enc.out.push_str("}\n");
    enc.out
}

fn assigned_vars(p: &Program) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn go(p: &Program, out: &mut BTreeSet<String>) {
        match p {
            Program::Assign(x, _) => {
                out.insert(x.clone());
            }
            Program::Unif { var, .. } => {
                out.insert(var.clone());
            }
            Program::Ite(_, a, b) | Program::PChoice(a, _, b) | Program::Seq(a, b) => {
                go(a, out);
                go(b, out);
            }
            Program::While(l) => go(&l.body, out),
            _ => {}
        }
    }
    go(p, &mut out);
    out
}

struct Encoder<'a> {
    n: u32,
    polarity: Polarity,
    liberal: bool,
    out: String,
    counter: usize,
    taken: &'a mut BTreeSet<String>,
}

impl Encoder<'_> {
    fn line(&mut self, level: usize, text: &str) {
        for _ in 0..level {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn fresh(&mut self, stem: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{stem}_{}", self.counter);
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    fn stmts(&mut self, p: &Program, level: usize) {
        for s in p.statements() {
            self.stmt(s, level);
        }
    }

    fn stmt(&mut self, p: &Program, level: usize) {
        let angelic = self.polarity == Polarity::Angelic;
        match p {
            Program::Skip => {}
            Program::Diverge => {
                self.line(level, "// --- diverge");
                match (angelic, self.liberal) {
                    (false, false) => self.line(level, "assert 0"),
                    (false, true) => {
                        self.line(level, "assert 1");
                        self.line(level, "assume ?(false)");
                    }
                    (true, false) => self.line(level, "coassume ?!(false)"),
                    (true, true) => {
                        self.line(level, "coassert 1");
                        self.line(level, "coassume ?!(false)");
                    }
                }
                self.line(level, "// ---");
            }
            Program::Assign(x, t) => self.line(level, &format!("{x} = {t}")),
            Program::Unif { var, partition } => {
                let n = partition.unwrap_or(self.n).max(1);
                let (havoc, assume, open, close) =
                    if angelic { ("cohavoc", "coassume", "?!(", ")") } else { ("havoc", "assume", "?(", ")") };
                self.line(level, &format!("// --- Nondeterministic assignment {var} := [...]"));
                if n == 1 {
                    self.line(level, &format!("{havoc} {var};"));
                    self.line(level, &format!("{assume} {open}0 <= {var} && {var} <= 1{close}"));
                } else {
                    let j = self.fresh("j");
                    self.line(level, &format!("var {j} : UInt = unif(0, {}); //discrete_uniform({n})", n - 1));
                    self.line(level, &format!("{havoc} {var};"));
                    self.line(level, &format!("{assume} {open}{j} / {n} <= {var} && {var} <= ({j} + 1) / {n}{close}"));
                }
                self.line(level, "// ---");
            }
            Program::Observe(g) => self.line(level, &format!("assert ?({g}) // observe")),
            Program::Ite(g, a, b) => {
                self.line(level, &format!("if {g} {{"));
                self.stmts(a, level + 1);
                self.line(level, "} else {");
                self.stmts(b, level + 1);
                self.line(level, "}");
            }
            Program::PChoice(a, q, b) => {
                let c = self.fresh("choice");
                self.line(level, &format!("var {c} : Bool = flip({})", fmt_rational(q)));
                self.line(level, &format!("if {c} {{"));
                self.stmts(a, level + 1);
                self.line(level, "} else {");
                self.stmts(b, level + 1);
                self.line(level, "}");
            }
            Program::Seq(..) => self.stmts(p, level),
            Program::While(l) => {
                if let Some(i) = &l.invariant {
                    self.line(level, &format!("@invariant({i})"));
                }
                self.line(level, &format!("while {} {{", l.guard));
                self.stmts(&l.body, level + 1);
                self.line(level, "}");
            }
        }
    }
}
