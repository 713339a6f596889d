use crate::syntax::{Loop, Program};

/// Replaces every loop by its `n`-fold unrolling:
/// `unfold(while, 0) = diverge`,
/// `unfold(while, d + 1) = if (φ) { unfold(B, d); unfold(while, d) } else { skip }`.
pub fn unfold(p: &Program, n: u32) -> Program {
    match p {
        Program::While(l) => unfold_loop(l, n),
        Program::Ite(g, a, b) => Program::ite(g.clone(), unfold(a, n), unfold(b, n)),
        Program::PChoice(a, q, b) => Program::pchoice(unfold(a, n), q.clone(), unfold(b, n)),
        Program::Seq(a, b) => Program::seq(unfold(a, n), unfold(b, n)),
        other => other.clone(),
    }
}

pub fn unfold_loop(l: &Loop, n: u32) -> Program {
    if n == 0 {
        return Program::Diverge;
    }
    Program::ite(l.guard.clone(), Program::seq(unfold(&l.body, n - 1), unfold_loop(l, n - 1)), Program::Skip)
}

impl Program {
    /// Number of AST nodes.
    pub fn size(&self) -> u64 {
        match self {
            Program::Ite(_, a, b) | Program::PChoice(a, _, b) | Program::Seq(a, b) => 1 + a.size() + b.size(),
            Program::While(l) => 1 + l.body.size(),
            _ => 1,
        }
    }
}
