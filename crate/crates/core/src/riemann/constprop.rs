use std::collections::BTreeMap;

use crate::num::Rational;
use crate::semantics::{eval_guard, eval_term, substitute_guard, substitute_term};
use crate::syntax::{Guard, Program, Term};

type Env = BTreeMap<String, Rational>;

/// Forward constant propagation. Reads of variables with a known constant
/// value are replaced by that value and conditionals whose guard becomes
/// decided are pruned. The result behaves exactly like the input from every
/// initial state, and the Riemann transformers agree on both.
pub fn propagate_constants(p: &Program) -> Program {
    go(p, Some(Env::new())).0
}

fn term(t: &Term, env: &Env) -> Term {
    env.iter().fold(t.clone(), |t, (x, q)| if t.mentions(x) { substitute_term(&t, x, &Term::Const(q.clone())) } else { t })
}

fn guard(g: &Guard, env: &Env) -> Guard {
    env.iter().fold(g.clone(), |g, (x, q)| if g.mentions(x) { substitute_guard(&g, x, &Term::Const(q.clone())) } else { g })
}

fn join(a: Option<Env>, b: Option<Env>) -> Option<Env> {
    match (a, b) {
        (None, e) | (e, None) => e,
        (Some(a), Some(b)) => Some(a.into_iter().filter(|(k, v)| b.get(k) == Some(v)).collect()),
    }
}

/// `None` marks an unreachable program point.
fn go(p: &Program, env: Option<Env>) -> (Program, Option<Env>) {
    let Some(mut env) = env else { return (p.clone(), None) };
    match p {
        Program::Skip => (Program::Skip, Some(env)),
        Program::Diverge => (Program::Diverge, None),
        Program::Assign(x, t) => {
            let t = term(t, &env);
            match eval_term(&t, &Env::new()) {
                Ok(v) => {
                    env.insert(x.clone(), v);
                }
                Err(_) => {
                    env.remove(x);
                }
            }
            (Program::Assign(x.clone(), t), Some(env))
        }
        Program::Unif { var, .. } => {
            env.remove(var);
            (p.clone(), Some(env))
        }
        Program::Observe(g) => (Program::Observe(guard(g, &env)), Some(env)),
        Program::Ite(g, a, b) => {
            let g = guard(g, &env);
            match eval_guard(&g, &Env::new()) {
                Ok(true) => go(a, Some(env)),
                Ok(false) => go(b, Some(env)),
                Err(_) => {
                    let (a, ea) = go(a, Some(env.clone()));
                    let (b, eb) = go(b, Some(env));
                    (Program::Ite(g, Box::new(a), Box::new(b)), join(ea, eb))
                }
            }
        }
        Program::PChoice(a, q, b) => {
            let (a, ea) = go(a, Some(env.clone()));
            let (b, eb) = go(b, Some(env));
            (Program::PChoice(Box::new(a), q.clone(), Box::new(b)), join(ea, eb))
        }
        Program::Seq(a, b) => {
            let (a, e) = go(a, Some(env));
            let (b, e) = go(b, e);
            (Program::Seq(Box::new(a), Box::new(b)), e)
        }
        Program::While(l) => {
            for v in l.body.vars() {
                if assigns(&l.body, &v) {
                    env.remove(&v);
                }
            }
            let g = guard(&l.guard, &env);
            let (body, _) = go(&l.body, Some(env.clone()));
            (Program::while_loop(g, l.invariant.clone(), body), Some(env))
        }
    }
}

fn assigns(p: &Program, x: &str) -> bool {
    match p {
        Program::Assign(y, _) | Program::Unif { var: y, .. } => y == x,
        Program::Ite(_, a, b) | Program::PChoice(a, _, b) | Program::Seq(a, b) => assigns(a, x) || assigns(b, x),
        Program::While(l) => assigns(&l.body, x),
        _ => false,
    }
}
