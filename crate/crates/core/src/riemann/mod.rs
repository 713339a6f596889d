//! Lower and upper Riemann pre-expectation transformers for loop-free
//! programs, loop characteristic functions, and loop unfolding.

mod constprop;
mod nondet;
mod unfold;

use std::fmt;

use num_traits::{One, Zero};

use crate::num::{ratio, Rational};
use crate::semantics::{fresh_name, substitute};
use crate::syntax::{Expr, Guard, Loop, Program, Quantifier, Term};

pub use nondet::{encode_nondet, encode_nondet_with, NondetOptions, Polarity};
pub use constprop::propagate_constants;
pub use unfold::{unfold, unfold_loop};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Lwp,
    Uwp,
    Lwlp,
    Uwlp,
}

impl Kind {
    pub fn is_lower(self) -> bool {
        matches!(self, Kind::Lwp | Kind::Lwlp)
    }

    pub fn is_liberal(self) -> bool {
        matches!(self, Kind::Lwlp | Kind::Uwlp)
    }

    /// The quantifier a `unif` statement introduces.
    pub fn quantifier(self) -> Quantifier {
        if self.is_lower() {
            Quantifier::Inf
        } else {
            Quantifier::Sup
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Lwp => "lwp",
            Kind::Uwp => "uwp",
            Kind::Lwlp => "lwlp",
            Kind::Uwlp => "uwlp",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lwp" => Ok(Kind::Lwp),
            "uwp" => Ok(Kind::Uwp),
            "lwlp" => Ok(Kind::Lwlp),
            "uwlp" => Ok(Kind::Uwlp),
            other => Err(format!("unknown transformer `{other}`")),
        }
    }
}

/// A transformer together with its default partition size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TransformerKind {
    pub kind: Kind,
    pub n: u32,
}

impl TransformerKind {
    pub fn new(kind: Kind, n: u32) -> TransformerKind {
        assert!(n >= 1, "partition size must be positive");
        TransformerKind { kind, n }
    }
}

pub const DEFAULT_NODE_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("loop encountered; transformers apply to loop-free programs (use an invariant or unfold)")]
    Loop,
    #[error("non-nested loops only: the loop body contains a loop")]
    NestedLoop,
    #[error("{0} needs a 1-bounded post-expectation; certify it or assume it explicitly")]
    NotOneBounded(Kind),
    #[error("expression has {size} nodes, above the cap of {cap}")]
    TooLarge { size: u64, cap: u64 },
}

/// Applies a transformer to a loop-free program.
///
/// For the liberal kinds the post-expectation must be 1-bounded; this
/// function only accepts posts that are bounded by a syntactic argument.
/// Use [`transform_assuming_bounded`] once boundedness has been certified.
pub fn transform(kind: TransformerKind, prog: &Program, post: &Expr) -> Result<Expr, TransformError> {
    if kind.kind.is_liberal() && !syntactically_one_bounded(post) {
        return Err(TransformError::NotOneBounded(kind.kind));
    }
    transform_assuming_bounded(kind, prog, post, DEFAULT_NODE_CAP)
}

/// Like [`transform`] but trusts the caller on 1-boundedness.
pub fn transform_assuming_bounded(kind: TransformerKind, prog: &Program, post: &Expr, node_cap: u64) -> Result<Expr, TransformError> {
    let out = Transformer { kind, cap: node_cap }.go(prog, post.clone())?;
    check_size(&out, node_cap)?;
    Ok(out)
}

fn check_size(e: &Expr, cap: u64) -> Result<(), TransformError> {
    let size = e.tree_size();
    if size > cap {
        return Err(TransformError::TooLarge { size, cap });
    }
    Ok(())
}

struct Transformer {
    kind: TransformerKind,
    cap: u64,
}

impl Transformer {
    fn go(&self, p: &Program, f: Expr) -> Result<Expr, TransformError> {
        Ok(match p {
            Program::Skip => f,
            Program::Diverge => {
                if self.kind.kind.is_liberal() {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Program::Assign(x, t) => substitute(&f, x, t),
            Program::Unif { var, partition } => {
                if !f.mentions(var) {
                    // Every cell sees the same value; the average is f.
                    return Ok(f);
                }
                let n = partition.unwrap_or(self.kind.n).max(1);
                let (binder, body) = if f.bound_vars().contains(var) {
                    let fresh = fresh_name(var, &f.all_names());
                    let body = substitute(&f, var, &Term::Var(fresh.clone()));
                    (fresh, body)
                } else {
                    (var.clone(), f)
                };
                let q = self.kind.kind.quantifier();
                let cells: Vec<Expr> = (0..n)
                    .map(|i| Expr::quant(q, binder.clone(), ratio(i as i64, n as i64), ratio(i as i64 + 1, n as i64), body.clone()))
                    .collect();
                let out = Expr::scale(ratio(1, n as i64), Expr::sum_all(cells));
                check_size(&out, self.cap)?;
                out
            }
            Program::Observe(g) => Expr::iverson(g.clone(), f),
            Program::Ite(g, a, b) => {
                let ta = self.go(a, f.clone())?;
                let tb = self.go(b, f)?;
                Expr::sum(Expr::iverson(g.clone(), ta), Expr::iverson(Guard::not(g.clone()), tb))
            }
            Program::PChoice(a, p, b) => {
                let ta = self.go(a, f.clone())?;
                let tb = self.go(b, f)?;
                let rest = Rational::one() - p;
                if p.is_zero() {
                    tb
                } else if rest.is_zero() {
                    ta
                } else {
                    Expr::sum(Expr::scale(p.clone(), ta), Expr::scale(rest, tb))
                }
            }
            Program::Seq(a, b) => {
                let tb = self.go(b, f)?;
                self.go(a, tb)?
            }
            Program::While(_) => return Err(TransformError::Loop),
        })
    }
}

/// `[φ] * T(B)(candidate) + [!φ] * post`.
pub fn char_fn_apply(kind: TransformerKind, lp: &Loop, post: &Expr, candidate: &Expr) -> Result<Expr, TransformError> {
    if kind.kind.is_liberal() && !(syntactically_one_bounded(candidate) && syntactically_one_bounded(post)) {
        return Err(TransformError::NotOneBounded(kind.kind));
    }
    char_fn_apply_assuming_bounded(kind, lp, post, candidate, DEFAULT_NODE_CAP)
}

pub fn char_fn_apply_assuming_bounded(
    kind: TransformerKind,
    lp: &Loop,
    post: &Expr,
    candidate: &Expr,
    node_cap: u64,
) -> Result<Expr, TransformError> {
    if !lp.body.is_loop_free() {
        return Err(TransformError::NestedLoop);
    }
    let body = transform_assuming_bounded(kind, &lp.body, candidate, node_cap)?;
    Ok(Expr::sum(Expr::iverson(lp.guard.clone(), body), Expr::iverson(Guard::not(lp.guard.clone()), post.clone())))
}

/// A cheap sufficient test for `f <= 1` everywhere.
pub fn syntactically_one_bounded(f: &Expr) -> bool {
    syntactic_bound(f).is_some_and(|b| b <= Rational::one())
}

/// An upper bound on the value of `f`, if one follows from its shape.
pub fn syntactic_bound(f: &Expr) -> Option<Rational> {
    match f {
        Expr::Term(t) => term_bound(t),
        Expr::Iverson(_, e) => syntactic_bound(e),
        Expr::Scale(q, e) => Some(q * syntactic_bound(e)?),
        Expr::Sum(a, b) => {
            // `[g] * a + [!g] * b` is bounded by the larger branch.
            if let (Expr::Iverson(g, x), Expr::Iverson(h, y)) = (&**a, &**b) {
                if complementary(g, h) {
                    return Some(syntactic_bound(x)?.max(syntactic_bound(y)?));
                }
            }
            Some(syntactic_bound(a)? + syntactic_bound(b)?)
        }
        Expr::Quant(q) => syntactic_bound(&q.body),
    }
}

fn complementary(g: &Guard, h: &Guard) -> bool {
    matches!(h, Guard::Not(inner) if **inner == *g) || matches!(g, Guard::Not(inner) if **inner == *h)
}

fn term_bound(t: &Term) -> Option<Rational> {
    match t {
        Term::Const(q) => Some(q.clone()),
        Term::Var(_) | Term::App(..) => None,
        Term::Add(a, b) => Some(term_bound(a)? + term_bound(b)?),
        Term::Monus(a, _) => term_bound(a),
        Term::Mul(a, b) => Some(term_bound(a)? * term_bound(b)?),
    }
}
