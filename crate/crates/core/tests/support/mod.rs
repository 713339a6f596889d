//! Generators and helpers shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use riemann_wp::num::ratio;
use riemann_wp::syntax::{CmpOp, Expr, Guard, Loop, Program, Quantifier, Term};
use riemann_wp::{Rational, State};

pub const VARS: &[&str] = &["x", "y", "z", "count", "i", "M"];

pub fn q(p: i64, d: i64) -> Rational {
    ratio(p, d)
}

pub fn state(pairs: &[(&str, Rational)]) -> State {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub fn solver_available() -> bool {
    let path = std::env::var("RWP_SOLVER").unwrap_or_else(|_| "z3".into());
    std::process::Command::new(path).arg("-version").output().is_ok()
}

pub fn rational() -> impl Strategy<Value = Rational> {
    (0i64..12, 1i64..5).prop_map(|(p, d)| ratio(p, d))
}

pub fn probability() -> impl Strategy<Value = Rational> {
    (0i64..=4).prop_map(|p| ratio(p, 4))
}

pub fn var() -> impl Strategy<Value = String> {
    prop::sample::select(VARS).prop_map(str::to_string)
}

pub fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![rational().prop_map(Term::Const), var().prop_map(Term::Var)];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::monus(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Term::mul(a, b)),
        ]
    })
}

pub fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop::sample::select(vec![CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Ge])
}

pub fn guard() -> impl Strategy<Value = Guard> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(Guard::Bool),
        (cmp_op(), term(), term()).prop_map(|(op, a, b)| Guard::cmp(op, a, b)),
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

fn expr_with(quantifiers: bool) -> BoxedStrategy<Expr> {
    let leaf = term().prop_map(Expr::Term);
    leaf.prop_recursive(3, 16, 2, move |inner| {
        let mut options = vec![
            (guard(), inner.clone()).prop_map(|(g, e)| Expr::iverson(g, e)).boxed(),
            ((1i64..9, 1i64..5), inner.clone()).prop_map(|((p, d), e)| Expr::scale(ratio(p, d), e)).boxed(),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sum(a, b)).boxed(),
        ];
        if quantifiers {
            options.push(
                (any::<bool>(), var(), 0i64..3, 0i64..3, inner)
                    .prop_map(|(sup, v, a, b, e)| {
                        let (lo, hi) = (ratio(a.min(b), 2), ratio(a.max(b), 2));
                        Expr::quant(if sup { Quantifier::Sup } else { Quantifier::Inf }, v, lo, hi, e)
                    })
                    .boxed(),
            );
        }
        prop::strategy::Union::new(options)
    })
    .boxed()
}

pub fn expr() -> BoxedStrategy<Expr> {
    expr_with(true)
}

pub fn qf_expr() -> BoxedStrategy<Expr> {
    expr_with(false)
}

pub fn program() -> impl Strategy<Value = Program> {
    let leaf = prop_oneof![
        Just(Program::Skip),
        Just(Program::Diverge),
        (var(), term()).prop_map(|(x, t)| Program::Assign(x, t)),
        (var(), prop::option::of(1u32..9)).prop_map(|(var, partition)| Program::Unif { var, partition }),
        guard().prop_map(Program::Observe),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Program::Seq(Box::new(a), Box::new(b))),
            (guard(), inner.clone(), inner.clone()).prop_map(|(g, a, b)| Program::Ite(g, Box::new(a), Box::new(b))),
            (inner.clone(), probability(), inner.clone()).prop_map(|(a, p, b)| Program::PChoice(Box::new(a), p, Box::new(b))),
            (guard(), prop::option::of(expr()), inner)
                .prop_map(|(guard, invariant, body)| Program::While(Box::new(Loop { guard, invariant, body }))),
        ]
    })
}

/// Nonnegative rational state over all of [`VARS`].
pub fn any_state() -> impl Strategy<Value = State> {
    prop::collection::vec(rational(), VARS.len())
        .prop_map(|vs| VARS.iter().map(|v| v.to_string()).zip(vs).collect())
}

pub fn arc<T>(t: T) -> Arc<T> {
    Arc::new(t)
}

/// A loop-free program with a post-expectation `f` and a 1-bounded `g`.
/// Every quantifier the transformers introduce attains its extremum on the
/// points `k / 8` or at a cell endpoint, so sampled evaluation is exact.
pub struct Bench {
    pub name: &'static str,
    pub prog: Program,
    pub f: Expr,
    pub g: Expr,
    pub vars: &'static [&'static str],
}

pub fn benchmarks() -> Vec<Bench> {
    use riemann_wp::syntax::{parse_expr, parse_program};
    let b = |name, prog: &str, f: &str, g: &str, vars| Bench {
        name,
        prog: parse_program(prog).unwrap(),
        f: parse_expr(f).unwrap(),
        g: parse_expr(g).unwrap(),
        vars,
    };
    vec![
        b(
            "monte-carlo-round",
            "x := unif; y := unif; if (x * x + y * y <= 1) { count := count + 1 } else { skip }",
            "count",
            "[count >= 1] * 1",
            &["x", "y", "count"],
        ),
        b("product", "x := unif; y := unif; z := x * y", "z + y", "[z <= 1/4] * 1", &["x", "y", "z"]),
        b(
            "conditioned",
            "x := unif; observe(x <= 1/2); if (x <= 1/4) { diverge } else { y := y + x }",
            "y + x",
            "[x >= 1/8] * 1",
            &["x", "y"],
        ),
        b(
            "kinked",
            "{ x := unif } [1/3] { x := 1/2 }; if (x <= 1/2) { y := x + y } else { y := (2 * x - 1/2) + y }",
            "y",
            "[y <= 1] * 1",
            &["x", "y"],
        ),
    ]
}

/// Sampling grid so that every quantifier sees the points `k / 8` and the
/// endpoints of its cell.
pub fn grid_for(n: u32) -> u32 {
    (8 / n).max(1)
}

/// `count` states over `vars`, drawn from multiples of 1/4 in [0, 3].
pub fn sample_states(vars: &[&str], count: usize, seed: u64) -> Vec<State> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| vars.iter().map(|v| (v.to_string(), ratio(rng.gen_range(0..=12), 4))).collect()).collect()
}
