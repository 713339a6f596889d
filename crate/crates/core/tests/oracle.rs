
use riemann_wp::num::{int, to_f64};
use riemann_wp::riemann::{propagate_constants, transform, unfold, Kind, TransformerKind};
use riemann_wp::semantics::eval;
use riemann_wp::sim::{estimate_wp, simulate, RunOutcome};
use riemann_wp::syntax::{parse_expr, parse_program, parse_source, Program};
use riemann_wp::{Expr, State};

const SAMPLES: u64 = 100_000;

fn load(name: &str) -> Program {
    let path = format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_source(&std::fs::read_to_string(path).unwrap()).unwrap().program
}

fn init(pairs: &[(&str, i64)]) -> State {
    pairs.iter().map(|(k, v)| (k.to_string(), int(*v))).collect()
}

/// Lower and upper Riemann values of the `depth`-fold unrolling at `s`.
/// The upper value only bounds wp when the loop surely exits within
/// `depth - 1` iterations from `s`.
fn unrolled(c: &Program, f: &Expr, s: &State, n: u32, depth: u32) -> (f64, f64) {
    let c = propagate_constants(&unfold(c, depth));
    let lo = transform(TransformerKind::new(Kind::Lwp, n), &c, f).unwrap();
    let hi = transform(TransformerKind::new(Kind::Uwp, n), &c, f).unwrap();
    (to_f64(&eval(&lo, s, 1).unwrap()), to_f64(&eval(&hi, s, 1).unwrap()))
}

fn bracket(name: &str, lo: f64, hi: f64, c: &Program, f: &Expr, s: &State) {
    let est = estimate_wp(c, f, s, SAMPLES, 2024, 1_000_000).unwrap();
    let (m, sd) = (est.mean_f64(), est.std_error);
    assert!(lo - 4.0 * sd <= m && m <= hi + 4.0 * sd, "{name}: {m} +- {sd} outside [{lo}, {hi}]");
}

#[test]
fn monte_carlo_round() {
    let c = load("montecarlo-inner.pw");
    let f = parse_expr("count").unwrap();
    let s = init(&[("x", 0), ("y", 0), ("count", 0)]);
    let est = estimate_wp(&c, &f, &s, SAMPLES, 1, 100).unwrap();
    assert!((est.mean_f64() - 0.785).abs() <= 0.01 && 3.0 * est.std_error <= 0.01, "{est:?}");
    for n in [4, 16] {
        let (lo, hi) = unrolled(&c, &f, &s, n, 0);
        bracket("monte carlo round", lo, hi, &c, &f, &s);
    }
}

#[test]
fn bounded_loops() {
    let cases = [
        ("montecarlo.pw", "count", init(&[("x", 0), ("y", 0), ("count", 0), ("i", 1), ("M", 1)]), 2),
        ("irwin-hall.pw", "x", init(&[("x", 0), ("y", 0), ("i", 1), ("M", 3)]), 4),
        ("irwin-hall-conditioned.pw", "x", init(&[("x", 0), ("y", 0), ("i", 1), ("M", 2)]), 3),
    ];
    for (name, post, s, depth) in cases {
        let c = load(name);
        let f = parse_expr(post).unwrap();
        for n in [4, 16] {
            let (lo, hi) = unrolled(&c, &f, &s, n, depth);
            assert!(lo <= hi);
            bracket(name, lo, hi, &c, &f, &s);
        }
    }
}

#[test]
fn tortoise_and_hare() {
    // The loop is unbounded: unrolling gives the lower value and the
    // verified superinvariant the upper one.
    let c = load("tortoise-hare.pw");
    let Program::While(lp) = &c else { panic!() };
    let f = parse_expr("count").unwrap();
    let s = init(&[("x", 0), ("h", 0), ("t", 0), ("count", 0)]);
    let upper = to_f64(&eval(lp.invariant.as_ref().unwrap(), &s, 1).unwrap());
    for n in [4, 16] {
        let (lo, _) = unrolled(&c, &f, &s, n, 3);
        bracket("tortoise and hare", lo, upper, &c, &f, &s);
    }
}

#[test]
fn divergence_counts_as_zero() {
    let c = load("diverging.pw");
    let f = parse_expr("1").unwrap();
    let s = init(&[("x", 2), ("y", 0), ("a", 0), ("b", 1)]);
    let est = estimate_wp(&c, &f, &s, 20_000, 4, 1_000).unwrap();
    assert!(est.partial);
    for n in [4, 16] {
        let (lo, hi) = unrolled(&c, &f, &s, n, 3);
        assert!(lo <= 0.25 && 0.25 <= hi, "[{lo}, {hi}]");
        let (m, sd) = (est.mean_f64(), est.std_error);
        assert!(lo - 4.0 * sd <= m && m <= hi + 4.0 * sd, "{m} outside [{lo}, {hi}]");
    }
}

#[test]
fn observe_failures_contribute_nothing() {
    let c = parse_program("x := unif; observe(x <= 1/4); y := 1").unwrap();
    let est = estimate_wp(&c, &parse_expr("y").unwrap(), &init(&[("y", 0)]), SAMPLES, 9, 10).unwrap();
    assert!((est.mean_f64() - 0.25).abs() <= 4.0 * est.std_error);
    assert!((est.violated_fraction - 0.75).abs() <= 0.01);
    let run = simulate(&parse_program("observe(false)").unwrap(), &State::new(), 0, 10).unwrap();
    assert_eq!(run, RunOutcome::ObserveViolated);
}
