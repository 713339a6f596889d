mod support;

use riemann_wp::num::{int, ratio};
use riemann_wp::riemann::{char_fn_apply, encode_nondet, transform, unfold, Kind, Polarity, TransformerKind};
use riemann_wp::semantics::eval;
use riemann_wp::syntax::{parse_expr, parse_program, parse_source, Program};
use riemann_wp::{Expr, Rational, State};
use support::*;

fn tk(kind: Kind, n: u32) -> TransformerKind {
    TransformerKind::new(kind, n)
}

fn value(kind: Kind, n: u32, c: &Program, f: &Expr, s: &State) -> Rational {
    eval(&transform(tk(kind, n), c, f).unwrap(), s, grid_for(n)).unwrap()
}

fn source(name: &str) -> riemann_wp::syntax::Source {
    let path = format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_source(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Cells of the 16 x 16 grid meeting the quarter disc, over 256. A cell
/// meets the disc exactly when its corner nearest the origin lies inside.
fn cell_count_oracle(n: i64) -> Rational {
    let inside = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i * i + j * j <= n * n).count();
    ratio(inside as i64, n * n)
}

#[test]
fn lower_sums_of_a_threshold() {
    let c = parse_program("x := unif").unwrap();
    let f = parse_expr("[x >= 1/2] * 1").unwrap();
    for x in [0, 1, 2] {
        let s = state(&[("x", int(x))]);
        assert_eq!(value(Kind::Lwp, 2, &c, &f, &s), ratio(1, 2));
        assert_eq!(value(Kind::Lwp, 3, &c, &f, &s), ratio(1, 3));
    }
}

#[test]
fn monte_carlo_upper_sum_matches_cell_count() {
    let c = source("montecarlo-inner.pw").program;
    let u = transform(tk(Kind::Uwp, 16), &c, &parse_expr("count").unwrap()).unwrap();
    let expected = cell_count_oracle(16);
    assert!(expected <= ratio(85, 100));
    for count in [0, 1, 5] {
        let s = state(&[("count", int(count)), ("x", int(0)), ("y", int(0))]);
        // Endpoint sampling and a finer grid agree: the sup of each cell
        // sits at a corner.
        assert_eq!(eval(&u, &s, 1).unwrap(), int(count) + &expected);
        assert_eq!(eval(&u, &s, 3).unwrap(), int(count) + &expected);
    }
}

#[test]
fn skip_and_diverge_rows() {
    let f = parse_expr("[x <= 1] * 1").unwrap();
    for n in [1, 3] {
        for kind in [Kind::Lwp, Kind::Uwp, Kind::Lwlp, Kind::Uwlp] {
            assert_eq!(transform(tk(kind, n), &Program::Skip, &f).unwrap(), f);
        }
        let s = state(&[("x", int(0))]);
        assert_eq!(value(Kind::Lwp, n, &Program::Diverge, &f, &s), int(0));
        assert_eq!(value(Kind::Uwp, n, &Program::Diverge, &f, &s), int(0));
        assert_eq!(value(Kind::Lwlp, n, &Program::Diverge, &f, &s), int(1));
        assert_eq!(value(Kind::Uwlp, n, &Program::Diverge, &f, &s), int(1));
    }
}

#[test]
fn sandwich() {
    let mut checked = 0;
    for b in benchmarks() {
        let states = sample_states(b.vars, 100, 11);
        for n in [1, 2, 4, 8] {
            let lo = transform(tk(Kind::Lwp, n), &b.prog, &b.f).unwrap();
            let hi = transform(tk(Kind::Uwp, n), &b.prog, &b.f).unwrap();
            let llo = transform(tk(Kind::Lwlp, n), &b.prog, &b.g).unwrap();
            let lhi = transform(tk(Kind::Uwlp, n), &b.prog, &b.g).unwrap();
            for s in &states {
                let g = grid_for(n);
                let (a, z) = (eval(&lo, s, g).unwrap(), eval(&hi, s, g).unwrap());
                assert!(a <= z, "{} N={n} lwp {a} > uwp {z} at {s:?}", b.name);
                let (a, z) = (eval(&llo, s, g).unwrap(), eval(&lhi, s, g).unwrap());
                assert!(a <= z, "{} N={n} lwlp {a} > uwlp {z} at {s:?}", b.name);
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 4 * 4 * 100);
}

#[test]
fn powers_of_two_tighten() {
    for b in benchmarks() {
        let states = sample_states(b.vars, 20, 23);
        let lows: Vec<Expr> = (1..=5).map(|k| transform(tk(Kind::Lwp, 1 << k), &b.prog, &b.f).unwrap()).collect();
        let highs: Vec<Expr> = (1..=5).map(|k| transform(tk(Kind::Uwp, 1 << k), &b.prog, &b.f).unwrap()).collect();
        for s in &states {
            let l: Vec<Rational> = (0..5).map(|k| eval(&lows[k], s, grid_for(2 << k)).unwrap()).collect();
            let h: Vec<Rational> = (0..5).map(|k| eval(&highs[k], s, grid_for(2 << k)).unwrap()).collect();
            assert!(l.windows(2).all(|w| w[0] <= w[1]), "{}: lwp not non-decreasing {l:?}", b.name);
            assert!(h.windows(2).all(|w| w[0] >= w[1]), "{}: uwp not non-increasing {h:?}", b.name);
        }
    }
}

#[test]
fn monotone_in_the_post() {
    for b in benchmarks() {
        let bigger = Expr::sum(b.f.clone(), parse_expr("[x <= 1/2] * y").unwrap());
        for s in sample_states(b.vars, 20, 5) {
            for kind in [Kind::Lwp, Kind::Uwp] {
                assert!(value(kind, 4, &b.prog, &b.f, &s) <= value(kind, 4, &b.prog, &bigger, &s), "{}", b.name);
            }
        }
    }
}

#[test]
fn unfolding_is_monotone() {
    let loops = [
        ("while (i <= M) { y := unif; x := x + y; i := i + 1 }", "x", &["x", "y", "i", "M"][..]),
        ("while (x <= 1/2) { x := unif; n := n + 1 }", "n", &["x", "n"][..]),
        ("while (c == 0) { { c := 1 } [1/3] { c := 0 }; y := unif; n := n + y }", "n", &["c", "n", "y"][..]),
    ];
    for (prog, post, vars) in loops {
        let c = parse_program(prog).unwrap();
        let f = parse_expr(post).unwrap();
        let one = parse_expr("[x <= 2] * 1").unwrap();
        let lw: Vec<Expr> = (0..5).map(|d| transform(tk(Kind::Lwp, 2), &unfold(&c, d), &f).unwrap()).collect();
        let uwl: Vec<Expr> = (0..5).map(|d| transform(tk(Kind::Uwlp, 2), &unfold(&c, d), &one).unwrap()).collect();
        let mut states = sample_states(vars, 20, 3);
        for s in &mut states {
            s.entry("x".into()).or_insert_with(|| int(0));
        }
        for s in &states {
            let l: Vec<Rational> = lw.iter().map(|e| eval(e, s, 4).unwrap()).collect();
            let u: Vec<Rational> = uwl.iter().map(|e| eval(e, s, 4).unwrap()).collect();
            assert!(l.windows(2).all(|w| w[0] <= w[1]), "{prog}: lwp {l:?}");
            assert!(u.windows(2).all(|w| w[0] >= w[1]), "{prog}: uwlp {u:?}");
        }
    }
}

#[test]
fn characteristic_function_of_monte_carlo() {
    let src = source("montecarlo.pw");
    let Program::While(lp) = &src.program else { panic!("expected a loop") };
    let inv = lp.invariant.clone().unwrap();
    let post = parse_expr("count").unwrap();
    let phi = char_fn_apply(tk(Kind::Uwp, 16), lp, &post, &inv).unwrap();
    let body = transform(tk(Kind::Uwp, 16), &lp.body, &inv).unwrap();
    for s in sample_states(&["x", "y", "count", "i", "M"], 20, 9) {
        let expected = if s["i"] <= s["M"] { eval(&body, &s, 1).unwrap() } else { s["count"].clone() };
        assert_eq!(eval(&phi, &s, 1).unwrap(), expected);
    }
}

#[test]
fn characteristic_function_of_irwin_hall() {
    let src = source("irwin-hall.pw");
    let Program::While(lp) = &src.program else { panic!("expected a loop") };
    let phi = char_fn_apply(tk(Kind::Uwp, 10), lp, &parse_expr("x").unwrap(), lp.invariant.as_ref().unwrap()).unwrap();
    assert!(phi.free_vars().iter().all(|v| ["x", "i", "M"].contains(&v.as_str())), "{:?}", phi.free_vars());
}

#[test]
fn nondeterministic_encoding() {
    let one = encode_nondet(&parse_program("x := unif").unwrap(), 1, Polarity::Angelic);
    assert!(!one.contains("discrete_uniform"), "{one}");
    assert!(one.contains("assume ?!(0 <= x && x <= 1)"), "{one}");
    let two = encode_nondet(&parse_program("x := unif").unwrap(), 2, Polarity::Angelic);
    assert!(two.contains("discrete_uniform(2)") && two.contains("j_1 / 2 <= x && x <= (j_1 + 1) / 2"), "{two}");
    let demonic = encode_nondet(&parse_program("x := unif").unwrap(), 2, Polarity::Demonic);
    assert!(two.contains("coproc") && two.contains("cohavoc x"));
    assert!(demonic.starts_with("// partition size 2, demonic") && demonic.contains("\n    havoc x"), "{demonic}");

    let mc = source("montecarlo.pw").program;
    let text = encode_nondet(&mc, 16, Polarity::Angelic);
    assert_eq!(text, encode_nondet(&mc, 16, Polarity::Angelic));
    assert_eq!(text.matches("discrete_uniform(16)").count(), 2, "{text}");
    assert!(text.contains("coproc main(") && text.contains("@invariant(") && text.contains("while i <= M {"), "{text}");
}
