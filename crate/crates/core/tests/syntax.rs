mod support;

use proptest::prelude::*;
use riemann_wp::syntax::{parse_expr, parse_program, parse_source, pretty_expr, pretty_program, pretty_source, CmpOp, Expr, Guard, Program, Term};
use riemann_wp::semantics::eval_guard;
use support::*;

#[test]
fn skip_parses_and_prints() {
    assert_eq!(parse_program("skip").unwrap(), Program::Skip);
    assert_eq!(pretty_program(&Program::Skip).trim(), "skip");
}

#[test]
fn sample_then_observe() {
    let p = parse_program("x := unif; observe(x <= 1/2)").unwrap();
    let want = Program::Seq(
        Box::new(Program::Unif { var: "x".into(), partition: None }),
        Box::new(Program::Observe(Guard::cmp(CmpOp::Le, Term::var("x"), Term::Const(q(1, 2))))),
    );
    assert_eq!(p, want);
}

#[test]
fn monte_carlo_body_guard() {
    let p = parse_program("x := unif; y := unif; if (x * x + y * y <= 1) { count := count + 1 } else { skip }").unwrap();
    let Program::Seq(_, rest) = p else { panic!() };
    let Program::Seq(_, ite) = *rest else { panic!() };
    let Program::Ite(g, _, _) = *ite else { panic!() };
    let xx = Term::mul(Term::var("x"), Term::var("x"));
    let yy = Term::mul(Term::var("y"), Term::var("y"));
    assert_eq!(g, Guard::cmp(CmpOp::Le, Term::add(xx, yy), Term::int(1)));
}

#[test]
fn expectation_examples() {
    let f = parse_expr("sup v in [0,5]: [w == v*v] * v").unwrap();
    let Expr::Quant(qn) = &f else { panic!("{f:?}") };
    assert!(matches!(qn.body, Expr::Iverson(..)));
    assert_eq!(qn.hi, q(5, 1));

    let inv = parse_expr("count + [i <= M] * (0.85 * ((M - i) + 1))").unwrap();
    let Expr::Sum(a, b) = &inv else { panic!("{inv:?}") };
    assert_eq!(**a, Expr::var("count"));
    let Expr::Iverson(_, body) = &**b else { panic!() };
    let monus = Term::monus(Term::var("M"), Term::var("i"));
    assert_eq!(**body, Expr::Term(Term::mul(Term::Const(q(17, 20)), Term::add(monus, Term::int(1)))));

    assert_eq!(parse_expr("0").unwrap(), Expr::zero());
}

#[test]
fn expectation_errors() {
    assert!(parse_expr("sup v in [1, 0]: v").is_err());
    assert!(parse_expr("sup v in [-1, 0]: v").is_err());
    assert!(parse_expr("x +").is_err());
    assert!(parse_expr("[x < 1] - y").is_err());
}

#[test]
fn program_errors_carry_positions() {
    let e = parse_program("x := unif;\n  y := ").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(parse_program("{ skip } [3/2] { skip }").is_err());
    assert!(parse_source("vars x;\ny := 1").is_err());
    assert!(parse_program("x#1 := 1").is_err());
}

#[test]
fn free_variables() {
    let names = |s: &str| parse_expr(s).unwrap().free_vars().into_iter().collect::<Vec<_>>();
    assert_eq!(names("x + y"), ["x", "y"]);
    assert_eq!(names("sup x in [0,1]: x * y"), ["y"]);
    assert_eq!(names("x + (sup x in [0,1]: x)"), ["x"]);
}

#[test]
fn shadowed_binders_keep_their_scope() {
    let inner = Expr::sup("x", q(0, 1), q(1, 1), Expr::var("x"));
    let f = Expr::sum(Expr::var("x"), Expr::inf("x", q(0, 1), q(2, 1), Expr::sum(Expr::var("x"), inner)));
    let text = pretty_expr(&f);
    assert_eq!(parse_expr(&text).unwrap(), f, "{text}");
}

#[test]
fn domain_declarations_parse() {
    let src = parse_source(
        "vars x;\ndomain Exponentials {\n func exp(UReal): UReal;\n axiom exp_base exp(0) == 1;\n \
         axiom exp_step forall e . exp(e + 1) == 1/2 * exp(e);\n}\nx := exp(x)",
    )
    .unwrap();
    assert_eq!(src.domains[0].axioms.len(), 2);
    assert!(parse_source("x := exp(x)").is_err());
    assert!(parse_source("domain D { func f(UReal): UReal; axiom a f(e) == 1; }\nskip").is_err());
}

#[test]
fn case_study_files_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../programs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "pw") {
            let text = std::fs::read_to_string(&path).unwrap();
            let src = parse_source(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let again = parse_source(&pretty_source(&src)).unwrap();
            assert_eq!(again, src, "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn programs_round_trip(p in program()) {
        let text = pretty_program(&p);
        let back = parse_program(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, p, "{}", text);
    }

    #[test]
    fn expectations_round_trip(f in expr()) {
        let text = pretty_expr(&f);
        let back = parse_expr(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, f, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn guard_normalization_preserves_truth(g in guard(), s in any_state()) {
        let n = g.normalize();
        prop_assert!(n.is_core());
        prop_assert_eq!(eval_guard(&g, &s).unwrap(), eval_guard(&n, &s).unwrap());
    }

    #[test]
    fn rationals_stay_reduced(p in 0i64..1000, d in 1i64..1000) {
        let r = q(p, d);
        let (mut a, mut b) = (r.numer().to_string().parse::<i64>().unwrap(), r.denom().to_string().parse::<i64>().unwrap());
        prop_assert_eq!(p * b, a * d);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        prop_assert_eq!(a, if p == 0 { r.denom().to_string().parse::<i64>().unwrap() } else { 1 });
    }
}
