mod support;

use std::time::Duration;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use riemann_wp::fo::{
    check_entailment, check_one_bounded, check_validity, emit_query, emit_smtlib, encode_expr, entailment_formula, Dialect, Fo,
    FoTerm, SolverConfig, SolverVerdict,
};
use riemann_wp::num::{int, ratio};
use riemann_wp::riemann::{transform, Kind, TransformerKind};
use riemann_wp::semantics::{eval, to_pnf};
use riemann_wp::syntax::{parse_expr, parse_source, CmpOp};
use riemann_wp::{Expr, State};
use support::*;

fn cfg() -> SolverConfig {
    let mut c = SolverConfig::default();
    c.timeout = Duration::from_secs(60);
    c
}

fn e(s: &str) -> Expr {
    parse_expr(s).unwrap()
}

fn pin(s: &State) -> Vec<Fo> {
    s.iter().map(|(k, v)| Fo::cmp(CmpOp::Eq, FoTerm::var(k), FoTerm::Num(v.clone()))).collect()
}

fn valid(phi: &Fo) -> SolverVerdict {
    check_validity(phi, &[], &cfg()).unwrap().0
}

#[test]
fn encoding_pins_the_value() {
    if !solver_available() {
        eprintln!("solver not found; skipping");
        return;
    }
    let mut runner = TestRunner::new(Config { cases: 50, ..Config::default() });
    runner
        .run(&(qf_expr(), any_state()), |(f, s)| {
            let v = eval(&f, &s, 1).unwrap();
            let mut premises = pin(&s);
            premises.push(encode_expr(&f, "result"));
            let unique = Fo::implies(Fo::and(premises.clone()), Fo::cmp(CmpOp::Eq, FoTerm::var("result"), FoTerm::Num(v.clone())));
            prop_assert_eq!(valid(&unique), SolverVerdict::Valid, "{} at {:?}", f, s);
            premises.push(Fo::cmp(CmpOp::Eq, FoTerm::var("result"), FoTerm::Num(v)));
            let exists = Fo::not(Fo::and(premises));
            prop_assert!(matches!(valid(&exists), SolverVerdict::Invalid(_)), "no model for {}", f);
            Ok(())
        })
        .unwrap();
}

#[test]
fn monus_encoding() {
    if !solver_available() {
        return;
    }
    let s = state(&[("x", int(1)), ("y", int(3))]);
    let mut p = pin(&s);
    p.push(encode_expr(&e("x - y"), "r"));
    assert_eq!(valid(&Fo::implies(Fo::and(p), Fo::cmp(CmpOp::Eq, FoTerm::var("r"), FoTerm::zero()))), SolverVerdict::Valid);
}

#[test]
fn square_root_example_is_invalid() {
    if !solver_available() {
        return;
    }
    let f = e("sup v in [0,5]: [w == v * v] * v");
    let out = check_entailment(&f, &e("4"), &[], &cfg()).unwrap();
    let SolverVerdict::Invalid(m) = &out.verdict else { panic!("{:?}", out.verdict) };
    let w = &out.witness().unwrap()["w"];
    assert!(*w > int(16) && *w <= int(25), "w = {w}");
    let (lhs, rhs) = out.query.values_at(&m.values).unwrap();
    assert!(lhs > rhs);
}

#[test]
fn reflexive_entailments_hold() {
    if !solver_available() {
        return;
    }
    for f in ["x", "[x <= 1] * x + 1/2", "(x - y) * 3 + [x * x + y * y <= 1] * count"] {
        assert_eq!(check_entailment(&e(f), &e(f), &[], &cfg()).unwrap().verdict, SolverVerdict::Valid, "{f}");
    }
    let src = parse_source(&std::fs::read_to_string(format!("{}/../../programs/montecarlo-inner.pw", env!("CARGO_MANIFEST_DIR"))).unwrap()).unwrap();
    let u = transform(TransformerKind::new(Kind::Uwp, 16), &src.program, &e("count")).unwrap();
    assert_eq!(check_entailment(&u, &e("count + 17/20"), &[], &cfg()).unwrap().verdict, SolverVerdict::Valid);
}

#[test]
fn emission_is_deterministic() {
    let q = entailment_formula(&e("sup v in [0,5]: [w == v * v] * v"), &e("4"), &[]).unwrap().query();
    let a = emit_query(&q, Dialect::Generic, None).text;
    assert_eq!(a, emit_query(&q, Dialect::Generic, None).text);
    let path = format!("{}/tests/golden/square-root.smt2", env!("CARGO_MANIFEST_DIR"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &a).unwrap();
    }
    assert_eq!(a, std::fs::read_to_string(&path).unwrap());
    assert!(a.contains("(set-logic QF_NRA)") && a.contains("(check-sat)\n(get-model)"));
    assert!(emit_query(&q, Dialect::Z3, Some(3)).text.contains(":smt.random_seed 3"));
}

#[test]
fn reflexive_script_is_unsat() {
    let script = emit_smtlib(&Fo::implies(Fo::Bool(true), Fo::cmp(CmpOp::Le, FoTerm::var("x"), FoTerm::var("x"))), &[]);
    assert!(script.contains("(declare-fun x () Real)"));
    if !solver_available() {
        return;
    }
    let out = std::process::Command::new(std::env::var("RWP_SOLVER").unwrap_or_else(|_| "z3".into()))
        .arg("-in")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut c| {
            use std::io::Write;
            c.stdin.take().unwrap().write_all(script.as_bytes())?;
            c.wait_with_output()
        })
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("unsat"));
}

fn exp_domains() -> Vec<riemann_wp::syntax::DomainDecl> {
    let text = std::fs::read_to_string(format!("{}/../../programs/diverging.pw", env!("CARGO_MANIFEST_DIR"))).unwrap();
    parse_source(&text).unwrap().domains
}

#[test]
fn domain_axioms_are_asserted() {
    let script = emit_smtlib(&Fo::Bool(true), &exp_domains());
    assert!(script.contains("(declare-fun exp (Real) Real)"), "{script}");
    assert_eq!(script.matches(":named axiom.").count(), 3, "{script}");
    assert!(script.contains("axiom.exp_base") && script.contains("axiom.exp_step") && script.contains("axiom.exp_antitone"));
    assert!(!script.contains("QF_"), "{script}");
}

#[test]
fn timeouts_are_unknown() {
    if !solver_available() {
        return;
    }
    let mut c = cfg();
    c.timeout = Duration::from_millis(1);
    let f = e("[a <= b] * (1 - exp(x))");
    let out = check_entailment(&f, &e("[a <= b] * exp(x + 1)"), &exp_domains(), &c).unwrap();
    assert_eq!(out.verdict, SolverVerdict::Unknown("timeout".into()));
}

#[test]
fn one_boundedness() {
    if !solver_available() {
        return;
    }
    let check = |f: &str| check_one_bounded(&e(f), &[], &cfg()).unwrap();
    assert_eq!(check("1/2").verdict, SolverVerdict::Valid);
    assert_eq!(check("[x <= 1] * x").verdict, SolverVerdict::Valid);
    let out = check("x");
    assert!(matches!(out.verdict, SolverVerdict::Invalid(_)));
    assert!(out.witness().unwrap()["x"] > int(1));
}

/// `f ⊑ g` decided through the nested relational encoding of `f`, which
/// keeps quantifiers where they occur.
fn via_relation(f: &Expr, g: &Expr, f_on_left: bool) -> SolverVerdict {
    let mut premises: Vec<Fo> = f.free_vars().union(&g.free_vars()).map(|v| Fo::cmp(CmpOp::Ge, FoTerm::var(v), FoTerm::zero())).collect();
    premises.push(encode_expr(f, "r"));
    let gt = riemann_wp::fo::encode_qf(g).unwrap();
    let (a, b) = if f_on_left { (FoTerm::var("r"), gt) } else { (gt, FoTerm::var("r")) };
    valid(&Fo::implies(Fo::and(premises), Fo::cmp(CmpOp::Le, a, b)))
}

fn agree(a: &SolverVerdict, b: &SolverVerdict) -> bool {
    matches!((a, b), (SolverVerdict::Valid, SolverVerdict::Valid) | (SolverVerdict::Invalid(_), SolverVerdict::Invalid(_)))
}

#[test]
fn prenex_form_preserves_entailment() {
    if !solver_available() {
        return;
    }
    let (mut done, mut valid_count) = (0, 0);
    for k in 1..=5 {
        let c = ratio(k, 4);
        let sup = e(&format!("x + (sup v in [0,1]: [v <= y] * v) + [x <= {c}] * (sup w in [0,1]: [w <= x] * (w + y))"));
        let inf = e(&format!("x + (inf v in [0,1]: [v >= {c}] * v + [v < {c}] * 1)"));
        let cases = [
            (sup.clone(), e("2 * x + y + 1/2"), true),
            (sup.clone(), e(&format!("x + y + [x <= {c}] * (x + y)")), true),
            (inf.clone(), e("x"), false),
            (inf, e("x + 1/2"), false),
        ];
        for (f, g, f_left) in cases {
            let pnf = to_pnf(&f);
            assert_ne!(pnf, f);
            let (lhs, rhs) = if f_left { (&pnf, &g) } else { (&g, &pnf) };
            let prenex = check_entailment(lhs, rhs, &[], &cfg()).unwrap().verdict;
            let nested = via_relation(&f, &g, f_left);
            assert!(agree(&prenex, &nested), "{f} vs {g}: prenex {prenex:?}, nested {nested:?}");
            valid_count += usize::from(prenex == SolverVerdict::Valid);
            done += 1;
        }
    }
    assert_eq!(done, 20);
    assert!(valid_count > 0 && valid_count < done, "{valid_count} of {done} valid");
}

fn two_var_expr() -> impl Strategy<Value = Expr> {
    let lin = (0i64..3, 0i64..3, 0i64..3).prop_map(|(a, b, c)| e(&format!("{a} * x + {b} * y + {c}/2")));
    (lin.clone(), lin, 0i64..4).prop_map(|(f, g, t)| Expr::sum(Expr::iverson(parse_guard(&format!("x <= {t}/2")), f), g))
}

fn parse_guard(s: &str) -> riemann_wp::Guard {
    riemann_wp::syntax::parse_guard(s).unwrap()
}

#[test]
fn entailment_agrees_with_the_grid() {
    if !solver_available() {
        return;
    }
    let grid: Vec<State> = (0..100)
        .flat_map(|i| (0..100).map(move |j| state(&[("x", ratio(i, 20)), ("y", ratio(j, 20))])))
        .collect();
    let mut runner = TestRunner::new(Config { cases: 20, ..Config::default() });
    runner
        .run(&(two_var_expr(), two_var_expr()), |(f, g)| {
            let violated = grid.iter().any(|s| eval(&f, s, 1).unwrap() > eval(&g, s, 1).unwrap());
            let verdict = check_entailment(&f, &g, &[], &cfg()).unwrap().verdict;
            if violated {
                prop_assert!(matches!(verdict, SolverVerdict::Invalid(_)), "{} <= {}: {:?}", f, g, verdict);
            } else if let SolverVerdict::Invalid(m) = &verdict {
                // The grid can miss a violation, but then the model must be one.
                let s: State = m.values.iter().filter(|(k, _)| *k == "x" || *k == "y").map(|(k, v)| (k.clone(), v.clone())).collect();
                prop_assert!(eval(&f, &s, 1).unwrap() > eval(&g, &s, 1).unwrap());
            }
            Ok(())
        })
        .unwrap();
}
