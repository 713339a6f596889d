//! Sampling interpreter. Runs programs operationally with pseudo-random
//! uniform draws and averages post-expectations over the final states.
//!
//! Draws are 64-bit dyadic rationals `k / 2^64`, so state updates stay exact.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::semantics::{eval, eval_guard, eval_term, EvalError, State};
use crate::syntax::{Expr, Program};
use crate::Rational;

/// Grid used when a post-expectation contains sup/inf.
const QUANT_GRID: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Terminated(State),
    ObserveViolated,
    BudgetExhausted,
}

enum Halt {
    Violated,
    Budget,
    Eval(EvalError),
}

impl From<EvalError> for Halt {
    fn from(e: EvalError) -> Self {
        Halt::Eval(e)
    }
}

struct Run<'a> {
    rng: &'a mut ChaCha8Rng,
    steps: u64,
    max_steps: u64,
}

impl Run<'_> {
    fn tick(&mut self) -> Result<(), Halt> {
        self.steps += 1;
        if self.steps > self.max_steps {
            Err(Halt::Budget)
        } else {
            Ok(())
        }
    }

    fn draw(&mut self) -> Rational {
        let k = self.rng.next_u64();
        Rational::new(BigInt::from(k), BigInt::from(1u8) << 64u32)
    }

    fn exec(&mut self, c: &Program, s: &mut State) -> Result<(), Halt> {
        match c {
            Program::Skip => self.tick(),
            Program::Diverge => loop {
                self.tick()?;
            },
            Program::Assign(x, t) => {
                self.tick()?;
                let v = eval_term(t, s)?;
                s.insert(x.clone(), v);
                Ok(())
            }
            Program::Unif { var, .. } => {
                self.tick()?;
                let v = self.draw();
                s.insert(var.clone(), v);
                Ok(())
            }
            Program::Observe(g) => {
                self.tick()?;
                if eval_guard(g, s)? {
                    Ok(())
                } else {
                    Err(Halt::Violated)
                }
            }
            Program::Ite(g, a, b) => {
                self.tick()?;
                if eval_guard(g, s)? {
                    self.exec(a, s)
                } else {
                    self.exec(b, s)
                }
            }
            Program::PChoice(a, p, b) => {
                self.tick()?;
                if self.draw() < *p {
                    self.exec(a, s)
                } else {
                    self.exec(b, s)
                }
            }
            Program::Seq(a, b) => {
                self.exec(a, s)?;
                self.exec(b, s)
            }
            Program::While(lp) => loop {
                self.tick()?;
                if !eval_guard(&lp.guard, s)? {
                    return Ok(());
                }
                self.exec(&lp.body, s)?;
            },
        }
    }
}

/// One run of `c` from `s0`. Every executed statement and loop test costs a
/// step; hitting `max_steps` gives `BudgetExhausted`.
pub fn simulate(c: &Program, s0: &State, seed: u64, max_steps: u64) -> Result<RunOutcome, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = s0.clone();
    let mut run = Run { rng: &mut rng, steps: 0, max_steps };
    match run.exec(c, &mut s) {
        Ok(()) => Ok(RunOutcome::Terminated(s)),
        Err(Halt::Violated) => Ok(RunOutcome::ObserveViolated),
        Err(Halt::Budget) => Ok(RunOutcome::BudgetExhausted),
        Err(Halt::Eval(e)) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    /// Sample mean of `f` over all runs, violated runs contributing 0.
    pub mean: Rational,
    pub std_error: f64,
    pub violated_fraction: f64,
    pub samples: u64,
    /// Some run exhausted its step budget; the estimate is not comparable
    /// to a wp value.
    pub partial: bool,
}

impl Estimate {
    pub fn mean_f64(&self) -> f64 {
        self.mean.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Default)]
struct Acc {
    sum: Rational,
    sum_f: f64,
    sum_sq: f64,
    violated: u64,
    exhausted: u64,
    n: u64,
}

impl Acc {
    fn merge(mut self, o: Acc) -> Acc {
        self.sum += o.sum;
        self.sum_f += o.sum_f;
        self.sum_sq += o.sum_sq;
        self.violated += o.violated;
        self.exhausted += o.exhausted;
        self.n += o.n;
        self
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `i`-th run of an estimate seeded with `seed`.
pub fn run_seed(seed: u64, i: u64) -> u64 {
    splitmix64(seed ^ splitmix64(i))
}

/// Monte Carlo estimate of wp(c)(f) at `s0`. Runs are independent and
/// seeded per index, so the result does not depend on the thread count.
pub fn estimate_wp(c: &Program, f: &Expr, s0: &State, samples: u64, seed: u64, max_steps: u64) -> Result<Estimate, EvalError> {
    let acc = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Acc, EvalError> {
            let mut acc = Acc { n: 1, ..Acc::default() };
            match simulate(c, s0, run_seed(seed, i), max_steps)? {
                RunOutcome::Terminated(s) => {
                    let v = eval(f, &s, QUANT_GRID)?;
                    let x = v.to_f64().unwrap_or(f64::NAN);
                    acc.sum = v;
                    acc.sum_f = x;
                    acc.sum_sq = x * x;
                }
                RunOutcome::ObserveViolated => acc.violated = 1,
                RunOutcome::BudgetExhausted => acc.exhausted = 1,
            }
            Ok(acc)
        })
        .try_reduce(Acc::default, |a, b| Ok(a.merge(b)))?;
    if acc.n == 0 {
        return Ok(Estimate { mean: Rational::zero(), std_error: 0.0, violated_fraction: 0.0, samples: 0, partial: false });
    }
    let n = acc.n as f64;
    let mean_f = acc.sum_f / n;
    let var = if acc.n > 1 { ((acc.sum_sq - n * mean_f * mean_f) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(Estimate {
        mean: acc.sum / Rational::from_integer(BigInt::from(acc.n)),
        std_error: (var / n).sqrt(),
        violated_fraction: acc.violated as f64 / n,
        samples: acc.n,
        partial: acc.exhausted > 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_expr, parse_program};

    fn st(pairs: &[(&str, i64)]) -> State {
        pairs.iter().map(|(k, v)| (k.to_string(), Rational::from_integer((*v).into()))).collect()
    }

    #[test]
    fn skip_keeps_state() {
        let s = st(&[("x", 3)]);
        assert_eq!(simulate(&Program::Skip, &s, 1, 10).unwrap(), RunOutcome::Terminated(s));
    }

    #[test]
    fn diverge_exhausts_budget() {
        assert_eq!(simulate(&Program::Diverge, &State::new(), 1, 1000).unwrap(), RunOutcome::BudgetExhausted);
    }

    #[test]
    fn observe_half_violates_about_half() {
        let c = parse_program("x := unif; observe(x <= 1/2)").unwrap();
        let r = estimate_wp(&c, &parse_expr("1").unwrap(), &State::new(), 100_000, 7, 100).unwrap().violated_fraction;
        let sigma = (0.25f64 / 100_000.0).sqrt();
        assert!((r - 0.5).abs() <= 3.0 * sigma, "rate {r}");
    }

    #[test]
    fn seeds_reproduce() {
        let c = parse_program("x := unif; y := unif; z := x * y").unwrap();
        let a = simulate(&c, &State::new(), 99, 100).unwrap();
        let b = simulate(&c, &State::new(), 99, 100).unwrap();
        assert_eq!(a, b);
        let e1 = estimate_wp(&c, &parse_expr("z").unwrap(), &State::new(), 500, 3, 100).unwrap();
        let e2 = estimate_wp(&c, &parse_expr("z").unwrap(), &State::new(), 500, 3, 100).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn constant_post_is_exact() {
        let c = parse_program("x := unif; if (x <= 1/3) { y := 1 } else { y := 2 }").unwrap();
        let e = estimate_wp(&c, &parse_expr("5").unwrap(), &State::new(), 1000, 1, 100).unwrap();
        assert_eq!(e.mean, Rational::from_integer(5.into()));
        assert_eq!(e.std_error, 0.0);
        assert!(!e.partial);
    }

    #[test]
    fn irwin_hall_four() {
        let c = parse_program("while (i <= M) { y := unif; x := x + y; i := i + 1 }").unwrap();
        let s = st(&[("x", 0), ("y", 0), ("i", 1), ("M", 4)]);
        let e = estimate_wp(&c, &parse_expr("x").unwrap(), &s, 20_000, 5, 1000).unwrap();
        assert!((e.mean_f64() - 2.0).abs() <= 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn missing_variable_is_an_error() {
        let c = parse_program("y := x + 1").unwrap();
        assert!(simulate(&c, &State::new(), 1, 10).is_err());
        let c = parse_program("x := unif; y := x").unwrap();
        assert!(matches!(simulate(&c, &State::new(), 1, 10), Ok(RunOutcome::Terminated(_))));
    }
}
