//! Algebraic numbers in solver models: `(root-obj p k)` is the k-th
//! smallest real root of the univariate polynomial `p`.

use num_traits::{One, Signed, Zero};

use super::sexp::Sexp;
use crate::num::{int, parse_rational, Rational};

/// Dense coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    fn trim(mut self) -> Poly {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    fn constant(c: Rational) -> Poly {
        Poly(vec![c]).trim()
    }

    fn x() -> Poly {
        Poly(vec![Rational::zero(), Rational::one()])
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let z = Rational::zero();
        Poly((0..n).map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)).collect()).trim()
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    fn mul(&self, o: &Poly) -> Poly {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly(vec![]);
        }
        let mut out = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trim()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| c * int(i as i64)).collect()).trim()
    }

    /// Remainder of division by a non-zero polynomial.
    fn rem(&self, d: &Poly) -> Poly {
        let mut r = self.clone();
        let dd = d.degree().expect("non-zero divisor");
        let lead = d.0[dd].clone();
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let q = &r.0[rd] / &lead;
            for i in 0..=dd {
                let t = &q * &d.0[i];
                r.0[rd - dd + i] -= t;
            }
            r = r.trim();
        }
        r
    }

    fn sturm(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while seq.last().is_some_and(|p| p.degree().is_some_and(|d| d > 0)) {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]).neg();
            if r.0.is_empty() {
                break;
            }
            seq.push(r);
        }
        seq
    }

    /// `1 + max |a_i / a_n|` bounds every real root.
    fn root_bound(&self) -> Rational {
        let n = self.degree().unwrap_or(0);
        let lead = self.0[n].abs();
        let m = self.0[..n].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(Rational::zero);
        m + Rational::one()
    }
}

fn sign_changes(seq: &[Poly], x: &Rational) -> usize {
    let signs: Vec<i8> = seq
        .iter()
        .map(|p| p.eval(x))
        .filter(|v| !v.is_zero())
        .map(|v| if v.is_positive() { 1 } else { -1 })
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

pub fn poly_from_sexp(e: &Sexp) -> Option<Poly> {
    match e {
        Sexp::Atom(a) => match parse_rational(a) {
            Some(q) => Some(Poly::constant(q)),
            None => Some(Poly::x()),
        },
        Sexp::List(l) => {
            let head = l.first()?.atom()?;
            let args: Option<Vec<Poly>> = l[1..].iter().map(poly_from_sexp).collect();
            let args = args?;
            match head {
                "+" => Some(args.iter().fold(Poly(vec![]), |a, b| a.add(b))),
                "*" => Some(args.iter().fold(Poly::constant(Rational::one()), |a, b| a.mul(b))),
                "-" if args.len() == 1 => Some(args[0].neg()),
                "-" => Some(args[1..].iter().fold(args[0].clone(), |a, b| a.add(&b.neg()))),
                "^" => {
                    let k = l.get(2)?.atom()?.parse::<u32>().ok()?;
                    Some((0..k).fold(Poly::constant(Rational::one()), |a, _| a.mul(&args[0])))
                }
                "/" if args.len() == 2 => {
                    let d = args[1].0.first()?.clone();
                    if args[1].degree() != Some(0) || d.is_zero() {
                        return None;
                    }
                    Some(Poly(args[0].0.iter().map(|c| c / &d).collect()))
                }
                _ => None,
            }
        }
    }
}

/// The `k`-th smallest real root (1-based) as an enclosing interval of
/// width at most `2^-bits`. Exact roots come back as a point.
pub fn root(p: &Poly, k: usize, bits: u32) -> Option<(Rational, Rational)> {
    let d = p.degree()?;
    if d == 0 || k == 0 {
        return None;
    }
    if d == 1 {
        if k != 1 {
            return None;
        }
        let r = -&p.0[0] / &p.0[1];
        return Some((r.clone(), r));
    }
    let seq = p.sturm();
    let b = p.root_bound();
    let count = |x: &Rational| sign_changes(&seq, &(-&b)) - sign_changes(&seq, x);
    if count(&b) < k {
        return None;
    }
    // Roots in (lo, hi] number at least k at hi and fewer than k at lo.
    let (mut lo, mut hi) = (-b.clone(), b.clone());
    let eps = Rational::new(1.into(), num_bigint::BigInt::one() << bits);
    while &hi - &lo > eps {
        let mid = (&lo + &hi) / int(2);
        if p.eval(&mid).is_zero() && count(&mid) == k {
            return Some((mid.clone(), mid));
        }
        if count(&mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if p.eval(&hi).is_zero() {
        return Some((hi.clone(), hi));
    }
    Some((lo, hi))
}
