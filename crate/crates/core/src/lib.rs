//! Riemann-sum weakest pre-expectation reasoning for probabilistic programs
//! with continuous uniform sampling.
//!
//! The pipeline is:
//!
//! 1. [`syntax`] parses programs and expectations into ASTs.
//! 2. [`semantics`] evaluates expectations, substitutes, and computes prenex forms.
//! 3. [`riemann`] builds lower/upper Riemann pre-expectations and loop unfoldings.
//! 4. [`fo`] encodes expectations into first-order real arithmetic and talks to an
//!    SMT solver over SMT-LIB 2.
//! 5. [`verify`] runs the verification and refutation workflows.
//! 6. [`sim`] is an independent sampling interpreter used as a test oracle.

pub mod fo;
pub mod num;
pub mod riemann;
pub mod semantics;
pub mod sim;
pub mod syntax;
pub mod verify;

pub use num::Rational;
pub use riemann::{transform, Kind, TransformerKind};
pub use semantics::State;
pub use syntax::{parse_expr, parse_program, parse_source, Expr, Guard, Program, Term};
pub use verify::{Status, Verdict};
