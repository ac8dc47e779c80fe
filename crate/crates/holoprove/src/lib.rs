//! Exact symbolic machinery for proving special-function identities.
//!
//! The engine is organized in layers:
//! - [`arith`]: big-rational numbers, multivariate polynomials, normalized
//!   rational functions, and the symbolic-constant ring used for series
//!   coefficients.
//! - [`linalg`]: exact Gaussian elimination over the rational-function field.
//! - [`ore`]: Ore operators (shift and derivation), normalization,
//!   composition, application, and least common left multiples.
//! - [`closure`]: holonomic closure properties (sum, Hadamard and Cauchy
//!   products, recurrence/differential-equation conversion, algebraic
//!   composition, shifts and sections).
//! - [`frobenius`]: local analysis at a point — indicial polynomials,
//!   ordinary/regular-singular classification, initial-value counts.
//! - [`series`]: exact truncated expansions of the base-function catalog and
//!   generalized-series arithmetic.
//! - [`telescope`]: Gosper and Zeilberger summation, holonomic creative
//!   telescoping, certificates and their independent verification.
//! - [`prover`]: proof strategies, the identity corpus, and reports.
//! - [`dsl`]: the identity-description language read by the CLI.

pub mod arith;
pub mod closure;
pub mod linalg;
pub mod ore;

pub use arith::{ConstExpr, MultiPoly, Rat, RatFun, Var};
pub use ore::{InhomRel, OpKind, OreOp};
