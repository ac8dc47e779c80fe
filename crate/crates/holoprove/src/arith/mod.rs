//! Exact coefficient arithmetic: arbitrary-precision rationals, multivariate
//! polynomials in a fixed variable universe, normalized rational functions,
//! and the symbolic-constant ring for series coefficients.

mod constexpr;
mod poly;
mod ratfun;
mod roots;

pub use constexpr::{constexpr_is_zero, ConstExpr, Gen};
pub use poly::{gcd as poly_gcd, MultiPoly, Var};
pub use ratfun::{ratfun_arith, RatFun};
pub use roots::{integer_roots_nonneg, integer_roots_nonneg_param, rational_roots};

use thiserror::Error;

pub type Int = num::BigInt;
pub type Rat = num::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("zero-divisor")]
    ZeroDivisor,
    #[error("identically-zero")]
    IdenticallyZero,
    #[error("root-bound-overflow")]
    RootBoundOverflow,
    #[error("not-univariate")]
    NotUnivariate,
}

/// Convenience constructor for small rationals.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(Int::from(p), Int::from(q))
}

/// n! as a big integer; panics on negative input.
pub fn factorial(n: i64) -> Int {
    assert!(n >= 0, "factorial of negative integer");
    let mut acc = Int::from(1);
    for i in 2..=n {
        acc *= Int::from(i);
    }
    acc
}

/// Binomial coefficient C(n, k) for integer n (possibly negative), k >= 0.
pub fn binomial(n: i64, k: i64) -> Rat {
    if k < 0 {
        return Rat::from(Int::from(0));
    }
    let mut acc = Rat::from(Int::from(1));
    for i in 0..k {
        acc *= Rat::from(Int::from(n - i));
        acc /= Rat::from(Int::from(i + 1));
    }
    acc
}

/// Harmonic number H_m = sum_{i=1..m} 1/i.
pub fn harmonic(m: i64) -> Rat {
    let mut acc = Rat::from(Int::from(0));
    for i in 1..=m {
        acc += rat(1, i);
    }
    acc
}
