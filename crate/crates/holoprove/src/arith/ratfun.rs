//! Normalized rational functions: quotients of multivariate polynomials with
//! gcd-reduced numerator/denominator, integer contents, and a positive
//! leading denominator coefficient. Equal rational functions have identical
//! representations.

use super::poly::{gcd, MultiPoly, Var};
use super::{ArithError, Rat};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFun {
    num: MultiPoly,
    den: MultiPoly,
}

impl RatFun {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<RatFun, ArithError> {
        if den.is_zero() {
            return Err(ArithError::ZeroDivisor);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: MultiPoly, den: MultiPoly) -> RatFun {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RatFun { num: MultiPoly::zero(), den: MultiPoly::one() };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() { (num, den) } else { (num.divexact(&g), den.divexact(&g)) };
        let (cn, pn) = num.content_decompose();
        let (cd, pd) = den.content_decompose();
        // cn/cd = sign * p/q with p, q coprime positive integers.
        let scale = cn / cd;
        let p = scale.numer().clone();
        let q = scale.denom().clone();
        RatFun {
            num: pn.scale(&Rat::from(p)),
            den: pd.scale(&Rat::from(q)),
        }
    }

    pub fn zero() -> RatFun {
        RatFun { num: MultiPoly::zero(), den: MultiPoly::one() }
    }

    pub fn one() -> RatFun {
        RatFun { num: MultiPoly::one(), den: MultiPoly::one() }
    }

    pub fn from_poly(p: MultiPoly) -> RatFun {
        RatFun { num: p, den: MultiPoly::one() }
    }

    pub fn from_rat(c: Rat) -> RatFun {
        RatFun::from_poly(MultiPoly::constant(c))
    }

    pub fn from_int(c: i64) -> RatFun {
        RatFun::from_poly(MultiPoly::int(c))
    }

    pub fn var(v: Var) -> RatFun {
        RatFun::from_poly(MultiPoly::var(v))
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match (self.num.as_constant(), self.den.as_constant()) {
            (Some(n), Some(d)) => Some(n / d),
            _ => None,
        }
    }

    pub fn uses_var(&self, v: Var) -> bool {
        self.num.uses_var(v) || self.den.uses_var(v)
    }

    pub fn recip(&self) -> Result<RatFun, ArithError> {
        if self.is_zero() {
            return Err(ArithError::ZeroDivisor);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }

    pub fn pow(&self, e: i64) -> Result<RatFun, ArithError> {
        if e < 0 {
            return self.recip()?.pow(-e);
        }
        let mut acc = RatFun::one();
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Substitute a polynomial for a variable (denominator stays nonzero for
    /// the substitutions used here: variable shifts and scalings).
    pub fn subst(&self, v: Var, value: &MultiPoly) -> RatFun {
        let den = self.den.subst(v, value);
        assert!(!den.is_zero(), "substitution produced a zero denominator");
        Self::normalized(self.num.subst(v, value), den)
    }

    /// Substitute v -> v + j.
    pub fn shift(&self, v: Var, j: i64) -> RatFun {
        if j == 0 {
            return self.clone();
        }
        let val = &MultiPoly::var(v) + &MultiPoly::int(j);
        self.subst(v, &val)
    }

    /// Evaluate one variable at an exact rational point. Returns an error if
    /// the denominator vanishes there.
    pub fn eval_var(&self, v: Var, x: &Rat) -> Result<RatFun, ArithError> {
        let val = MultiPoly::constant(x.clone());
        let den = self.den.subst(v, &val);
        if den.is_zero() {
            return Err(ArithError::ZeroDivisor);
        }
        Ok(Self::normalized(self.num.subst(v, &val), den))
    }

    pub fn derivative(&self, v: Var) -> RatFun {
        let num = &(&self.num.derivative(v) * &self.den) - &(&self.num * &self.den.derivative(v));
        let den = &self.den * &self.den;
        Self::normalized(num, den)
    }
}

impl Add for &RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        RatFun::normalized(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        RatFun::normalized(
            &(&self.num * &rhs.den) - &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Mul for &RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        RatFun::normalized(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &RatFun {
    type Output = RatFun;
    fn div(self, rhs: &RatFun) -> RatFun {
        assert!(!rhs.is_zero(), "zero-divisor");
        RatFun::normalized(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun { num: -&self.num, den: self.den.clone() }
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            if self.num.num_terms() > 1 {
                write!(f, "({})", self.num)
            } else {
                write!(f, "{}", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFun({})", self)
    }
}

/// Exact arithmetic entry point used by the kernel API: `a op b` with
/// division guarded.
pub fn ratfun_arith(a: &RatFun, b: &RatFun, op: char) -> Result<RatFun, ArithError> {
    match op {
        '+' => Ok(a + b),
        '-' => Ok(a - b),
        '*' => Ok(a * b),
        '/' => {
            if b.is_zero() {
                Err(ArithError::ZeroDivisor)
            } else {
                Ok(a / b)
            }
        }
        _ => panic!("unknown operation {op}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use num::traits::Zero;

    fn n() -> MultiPoly {
        MultiPoly::var(Var::N)
    }

    fn rf(num: MultiPoly, den: MultiPoly) -> RatFun {
        RatFun::new(num, den).unwrap()
    }

    #[test]
    fn partial_fraction_sum() {
        // 1/(n+1) + 1/(n+2) = (2n+3)/((n+1)(n+2))
        let a = rf(MultiPoly::one(), &n() + &MultiPoly::int(1));
        let b = rf(MultiPoly::one(), &n() + &MultiPoly::int(2));
        let s = &a + &b;
        let expect = rf(
            &(&MultiPoly::int(2) * &n()) + &MultiPoly::int(3),
            &(&n() + &MultiPoly::int(1)) * &(&n() + &MultiPoly::int(2)),
        );
        assert_eq!(s, expect);
    }

    #[test]
    fn x_over_x_normalizes_to_one() {
        let x = rf(n(), n());
        assert!(x.is_one());
        assert!(x.is_polynomial());
        assert_eq!(x.to_string(), "1");
    }

    #[test]
    fn cancellation_with_content() {
        // ((n+1)(2n+3))/(4n+6) = (n+1)/2
        let num = &(&n() + &MultiPoly::int(1)) * &(&(&MultiPoly::int(2) * &n()) + &MultiPoly::int(3));
        let den = &(&MultiPoly::int(4) * &n()) + &MultiPoly::int(6);
        let r = rf(num.clone(), den.clone());
        assert_eq!(r.to_string(), "(n + 1)/(2)");
        // Cross-check by evaluating both forms at n = 0..10.
        for i in 0..=10i64 {
            let x = rat(i, 1);
            let lhs = num.eval(&|_| x.clone()) / den.eval(&|_| x.clone());
            let rhs = (x + rat(1, 1)) / rat(2, 1);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn eval_normalized_matches_eval_raw_at_random_points() {
        // For r = num/den and 50 integer points avoiding den roots:
        // eval(normalize(r)) == eval(r).
        let num = &(&n() * &n()) - &MultiPoly::int(4);
        let den = &(&MultiPoly::int(3) * &n()) + &MultiPoly::int(6); // 3(n+2)
        let r = rf(num.clone(), den.clone());
        for i in 0..50i64 {
            let x = rat(i, 1);
            if den.eval(&|_| x.clone()).is_zero() {
                continue;
            }
            let raw = num.eval(&|_| x.clone()) / den.eval(&|_| x.clone());
            let norm = r.num().eval(&|_| x.clone()) / r.den().eval(&|_| x.clone());
            assert_eq!(raw, norm);
        }
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let a = RatFun::one();
        assert_eq!(ratfun_arith(&a, &RatFun::zero(), '/'), Err(ArithError::ZeroDivisor));
    }

    #[test]
    fn derivative_quotient_rule() {
        // d/dn [1/n] = -1/n^2
        let r = rf(MultiPoly::one(), n());
        let d = r.derivative(Var::N);
        assert_eq!(d.to_string(), "(-1)/(n^2)");
    }
}
