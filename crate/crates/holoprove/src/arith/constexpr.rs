//! The symbolic-constant ring for series coefficients: polynomials in a fixed
//! set of generators (Euler's gamma, log 2, sqrt(pi) and its reciprocal, and
//! the function symbols sin z, cos z, sinh z, cosh z, e^z, e^-z) with
//! rational-function coefficients.
//!
//! Normal forms are maintained under the confluent rewrites
//! sin^2 -> 1 - cos^2, sqrtpi * invsqrtpi -> 1, and e^z * e^-z -> 1; pi is
//! represented as sqrtpi^2. Two expressions are equal iff their normal forms
//! are identical, and the zero test is sound: the generators are treated as
//! algebraically independent modulo the declared rewrites.

use super::ratfun::RatFun;
use super::Rat;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub const NGENS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Gen {
    Gamma,
    Log2,
    SqrtPi,
    InvSqrtPi,
    Sin,
    Cos,
    Sinh,
    Cosh,
    ExpPlus,
    ExpMinus,
}

impl Gen {
    pub const ALL: [Gen; NGENS] = [
        Gen::Gamma,
        Gen::Log2,
        Gen::SqrtPi,
        Gen::InvSqrtPi,
        Gen::Sin,
        Gen::Cos,
        Gen::Sinh,
        Gen::Cosh,
        Gen::ExpPlus,
        Gen::ExpMinus,
    ];

    fn index(self) -> usize {
        match self {
            Gen::Gamma => 0,
            Gen::Log2 => 1,
            Gen::SqrtPi => 2,
            Gen::InvSqrtPi => 3,
            Gen::Sin => 4,
            Gen::Cos => 5,
            Gen::Sinh => 6,
            Gen::Cosh => 7,
            Gen::ExpPlus => 8,
            Gen::ExpMinus => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gen::Gamma => "eulergamma",
            Gen::Log2 => "log2",
            Gen::SqrtPi => "sqrtpi",
            Gen::InvSqrtPi => "invsqrtpi",
            Gen::Sin => "sin(z)",
            Gen::Cos => "cos(z)",
            Gen::Sinh => "sinh(z)",
            Gen::Cosh => "cosh(z)",
            Gen::ExpPlus => "exp(z)",
            Gen::ExpMinus => "exp(-z)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct GenMono([u8; NGENS]);

impl GenMono {
    fn one() -> Self {
        GenMono([0; NGENS])
    }

    fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &GenMono) -> GenMono {
        let mut out = [0u8; NGENS];
        for i in 0..NGENS {
            out[i] = self.0[i].checked_add(other.0[i]).expect("generator exponent overflow");
        }
        GenMono(out)
    }
}

/// Element of the symbolic-constant ring.
#[derive(Clone, PartialEq, Eq)]
pub struct ConstExpr {
    terms: BTreeMap<GenMono, RatFun>,
}

impl ConstExpr {
    pub fn zero() -> Self {
        ConstExpr { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        ConstExpr::from_ratfun(RatFun::one())
    }

    pub fn from_ratfun(r: RatFun) -> Self {
        let mut out = ConstExpr::zero();
        out.add_term(GenMono::one(), r);
        out
    }

    pub fn from_rat(c: Rat) -> Self {
        ConstExpr::from_ratfun(RatFun::from_rat(c))
    }

    pub fn from_int(c: i64) -> Self {
        ConstExpr::from_ratfun(RatFun::from_int(c))
    }

    pub fn gen(g: Gen) -> Self {
        let mut m = GenMono::one();
        m.0[g.index()] = 1;
        let mut out = ConstExpr::zero();
        out.add_term(m, RatFun::one());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of the empty generator monomial, if the expression is
    /// purely a rational function.
    pub fn as_ratfun(&self) -> Option<RatFun> {
        if self.terms.is_empty() {
            return Some(RatFun::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&GenMono::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    fn add_term(&mut self, m: GenMono, c: RatFun) {
        if c.is_zero() {
            return;
        }
        // Confluent rewrites keep sin-degree at most 1 and cancel the two
        // inverse pairs.
        let mut m = m;
        let sp = Gen::SqrtPi.index();
        let isp = Gen::InvSqrtPi.index();
        let cancel = m.0[sp].min(m.0[isp]);
        m.0[sp] -= cancel;
        m.0[isp] -= cancel;
        let ep = Gen::ExpPlus.index();
        let em = Gen::ExpMinus.index();
        let cancel = m.0[ep].min(m.0[em]);
        m.0[ep] -= cancel;
        m.0[em] -= cancel;
        let si = Gen::Sin.index();
        if m.0[si] >= 2 {
            // sin^2 -> 1 - cos^2
            let mut base = m;
            base.0[si] -= 2;
            let mut with_cos = base;
            with_cos.0[Gen::Cos.index()] =
                with_cos.0[Gen::Cos.index()].checked_add(2).expect("generator exponent overflow");
            self.add_term(base, c.clone());
            self.add_term(with_cos, &RatFun::zero() - &c);
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                let sum = &*slot.get() + &c;
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &RatFun) -> ConstExpr {
        let mut out = ConstExpr::zero();
        for (m, x) in &self.terms {
            out.add_term(*m, x * c);
        }
        out
    }

    pub fn scale_rat(&self, c: &Rat) -> ConstExpr {
        self.scale(&RatFun::from_rat(c.clone()))
    }
}

impl Add for &ConstExpr {
    type Output = ConstExpr;
    fn add(self, rhs: &ConstExpr) -> ConstExpr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &ConstExpr {
    type Output = ConstExpr;
    fn sub(self, rhs: &ConstExpr) -> ConstExpr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, &RatFun::zero() - c);
        }
        out
    }
}

impl Mul for &ConstExpr {
    type Output = ConstExpr;
    fn mul(self, rhs: &ConstExpr) -> ConstExpr {
        let mut out = ConstExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &ConstExpr {
    type Output = ConstExpr;
    fn neg(self) -> ConstExpr {
        let mut out = ConstExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl fmt::Display for ConstExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mut parts: Vec<String> = Vec::new();
            if !c.is_one() || m.is_one() {
                parts.push(c.to_string());
            }
            for g in Gen::ALL {
                let e = m.0[g.index()];
                if e == 1 {
                    parts.push(g.name().to_string());
                } else if e > 1 {
                    parts.push(format!("{}^{}", g.name(), e));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for ConstExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConstExpr({})", self)
    }
}

/// Zero test in the constant ring; see module docs for the soundness model.
pub fn constexpr_is_zero(e: &ConstExpr) -> bool {
    e.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_minus_gamma_is_zero() {
        let g = ConstExpr::gen(Gen::Gamma);
        assert!((&g - &g).is_zero());
    }

    #[test]
    fn pythagorean_rewrite() {
        // sin^2 + cos^2 - 1 == 0
        let s = ConstExpr::gen(Gen::Sin);
        let c = ConstExpr::gen(Gen::Cos);
        let e = &(&(&s * &s) + &(&c * &c)) - &ConstExpr::one();
        assert!(e.is_zero());
    }

    #[test]
    fn exp_pair_cancels() {
        let ep = ConstExpr::gen(Gen::ExpPlus);
        let em = ConstExpr::gen(Gen::ExpMinus);
        let e = &(&ep * &em) - &ConstExpr::one();
        assert!(e.is_zero());
    }

    #[test]
    fn sqrtpi_pair_cancels() {
        let s = ConstExpr::gen(Gen::SqrtPi);
        let si = ConstExpr::gen(Gen::InvSqrtPi);
        assert!((&(&s * &si) - &ConstExpr::one()).is_zero());
        // pi = sqrtpi^2 stays a monomial
        let pi = &s * &s;
        assert!(!pi.is_zero());
        assert_eq!(pi.to_string(), "sqrtpi^2");
    }

    #[test]
    fn sin_cubed_reduces() {
        let s = ConstExpr::gen(Gen::Sin);
        let c = ConstExpr::gen(Gen::Cos);
        // sin^3 = sin (1 - cos^2)
        let lhs = &(&s * &s) * &s;
        let rhs = &s - &(&(&c * &c) * &s);
        assert!((&lhs - &rhs).is_zero());
    }
}
