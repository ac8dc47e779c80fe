//! Ore operators: linear shift and derivation operators with
//! rational-function coefficients. The commutation rules are
//! `S_n * n = (n+1) * S_n` and `D_z * z = z * D_z + 1`.
//!
//! Operators are the carriers of every recurrence (LORE) and differential
//! equation (LODE) in the engine. `normalize` produces the canonical
//! polynomial, content-free, sign-fixed form used for printing and golden
//! comparisons; `lclm` implements closure under addition of solution spaces.

use crate::arith::{poly_gcd, ArithError, ConstExpr, Int, MultiPoly, Rat, RatFun, Var};
use crate::linalg;
use num::traits::Zero;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OreError {
    #[error("zero-operator")]
    ZeroOperator,
    #[error("incompatible-operators")]
    Incompatible,
    #[error("order-underflow")]
    OrderUnderflow,
    #[error("leading-coefficient-vanishes at index {0}")]
    LeadingVanishes(usize),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Shift,
    Derivation,
}

impl OpKind {
    pub fn symbol(self) -> &'static str {
        match self {
            OpKind::Shift => "S",
            OpKind::Derivation => "D",
        }
    }
}

/// `sum_i coeffs[i] * ∂^i` with `∂` the shift or derivation in `var`.
/// The leading coefficient is nonzero.
#[derive(Clone, PartialEq, Eq)]
pub struct OreOp {
    kind: OpKind,
    var: Var,
    coeffs: Vec<RatFun>,
}

impl OreOp {
    pub fn new(kind: OpKind, var: Var, mut coeffs: Vec<RatFun>) -> Result<OreOp, OreError> {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(OreError::ZeroOperator);
        }
        Ok(OreOp { kind, var, coeffs })
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[RatFun] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> RatFun {
        self.coeffs.get(i).cloned().unwrap_or_else(RatFun::zero)
    }

    pub fn leading_coeff(&self) -> &RatFun {
        self.coeffs.last().unwrap()
    }

    /// Canonical form: polynomial coefficients, content-free as a tuple
    /// (rational content 1), and the leading coefficient's leading term
    /// positive. The solution space is unchanged.
    pub fn normalize(&self) -> OreOp {
        // Common denominator.
        let mut common_den = MultiPoly::one();
        for c in &self.coeffs {
            let g = poly_gcd(&common_den, c.den());
            common_den = &common_den * &c.den().divexact(&g);
        }
        let polys: Vec<MultiPoly> = self
            .coeffs
            .iter()
            .map(|c| &common_den.divexact(c.den()) * c.num())
            .collect();
        Self::from_polys_normalized(self.kind, self.var, polys)
    }

    fn from_polys_normalized(kind: OpKind, var: Var, polys: Vec<MultiPoly>) -> OreOp {
        let mut content = Rat::zero();
        for p in polys.iter().filter(|p| !p.is_zero()) {
            let (c, _) = p.content_decompose();
            content = rat_gcd(&content, &c);
        }
        // Sign: leading coefficient's leading term positive.
        if polys.last().unwrap().leading_coeff() < Rat::zero() {
            content = -content;
        }
        let inv = content.recip();
        let coeffs = polys.into_iter().map(|p| RatFun::from_poly(p.scale(&inv))).collect();
        OreOp { kind, var, coeffs }
    }

    /// Like `normalize`, but also divides the coefficient tuple by its
    /// polynomial gcd. Solver outputs (lclm, closure properties,
    /// telescopers) use this so that minimal operators print in their unique
    /// primitive form.
    pub fn normalize_primitive(&self) -> OreOp {
        let norm = self.normalize();
        let mut g = MultiPoly::zero();
        for c in norm.coeffs.iter().filter(|c| !c.is_zero()) {
            g = poly_gcd(&g, c.num());
            if g.is_one() {
                break;
            }
        }
        if g.is_one() || g.is_zero() {
            return norm;
        }
        let polys = norm.coeffs.iter().map(|c| c.num().divexact(&g)).collect();
        Self::from_polys_normalized(norm.kind, norm.var, polys)
    }

    /// Operator composition `self * rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &OreOp) -> Result<OreOp, OreError> {
        if self.kind != rhs.kind || self.var != rhs.var {
            return Err(OreError::Incompatible);
        }
        let mut acc = vec![RatFun::zero(); self.order() + rhs.order() + 1];
        match self.kind {
            OpKind::Shift => {
                for (i, a) in self.coeffs.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (j, b) in rhs.coeffs.iter().enumerate() {
                        if b.is_zero() {
                            continue;
                        }
                        let shifted = b.shift(self.var, i as i64);
                        acc[i + j] = &acc[i + j] + &(a * &shifted);
                    }
                }
            }
            OpKind::Derivation => {
                // D^i ∘ rhs by iterated single-D steps, weighted by a_i.
                let mut cur: Vec<RatFun> = rhs.coeffs.clone();
                for (i, a) in self.coeffs.iter().enumerate() {
                    if !a.is_zero() {
                        for (j, b) in cur.iter().enumerate() {
                            if !b.is_zero() {
                                acc[j] = &acc[j] + &(a * b);
                            }
                        }
                    }
                    if i < self.order() {
                        cur = d_step(&cur, self.var);
                    }
                }
            }
        }
        OreOp::new(self.kind, self.var, acc)
    }

    pub fn add(&self, rhs: &OreOp) -> Result<OreOp, OreError> {
        if self.kind != rhs.kind || self.var != rhs.var {
            return Err(OreError::Incompatible);
        }
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let mut acc = vec![RatFun::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            acc[i] = &acc[i] + c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            acc[i] = &acc[i] + c;
        }
        OreOp::new(self.kind, self.var, acc)
    }

    pub fn scale(&self, c: &RatFun) -> Result<OreOp, OreError> {
        if c.is_zero() {
            return Err(OreError::ZeroOperator);
        }
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        OreOp::new(self.kind, self.var, coeffs)
    }

    /// Substitute a polynomial for a parameter in every coefficient (e.g.
    /// z -> 2z in an operator in n).
    pub fn subst_param(&self, v: Var, value: &MultiPoly) -> OreOp {
        let coeffs = self.coeffs.iter().map(|c| c.subst(v, value)).collect();
        OreOp { kind: self.kind, var: self.var, coeffs }
    }

    /// Representations of ∂^m modulo this operator for m = 0..=upto, in the
    /// basis ∂^0..∂^{order-1} acting on solutions.
    pub fn reduced_powers(&self, upto: usize) -> Vec<Vec<RatFun>> {
        let d = self.order();
        assert!(d >= 1, "order-zero operator has no solution basis");
        let tail: Vec<RatFun> = (0..d).map(|i| -&(&self.coeffs[i] / &self.coeffs[d])).collect();
        let mut reps: Vec<Vec<RatFun>> = Vec::with_capacity(upto + 1);
        let mut cur = vec![RatFun::zero(); d];
        cur[0] = RatFun::one();
        reps.push(cur.clone());
        for _ in 0..upto {
            let mut next = vec![RatFun::zero(); d + 1];
            match self.kind {
                OpKind::Shift => {
                    for (i, w) in cur.iter().enumerate() {
                        if !w.is_zero() {
                            next[i + 1] = w.shift(self.var, 1);
                        }
                    }
                }
                OpKind::Derivation => {
                    for (i, w) in cur.iter().enumerate() {
                        if w.is_zero() {
                            continue;
                        }
                        next[i] = &next[i] + &w.derivative(self.var);
                        next[i + 1] = &next[i + 1] + w;
                    }
                }
            }
            let top = next.pop().unwrap();
            if !top.is_zero() {
                for i in 0..d {
                    next[i] = &next[i] + &(&top * &tail[i]);
                }
            }
            cur = next;
            reps.push(cur.clone());
        }
        reps
    }

    /// Apply a shift operator to a sequence of exact values; the result has
    /// `values.len() - order` entries.
    pub fn apply_to_seq(&self, values: &[ConstExpr]) -> Result<Vec<ConstExpr>, OreError> {
        assert_eq!(self.kind, OpKind::Shift);
        let d = self.order();
        if values.len() <= d {
            return Err(OreError::OrderUnderflow);
        }
        let mut out = Vec::with_capacity(values.len() - d);
        for m in 0..values.len() - d {
            let mut acc = ConstExpr::zero();
            for (i, a) in self.coeffs.iter().enumerate() {
                let am = a.eval_var(self.var, &Rat::from(Int::from(m as i64)))?;
                acc = &acc + &values[m + i].scale(&am);
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Unroll a rational-valued solution of a shift operator from initial
    /// values. Coefficients may only involve the shift variable.
    pub fn unroll_rational(&self, initials: &[Rat], len: usize) -> Result<Vec<Rat>, OreError> {
        assert_eq!(self.kind, OpKind::Shift);
        let d = self.order();
        if initials.len() < d {
            return Err(OreError::OrderUnderflow);
        }
        let mut vals: Vec<Rat> = initials.to_vec();
        while vals.len() < len {
            let m = (vals.len() - d) as i64;
            let mrat = Rat::from(Int::from(m));
            let lead = self.coeffs[d]
                .eval_var(self.var, &mrat)?
                .as_constant()
                .ok_or(OreError::Incompatible)?;
            if lead.is_zero() {
                return Err(OreError::LeadingVanishes(vals.len()));
            }
            let mut acc = Rat::zero();
            for i in 0..d {
                let c = self.coeffs[i]
                    .eval_var(self.var, &mrat)?
                    .as_constant()
                    .ok_or(OreError::Incompatible)?;
                acc += c * vals[m as usize + i].clone();
            }
            vals.push(-acc / lead);
        }
        Ok(vals)
    }

    /// Exact application of a shift operator to a rational sequence.
    pub fn apply_to_rational_seq(&self, values: &[Rat]) -> Result<Vec<Rat>, OreError> {
        assert_eq!(self.kind, OpKind::Shift);
        let d = self.order();
        if values.len() <= d {
            return Err(OreError::OrderUnderflow);
        }
        let mut out = Vec::with_capacity(values.len() - d);
        for m in 0..values.len() - d {
            let mrat = Rat::from(Int::from(m as i64));
            let mut acc = Rat::zero();
            for (i, a) in self.coeffs.iter().enumerate() {
                let c = a.eval_var(self.var, &mrat)?.as_constant().ok_or(OreError::Incompatible)?;
                acc += c * values[m + i].clone();
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// One derivation step: coefficients of `D ∘ (sum_j c_j D^j)`.
fn d_step(coeffs: &[RatFun], var: Var) -> Vec<RatFun> {
    let mut out = vec![RatFun::zero(); coeffs.len() + 1];
    for (j, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        out[j] = &out[j] + &c.derivative(var);
        out[j + 1] = &out[j + 1] + c;
    }
    out
}

fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    use num::traits::Signed;
    let num = num::integer::gcd(a.numer().abs(), b.numer().abs());
    let den = num::integer::lcm(a.denom().clone(), b.denom().clone());
    Rat::new(num, den)
}

/// Least common left multiple: the minimal-order operator annihilating every
/// solution of either input, found by iterative deepening on the order.
pub fn lclm(a: &OreOp, b: &OreOp) -> Result<OreOp, OreError> {
    if a.kind != b.kind || a.var != b.var {
        return Err(OreError::Incompatible);
    }
    let (da, db) = (a.order(), b.order());
    let max_r = da + db;
    let reps_a = a.reduced_powers(max_r);
    let reps_b = b.reduced_powers(max_r);
    for r in da.max(db)..=max_r {
        let mut rows = vec![vec![RatFun::zero(); r + 1]; da + db];
        for m in 0..=r {
            for i in 0..da {
                rows[i][m] = reps_a[m][i].clone();
            }
            for i in 0..db {
                rows[da + i][m] = reps_b[m][i].clone();
            }
        }
        let basis = linalg::nullspace(rows, r + 1);
        if let Some(v) = basis.into_iter().next() {
            return Ok(OreOp::new(a.kind, a.var, v)?.normalize_primitive());
        }
    }
    unreachable!("lclm of orders {da} and {db} exists by dimension count")
}

/// An operator equation with an inhomogeneous right side; `rhs == 0` is the
/// homogeneous case.
#[derive(Clone, PartialEq)]
pub struct InhomRel {
    pub op: OreOp,
    pub rhs: ConstExpr,
}

impl InhomRel {
    pub fn homogeneous(op: OreOp) -> Self {
        InhomRel { op, rhs: ConstExpr::zero() }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rhs.is_zero()
    }
}

impl fmt::Display for OreOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut c = c.clone();
            if first {
                first = false;
            } else {
                let s = c.to_string();
                if let Some(_stripped) = s.strip_prefix('-') {
                    f.write_str(" - ")?;
                    c = -&c;
                } else {
                    f.write_str(" + ")?;
                }
            }
            if c.is_one() {
                write!(f, "{}^{}", self.kind.symbol(), i)?;
            } else {
                write!(f, "{}*{}^{}", c, self.kind.symbol(), i)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for OreOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OreOp[{}; {}]({})", self.kind.symbol(), self.var, self)
    }
}

impl fmt::Display for InhomRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} == {}", self.op, self.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn rf_poly(p: MultiPoly) -> RatFun {
        RatFun::from_poly(p)
    }

    fn shift_op(coeffs: Vec<RatFun>) -> OreOp {
        OreOp::new(OpKind::Shift, Var::N, coeffs).unwrap()
    }

    fn deriv_op(coeffs: Vec<RatFun>) -> OreOp {
        OreOp::new(OpKind::Derivation, Var::Z, coeffs).unwrap()
    }

    fn n1() -> RatFun {
        &RatFun::var(Var::N) + &RatFun::one()
    }

    #[test]
    fn normalize_clears_denominators() {
        // c[n+1] + c[n]/(n+1) = 0 -> (n+1) c[n+1] + c[n] = 0
        let op = shift_op(vec![&RatFun::one() / &n1(), RatFun::one()]);
        let norm = op.normalize();
        assert_eq!(norm.to_string(), "S^0 + (n + 1)*S^1");
    }

    #[test]
    fn normalize_content_and_sign() {
        // (-2z) + (2z) D -> -z + z D under the fixed sign rule
        let z = RatFun::var(Var::Z);
        let op = deriv_op(vec![-&(&RatFun::from_int(2) * &z), &RatFun::from_int(2) * &z]);
        assert_eq!(op.normalize().to_string(), "-z*D^0 + z*D^1");
    }

    #[test]
    fn trailing_zero_and_content() {
        // 0*D^2 + 3D -> D
        let op = deriv_op(vec![RatFun::zero(), RatFun::from_int(3), RatFun::zero()]);
        assert_eq!(op.normalize().to_string(), "D^1");
        assert_eq!(op.order(), 1);
    }

    #[test]
    fn commutation_d_times_z() {
        // D * z = z D + 1
        let d = deriv_op(vec![RatFun::zero(), RatFun::one()]);
        let z = deriv_op(vec![RatFun::var(Var::Z)]);
        let prod = d.mul(&z).unwrap();
        assert_eq!(prod.to_string(), "D^0 + z*D^1");
    }

    #[test]
    fn commutation_s_times_n() {
        // S * n = (n+1) S
        let s = shift_op(vec![RatFun::zero(), RatFun::one()]);
        let n = shift_op(vec![RatFun::var(Var::N)]);
        let prod = s.mul(&n).unwrap();
        assert_eq!(prod.to_string(), "(n + 1)*S^1");
    }

    #[test]
    fn product_of_first_order_derivations() {
        // (D+1)(D-1) = D^2 - 1
        let a = deriv_op(vec![RatFun::one(), RatFun::one()]);
        let b = deriv_op(vec![-&RatFun::one(), RatFun::one()]);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.to_string(), "-1*D^0 + D^2");
    }

    #[test]
    fn mul_respects_apply_on_sequences() {
        // (S - 1)(S - 2) applied to a sequence equals applying in two steps.
        let s_minus = |c: i64| shift_op(vec![RatFun::from_int(-c), RatFun::one()]);
        let a = s_minus(1);
        let b = s_minus(2);
        let prod = a.mul(&b).unwrap();
        let seq: Vec<Rat> = (0..12).map(|i| rat(3 * i * i + 1, 2)).collect();
        let two_step = a.apply_to_rational_seq(&b.apply_to_rational_seq(&seq).unwrap()).unwrap();
        let one_step = prod.apply_to_rational_seq(&seq).unwrap();
        assert_eq!(two_step, one_step);
    }

    #[test]
    fn mul_is_associative_on_random_operators() {
        let mk = |a: i64, b: i64, c: i64| {
            shift_op(vec![
                rf_poly(&(&MultiPoly::var(Var::N) * &MultiPoly::int(a)) + &MultiPoly::int(b)),
                RatFun::from_int(c),
                RatFun::one(),
            ])
        };
        let ops = [mk(1, 2, 3), mk(-2, 1, 5), mk(0, 7, -1)];
        for x in &ops {
            for y in &ops {
                for w in &ops {
                    let l = x.mul(y).unwrap().mul(w).unwrap();
                    let r = x.mul(&y.mul(w).unwrap()).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn apply_shift_minus_one_to_constants() {
        let op = shift_op(vec![-&RatFun::one(), RatFun::one()]);
        let fives = vec![ConstExpr::from_int(5); 8];
        let out = op.apply_to_seq(&fives).unwrap();
        assert!(out.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn lclm_annihilates_one_and_powers_of_two() {
        // lclm(S - 1, S - 2) = S^2 - 3S + 2
        let a = shift_op(vec![RatFun::from_int(-1), RatFun::one()]);
        let b = shift_op(vec![RatFun::from_int(-2), RatFun::one()]);
        let l = lclm(&a, &b).unwrap();
        assert_eq!(l.to_string(), "2*S^0 - 3*S^1 + S^2");
        // Oracle: unroll a_n = alpha + beta 2^n for random alpha, beta and
        // check 40 terms are annihilated.
        for (alpha, beta) in [(rat(3, 2), rat(-1, 5)), (rat(0, 1), rat(7, 3)), (rat(2, 7), rat(2, 7))] {
            let mut pow2 = rat(1, 1);
            let mut seq = Vec::new();
            for _ in 0..40 {
                seq.push(alpha.clone() + beta.clone() * pow2.clone());
                pow2 = pow2 * rat(2, 1);
            }
            let out = l.apply_to_rational_seq(&seq).unwrap();
            assert!(out.iter().all(|v| v == &rat(0, 1)));
        }
    }

    #[test]
    fn lclm_idempotent() {
        let a = shift_op(vec![rf_poly(MultiPoly::var(Var::N)), RatFun::from_int(-1), n1()]);
        let l = lclm(&a, &a).unwrap();
        assert_eq!(l, a.normalize());
    }

    #[test]
    fn normalize_preserves_solutions() {
        let a = shift_op(vec![&RatFun::one() / &n1(), RatFun::from_int(2), n1()]);
        let norm = a.normalize();
        let initials = [rat(1, 1), rat(-2, 3)];
        let sol = a.unroll_rational(&initials, 20).unwrap();
        let sol2 = norm.unroll_rational(&initials, 20).unwrap();
        assert_eq!(sol, sol2);
        assert!(norm.apply_to_rational_seq(&sol).unwrap().iter().all(|v| v == &rat(0, 1)));
    }
}
