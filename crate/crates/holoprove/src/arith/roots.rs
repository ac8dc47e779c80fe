//! Exhaustive integer and rational root finding for the univariate
//! polynomials that appear as operator leading coefficients and indicial
//! polynomials. Exhaustiveness comes from explicit root bounds, never from
//! sampling.

use super::poly::{MultiPoly, Var};
use super::{ArithError, Int, Rat};
use num::integer::Integer;
use num::traits::{One, Signed, ToPrimitive, Zero};

/// Integer coefficient vector (ascending powers) of a polynomial that must be
/// univariate in `v`.
fn int_coeffs(p: &MultiPoly, v: Var) -> Result<Vec<Int>, ArithError> {
    for w in p.vars_used() {
        if w != v {
            return Err(ArithError::NotUnivariate);
        }
    }
    let uni = p.to_univar(v);
    let mut den_lcm = Int::one();
    for c in &uni {
        if let Some(r) = c.as_constant() {
            den_lcm = den_lcm.lcm(r.denom());
        }
    }
    Ok(uni
        .iter()
        .map(|c| {
            let r = c.as_constant().unwrap_or_else(Rat::zero);
            (r * Rat::from(den_lcm.clone())).to_integer()
        })
        .collect())
}

fn horner(coeffs: &[Int], x: &Int) -> Int {
    let mut acc = Int::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

const SCAN_CAP: i64 = 20_000_000;
const SIEVE_PRIMES: [i64; 2] = [1_000_003, 1_000_033];

/// All nonnegative integer roots of `p` (distinct, ascending). Exhaustive via
/// a Cauchy root bound plus residue sieving for large bounds.
pub fn integer_roots_nonneg(p: &MultiPoly, v: Var) -> Result<Vec<Int>, ArithError> {
    if p.is_zero() {
        return Err(ArithError::IdenticallyZero);
    }
    let mut coeffs = int_coeffs(p, v)?;
    let mut roots: Vec<Int> = Vec::new();
    // Strip the power of x: zero is a root iff the valuation is positive.
    let val = coeffs.iter().take_while(|c| c.is_zero()).count();
    if val > 0 {
        roots.push(Int::zero());
        coeffs.drain(..val);
    }
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(roots);
    }
    if deg == 1 {
        // a0 + a1 x = 0
        let r = Rat::new(-coeffs[0].clone(), coeffs[1].clone());
        if r.denom().is_one() && !r.numer().is_negative() && !r.numer().is_zero() {
            roots.push(r.to_integer());
        }
        roots.sort();
        return Ok(roots);
    }
    // Cauchy bound: every root has |x| <= 1 + max |a_i| / |a_d|.
    let lead = coeffs[deg].abs();
    let max_abs = coeffs[..deg].iter().map(|c| c.abs()).max().unwrap();
    let bound = Int::one() + max_abs.div_ceil(&lead);
    let bound = match bound.to_i64() {
        Some(b) if b <= SCAN_CAP => b,
        _ => return divisor_roots(&coeffs, &mut roots),
    };
    if bound <= 65_536 {
        for m in 1..=bound {
            let x = Int::from(m);
            if horner(&coeffs, &x).is_zero() {
                roots.push(x);
            }
        }
    } else {
        // Residue sieve: a root must be a root of p mod q for each prime q.
        let mut residue_sets: Vec<Vec<bool>> = Vec::new();
        for q in SIEVE_PRIMES {
            let qc: Vec<i64> = coeffs
                .iter()
                .map(|c| {
                    let r = c.mod_floor(&Int::from(q));
                    r.to_i64().unwrap()
                })
                .collect();
            if qc.iter().all(|&c| c == 0) {
                continue;
            }
            let mut set = vec![false; q as usize];
            for x in 0..q {
                let mut acc: i64 = 0;
                for &c in qc.iter().rev() {
                    acc = ((acc as i128 * x as i128 + c as i128) % q as i128) as i64;
                }
                if acc == 0 {
                    set[x as usize] = true;
                }
            }
            residue_sets.push(set);
        }
        for m in 1..=bound {
            let pass = residue_sets
                .iter()
                .zip(SIEVE_PRIMES)
                .all(|(set, q)| set[(m % q) as usize]);
            if pass && horner(&coeffs, &Int::from(m)).is_zero() {
                roots.push(Int::from(m));
            }
        }
    }
    roots.sort();
    Ok(roots)
}

/// Fallback for huge root bounds: nonzero integer roots divide the constant
/// term. Errors out if the constant term resists trial-division
/// factorization.
fn divisor_roots(coeffs: &[Int], roots: &mut Vec<Int>) -> Result<Vec<Int>, ArithError> {
    let mut divisors = vec![Int::one()];
    let mut rest = coeffs[0].abs();
    let mut p = Int::from(2);
    let limit = Int::from(1_000_000);
    while &p * &p <= rest && p <= limit {
        if rest.is_multiple_of(&p) {
            let mut power = Int::one();
            let base: Vec<Int> = divisors.clone();
            while rest.is_multiple_of(&p) {
                rest /= &p;
                power *= &p;
                for d in &base {
                    divisors.push(d * &power);
                }
            }
        }
        p += 1;
    }
    if rest > limit {
        // Remaining cofactor is prime or hard; it is itself a candidate
        // divisor class but we cannot enumerate all divisors.
        return Err(ArithError::RootBoundOverflow);
    }
    if rest > Int::one() {
        let base: Vec<Int> = divisors.clone();
        for d in &base {
            divisors.push(d * &rest);
        }
    }
    divisors.sort();
    divisors.dedup();
    for d in divisors {
        if horner(coeffs, &d).is_zero() {
            roots.push(d);
        }
    }
    roots.sort();
    roots.dedup();
    Ok(roots.clone())
}

/// Nonnegative integer roots of a polynomial in `v` whose coefficients may
/// involve other variables: j is a root iff substituting v = j yields the
/// zero polynomial. Candidates come from specializing the remaining
/// variables; each candidate is verified symbolically.
pub fn integer_roots_nonneg_param(p: &MultiPoly, v: Var) -> Result<Vec<Int>, ArithError> {
    if p.is_zero() {
        return Err(ArithError::IdenticallyZero);
    }
    let others: Vec<Var> = p.vars_used().into_iter().filter(|&w| w != v).collect();
    if others.is_empty() {
        return integer_roots_nonneg(p, v);
    }
    // Specialize at two points; the true roots survive every specialization.
    let mut candidates: Option<Vec<Int>> = None;
    let mut seed: i64 = 17;
    let mut tries = 0;
    while tries < 8 {
        let mut q = p.clone();
        for (i, &w) in others.iter().enumerate() {
            q = q.subst(w, &MultiPoly::int(seed + 11 * i as i64));
        }
        seed += 37;
        tries += 1;
        if q.is_zero() {
            continue;
        }
        let rs = integer_roots_nonneg(&q, v)?;
        candidates = Some(match candidates {
            None => rs,
            Some(prev) => prev.into_iter().filter(|r| rs.contains(r)).collect(),
        });
        if tries >= 2 {
            break;
        }
    }
    let candidates = candidates.ok_or(ArithError::IdenticallyZero)?;
    let mut roots = Vec::new();
    for r in candidates {
        let at = p.subst(v, &MultiPoly::constant(Rat::from(r.clone())));
        if at.is_zero() {
            roots.push(r);
        }
    }
    Ok(roots)
}

/// Rational roots with multiplicities of a univariate polynomial, plus the
/// degree of the root-free remaining factor (nonzero when irrational or
/// complex roots are present).
pub fn rational_roots(p: &MultiPoly, v: Var) -> Result<(Vec<(Rat, usize)>, usize), ArithError> {
    if p.is_zero() {
        return Err(ArithError::IdenticallyZero);
    }
    let coeffs = int_coeffs(p, v)?;
    let mut roots: Vec<(Rat, usize)> = Vec::new();
    let val = coeffs.iter().take_while(|c| c.is_zero()).count();
    let mut work: Vec<Rat> = coeffs[val..].iter().map(|c| Rat::from(c.clone())).collect();
    if val > 0 {
        roots.push((Rat::zero(), val));
    }
    if work.len() > 1 {
        let mut d0 = small_divisors(&work[0].numer().abs())?;
        let dl = small_divisors(&work[work.len() - 1].numer().abs())?;
        d0.insert(0, Int::zero());
        for pnum in &d0 {
            if pnum.is_zero() {
                continue;
            }
            for q in &dl {
                for sign in [1i64, -1] {
                    let cand = Rat::new(pnum * Int::from(sign), q.clone());
                    let mut mult = 0;
                    loop {
                        if eval_rat_poly(&work, &cand).is_zero() && work.len() > 1 {
                            work = deflate(&work, &cand);
                            mult += 1;
                        } else {
                            break;
                        }
                    }
                    if mult > 0 {
                        roots.push((cand, mult));
                    }
                }
            }
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    Ok((roots, work.len() - 1))
}

fn eval_rat_poly(coeffs: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Synthetic division by (x - r); the division must be exact.
fn deflate(coeffs: &[Rat], r: &Rat) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); coeffs.len() - 1];
    let mut carry = Rat::zero();
    for i in (0..coeffs.len() - 1).rev() {
        carry = &coeffs[i + 1] + &(carry * r);
        out[i] = carry.clone();
    }
    out
}

fn small_divisors(n: &Int) -> Result<Vec<Int>, ArithError> {
    if n.is_zero() {
        return Ok(vec![Int::one()]);
    }
    let mut divisors = vec![Int::one()];
    let mut rest = n.clone();
    let mut p = Int::from(2);
    let limit = Int::from(1_000_000);
    while &p * &p <= rest {
        if p > limit {
            return Err(ArithError::RootBoundOverflow);
        }
        if rest.is_multiple_of(&p) {
            let base = divisors.clone();
            let mut power = Int::one();
            while rest.is_multiple_of(&p) {
                rest /= &p;
                power *= &p;
                for d in &base {
                    divisors.push(d * &power);
                }
            }
        }
        p += 1;
    }
    if rest > Int::one() {
        let base = divisors.clone();
        for d in &base {
            divisors.push(d * &rest);
        }
    }
    divisors.sort();
    divisors.dedup();
    Ok(divisors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn n() -> MultiPoly {
        MultiPoly::var(Var::N)
    }
    fn ip(c: i64) -> MultiPoly {
        MultiPoly::int(c)
    }

    #[test]
    fn constructed_factorization() {
        // (n-3)(2n+5) -> [3]
        let p = &(&n() - &ip(3)) * &(&(&ip(2) * &n()) + &ip(5));
        assert_eq!(integer_roots_nonneg(&p, Var::N).unwrap(), vec![Int::from(3)]);
    }

    #[test]
    fn quadratic_two_roots() {
        // n^2 - 5n + 6 -> [2, 3]; expected values fixed by enumerating all
        // candidates up to the Cauchy bound (7) and substituting.
        let p = &(&(&n() * &n()) - &(&ip(5) * &n())) + &ip(6);
        let brute: Vec<Int> = (0..=7i64)
            .filter(|&m| {
                let x = rat(m, 1);
                (x.clone() * x.clone() - rat(5, 1) * x + rat(6, 1)).is_zero()
            })
            .map(Int::from)
            .collect();
        assert_eq!(brute, vec![Int::from(2), Int::from(3)]);
        assert_eq!(integer_roots_nonneg(&p, Var::N).unwrap(), brute);
    }

    #[test]
    fn order_six_leading_coefficient_is_root_free() {
        // 7600 (4+n)(5+n)(6+n)^2 (9+2n)(11+2n)(13+2n)^2 (167+60n)
        let f = |a: i64, b: i64| &(&ip(a) * &n()) + &ip(b);
        let factors = [f(1, 4), f(1, 5), f(1, 6), f(1, 6), f(2, 9), f(2, 11), f(2, 13), f(2, 13), f(60, 167)];
        let p = factors.iter().fold(ip(7600), |acc, q| &acc * q);
        assert_eq!(integer_roots_nonneg(&p, Var::N).unwrap(), Vec::<Int>::new());
    }

    #[test]
    fn zero_polynomial_is_an_error() {
        assert_eq!(
            integer_roots_nonneg(&MultiPoly::zero(), Var::N),
            Err(ArithError::IdenticallyZero)
        );
    }

    #[test]
    fn matches_exhaustive_scan_on_random_polynomials() {
        // deg <= 6, coefficients in [-10^4, 10^4]; exhaustive scan over
        // [0, bound] is the oracle.
        let mut state: u64 = 0x9e3779b97f4a7c15;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..60 {
            let deg = (next() % 6 + 1) as usize;
            let mut coeffs: Vec<i64> = (0..=deg).map(|_| (next() % 20001) as i64 - 10000).collect();
            if coeffs[deg] == 0 {
                coeffs[deg] = 1;
            }
            // Plant a root sometimes.
            let planted = (next() % 50) as i64;
            let plant = next() % 2 == 0;
            let mut p = MultiPoly::zero();
            for (i, c) in coeffs.iter().enumerate() {
                p = &p + &(&MultiPoly::var_pow(Var::N, i as u16) * &ip(*c));
            }
            if plant {
                p = &p * &(&n() - &ip(planted));
            }
            if p.is_zero() {
                continue;
            }
            let got = integer_roots_nonneg(&p, Var::N).unwrap();
            let coeffs_int = int_coeffs(&p, Var::N).unwrap();
            let deg_p = coeffs_int.len() - 1;
            let lead = coeffs_int[deg_p].abs();
            let maxabs = coeffs_int[..deg_p].iter().map(|c| c.abs()).max().unwrap_or_else(Int::zero);
            let bound = (Int::one() + maxabs.div_ceil(&lead)).to_i64().unwrap();
            let brute: Vec<Int> = (0..=bound)
                .map(Int::from)
                .filter(|x| horner(&coeffs_int, x).is_zero())
                .collect();
            assert_eq!(got, brute);
            if plant {
                assert!(got.contains(&Int::from(planted)));
            }
        }
    }

    #[test]
    fn parametrized_roots() {
        // (n - 2)(n + z) has the single integer root 2 (z symbolic).
        let p = &(&n() - &ip(2)) * &(&n() + &MultiPoly::var(Var::Z));
        assert_eq!(integer_roots_nonneg_param(&p, Var::N).unwrap(), vec![Int::from(2)]);
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // (2n - 1)^2 (n + 3) n
        let p = {
            let a = &(&ip(2) * &n()) - &ip(1);
            let sq = &a * &a;
            &(&sq * &(&n() + &ip(3))) * &n()
        };
        let (roots, leftover) = rational_roots(&p, Var::N).unwrap();
        assert_eq!(leftover, 0);
        assert_eq!(
            roots,
            vec![(rat(-3, 1), 1), (rat(0, 1), 1), (rat(1, 2), 2)]
        );
    }

    #[test]
    fn rational_roots_flags_irrational_remainder() {
        // n^2 - 2 has no rational roots
        let p = &(&n() * &n()) - &ip(2);
        let (roots, leftover) = rational_roots(&p, Var::N).unwrap();
        assert!(roots.is_empty());
        assert_eq!(leftover, 2);
    }
}
